#include "promptloop/gateway/gateway.hpp"

#include <chrono>

#include "promptloop/errors.hpp"

namespace promptloop::gateway {

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)) {
    if (!backend_) throw ConfigError("gateway needs a backend");
    if (options.cache || options.cache_dir) cache_ = std::make_unique<ResponseCache>(options.cache_dir);
}

ModelResponse Gateway::invoke(const ModelRequest& request, const std::string& run_id) {
    request.validate();
    const auto digest = request_digest(backend_->id(), request);
    auto fetch = [&] {
        ++upstream_;
        auto start = std::chrono::steady_clock::now();
        auto r = backend_->complete(request);
        if (r.text.empty()) throw EmptyCompletionError("backend returned an empty completion");
        r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return r;
    };

    ModelResponse response;
    if (cache_) {
        auto [r, hit] = cache_->get_or_fetch(digest, fetch);
        response = std::move(r);
        if (hit) {
            response.backend = BackendKind::cache;
            response.latency_ms = 0.0;
        }
    } else {
        response = fetch();
    }

    std::lock_guard lock(runs_mutex_);
    auto& log = runs_[run_id];
    response.transcript_index = log.size();
    log.push_back({log.size(), request.role, request.temperature, digest, response_digest(response.text), response.backend,
                   response.usage, response.latency_ms});
    return response;
}

void Gateway::open_run(const std::string& run_id) {
    std::lock_guard lock(runs_mutex_);
    runs_.try_emplace(run_id);
}

bool Gateway::has_run(const std::string& run_id) const {
    std::lock_guard lock(runs_mutex_);
    return runs_.count(run_id) > 0;
}

std::vector<TranscriptEntry> Gateway::transcript(const std::string& run_id) const {
    std::lock_guard lock(runs_mutex_);
    auto it = runs_.find(run_id);
    if (it == runs_.end()) throw ConfigError("unknown run id '" + run_id + "'");
    return it->second;
}

std::size_t Gateway::transcript_size(const std::string& run_id) const {
    std::lock_guard lock(runs_mutex_);
    auto it = runs_.find(run_id);
    return it == runs_.end() ? 0 : it->second.size();
}

ModelResponse ModelSession::call(Role role, std::string system, std::string user,
                                 std::optional<std::int64_t> seed) {
    auto req = ModelRequest::make(role, std::move(system), std::move(user), temps_);
    req.seed = seed;
    return gateway_->invoke(req, run_id_);
}

std::string ModelSession::digest_of(Role role, const std::string& system, const std::string& user,
                                    std::optional<std::int64_t> seed) const {
    auto req = ModelRequest::make(role, system, user, temps_);
    req.seed = seed;
    return request_digest(gateway_->backend().id(), req);
}

}  // namespace promptloop::gateway
