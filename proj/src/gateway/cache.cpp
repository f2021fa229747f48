#include "promptloop/gateway/cache.hpp"

#include <fstream>

#include <json.hpp>

#include "promptloop/errors.hpp"

namespace promptloop::gateway {

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
    if (dir_) {
        std::error_code ec;
        std::filesystem::create_directories(*dir_, ec);
        if (ec) throw ConfigError("cannot create cache directory " + dir_->string());
    }
}

std::pair<ModelResponse, bool> ResponseCache::get_or_fetch(const std::string& key,
                                                           const std::function<ModelResponse()>& fetch) {
    std::promise<ModelResponse> promise;
    std::shared_future<ModelResponse> future;
    bool owner = false;
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            future = it->second;
        } else if (auto disk = load_file(key)) {
            std::promise<ModelResponse> ready;
            ready.set_value(*disk);
            entries_.emplace(key, ready.get_future().share());
            return {*disk, true};
        } else {
            future = promise.get_future().share();
            entries_.emplace(key, future);
            owner = true;
        }
    }
    if (!owner) return {future.get(), true};

    try {
        auto response = fetch();
        promise.set_value(response);
        store_file(key, response);
        return {response, false};
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mutex_);
        entries_.erase(key);
        throw;
    }
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::optional<ModelResponse> ResponseCache::load_file(const std::string& key) const {
    if (!dir_) return std::nullopt;
    std::ifstream in(*dir_ / (key + ".json"));
    if (!in) return std::nullopt;
    try {
        nlohmann::json j;
        in >> j;
        ModelResponse r;
        r.text = j.at("text").get<std::string>();
        r.usage.input = j.at("input_tokens").get<std::int64_t>();
        r.usage.output = j.at("output_tokens").get<std::int64_t>();
        r.backend = parse_backend_kind(j.at("backend").get<std::string>());
        if (r.text.empty()) return std::nullopt;
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void ResponseCache::store_file(const std::string& key, const ModelResponse& response) const {
    if (!dir_) return;
    nlohmann::json j = {{"text", response.text},
                        {"input_tokens", response.usage.input},
                        {"output_tokens", response.usage.output},
                        {"backend", to_string(response.backend)}};
    auto tmp = *dir_ / (key + ".json.tmp");
    {
        std::ofstream out(tmp);
        out << j.dump() << '\n';
    }
    std::error_code ec;
    std::filesystem::rename(tmp, *dir_ / (key + ".json"), ec);
}

}  // namespace promptloop::gateway
