#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "promptloop/gateway/backend.hpp"
#include "promptloop/gateway/cache.hpp"

namespace promptloop::gateway {

struct TranscriptEntry {
    std::size_t index = 0;
    Role role = Role::evaluate;
    double temperature = 0.0;
    std::string request_digest;
    std::string response_digest;
    BackendKind backend = BackendKind::mock;
    TokenUsage usage;
    double latency_ms = 0.0;
};

struct GatewayOptions {
    bool cache = false;
    std::optional<std::filesystem::path> cache_dir;
};

/// Routes requests to one backend, optionally through a response cache, and
/// keeps an append-only transcript per run.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

    /// Validates, dispatches and appends the call to `run_id`'s transcript
    /// (opening the run if needed). Errors propagate and are not recorded.
    ModelResponse invoke(const ModelRequest& request, const std::string& run_id);

    void open_run(const std::string& run_id);
    bool has_run(const std::string& run_id) const;

    /// Throws ConfigError for an unknown run id.
    std::vector<TranscriptEntry> transcript(const std::string& run_id) const;
    std::size_t transcript_size(const std::string& run_id) const;

    /// Calls that reached the backend (cache misses).
    std::size_t upstream_calls() const noexcept { return upstream_.load(); }

    const Backend& backend() const noexcept { return *backend_; }

private:
    std::shared_ptr<Backend> backend_;
    std::unique_ptr<ResponseCache> cache_;
    std::atomic<std::size_t> upstream_{0};
    mutable std::mutex runs_mutex_;
    std::map<std::string, std::vector<TranscriptEntry>, std::less<>> runs_;
};

/// A gateway bound to one run and one temperature table.
class ModelSession {
public:
    ModelSession(Gateway& gateway, std::string run_id, RoleTemperatures temps = {})
        : gateway_(&gateway), run_id_(std::move(run_id)), temps_(temps) {}

    ModelResponse call(Role role, std::string system, std::string user,
                       std::optional<std::int64_t> seed = std::nullopt);

    /// Digest the next `call` with these arguments will carry.
    std::string digest_of(Role role, const std::string& system, const std::string& user,
                          std::optional<std::int64_t> seed = std::nullopt) const;

    std::size_t transcript_size() const { return gateway_->transcript_size(run_id_); }
    Gateway& gateway() const noexcept { return *gateway_; }
    const std::string& run_id() const noexcept { return run_id_; }
    const RoleTemperatures& temperatures() const noexcept { return temps_; }

private:
    Gateway* gateway_;
    std::string run_id_;
    RoleTemperatures temps_;
};

}  // namespace promptloop::gateway
