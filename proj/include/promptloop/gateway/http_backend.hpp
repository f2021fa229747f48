#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "promptloop/gateway/backend.hpp"

namespace promptloop::gateway {

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{30000};

    /// Delay before retry number `attempt` (1-based).
    std::chrono::milliseconds delay(int attempt) const;
};

struct HttpConfig {
    /// Full endpoint URL, e.g. https://api.example.com/v1/chat/completions
    std::string url;
    std::string api_key;
    std::string model;
    std::chrono::seconds timeout{120};
    RetryPolicy retry;

    /// Reads PROMPTLOOP_API_URL, PROMPTLOOP_API_KEY and PROMPTLOOP_MODEL.
    /// Throws ConfigError when the URL or model is missing.
    static HttpConfig from_env();
};

/// Chat-completion client with bounded retries and exponential backoff.
/// Retries on connection failures, 5xx and 429 (honouring Retry-After).
class HttpBackend final : public Backend {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit HttpBackend(HttpConfig config, Sleeper sleeper = {});

    std::string id() const override { return "http:" + config_.model; }
    ModelResponse complete(const ModelRequest& request) override;

private:
    HttpConfig config_;
    Sleeper sleep_;
    std::string scheme_host_port_;
    std::string path_;
};

}  // namespace promptloop::gateway
