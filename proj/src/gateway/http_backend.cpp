#include "promptloop/gateway/http_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "promptloop/errors.hpp"

namespace promptloop::gateway {

using nlohmann::json;

std::chrono::milliseconds RetryPolicy::delay(int attempt) const {
    double ms = static_cast<double>(initial_backoff.count());
    for (int i = 1; i < attempt; ++i) ms *= multiplier;
    ms = std::min(ms, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<long long>(ms));
}

HttpConfig HttpConfig::from_env() {
    HttpConfig c;
    auto env = [](const char* name) {
        const char* v = std::getenv(name);
        return v ? std::string(v) : std::string();
    };
    c.url = env("PROMPTLOOP_API_URL");
    c.api_key = env("PROMPTLOOP_API_KEY");
    c.model = env("PROMPTLOOP_MODEL");
    if (c.url.empty()) throw ConfigError("PROMPTLOOP_API_URL is not set");
    if (c.model.empty()) throw ConfigError("PROMPTLOOP_MODEL is not set");
    return c;
}

HttpBackend::HttpBackend(HttpConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleep_(std::move(sleeper)) {
    if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    auto scheme = config_.url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + config_.url);
    auto slash = config_.url.find('/', scheme + 3);
    scheme_host_port_ = config_.url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : config_.url.substr(slash);
    if (config_.retry.max_retries < 0) throw ConfigError("max_retries must be non-negative");
}

ModelResponse HttpBackend::complete(const ModelRequest& request) {
    json body = {{"model", config_.model},
                 {"messages", json::array()},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_output}};
    if (!request.system.empty()) body["messages"].push_back({{"role", "system"}, {"content", request.system}});
    body["messages"].push_back({{"role", "user"}, {"content", request.user}});
    if (request.seed) body["seed"] = *request.seed;
    const auto payload = body.dump();

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    int last_status = 0;
    bool rate_limited = false;
    for (int attempt = 0;; ++attempt) {
        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);

        std::chrono::milliseconds wait = config_.retry.delay(attempt + 1);
        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            last_status = 0;
            rate_limited = false;
        } else if (res->status == 200) {
            json j;
            try {
                j = json::parse(res->body);
            } catch (const json::exception& e) {
                throw MalformedResponseError(std::string("response is not JSON: ") + e.what());
            }
            ModelResponse out;
            try {
                out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
                if (j.contains("usage")) {
                    out.usage.input = j["usage"].value("prompt_tokens", std::int64_t{0});
                    out.usage.output = j["usage"].value("completion_tokens", std::int64_t{0});
                }
            } catch (const json::exception& e) {
                throw MalformedResponseError(std::string("unexpected response shape: ") + e.what());
            }
            if (out.text.empty()) throw EmptyCompletionError("endpoint returned an empty completion");
            out.backend = BackendKind::http;
            return out;
        } else if (res->status == 429 || res->status >= 500) {
            last_status = res->status;
            rate_limited = res->status == 429;
            last_error = "HTTP " + std::to_string(res->status);
            if (rate_limited && res->has_header("Retry-After")) {
                try {
                    wait = std::chrono::seconds(std::stoll(res->get_header_value("Retry-After")));
                } catch (const std::exception&) {
                }
            }
        } else {
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body, res->status);
        }

        if (attempt >= config_.retry.max_retries) break;
        sleep_(wait);
    }
    auto what = last_error + " after " + std::to_string(config_.retry.max_retries) + " retries";
    if (rate_limited) throw RateLimitError(what, last_status);
    throw TransportError(what, last_status);
}

}  // namespace promptloop::gateway
