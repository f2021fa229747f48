#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "promptloop/gateway/request.hpp"

namespace promptloop::gateway {

/// Content-addressed response cache keyed by request digest.
///
/// Concurrent callers with the same key share one upstream call. Failed calls
/// are not cached. With a directory, entries persist as `<digest>.json`.
class ResponseCache {
public:
    explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

    /// Returns the cached response and `true`, or runs `fetch` and returns `false`.
    std::pair<ModelResponse, bool> get_or_fetch(const std::string& key,
                                                const std::function<ModelResponse()>& fetch);

    std::size_t size() const;

private:
    std::optional<ModelResponse> load_file(const std::string& key) const;
    void store_file(const std::string& key, const ModelResponse& response) const;

    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::shared_future<ModelResponse>> entries_;
};

}  // namespace promptloop::gateway
