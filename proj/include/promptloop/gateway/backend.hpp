#pragma once

#include <string>

#include "promptloop/gateway/request.hpp"

namespace promptloop::gateway {

/// One model endpoint. Implementations must be safe to call concurrently.
class Backend {
public:
    virtual ~Backend() = default;

    /// Stable identity that participates in request digests.
    virtual std::string id() const = 0;

    /// Throws TransportError, RateLimitError, MalformedResponseError or
    /// EmptyCompletionError; on success the text is non-empty.
    virtual ModelResponse complete(const ModelRequest& request) = 0;
};

}  // namespace promptloop::gateway
