#pragma once

#include <string_view>

#include <json.hpp>

namespace promptloop::core {

enum class EventKind {
    generated,
    voted,
    evaluated,
    analyzed,
    recommended,
    refined,
    local_confirmed,
    global_confirmed,
    accepted,
    abandoned,
    terminated,
};

std::string_view to_string(EventKind kind);
/// Throws ConfigError on unknown names.
EventKind parse_event_kind(std::string_view name);

/// Receiver of run events. Payloads must be deterministic functions of the run
/// (no wall-clock values), since their digests are compared across runs.
class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void emit(EventKind kind, nlohmann::json payload) = 0;
};

class NullSink final : public EventSink {
public:
    void emit(EventKind, nlohmann::json) override {}
};

}  // namespace promptloop::core
