#include "promptloop/core/events.hpp"

#include <array>
#include <string>

#include "promptloop/errors.hpp"

namespace promptloop::core {

namespace {
constexpr std::array<std::string_view, 11> kNames = {
    "generated", "voted",           "evaluated",        "analyzed", "recommended", "refined",
    "local_confirmed", "global_confirmed", "accepted", "abandoned",   "terminated"};
}

std::string_view to_string(EventKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

EventKind parse_event_kind(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name) return static_cast<EventKind>(i);
    throw ConfigError("unknown event kind '" + std::string(name) + "'");
}

}  // namespace promptloop::core
