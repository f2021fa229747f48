#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "promptloop/core/events.hpp"
#include "promptloop/gateway/gateway.hpp"

namespace promptloop::harness {

/// A model call as attached to the event that followed it.
struct CallRecord {
    std::size_t index = 0;
    std::string role;
    double temperature = 0.0;
    std::string request_digest;
    std::string response_digest;
    std::string backend;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    double latency_ms = 0.0;
};

struct LogEvent {
    std::uint64_t seq = 0;
    std::string ts;
    core::EventKind kind = core::EventKind::generated;
    std::string payload_digest;
    nlohmann::json payload;
    std::vector<CallRecord> calls;
};

std::string payload_digest(const nlohmann::json& payload);

nlohmann::json to_json(const LogEvent& e);
/// Throws ReplayError on a structurally invalid line.
LogEvent event_from_json(const nlohmann::json& j);

/// Append-only JSONL event log. Each event carries the gateway calls made
/// since the previous event, so the log alone holds the full transcript.
class RunLog final : public core::EventSink {
public:
    /// `path` may be empty for an in-memory log. `gateway` may be null.
    RunLog(std::filesystem::path path, const gateway::Gateway* gateway, std::string run_id);

    void emit(core::EventKind kind, nlohmann::json payload) override;

    const std::vector<LogEvent>& events() const noexcept { return events_; }
    const std::string& run_id() const noexcept { return run_id_; }

    /// Reads a log file. Throws ReplayError on unreadable or malformed lines.
    static std::vector<LogEvent> read(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    std::ofstream out_;
    const gateway::Gateway* gateway_;
    std::string run_id_;
    std::size_t calls_seen_ = 0;
    std::vector<LogEvent> events_;
};

}  // namespace promptloop::harness
