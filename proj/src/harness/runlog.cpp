#include "promptloop/harness/runlog.hpp"

#include <chrono>
#include <ctime>

#include "promptloop/core/digest.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::harness {

using nlohmann::json;

namespace {

std::string utc_now() {
    auto now = std::chrono::system_clock::now();
    auto secs = std::chrono::system_clock::to_time_t(now);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms));
    return out;
}

json call_json(const CallRecord& c) {
    return {{"index", c.index},
            {"role", c.role},
            {"temperature", c.temperature},
            {"request_digest", c.request_digest},
            {"response_digest", c.response_digest},
            {"backend", c.backend},
            {"input_tokens", c.input_tokens},
            {"output_tokens", c.output_tokens},
            {"latency_ms", c.latency_ms}};
}

}  // namespace

std::string payload_digest(const json& payload) { return core::sha256_hex(payload.dump()); }

json to_json(const LogEvent& e) {
    json calls = json::array();
    for (const auto& c : e.calls) calls.push_back(call_json(c));
    return {{"seq", e.seq},
            {"ts", e.ts},
            {"kind", core::to_string(e.kind)},
            {"payload_digest", e.payload_digest},
            {"payload", e.payload},
            {"calls", calls}};
}

LogEvent event_from_json(const json& j) {
    LogEvent e;
    try {
        e.seq = j.at("seq").get<std::uint64_t>();
        e.ts = j.value("ts", "");
        e.kind = core::parse_event_kind(j.at("kind").get<std::string>());
        e.payload_digest = j.at("payload_digest").get<std::string>();
        e.payload = j.at("payload");
        if (j.contains("calls"))
            for (const auto& c : j.at("calls")) {
                CallRecord r;
                r.index = c.at("index").get<std::size_t>();
                r.role = c.at("role").get<std::string>();
                r.temperature = c.value("temperature", 0.0);
                r.request_digest = c.at("request_digest").get<std::string>();
                r.response_digest = c.at("response_digest").get<std::string>();
                r.backend = c.value("backend", "");
                r.input_tokens = c.value("input_tokens", std::int64_t{0});
                r.output_tokens = c.value("output_tokens", std::int64_t{0});
                r.latency_ms = c.value("latency_ms", 0.0);
                e.calls.push_back(std::move(r));
            }
    } catch (const json::exception& ex) {
        throw ReplayError(std::string("malformed event: ") + ex.what());
    } catch (const ConfigError& ex) {
        throw ReplayError(std::string("malformed event: ") + ex.what());
    }
    return e;
}

RunLog::RunLog(std::filesystem::path path, const gateway::Gateway* gateway, std::string run_id)
    : path_(std::move(path)), gateway_(gateway), run_id_(std::move(run_id)) {
    if (!path_.empty()) {
        out_.open(path_, std::ios::out | std::ios::trunc);
        if (!out_) throw ConfigError("cannot open run log " + path_.string());
    }
    if (gateway_ && gateway_->has_run(run_id_)) calls_seen_ = gateway_->transcript_size(run_id_);
}

void RunLog::emit(core::EventKind kind, json payload) {
    LogEvent e;
    e.seq = events_.size() + 1;
    e.ts = utc_now();
    e.kind = kind;
    e.payload_digest = payload_digest(payload);
    e.payload = std::move(payload);
    if (gateway_ && gateway_->has_run(run_id_)) {
        auto transcript = gateway_->transcript(run_id_);
        for (std::size_t i = calls_seen_; i < transcript.size(); ++i) {
            const auto& t = transcript[i];
            e.calls.push_back({t.index, std::string(gateway::to_string(t.role)), t.temperature, t.request_digest,
                               t.response_digest, std::string(gateway::to_string(t.backend)), t.usage.input,
                               t.usage.output, t.latency_ms});
        }
        calls_seen_ = transcript.size();
    }
    if (out_.is_open()) {
        out_ << to_json(e).dump() << '\n';
        out_.flush();
    }
    events_.push_back(std::move(e));
}

std::vector<LogEvent> RunLog::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ReplayError("cannot open run log " + path.string());
    std::vector<LogEvent> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ReplayError("line " + std::to_string(n) + ": " + e.what());
        }
        out.push_back(event_from_json(j));
    }
    return out;
}

}  // namespace promptloop::harness
