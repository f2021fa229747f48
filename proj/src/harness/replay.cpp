#include "promptloop/harness/replay.hpp"

#include <algorithm>
#include <map>

#include "promptloop/errors.hpp"

namespace promptloop::harness {

using core::EventKind;
using nlohmann::json;

namespace {

core::Score score_of(const json& j) { return {j.at("correct").get<std::size_t>(), j.at("total").get<std::size_t>()}; }

class Checker {
public:
    void fail(const std::string& detail) {
        if (result_.passed) result_.detail = detail;
        result_.passed = false;
    }
    InvariantResult done(std::string name) {
        result_.name = std::move(name);
        return result_;
    }

private:
    InvariantResult result_;
};

}  // namespace

bool ReplayReport::passed() const {
    return std::all_of(invariants.begin(), invariants.end(), [](const auto& i) { return i.passed; });
}

const InvariantResult* ReplayReport::find(const std::string& name) const {
    for (const auto& i : invariants)
        if (i.name == name) return &i;
    return nullptr;
}

ReplayReport replay(const std::vector<LogEvent>& events) {
    if (events.empty()) throw ReplayError("run log is empty");
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].seq <= events[i - 1].seq)
            throw ReplayError("sequence numbers out of order at event " + std::to_string(i + 1));
    if (events.back().kind != EventKind::terminated) throw ReplayError("run log is truncated (no terminated event)");
    for (std::size_t i = 0; i + 1 < events.size(); ++i)
        if (events[i].kind == EventKind::terminated) throw ReplayError("terminated event before the end of the log");

    ReplayReport report;
    const auto& term = events.back().payload;

    try {
        {
            Checker c;
            for (const auto& e : events)
                if (payload_digest(e.payload) != e.payload_digest)
                    c.fail("event " + std::to_string(e.seq) + " payload does not match its digest");
            report.invariants.push_back(c.done("payload-digests"));
        }

        std::map<std::size_t, const CallRecord*> calls;
        {
            Checker c;
            std::size_t expected = 0;
            for (const auto& e : events)
                for (const auto& call : e.calls) {
                    if (call.index != expected)
                        c.fail("call index " + std::to_string(call.index) + " where " + std::to_string(expected) +
                               " was expected");
                    calls[call.index] = &call;
                    expected = call.index + 1;
                }
            report.invariants.push_back(c.done("transcript-continuity"));
        }

        {
            Checker after_global, perfect, monotone;
            const json* last_global = nullptr;
            std::optional<core::Score> previous;
            for (const auto& e : events) {
                if (e.kind == EventKind::global_confirmed) last_global = &e.payload;
                if (e.kind == EventKind::refined) last_global = nullptr;
                if (e.kind != EventKind::accepted) continue;
                auto rev = e.payload.at("revision").get<int>();
                if (!last_global || last_global->at("revision").get<int>() != rev ||
                    !last_global->at("passed").get<bool>())
                    after_global.fail("accepted revision " + std::to_string(rev) +
                                      " has no passing global confirmation before it");
                auto s = score_of(e.payload.at("score"));
                if (!s.perfect()) perfect.fail("accepted revision " + std::to_string(rev) + " scored below 1");
                if (previous && s < *previous)
                    monotone.fail("accepted score fell at revision " + std::to_string(rev));
                previous = s;
                last_global = nullptr;
            }
            report.invariants.push_back(after_global.done("accepted-after-global-confirmation"));
            report.invariants.push_back(perfect.done("accepted-scores-perfect"));
            report.invariants.push_back(monotone.done("monotone-accepted-scores"));
        }

        {
            Checker c;
            auto refined = std::count_if(events.begin(), events.end(),
                                         [](const auto& e) { return e.kind == EventKind::refined; });
            auto generated = std::count_if(events.begin(), events.end(),
                                           [](const auto& e) { return e.kind == EventKind::generated; });
            auto t_max = term.at("max_revisions").get<long>();
            auto budget = term.at("budget").get<long>();
            if (refined > t_max) c.fail(std::to_string(refined) + " revisions exceed T_max " + std::to_string(t_max));
            if (refined != term.at("revisions").get<long>()) c.fail("revision count disagrees with refined events");
            if (generated > budget) c.fail(std::to_string(generated) + " levels exceed budget " + std::to_string(budget));
            report.invariants.push_back(c.done("budget-compliance"));
        }

        {
            // per level: the accepted score if any, else the first Step 1 score
            std::vector<LevelScore> derived;
            std::map<int, std::size_t> by_level;
            for (const auto& e : events) {
                if (e.kind == EventKind::evaluated && e.payload.at("phase") == "step1") {
                    int level = e.payload.at("level").get<int>();
                    if (by_level.count(level)) continue;
                    by_level[level] = derived.size();
                    derived.push_back({level, e.payload.at("prompt_digest").get<std::string>(), score_of(e.payload), false});
                } else if (e.kind == EventKind::accepted) {
                    int level = e.payload.at("level").get<int>();
                    auto it = by_level.find(level);
                    if (it == by_level.end()) continue;
                    auto& row = derived[it->second];
                    row = {level, e.payload.at("prompt_digest").get<std::string>(), score_of(e.payload.at("score")), true};
                }
            }
            report.history = derived;

            Checker hist;
            const auto& recorded = term.at("score_history");
            if (recorded.size() != derived.size()) {
                hist.fail("recorded history has " + std::to_string(recorded.size()) + " entries, events give " +
                          std::to_string(derived.size()));
            } else {
                for (std::size_t i = 0; i < derived.size(); ++i) {
                    const auto& r = recorded[i];
                    if (r.at("level").get<int>() != derived[i].level || !(score_of(r) == derived[i].score) ||
                        score_of(r).total != derived[i].score.total ||
                        r.at("prompt_digest").get<std::string>() != derived[i].prompt_digest)
                        hist.fail("history entry " + std::to_string(i + 1) + " does not match the events");
                }
            }
            report.invariants.push_back(hist.done("score-history"));

            Checker argmax;
            if (!derived.empty()) {
                std::size_t best = 0;
                for (std::size_t i = 1; i < derived.size(); ++i)
                    if (derived[i].score >= derived[best].score) best = i;
                if (derived[best].prompt_digest != term.at("final_prompt_digest").get<std::string>())
                    argmax.fail("final prompt is not the latest argmax of the score history");
            }
            report.invariants.push_back(argmax.done("final-prompt-argmax"));

            Checker termination;
            auto kind = term.at("termination").get<std::string>();
            bool last_perfect = !derived.empty() && derived.back().score.perfect();
            if (kind == "coverage" && !last_perfect) termination.fail("coverage claimed but the last score is below 1");
            if (kind == "budget" && last_perfect) termination.fail("budget claimed although the last score is 1");
            if (kind != "coverage" && kind != "budget" && kind != "cap") termination.fail("unknown termination " + kind);
            report.invariants.push_back(termination.done("termination-consistency"));
        }

        {
            Checker c;
            for (const auto& e : events) {
                if (e.kind != EventKind::generated) continue;
                const auto& p = e.payload;
                auto fixed_at = p.at("label_fixed_at").get<std::size_t>();
                auto index = p.at("request_index").get<std::size_t>();
                auto level = std::to_string(p.at("level").get<int>());
                if (fixed_at > index) c.fail("level " + level + ": label fixed after the generation request");
                if (p.at("example").at("target") != p.at("label")) c.fail("level " + level + ": target differs from the drawn label");
                auto it = calls.find(index);
                if (it == calls.end() || it->second->role != "generate" ||
                    it->second->request_digest != p.at("request_digest").get<std::string>())
                    c.fail("level " + level + ": generation request not found in the transcript");
            }
            report.invariants.push_back(c.done("label-first"));
        }
    } catch (const json::exception& e) {
        throw ReplayError(std::string("run log payload is missing fields: ") + e.what());
    }
    return report;
}

ReplayReport replay_file(const std::filesystem::path& path) { return replay(RunLog::read(path)); }

}  // namespace promptloop::harness
