#include "promptloop/harness/report.hpp"

#include <map>
#include <set>
#include <sstream>

#include "promptloop/core/text.hpp"
#include "promptloop/errors.hpp"
#include "promptloop/generator/prior.hpp"

namespace promptloop::harness {

using core::EventKind;
using nlohmann::json;

namespace {

core::Score score_of(const json& j) { return {j.at("correct").get<std::size_t>(), j.at("total").get<std::size_t>()}; }

json score_json(const std::optional<core::Score>& s) {
    if (!s) return nullptr;
    return {{"correct", s->correct}, {"total", s->total}, {"value", s->value()}};
}

json row_json(const LevelRow& r) {
    return {{"level", r.level},
            {"step1", score_json(r.step1)},
            {"score", score_json(r.score)},
            {"revisions", r.revisions},
            {"accepted", r.accepted},
            {"abandoned", r.abandoned},
            {"calls", r.calls},
            {"input_tokens", r.input_tokens},
            {"output_tokens", r.output_tokens},
            {"elapsed_ms", r.elapsed_ms}};
}

}  // namespace

RunReport build_report(const std::vector<LogEvent>& events, const BoundOptions& options) {
    if (events.empty() || events.back().kind != EventKind::terminated)
        throw ReplayError("cannot report on an incomplete run log");

    RunReport rep;
    std::map<int, LevelRow> rows;
    std::set<std::string> prompts;
    std::vector<std::string> labels;
    std::map<std::string, int> difficulty_of;
    std::optional<generator::LabelPrior> prior;
    std::vector<bool> seed_correct;
    const json* final_synthetic = nullptr;

    try {
        for (const auto& e : events) {
            const auto& p = e.payload;
            int level = p.contains("level") ? p.at("level").get<int>() : 0;
            LevelRow& row = level > 0 ? rows[level] : rep.final_phase;
            row.level = level;
            for (const auto& c : e.calls) {
                ++row.calls;
                row.input_tokens += c.input_tokens;
                row.output_tokens += c.output_tokens;
                row.elapsed_ms += c.latency_ms;
                rep.transcript_length = std::max(rep.transcript_length, c.index + 1);
            }
            switch (e.kind) {
            case EventKind::generated:
                labels.push_back(p.at("label").get<std::string>());
                difficulty_of[p.at("example").at("id").get<std::string>()] = level;
                if (!prior && p.contains("prior")) {
                    generator::LabelPrior lp;
                    lp.labels = p.at("prior").at("labels").get<std::vector<std::string>>();
                    lp.probabilities = p.at("prior").at("probabilities").get<std::vector<double>>();
                    prior = lp;
                }
                break;
            case EventKind::evaluated: {
                prompts.insert(p.at("prompt_digest").get<std::string>());
                auto phase = p.at("phase").get<std::string>();
                if (phase == "step1" && !row.step1) row.step1 = score_of(p);
                if (phase == "final_seed") {
                    rep.final_seed_score = score_of(p);
                    seed_correct.clear();
                    for (const auto& r : p.at("records")) seed_correct.push_back(r.at("correct").get<bool>());
                }
                if (phase == "final_synthetic") {
                    rep.final_synthetic_score = score_of(p);
                    final_synthetic = &p;
                }
                break;
            }
            case EventKind::refined: ++row.revisions; break;
            case EventKind::accepted: row.accepted = true; break;
            case EventKind::abandoned: row.abandoned = true; break;
            default: break;
            }
        }

        const auto& term = events.back().payload;
        rep.termination = term.at("termination").get<std::string>();
        rep.reason = term.value("reason", "");
        rep.revisions = term.at("revisions").get<int>();
        rep.final_prompt = term.at("final_prompt").get<std::string>();
        for (const auto& h : term.at("score_history")) {
            int level = h.at("level").get<int>();
            rows[level].level = level;
            rows[level].score = score_of(h);
        }
    } catch (const json::exception& e) {
        throw ReplayError(std::string("run log payload is missing fields: ") + e.what());
    }

    for (auto& [level, row] : rows) {
        rep.levels.push_back(row);
        rep.total_calls += row.calls;
        rep.input_tokens += row.input_tokens;
        rep.output_tokens += row.output_tokens;
    }
    rep.total_calls += rep.final_phase.calls;
    rep.input_tokens += rep.final_phase.input_tokens;
    rep.output_tokens += rep.final_phase.output_tokens;

    if (prior && !labels.empty()) rep.label_kl = generator::empirical_label_kl(labels, *prior);

    if (rep.final_seed_score && !seed_correct.empty()) {
        double risk = 0.0;
        for (bool ok : seed_correct) risk += theory::surrogate_loss(options.surrogate, ok ? 1.0 : 0.0);
        risk /= static_cast<double>(seed_correct.size());

        theory::BoundInputs in;
        in.empirical_risk = risk;
        in.kl_penalty = rep.label_kl.value_or(0.0);
        in.lambda = options.lambda;
        in.epsilon = options.epsilon;
        in.delta = options.delta;
        in.n = seed_correct.size();
        in.prompt_space_size = options.prompt_space_size.value_or(std::max<std::size_t>(prompts.size(), 1));

        // worst per-difficulty error rate of the final prompt: a lower witness
        // for the left-hand side, not the supremum itself
        double witness = 0.0;
        if (final_synthetic) {
            std::map<int, std::pair<int, int>> per;
            for (const auto& r : final_synthetic->at("records")) {
                auto id = r.at("id").get<std::string>();
                auto& [wrong, total] = per[difficulty_of.count(id) ? difficulty_of[id] : 0];
                ++total;
                if (!r.at("correct").get<bool>()) ++wrong;
            }
            for (const auto& [d, wt] : per) witness = std::max(witness, static_cast<double>(wt.first) / wt.second);
        }

        rep.bound = {{"surrogate", theory::to_string(options.surrogate)},
                     {"empirical_risk", in.empirical_risk},
                     {"kl_penalty", in.kl_penalty},
                     {"lambda", in.lambda},
                     {"epsilon", in.epsilon},
                     {"epsilon_assumed", true},
                     {"prompt_space_size", in.prompt_space_size},
                     {"n", in.n},
                     {"delta", in.delta},
                     {"uniform_convergence_term",
                      theory::uniform_convergence_term(in.prompt_space_size, in.n, in.delta)},
                     {"rwdg_bound", theory::rwdg_bound(in)},
                     {"lhs_witness", witness}};
    }
    return rep;
}

json RunReport::to_json() const {
    json levels_json = json::array();
    for (const auto& r : levels) levels_json.push_back(row_json(r));
    return {{"termination", termination},
            {"reason", reason},
            {"revisions", revisions},
            {"final_prompt", final_prompt},
            {"levels", levels_json},
            {"final_phase", row_json(final_phase)},
            {"total_calls", total_calls},
            {"transcript_length", transcript_length},
            {"input_tokens", input_tokens},
            {"output_tokens", output_tokens},
            {"final_seed_score", score_json(final_seed_score)},
            {"final_synthetic_score", score_json(final_synthetic_score)},
            {"label_kl", label_kl ? json(*label_kl) : json(nullptr)},
            {"bound", bound}};
}

std::string RunReport::to_text() const {
    std::ostringstream os;
    auto fmt = [](const std::optional<core::Score>& s) {
        if (!s) return std::string("-");
        return std::to_string(s->correct) + "/" + std::to_string(s->total);
    };
    os << "termination: " << termination << " (" << reason << ")\n";
    os << "revisions: " << revisions << "\n\n";
    os << "level  step1   score   revs  calls  tokens   ms\n";
    for (const auto& r : levels) {
        char line[160];
        std::snprintf(line, sizeof line, "%5d  %-6s  %-6s  %4d  %5zu  %6lld  %.1f%s\n", r.level, fmt(r.step1).c_str(),
                      fmt(r.score).c_str(), r.revisions, r.calls,
                      static_cast<long long>(r.input_tokens + r.output_tokens), r.elapsed_ms,
                      r.accepted ? "" : (r.abandoned ? "  abandoned" : ""));
        os << line;
    }
    os << "\ncalls: " << total_calls << " (final evaluation " << final_phase.calls << ")\n";
    os << "tokens: " << input_tokens << " in, " << output_tokens << " out\n";
    os << "final seed score: " << fmt(final_seed_score) << "\n";
    os << "final synthetic score: " << fmt(final_synthetic_score) << "\n";
    if (label_kl) os << "label KL: " << core::text::format_double(*label_kl) << " nats\n";
    if (!bound.is_null()) {
        os << "bound:\n";
        for (const auto& [k, v] : bound.items()) os << "  " << k << " = " << v.dump() << "\n";
    }
    return os.str();
}

}  // namespace promptloop::harness
