#include "promptloop/optimizer/optimizer.hpp"

#include <algorithm>
#include <thread>

#include "promptloop/core/digest.hpp"
#include "promptloop/core/scoring.hpp"
#include "promptloop/core/text.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::optimizer {

namespace text = core::text;
using core::EventKind;
using gateway::Role;
using nlohmann::json;

namespace {

constexpr std::string_view kDifferNote =
    "The revised prompt must differ from the current prompt. Apply the recommendation.";

json score_json(const core::Score& s) { return {{"correct", s.correct}, {"total", s.total}}; }

json records_json(const std::vector<core::EvaluationRecord>& records) {
    json out = json::array();
    for (const auto& r : records) {
        json j = {{"id", r.example_id},
                  {"output", r.raw_output},
                  {"canonical_output", r.canonical_output},
                  {"canonical_target", r.canonical_target},
                  {"correct", r.correct}};
        if (!r.error.empty()) j["error"] = r.error;
        out.push_back(std::move(j));
    }
    return out;
}

json ids_json(const std::vector<core::LabeledExample>& examples) {
    json out = json::array();
    for (const auto& e : examples) out.push_back(e.id);
    return out;
}

std::vector<Failure> failures(const std::vector<core::LabeledExample>& examples,
                              const std::vector<core::EvaluationRecord>& records) {
    std::vector<Failure> out;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (!records[i].correct) out.push_back({examples[i], records[i]});
    return out;
}

std::vector<core::LabeledExample> examples_of(const std::vector<Failure>& fs) {
    std::vector<core::LabeledExample> out;
    for (const auto& f : fs) out.push_back(f.example);
    return out;
}

std::string first_line(std::string_view s) {
    for (auto l : text::split_lines(s))
        if (!text::trim(l).empty()) return std::string(text::trim(l));
    return {};
}

}  // namespace

int LoopConfig::effective_max_revisions() const noexcept {
    return max_revisions > 0 ? max_revisions : budget * (local_retry_cap + 1);
}

void LoopConfig::validate() const {
    if (budget < 1) throw ConfigError("budget M must be at least 1");
    if (local_retry_cap < 0) throw ConfigError("local retry cap must be >= 0");
    if (max_revisions < 0) throw ConfigError("T_max must be >= 0");
    if (effective_max_revisions() < budget) throw ConfigError("T_max must be at least the budget M");
    if (eval_workers < 1) throw ConfigError("eval_workers must be at least 1");
}

OptimizerTemplates OptimizerTemplates::load(const std::filesystem::path& dir) {
    OptimizerTemplates t{core::PromptTemplate::load(dir / "analyze.txt"),
                         core::PromptTemplate::load(dir / "recommend.txt"),
                         core::PromptTemplate::load(dir / "refine.txt")};
    t.check();
    return t;
}

void OptimizerTemplates::check() const {
    analyze.require({"synthetic question", "LLM generated answer", "true answer", "current prompt"});
    recommend.require({"synthetic question", "LLM generated answer", "true answer", "current prompt",
                       "error analysis from previous step"});
    refine.require({"synthetic question", "LLM generated answer", "true answer", "current prompt",
                    "recommendation from previous step"});
}

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::coverage: return "coverage";
    case Termination::budget: return "budget";
    case Termination::cap: return "cap";
    }
    return "cap";
}

Termination parse_termination(std::string_view s) {
    if (s == "coverage") return Termination::coverage;
    if (s == "budget") return Termination::budget;
    if (s == "cap") return Termination::cap;
    throw ConfigError("unknown termination '" + std::string(s) + "'");
}

std::size_t argmax_latest(const std::vector<ScoreEntry>& history) {
    if (history.empty()) throw DomainError("argmax over an empty score history");
    std::size_t best = 0;
    for (std::size_t i = 1; i < history.size(); ++i)
        if (history[i].score >= history[best].score) best = i;
    return best;
}

Optimizer::Optimizer(core::TaskSpec task, OptimizerTemplates templates, LoopConfig config,
                     gateway::ModelSession& session, core::EventSink& sink)
    : task_(std::move(task)), templates_(std::move(templates)), config_(config), session_(session), sink_(sink) {
    templates_.check();
    config_.validate();
}

std::vector<core::EvaluationRecord> Optimizer::evaluate(const std::string& prompt,
                                                        const std::vector<core::LabeledExample>& examples) {
    if (examples.empty()) throw DomainError("evaluate needs at least one example");
    std::vector<core::EvaluationRecord> records(examples.size());
    auto one = [&](std::size_t i) {
        const auto& e = examples[i];
        try {
            auto r = session_.call(Role::evaluate, prompt, e.input);
            records[i] = core::make_record(e.id, r.text, e.target, task_.answer_format);
        } catch (const Error& err) {
            auto rec = core::make_record(e.id, "", e.target, task_.answer_format);
            rec.correct = false;
            rec.error = err.what();
            records[i] = std::move(rec);
        }
    };
    const std::size_t workers = std::min(config_.eval_workers, examples.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < examples.size(); ++i) one(i);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < examples.size(); i += workers) one(i);
            });
        for (auto& t : pool) t.join();
    }
    return records;
}

std::vector<core::EvaluationRecord> Optimizer::evaluate_phase(const std::string& prompt,
                                                              const std::vector<core::LabeledExample>& examples,
                                                              std::string_view phase, int level, int revision) {
    auto records = evaluate(prompt, examples);
    auto score = core::accuracy_score(records);
    sink_.emit(EventKind::evaluated, {{"level", level},
                                      {"phase", phase},
                                      {"revision", revision},
                                      {"prompt", prompt},
                                      {"prompt_digest", core::sha256_hex(prompt)},
                                      {"examples", ids_json(examples)},
                                      {"records", records_json(records)},
                                      {"correct", score.correct},
                                      {"total", score.total}});
    return records;
}

std::string Optimizer::call_nonempty(Role role, const core::RenderedPrompt& rendered) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            auto r = session_.call(role, rendered.system, rendered.user);
            auto t = text::trim(r.text);
            if (!t.empty()) return std::string(t);
        } catch (const EmptyCompletionError&) {
        }
    }
    throw OptimizerError(std::string(gateway::to_string(role)) + " returned an empty completion twice");
}

core::SlotMap Optimizer::error_slots(const std::string& prompt, const std::vector<Failure>& errors) const {
    if (errors.empty()) throw DomainError("error analysis needs a non-empty error set");
    std::string questions, answers, truths;
    if (errors.size() == 1) {
        questions = errors[0].example.input;
        answers = errors[0].record.raw_output;
        truths = errors[0].example.target;
    } else {
        for (std::size_t i = 0; i < errors.size(); ++i) {
            auto tag = "[" + std::to_string(i + 1) + "] ";
            auto sep = i == 0 ? "" : "\n";
            questions += sep + tag + errors[i].example.input;
            answers += sep + tag + errors[i].record.raw_output;
            truths += sep + tag + errors[i].example.target;
        }
    }
    return {{"task name", task_.id},
            {"task description", task_.description},
            {"synthetic question", questions},
            {"LLM generated answer", answers},
            {"true answer", truths},
            {"current prompt", prompt}};
}

std::string Optimizer::analyze_errors(const std::string& prompt, const std::vector<Failure>& errors) {
    return call_nonempty(Role::analyze, templates_.analyze.render(error_slots(prompt, errors)));
}

Patch Optimizer::recommend(const std::string& prompt, const std::vector<Failure>& errors, const std::string& analysis) {
    if (text::trim(analysis).empty()) throw DomainError("recommendation needs a non-empty analysis");
    auto slots = error_slots(prompt, errors);
    slots["error analysis from previous step"] = analysis;
    Patch p;
    p.analysis = analysis;
    p.recommendation = call_nonempty(Role::recommend, templates_.recommend.render(slots));
    return p;
}

std::string Optimizer::refine(const std::string& prompt, const Patch& patch, const std::vector<Failure>& errors,
                              bool* unchanged) {
    if (text::trim(patch.analysis).empty() || text::trim(patch.recommendation).empty())
        throw DomainError("refinement needs a patch with analysis and recommendation");
    auto slots = error_slots(prompt, errors);
    slots["error analysis from previous step"] = patch.analysis;
    slots["recommendation from previous step"] = patch.recommendation;
    auto rendered = templates_.refine.render(slots);
    auto revised = call_nonempty(Role::refine, rendered);
    bool same = text::trim(revised) == text::trim(prompt);
    if (same) {
        rendered.user += "\n\n" + std::string(kDifferNote);
        revised = call_nonempty(Role::refine, rendered);
        same = text::trim(revised) == text::trim(prompt);
    }
    if (unchanged) *unchanged = same;
    return revised;
}

OptimizationResult Optimizer::run_loop(const std::string& initial_prompt, generator::DataGenerator& generator,
                                       const std::vector<core::LabeledExample>& seeds) {
    if (seeds.empty()) throw ConfigError("the loop needs seed examples");
    if (text::trim(initial_prompt).empty()) throw ConfigError("the initial prompt is empty");

    OptimizationResult result;
    result.state.text = initial_prompt;
    std::string current = initial_prompt;
    const int t_max = config_.effective_max_revisions();
    int revisions = 0;
    int current_revision = 0;
    bool stop = false;
    std::string stop_reason;

    const auto& schedule = generator.context().schedule;
    const int levels = std::min<int>(config_.budget, static_cast<int>(schedule.size()));

    for (int t = 0; t < levels && !stop; ++t) {
        const int c = schedule[static_cast<std::size_t>(t)];
        try {
            generator.next(c);
        } catch (const GenerationError& e) {
            stop = true;
            stop_reason = std::string("generation failed: ") + e.what();
            break;
        }
        const auto& history = generator.context().history;
        auto global_set = history;
        if (config_.include_seeds_in_global) global_set.insert(global_set.begin(), seeds.begin(), seeds.end());

        auto records = evaluate_phase(current, history, "step1", c, current_revision);
        auto step1 = core::accuracy_score(records);
        auto errors = failures(history, records);
        if (errors.empty()) {
            result.score_history.push_back({t + 1, c, current, step1});
            continue;
        }

        std::string baseline = current;
        int baseline_revision = current_revision;
        bool accepted = false;
        int attempts = 0;
        try {
            for (int entry = 0; entry <= config_.local_retry_cap; ++entry) {
                if (revisions >= t_max) {
                    stop = true;
                    stop_reason = "revision cap T_max=" + std::to_string(t_max) + " reached";
                    break;
                }
                auto analysis = analyze_errors(baseline, errors);
                sink_.emit(EventKind::analyzed, {{"level", c}, {"revision", revisions + 1}, {"analysis", analysis}});
                auto patch = recommend(baseline, errors, analysis);
                patch.produced_at = revisions + 1;
                sink_.emit(EventKind::recommended,
                           {{"level", c}, {"revision", revisions + 1}, {"recommendation", patch.recommendation}});
                bool unchanged = false;
                auto revised = refine(baseline, patch, errors, &unchanged);
                ++revisions;
                ++attempts;
                sink_.emit(EventKind::refined, {{"level", c},
                                                {"revision", revisions},
                                                {"parent_revision", baseline_revision},
                                                {"prompt", revised},
                                                {"prompt_digest", core::sha256_hex(revised)},
                                                {"unchanged", unchanged}});

                auto slice = examples_of(errors);
                auto local_records = evaluate_phase(revised, slice, "local", c, revisions);
                auto remaining = failures(slice, local_records);
                sink_.emit(EventKind::local_confirmed, {{"level", c},
                                                        {"revision", revisions},
                                                        {"passed", remaining.empty()},
                                                        {"remaining", ids_json(examples_of(remaining))}});
                if (!remaining.empty()) {
                    baseline = revised;
                    baseline_revision = revisions;
                    errors = std::move(remaining);
                    continue;
                }

                auto global_records = evaluate_phase(revised, global_set, "global", c, revisions);
                auto global_score = core::accuracy_score(global_records);
                auto regressed = failures(global_set, global_records);
                sink_.emit(EventKind::global_confirmed, {{"level", c},
                                                         {"revision", revisions},
                                                         {"passed", regressed.empty()},
                                                         {"score", score_json(global_score)},
                                                         {"regressed", ids_json(examples_of(regressed))}});
                if (!regressed.empty()) {
                    baseline = revised;
                    baseline_revision = revisions;
                    errors = std::move(regressed);
                    continue;
                }

                current = revised;
                current_revision = revisions;
                accepted = true;
                result.state.lineage.push_back({first_line(patch.recommendation), result.state.iteration});
                result.state.iteration = revisions;
                sink_.emit(EventKind::accepted, {{"level", c},
                                                 {"revision", revisions},
                                                 {"prompt", revised},
                                                 {"prompt_digest", core::sha256_hex(revised)},
                                                 {"score", score_json(global_score)},
                                                 {"history", ids_json(global_set)}});
                result.score_history.push_back({t + 1, c, current, global_score});
                break;
            }
        } catch (const OptimizerError& e) {
            stop = true;
            stop_reason = e.what();
        }
        if (!accepted) {
            if (!stop)
                sink_.emit(EventKind::abandoned, {{"level", c},
                                                  {"attempts", attempts},
                                                  {"reason", "local retry cap " + std::to_string(config_.local_retry_cap) +
                                                                 " exhausted"}});
            result.score_history.push_back({t + 1, c, current, step1});
        }
    }

    result.revision_count = revisions;
    if (stop) {
        result.termination = Termination::cap;
        result.reason = stop_reason;
    } else if (!result.score_history.empty() && result.score_history.back().score.perfect()) {
        result.termination = Termination::coverage;
        result.reason = "every generated example is answered correctly";
    } else {
        result.termination = Termination::budget;
        result.reason = "budget of " + std::to_string(levels) + " levels used";
    }

    if (!result.score_history.empty()) {
        auto best = argmax_latest(result.score_history);
        result.final_prompt = result.score_history[best].prompt;
        result.state.best_score = result.score_history[best].score;
    } else {
        result.final_prompt = current;
    }
    result.state.text = result.final_prompt;

    if (config_.final_evaluation) {
        evaluate_phase(result.final_prompt, seeds, "final_seed", 0, revisions);
        if (!generator.context().history.empty())
            evaluate_phase(result.final_prompt, generator.context().history, "final_synthetic", 0, revisions);
    }

    json history = json::array();
    for (const auto& e : result.score_history)
        history.push_back({{"iteration", e.iteration},
                           {"level", e.level},
                           {"prompt_digest", core::sha256_hex(e.prompt)},
                           {"correct", e.score.correct},
                           {"total", e.score.total}});
    sink_.emit(EventKind::terminated, {{"termination", to_string(result.termination)},
                                       {"reason", result.reason},
                                       {"revisions", revisions},
                                       {"max_revisions", t_max},
                                       {"budget", config_.budget},
                                       {"levels", static_cast<int>(generator.context().history.size())},
                                       {"final_prompt", result.final_prompt},
                                       {"final_prompt_digest", core::sha256_hex(result.final_prompt)},
                                       {"score_history", history}});
    return result;
}

}  // namespace promptloop::optimizer
