#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "promptloop/core/events.hpp"
#include "promptloop/core/template.hpp"
#include "promptloop/core/types.hpp"
#include "promptloop/gateway/gateway.hpp"
#include "promptloop/generator/generator.hpp"

namespace promptloop::optimizer {

struct LoopConfig {
    /// M: number of levels (synthetic examples) to run.
    int budget = 10;
    /// T_max: cap on revision attempts over the whole run; 0 selects
    /// budget * (local_retry_cap + 1).
    int max_revisions = 0;
    /// Re-entries into analysis after a failed local or global check.
    int local_retry_cap = 3;
    bool include_seeds_in_global = false;
    bool final_evaluation = true;
    std::size_t eval_workers = 1;

    int effective_max_revisions() const noexcept;
    /// Throws ConfigError unless budget >= 1, T_max >= budget and caps >= 0.
    void validate() const;
};

struct OptimizerTemplates {
    core::PromptTemplate analyze;
    core::PromptTemplate recommend;
    core::PromptTemplate refine;

    static OptimizerTemplates load(const std::filesystem::path& dir);
    void check() const;
};

struct Patch {
    std::string analysis;
    std::string recommendation;
    int produced_at = 0;
};

enum class Termination { coverage, budget, cap };

std::string_view to_string(Termination t);
Termination parse_termination(std::string_view s);

/// Score of the prompt in force after a level, measured on that level's history.
struct ScoreEntry {
    int iteration = 0;
    int level = 0;
    std::string prompt;
    core::Score score;
};

struct OptimizationResult {
    std::string final_prompt;
    std::vector<ScoreEntry> score_history;
    Termination termination = Termination::budget;
    int revision_count = 0;
    core::PromptState state;
    std::string reason;
};

/// An example the current prompt got wrong, with its evaluation record.
struct Failure {
    core::LabeledExample example;
    core::EvaluationRecord record;
};

/// Index of the best entry; ties go to the latest. Throws DomainError when empty.
std::size_t argmax_latest(const std::vector<ScoreEntry>& history);

class Optimizer {
public:
    Optimizer(core::TaskSpec task, OptimizerTemplates templates, LoopConfig config, gateway::ModelSession& session,
              core::EventSink& sink);

    /// One evaluate-role call per example; records in input order. A failed
    /// call yields an incorrect record carrying the error text.
    std::vector<core::EvaluationRecord> evaluate(const std::string& prompt,
                                                 const std::vector<core::LabeledExample>& examples);

    std::string analyze_errors(const std::string& prompt, const std::vector<Failure>& errors);
    Patch recommend(const std::string& prompt, const std::vector<Failure>& errors, const std::string& analysis);
    /// Revised prompt. When the model returns the input unchanged, retries once
    /// with an instruction to differ and then accepts whatever comes back;
    /// `unchanged` reports that case.
    std::string refine(const std::string& prompt, const Patch& patch, const std::vector<Failure>& errors,
                       bool* unchanged = nullptr);

    /// Runs levels 1..M, drawing one example per level from `generator`.
    OptimizationResult run_loop(const std::string& initial_prompt, generator::DataGenerator& generator,
                                const std::vector<core::LabeledExample>& seeds);

private:
    std::string call_nonempty(gateway::Role role, const core::RenderedPrompt& rendered);
    core::SlotMap error_slots(const std::string& prompt, const std::vector<Failure>& errors) const;
    std::vector<core::EvaluationRecord> evaluate_phase(const std::string& prompt,
                                                       const std::vector<core::LabeledExample>& examples,
                                                       std::string_view phase, int level, int revision);

    core::TaskSpec task_;
    OptimizerTemplates templates_;
    LoopConfig config_;
    gateway::ModelSession& session_;
    core::EventSink& sink_;
};

}  // namespace promptloop::optimizer
