#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "promptloop/core/events.hpp"
#include "promptloop/core/template.hpp"
#include "promptloop/core/types.hpp"
#include "promptloop/gateway/gateway.hpp"
#include "promptloop/generator/prior.hpp"
#include "promptloop/geometry/shapes.hpp"

namespace promptloop::generator {

struct GenerationContext {
    LabelPrior prior;
    std::vector<core::LabeledExample> seeds;
    std::vector<core::LabeledExample> history;
    std::vector<int> schedule;
    std::uint64_t rng_seed = 0;

    /// Throws DomainError when `example` is easier than the last history item.
    void append(core::LabeledExample example);
    std::vector<std::string> history_labels() const;
};

struct GeneratorConfig {
    bool voters = false;
    bool geometry = false;
    int parse_retries = 3;
    int regeneration_cap = 5;
    double perturbation = 0.1;
};

struct GeneratorTemplates {
    core::PromptTemplate generate;
    core::PromptTemplate vote;
    core::PromptTemplate summarize;

    /// Loads generate.txt, vote.txt and summarize.txt and checks their slots.
    static GeneratorTemplates load(const std::filesystem::path& dir);
    void check() const;
};

struct Vote {
    int voter = 0;
    bool valid = false;
    std::string rationale;
};

struct VoterVerdict {
    std::vector<Vote> votes;
    bool accepted = false;
};

/// Outcome of one generation request.
struct Candidate {
    core::LabeledExample example;
    std::size_t request_index = 0;
    std::string request_digest;
    int parse_attempts = 1;
    /// False when the reply's own answer disagrees with the drawn label.
    bool answer_matches = true;
};

/// Produces one validated synthetic example per difficulty level. The target
/// label is always drawn before any generation request is made.
class DataGenerator {
public:
    DataGenerator(core::TaskSpec task, GenerationContext& context, GeneratorTemplates templates,
                  GeneratorConfig config, gateway::ModelSession& session, core::EventSink& sink,
                  const geometry::TemplateLibrary* library = nullptr);

    /// One generation call (plus parse retries). `notes` are appended to the
    /// request, e.g. rejection reasons from earlier attempts. Throws
    /// GenerationError when no reply parses.
    Candidate generate_example(const std::string& label, int c, const std::string& cue = {},
                               const std::string& reference_path = {},
                               const std::vector<std::string>& notes = {});

    /// Latent cue for the next level. Falls back to the example's raw input
    /// when the model returns nothing usable and sets `fallback`.
    std::string summarize_previous(const core::LabeledExample& example, bool* fallback = nullptr);

    /// Exactly three vote calls; accepted only when all three say VALID.
    VoterVerdict voter_check(const core::LabeledExample& candidate);

    /// Draws the label, generates, validates and appends the next example at
    /// difficulty `c`. Throws GenerationError once the regeneration cap is hit.
    core::LabeledExample next(int c);

    const GenerationContext& context() const noexcept { return context_; }

private:
    std::string render_history() const;
    std::string render_seed(std::size_t i) const;

    core::TaskSpec task_;
    GenerationContext& context_;
    GeneratorTemplates templates_;
    GeneratorConfig config_;
    gateway::ModelSession& session_;
    core::EventSink& sink_;
    const geometry::TemplateLibrary* library_;
    core::Rng label_rng_;
    core::Rng geometry_rng_;
};

/// Splits a "Question: ... Answer: ..." reply; nullopt when either part is missing.
std::optional<std::pair<std::string, std::string>> parse_generated(std::string_view reply);

/// Path data inside the first d="..." attribute, if any.
std::optional<std::string> extract_path_data(std::string_view input);

}  // namespace promptloop::generator
