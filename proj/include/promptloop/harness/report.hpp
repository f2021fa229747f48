#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "promptloop/core/types.hpp"
#include "promptloop/harness/runlog.hpp"
#include "promptloop/theory/bound.hpp"

namespace promptloop::harness {

struct BoundOptions {
    double lambda = 1.0;
    double epsilon = 0.0;
    double delta = 0.05;
    /// Defaults to the number of distinct prompts evaluated in the run.
    std::optional<std::uint64_t> prompt_space_size;
    theory::Surrogate surrogate = theory::Surrogate::zero_one;
};

struct LevelRow {
    int level = 0;
    std::optional<core::Score> step1;
    core::Score score;  // score recorded for the level
    int revisions = 0;
    bool accepted = false;
    bool abandoned = false;
    std::size_t calls = 0;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    double elapsed_ms = 0.0;
};

struct RunReport {
    std::string termination;
    std::string reason;
    int revisions = 0;
    std::string final_prompt;
    std::vector<LevelRow> levels;
    /// Calls made outside any level (final evaluation).
    LevelRow final_phase;
    std::size_t total_calls = 0;
    std::size_t transcript_length = 0;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::optional<core::Score> final_seed_score;
    std::optional<core::Score> final_synthetic_score;
    std::optional<double> label_kl;
    /// Flat key/value bound record; null when the run has no seed evaluation.
    nlohmann::json bound;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Builds the report from events alone. Throws ReplayError on an incomplete log.
RunReport build_report(const std::vector<LogEvent>& events, const BoundOptions& options = {});

}  // namespace promptloop::harness
