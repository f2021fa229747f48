#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptloop::core {

enum class Provenance { seed, synthetic };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

/// An input/target pair. Seed items carry difficulty 0; synthetic items carry
/// the tier they were generated at, and their target was fixed before the input.
struct LabeledExample {
    std::string id;
    std::string input;
    std::string target;
    int difficulty = 0;
    Provenance provenance = Provenance::seed;
    std::string task;
};

/// Throws ConfigError when the difficulty/provenance pairing or target is invalid.
void validate(const LabeledExample& example);

/// Exact fraction correct/total. Comparisons are done on the rational value.
struct Score {
    std::size_t correct = 0;
    std::size_t total = 0;

    double value() const noexcept {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
    bool perfect() const noexcept { return total > 0 && correct == total; }

    friend std::strong_ordering operator<=>(const Score& a, const Score& b) noexcept {
        // a.correct / a.total <=> b.correct / b.total without rounding
        return a.correct * b.total <=> b.correct * a.total;
    }
    friend bool operator==(const Score& a, const Score& b) noexcept {
        return (a <=> b) == std::strong_ordering::equal;
    }
};

struct LineageEntry {
    std::string patch_summary;
    int parent_iteration = 0;
};

struct PromptState {
    std::string text;
    int iteration = 0;
    Score best_score;
    std::vector<LineageEntry> lineage;
};

struct EvaluationRecord {
    std::string example_id;
    std::string raw_output;
    std::string canonical_output;
    std::string canonical_target;
    bool correct = false;
    /// Set when the model call itself failed; the record then counts as wrong.
    std::string error;
};

enum class AnswerFormat { exact, case_fold_trim, word_and_numeral, mc_letter };

std::string_view to_string(AnswerFormat f);
/// Throws ConfigError on unknown ids.
AnswerFormat parse_answer_format(std::string_view id);

struct TaskSpec {
    std::string id;
    std::string description;
    std::optional<std::vector<std::string>> label_space;
    AnswerFormat answer_format = AnswerFormat::case_fold_trim;
    int difficulty_max = 10;
    bool geometry = false;
    bool voters = false;
};

/// Checks difficulty_max and that every seed target lies in the label space.
void validate(const TaskSpec& task, const std::vector<LabeledExample>& seeds = {});

}  // namespace promptloop::core
