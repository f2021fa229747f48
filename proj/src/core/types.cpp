#include "promptloop/core/types.hpp"

#include <algorithm>

#include "promptloop/core/canonicalize.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::core {

std::string_view to_string(Provenance p) {
    return p == Provenance::seed ? "seed" : "synthetic";
}

Provenance parse_provenance(std::string_view s) {
    if (s == "seed") return Provenance::seed;
    if (s == "synthetic") return Provenance::synthetic;
    throw ConfigError("unknown provenance '" + std::string(s) + "'");
}

void validate(const LabeledExample& example) {
    if (example.target.empty())
        throw ConfigError("example " + example.id + " has an empty target");
    if (example.difficulty < 0)
        throw ConfigError("example " + example.id + " has a negative difficulty");
    const bool seed = example.provenance == Provenance::seed;
    if (seed != (example.difficulty == 0))
        throw ConfigError("example " + example.id +
                          ": difficulty must be 0 exactly for seed data");
}

std::string_view to_string(AnswerFormat f) {
    switch (f) {
    case AnswerFormat::exact: return "exact";
    case AnswerFormat::case_fold_trim: return "case-fold-trim";
    case AnswerFormat::word_and_numeral: return "word-and-numeral";
    case AnswerFormat::mc_letter: return "multiple-choice-letter";
    }
    return "exact";
}

AnswerFormat parse_answer_format(std::string_view id) {
    if (id == "exact") return AnswerFormat::exact;
    if (id == "case-fold-trim") return AnswerFormat::case_fold_trim;
    if (id == "word-and-numeral") return AnswerFormat::word_and_numeral;
    if (id == "multiple-choice-letter" || id == "mc-letter") return AnswerFormat::mc_letter;
    throw ConfigError("unknown answer format '" + std::string(id) + "'");
}

void validate(const TaskSpec& task, const std::vector<LabeledExample>& seeds) {
    if (task.id.empty()) throw ConfigError("task id is empty");
    if (task.difficulty_max < 1)
        throw ConfigError("task " + task.id + ": difficulty_max must be >= 1");
    if (!task.label_space) return;
    if (task.label_space->empty())
        throw ConfigError("task " + task.id + ": label space is present but empty");

    std::vector<std::string> admissible;
    for (const auto& label : *task.label_space)
        admissible.push_back(canonicalize_answer(label, task.answer_format));
    for (const auto& ex : seeds) {
        const auto canon = canonicalize_answer(ex.target, task.answer_format);
        if (std::find(admissible.begin(), admissible.end(), canon) == admissible.end())
            throw ConfigError("seed " + ex.id + " target '" + ex.target +
                              "' is outside the label space of task " + task.id);
    }
}

}  // namespace promptloop::core
