#include "promptloop/core/scoring.hpp"

#include "promptloop/core/canonicalize.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::core {

Score accuracy_score(std::span<const EvaluationRecord> records) {
    if (records.empty()) throw DomainError("accuracy score is undefined on an empty record set");
    Score s{0, records.size()};
    for (const auto& r : records)
        if (r.correct) ++s.correct;
    return s;
}

std::vector<std::string> error_slice(std::span<const EvaluationRecord> records) {
    std::vector<std::string> ids;
    for (const auto& r : records)
        if (!r.correct) ids.push_back(r.example_id);
    return ids;
}

EvaluationRecord make_record(std::string example_id, std::string raw_output,
                             std::string_view target, AnswerFormat format) {
    EvaluationRecord rec;
    rec.example_id = std::move(example_id);
    rec.canonical_output = canonicalize_answer(raw_output, format);
    rec.canonical_target = canonicalize_answer(target, format);
    rec.correct = rec.canonical_output == rec.canonical_target;
    rec.raw_output = std::move(raw_output);
    return rec;
}

}  // namespace promptloop::core
