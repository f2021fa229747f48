#pragma once

#include <span>
#include <string>
#include <vector>

#include "promptloop/core/types.hpp"

namespace promptloop::core {

/// Fraction of correct records. Throws DomainError on an empty set, where the
/// score is undefined.
Score accuracy_score(std::span<const EvaluationRecord> records);

/// Ids of the incorrect records, in input order.
std::vector<std::string> error_slice(std::span<const EvaluationRecord> records);

/// Builds a record by comparing canonical forms of output and target.
EvaluationRecord make_record(std::string example_id, std::string raw_output,
                             std::string_view target, AnswerFormat format);

}  // namespace promptloop::core
