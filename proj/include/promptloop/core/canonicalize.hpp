#pragma once

#include <string>
#include <string_view>

#include "promptloop/core/types.hpp"

namespace promptloop::core {

/// Maps a raw model answer (or a target label) onto the canonical form used for
/// answer equality. Every rule is deterministic and idempotent.
///
///  - exact: identity.
///  - case-fold-trim: first non-empty line, ASCII-lowercased, inner whitespace
///    collapsed, trailing '.'/'!' removed.
///  - word-and-numeral: the numeral of the first "word, numeral" pair, else the
///    first digit run, else the first spelled-out number; falls back to
///    case-fold-trim when the text holds no number at all.
///  - multiple-choice-letter: content of the first <answer>...</answer> pair if
///    present; a lone (optionally parenthesised) letter becomes that letter in
///    lowercase, otherwise the case-fold-trim form.
std::string canonicalize_answer(std::string_view raw, AnswerFormat rule);

/// Same, with the rule given by id. Throws ConfigError on unknown ids.
std::string canonicalize_answer(std::string_view raw, std::string_view rule_id);

}  // namespace promptloop::core
