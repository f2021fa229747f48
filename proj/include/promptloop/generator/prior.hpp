#pragma once

#include <optional>
#include <string>
#include <vector>

#include "promptloop/core/random.hpp"
#include "promptloop/core/types.hpp"

namespace promptloop::generator {

/// Probability vector over a label list; entries >= 0 and summing to 1.
struct LabelPrior {
    std::vector<std::string> labels;
    std::vector<double> probabilities;

    /// Throws ConfigError on a length mismatch, a negative entry, an all-zero
    /// vector or a sum away from 1 by more than 1e-9.
    void validate() const;
    std::optional<std::size_t> index_of(const std::string& label) const;
};

/// Add-one smoothed seed label frequencies over `label_space`, or over the
/// distinct seed targets (sorted) when the task has no label space. Seed
/// targets are matched to labels after canonicalization with `format`.
LabelPrior estimate_prior(const std::vector<core::LabeledExample>& seeds,
                          const std::optional<std::vector<std::string>>& label_space,
                          core::AnswerFormat format = core::AnswerFormat::case_fold_trim);

/// Inverse-CDF draw with one uniform variate.
std::string draw_label(const LabelPrior& prior, core::Rng& rng);

/// KL(empirical label distribution of `history` || prior) in nats. Throws
/// DomainError on empty history and DivergenceUndefinedError when a history
/// label is outside the prior's support.
double empirical_label_kl(const std::vector<std::string>& history, const LabelPrior& prior);

/// 1, 2, ..., difficulty_max.
std::vector<int> build_schedule(const core::TaskSpec& task);

}  // namespace promptloop::generator
