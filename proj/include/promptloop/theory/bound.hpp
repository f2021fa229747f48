#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace promptloop::theory {

/// KL(q || p) in nats with 0 ln 0 = 0. Both inputs must be distributions of
/// equal length (sum 1 within 1e-9, entries >= 0). Throws DomainError on bad
/// inputs and DivergenceUndefinedError when q puts mass where p has none.
double kl_divergence(std::span<const double> q, std::span<const double> p);

/// sqrt((ln |P| + ln(1/delta)) / n).
double uniform_convergence_term(std::uint64_t prompt_space_size, std::uint64_t n, double delta);

struct BoundInputs {
    double empirical_risk = 0.0;  // in [0, 1]
    double kl_penalty = 0.0;      // nats, >= 0
    double lambda = 1.0;          // > 0
    double epsilon = 0.0;         // >= 0, assumed rather than measured
    std::uint64_t prompt_space_size = 1;
    std::uint64_t n = 1;
    double delta = 0.05;  // in (0, 1)

    /// Throws DomainError when a field is out of range.
    void validate() const;
};

/// empirical_risk + kl_penalty / lambda + epsilon + uniform_convergence_term.
double rwdg_bound(const BoundInputs& inputs);

enum class Surrogate { zero_one, hinge, log_loss };

std::string_view to_string(Surrogate s);
Surrogate parse_surrogate(std::string_view name);

/// Bounded surrogate of the 0-1 loss given the probability the model assigns
/// to the true answer. zero_one uses p >= 0.5 as correct; hinge is
/// clamp(2 - 2p, 0, 1) and log_loss is min(1, -log2 p). Each dominates the
/// 0-1 loss at the same threshold.
double surrogate_loss(Surrogate s, double p_true);

}  // namespace promptloop::theory
