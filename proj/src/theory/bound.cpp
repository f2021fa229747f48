#include "promptloop/theory/bound.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "promptloop/errors.hpp"

namespace promptloop::theory {

namespace {

void check_distribution(std::span<const double> v, const char* name) {
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError(std::string(name) + " has a negative or non-finite entry");
        sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw DomainError(std::string(name) + " does not sum to 1");
}

}  // namespace

double kl_divergence(std::span<const double> q, std::span<const double> p) {
    if (q.size() != p.size() || q.empty()) throw DomainError("kl_divergence needs two vectors of equal, non-zero length");
    check_distribution(q, "q");
    check_distribution(p, "p");
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] == 0.0) continue;
        if (p[i] == 0.0) throw DivergenceUndefinedError("q has mass on outcome " + std::to_string(i) + " where p is zero");
        sum += q[i] * std::log(q[i] / p[i]);
    }
    // rounding can leave a tiny negative value for q == p
    return std::max(sum, 0.0);
}

double uniform_convergence_term(std::uint64_t prompt_space_size, std::uint64_t n, double delta) {
    if (prompt_space_size < 1) throw DomainError("prompt space size must be at least 1");
    if (n < 1) throw DomainError("sample count must be at least 1");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    double num = std::log(static_cast<double>(prompt_space_size)) - std::log(delta);
    return std::sqrt(num / static_cast<double>(n));
}

void BoundInputs::validate() const {
    if (!(empirical_risk >= 0.0 && empirical_risk <= 1.0)) throw DomainError("empirical risk must lie in [0, 1]");
    if (!(kl_penalty >= 0.0) || !std::isfinite(kl_penalty)) throw DomainError("kl penalty must be finite and >= 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be finite and >= 0");
    if (prompt_space_size < 1) throw DomainError("prompt space size must be at least 1");
    if (n < 1) throw DomainError("sample count must be at least 1");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
}

double rwdg_bound(const BoundInputs& in) {
    in.validate();
    return in.empirical_risk + in.kl_penalty / in.lambda + in.epsilon +
           uniform_convergence_term(in.prompt_space_size, in.n, in.delta);
}

std::string_view to_string(Surrogate s) {
    switch (s) {
    case Surrogate::zero_one: return "zero-one";
    case Surrogate::hinge: return "hinge";
    case Surrogate::log_loss: return "log-loss";
    }
    return "zero-one";
}

Surrogate parse_surrogate(std::string_view name) {
    if (name == "zero-one") return Surrogate::zero_one;
    if (name == "hinge") return Surrogate::hinge;
    if (name == "log-loss") return Surrogate::log_loss;
    throw ConfigError("unknown surrogate '" + std::string(name) + "'");
}

double surrogate_loss(Surrogate s, double p_true) {
    if (!(p_true >= 0.0 && p_true <= 1.0)) throw DomainError("probability must lie in [0, 1]");
    switch (s) {
    case Surrogate::zero_one: return p_true >= 0.5 ? 0.0 : 1.0;
    case Surrogate::hinge: return std::clamp(2.0 - 2.0 * p_true, 0.0, 1.0);
    case Surrogate::log_loss: return p_true == 0.0 ? 1.0 : std::min(1.0, -std::log2(p_true));
    }
    return 1.0;
}

}  // namespace promptloop::theory
