#include "promptloop/generator/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "promptloop/core/canonicalize.hpp"
#include "promptloop/errors.hpp"
#include "promptloop/theory/bound.hpp"

namespace promptloop::generator {

void LabelPrior::validate() const {
    if (labels.empty() || labels.size() != probabilities.size())
        throw ConfigError("label prior needs one probability per label");
    double sum = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("label prior has a negative entry");
        sum += p;
    }
    if (sum == 0.0) throw ConfigError("label prior is degenerate (all zero)");
    if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("label prior does not sum to 1");
}

std::optional<std::size_t> LabelPrior::index_of(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels.begin());
}

LabelPrior estimate_prior(const std::vector<core::LabeledExample>& seeds,
                          const std::optional<std::vector<std::string>>& label_space, core::AnswerFormat format) {
    LabelPrior prior;
    if (label_space) {
        prior.labels = *label_space;
    } else {
        std::set<std::string> distinct;
        for (const auto& s : seeds) distinct.insert(s.target);
        prior.labels.assign(distinct.begin(), distinct.end());
    }
    if (prior.labels.empty()) throw ConfigError("cannot estimate a label prior without labels");

    std::vector<std::string> canon;
    for (const auto& l : prior.labels) canon.push_back(core::canonicalize_answer(l, format));
    std::vector<double> counts(prior.labels.size(), 1.0);
    for (const auto& s : seeds) {
        auto c = core::canonicalize_answer(s.target, format);
        auto it = std::find(canon.begin(), canon.end(), c);
        if (it != canon.end()) counts[static_cast<std::size_t>(it - canon.begin())] += 1.0;
    }
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    for (double c : counts) prior.probabilities.push_back(c / total);
    return prior;
}

std::string draw_label(const LabelPrior& prior, core::Rng& rng) {
    prior.validate();
    const double u = core::uniform01(rng);
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < prior.labels.size(); ++i) {
        if (prior.probabilities[i] <= 0.0) continue;
        last_positive = i;
        cumulative += prior.probabilities[i];
        if (u < cumulative) return prior.labels[i];
    }
    // u landed in the rounding gap just below 1
    return prior.labels[last_positive];
}

double empirical_label_kl(const std::vector<std::string>& history, const LabelPrior& prior) {
    if (history.empty()) throw DomainError("empirical label KL needs a non-empty history");
    prior.validate();
    std::vector<double> q(prior.labels.size(), 0.0);
    for (const auto& label : history) {
        auto idx = prior.index_of(label);
        if (!idx) throw DivergenceUndefinedError("label '" + label + "' is outside the prior's support");
        q[*idx] += 1.0;
    }
    for (double& v : q) v /= static_cast<double>(history.size());
    return theory::kl_divergence(q, prior.probabilities);
}

std::vector<int> build_schedule(const core::TaskSpec& task) {
    if (task.difficulty_max < 1) throw ConfigError("difficulty_max must be at least 1");
    std::vector<int> s(static_cast<std::size_t>(task.difficulty_max));
    std::iota(s.begin(), s.end(), 1);
    return s;
}

}  // namespace promptloop::generator
