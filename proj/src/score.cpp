#include "guidelab/score.hpp"

#include <cmath>
#include <string>

#include "guidelab/errors.hpp"

namespace guidelab {

void GaussianMixture::validate() const {
    if (weights.empty()) throw ConfigError("score: mixture needs at least one component");
    if (means.size() != weights.size() || vars.size() != weights.size())
        throw ConfigError("score: weights, means, vars must have equal length");
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw ConfigError("score: mixture weights must be positive");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw ConfigError("score: mixture weights sum to " + std::to_string(wsum) +
                          ", expected 1");
    std::size_t d = means[0].size();
    if (d == 0) throw ConfigError("score: mixture means must be non-empty vectors");
    for (const auto& mu : means)
        if (mu.size() != d) throw ConfigError("score: mixture means must share one dimension");
    for (double v : vars)
        if (!(v > 0.0)) throw ConfigError("score: mixture variances must be positive");
}

GaussianMixture marginal_at(const GaussianMixture& m, double alpha_bar) {
    GaussianMixture out = m;
    double root = std::sqrt(alpha_bar);
    for (auto& mu : out.means)
        for (double& c : mu) c *= root;
    for (double& v : out.vars) v = alpha_bar * v + (1.0 - alpha_bar);
    return out;
}

std::vector<double> sample_mixture(const GaussianMixture& m, const CounterRng& rng,
                                   std::uint64_t sample_index) {
    const int d = m.dim();
    int k = 0;
    if (m.components() > 1) {
        double u = rng.uniform(CounterRng::kScatter, sample_index, static_cast<std::uint64_t>(d), 0);
        double acc = 0.0;
        for (int j = 0; j < m.components(); ++j) {
            acc += m.weights[j];
            if (u < acc) { k = j; break; }
            k = j;
        }
    }
    double sd = std::sqrt(m.vars[k]);
    std::vector<double> x(d);
    for (int i = 0; i < d; ++i)
        x[i] = m.means[k][i] + sd * rng.normal(CounterRng::kScatter, sample_index, i);
    return x;
}

}  // namespace guidelab
