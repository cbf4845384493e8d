#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "guidelab/algebra.hpp"
#include "guidelab/autodiff.hpp"
#include "guidelab/rng.hpp"
#include "guidelab/schedule.hpp"

namespace guidelab {

// Mixture of isotropic Gaussians. Serves as the data distribution; its
// diffused marginals have closed-form densities, so the score the sampler
// consumes is exact rather than learned.
struct GaussianMixture {
    std::vector<double> weights;            // sum to 1
    std::vector<std::vector<double>> means; // one vector of length dim per component
    std::vector<double> vars;               // isotropic variance per component

    int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
    int components() const { return static_cast<int>(weights.size()); }
    void validate() const;  // throws ConfigError on inconsistency
};

// Marginal of the forward process at noise level alpha_bar: means scale by
// sqrt(alpha_bar), variances become alpha_bar*var + (1 - alpha_bar).
GaussianMixture marginal_at(const GaussianMixture& m, double alpha_bar);

inline GaussianMixture marginal_at(const GaussianMixture& m, const NoiseSchedule& s, int t) {
    return marginal_at(m, s.alpha_bar(t));
}

// log density of the mixture at x, one max-shifted log-sum-exp over components.
template <typename V>
V log_density(const GaussianMixture& m, std::span<const V> x) {
    constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
    const int d = m.dim();
    const int K = m.components();
    std::vector<V> lw;
    lw.reserve(K);
    std::vector<V> diff(d);
    for (int k = 0; k < K; ++k) {
        for (int i = 0; i < d; ++i) diff[i] = x[i] - m.means[k][i];
        V q = sum_sq(diff);
        double c = std::log(m.weights[k]) - 0.5 * d * (kLog2Pi + std::log(m.vars[k]));
        lw.push_back(q * (-0.5 / m.vars[k]) + c);
    }
    return logsumexp(lw);
}

// Score of the mixture: responsibility-weighted per-component Gaussian scores.
template <typename V>
std::vector<V> score_at(const GaussianMixture& m, std::span<const V> x) {
    constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
    const int d = m.dim();
    const int K = m.components();
    std::vector<V> s(x.begin(), x.end());
    if (K == 1) {
        double inv = 1.0 / m.vars[0];
        for (int i = 0; i < d; ++i) s[i] = (m.means[0][i] - x[i]) * inv;
        return s;
    }
    std::vector<V> lw;
    lw.reserve(K);
    std::vector<V> diff(d);
    for (int k = 0; k < K; ++k) {
        for (int i = 0; i < d; ++i) diff[i] = x[i] - m.means[k][i];
        V q = sum_sq(diff);
        double c = std::log(m.weights[k]) - 0.5 * d * (kLog2Pi + std::log(m.vars[k]));
        lw.push_back(q * (-0.5 / m.vars[k]) + c);
    }
    V lse = logsumexp(lw);
    using std::exp;
    for (int k = 0; k < K; ++k) {
        V resp = exp(lw[k] - lse);
        double inv = 1.0 / m.vars[k];
        for (int i = 0; i < d; ++i) {
            V contrib = resp * ((m.means[k][i] - x[i]) * inv);
            s[i] = k == 0 ? contrib : s[i] + contrib;
        }
    }
    return s;
}

// (d score / dx) * v. The score expression is recorded once on a tape and the
// scalar dot(score, v) is swept in reverse; the score Jacobian is symmetric
// (it is the log-density Hessian), so the transposed product equals the
// directional derivative. Generic in S so the whole thing can itself be run
// over dual numbers for second-order chains.
template <typename S>
std::vector<S> score_jvp(const GaussianMixture& m, std::span<const S> x, std::span<const S> v) {
    Tape<S> tape;
    tape.reserve(40 * x.size() + 32 * m.components() + 64);
    std::vector<Var<S>> leaves(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) leaves[i] = make_leaf(tape, x[i]);
    std::vector<Var<S>> s = score_at(m, std::span<const Var<S>>(leaves));
    Var<S> scalar = dot(s, v);
    std::vector<S> adj = tape.adjoints(scalar.idx);
    std::vector<S> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = adj[leaves[i].idx];
    return out;
}

// Posterior-mean estimate of the clean sample: (x + (1 - alpha_bar)*score)/sqrt(alpha_bar).
// `m` must already be the marginal at alpha_bar.
template <typename V>
std::vector<V> predict_clean(const GaussianMixture& m, double alpha_bar, std::span<const V> x) {
    if (!(alpha_bar > 0.0)) throw EvalError("predict_clean", "alpha_bar = 0");
    double inv_sqrt = 1.0 / std::sqrt(alpha_bar);
    double one_minus = 1.0 - alpha_bar;
    std::vector<V> s = score_at(m, x);
    std::vector<V> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] + s[i] * one_minus) * inv_sqrt;
    return out;
}

// Draw one sample, CounterRng lane kScatter, counters keyed by sample index.
std::vector<double> sample_mixture(const GaussianMixture& m, const CounterRng& rng,
                                   std::uint64_t sample_index);

}  // namespace guidelab
