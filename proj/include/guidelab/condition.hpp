#pragma once

#include <span>
#include <string>
#include <vector>

#include "guidelab/autodiff.hpp"
#include "guidelab/score.hpp"

namespace guidelab {

enum class CondKind { quadratic_target, logistic_classifier, ring, alignment };
enum class CondMode { direct, denoised };

// One attribute as a differentiable energy: log p(c|x) ~ -scale * E(z), where
// z is the state itself (direct) or the predicted clean sample (denoised).
struct Condition {
    CondKind kind = CondKind::quadratic_target;
    CondMode mode = CondMode::direct;
    double scale = 1.0;
    std::string name;

    std::vector<double> target;  // quadratic_target
    std::vector<double> w;       // logistic_classifier normal
    double b = 0.0;              // logistic_classifier bias
    double y = 1.0;              // logistic_classifier label, -1 or +1
    std::vector<double> center;  // ring center
    double radius = 0.0;         // ring radius
    std::vector<double> u;       // alignment direction, unit norm

    ScalarFunction energy;  // scale * E(z), built by the factories below
};

Condition make_quadratic_target(std::vector<double> target, double scale,
                                CondMode mode, std::string name);
Condition make_logistic_classifier(std::vector<double> w, double b, double y, double scale,
                                   CondMode mode, std::string name);
Condition make_ring(std::vector<double> center, double radius, double scale,
                    CondMode mode, std::string name);
Condition make_alignment(std::vector<double> u, double scale, CondMode mode, std::string name);

const char* to_string(CondKind k);
const char* to_string(CondMode m);

// Scaled energy at state x. `gm_t` must be the diffused marginal at alpha_bar
// (used only in denoised mode, for the clean-sample prediction).
double energy_value(const Condition& c, const GaussianMixture& gm_t, double alpha_bar,
                    std::span<const double> x);

// Guidance gradient g = -grad_x(scale * E(z(x))); in denoised mode the chain
// rule through predict_clean runs via score_jvp. Generic in S so the whole
// map can be evaluated over dual numbers.
template <typename S>
std::vector<S> cond_grad_s(const Condition& c, const GaussianMixture& gm_t, double alpha_bar,
                           std::span<const S> x) {
    if (c.mode == CondMode::direct) {
        std::vector<S> du = gradient_s<S>(c.energy, x);
        for (auto& g : du) g = -g;
        return du;
    }
    if (!(alpha_bar > 0.0)) throw EvalError("predict_clean", c.name);
    std::vector<S> z = predict_clean(gm_t, alpha_bar, x);
    std::vector<S> u = gradient_s<S>(c.energy, std::span<const S>(z));
    std::vector<S> jv = score_jvp<S>(gm_t, x, std::span<const S>(u));
    double one_minus = 1.0 - alpha_bar;
    double inv_sqrt = 1.0 / std::sqrt(alpha_bar);
    std::vector<S> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = (u[i] + jv[i] * one_minus) * (-inv_sqrt);
    return g;
}

inline std::vector<double> cond_grad(const Condition& c, const GaussianMixture& gm_t,
                                     double alpha_bar, std::span<const double> x) {
    return cond_grad_s<double>(c, gm_t, alpha_bar, x);
}

// Directional derivative of cond_grad: the guidance field evaluated over dual
// numbers seeded with v; tangents are (Hessian of log p(c|x)) * v.
std::vector<double> cond_hvp(const Condition& c, const GaussianMixture& gm_t, double alpha_bar,
                             std::span<const double> x, std::span<const double> v);

// cond_grad as a dual-evaluable field, for the columnwise scalar-trick route.
DualField cond_grad_field(const Condition& c, const GaussianMixture& gm_t, double alpha_bar);

}  // namespace guidelab
