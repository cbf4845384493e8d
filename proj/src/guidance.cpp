#include "guidelab/guidance.hpp"

#include <string>

#include "guidelab/diagnostics.hpp"
#include "guidelab/errors.hpp"

namespace guidelab {

namespace {
bool g_fault_hessian_sign = false;
}

void set_fault_injection(std::string_view name) {
    if (name.empty()) {
        g_fault_hessian_sign = false;
    } else if (name == "hessian_sign") {
        g_fault_hessian_sign = true;
    } else {
        throw ConfigError("unknown fault injection '" + std::string(name) + "'");
    }
}

std::vector<double> independent_combine(std::span<const Condition> conds,
                                        const GaussianMixture& gm_t, double alpha_bar,
                                        std::span<const double> x) {
    std::vector<double> g(x.size(), 0.0);
    for (const Condition& c : conds) {
        std::vector<double> gi = cond_grad(c, gm_t, alpha_bar, x);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gi[i];
    }
    return g;
}

std::vector<double> intermediate_state(const StepCoeffs& sc, std::span<const double> x,
                                       std::span<const double> score,
                                       std::span<const double> g1, std::span<const double> z) {
    std::vector<double> xhat(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        xhat[i] = sc.r * x[i] + sc.beta * (score[i] + g1[i]) + sc.sigma * z[i];
    return xhat;
}

GuidanceBreakdown dependent_pair_grad(const GaussianMixture& gm_t, const StepCoeffs& sc,
                                      const Condition& cond1, const Condition& cond2,
                                      std::span<const double> x, std::span<const double> z) {
    const std::size_t d = x.size();
    GuidanceBreakdown out;

    auto guarded = [](const char* part, auto&& fn) {
        try {
            return fn();
        } catch (const EvalError& e) {
            throw EvalError(e.op(), std::string(part) + " (" +
                                        (e.context().empty() ? "?" : e.context()) + ")");
        }
    };

    out.term_I = guarded("term_I", [&] { return cond_grad(cond1, gm_t, sc.alpha_bar, x); });
    std::vector<double> s = guarded("score", [&] {
        return score_at(gm_t, x);
    });
    std::vector<double> xhat = intermediate_state(sc, x, s, out.term_I, z);
    out.g_hat = guarded("g_hat", [&] { return cond_grad(cond2, gm_t, sc.alpha_bar, xhat); });

    out.retreat_part.resize(d);
    for (std::size_t i = 0; i < d; ++i) out.retreat_part[i] = sc.r * out.g_hat[i];

    std::vector<double> jv = guarded("score_jvp_part", [&] {
        return score_jvp<double>(gm_t, x, out.g_hat);
    });
    out.score_jvp_part.resize(d);
    for (std::size_t i = 0; i < d; ++i) out.score_jvp_part[i] = sc.beta * jv[i];

    std::vector<double> hv = guarded("hessian_part", [&] {
        return cond_hvp(cond1, gm_t, sc.alpha_bar, x, out.g_hat);
    });
    double hsign = g_fault_hessian_sign ? -sc.beta : sc.beta;
    out.hessian_part.resize(d);
    for (std::size_t i = 0; i < d; ++i) out.hessian_part[i] = hsign * hv[i];

    out.term_II.resize(d);
    for (std::size_t i = 0; i < d; ++i)
        out.term_II[i] = out.retreat_part[i] + out.score_jvp_part[i] + out.hessian_part[i];

    out.combined.resize(d);
    for (std::size_t i = 0; i < d; ++i) out.combined[i] = out.term_I[i] + out.term_II[i];

    std::vector<double> g2 = guarded("cos_raw", [&] { return cond_grad(cond2, gm_t, sc.alpha_bar, x); });
    out.cos_raw = cosine(out.term_I, g2);
    out.cos_terms = cosine(out.term_I, out.term_II);
    return out;
}

GuidanceBreakdown sequenced_combine(std::span<const Condition> conds, std::span<const int> order,
                                    const GaussianMixture& gm_t, const StepCoeffs& sc,
                                    std::span<const double> x, std::span<const double> z) {
    if (order.size() != 2 || order[0] == order[1] ||
        order[0] < 0 || order[1] < 0 ||
        order[0] >= static_cast<int>(conds.size()) || order[1] >= static_cast<int>(conds.size()))
        throw ConfigError("guidance.order must name two distinct condition indices");
    return dependent_pair_grad(gm_t, sc, conds[order[0]], conds[order[1]], x, z);
}

}  // namespace guidelab
