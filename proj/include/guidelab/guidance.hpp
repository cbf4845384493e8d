#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "guidelab/condition.hpp"
#include "guidelab/schedule.hpp"
#include "guidelab/score.hpp"

namespace guidelab {

// Sub-terms of the conditionally dependent two-condition gradient at one step.
// combined = term_I + term_II, term_II = retreat_part + score_jvp_part + hessian_part.
struct GuidanceBreakdown {
    std::vector<double> term_I;
    std::vector<double> g_hat;
    std::vector<double> retreat_part;
    std::vector<double> score_jvp_part;
    std::vector<double> hessian_part;
    std::vector<double> term_II;
    std::vector<double> combined;
    double cos_terms = 0.0;  // cosine(term_I, term_II)
    double cos_raw = 0.0;    // cosine of the two raw per-condition gradients at x
};

// Sum of per-condition guidance gradients: the baseline that treats the
// conditions as independent.
std::vector<double> independent_combine(std::span<const Condition> conds,
                                        const GaussianMixture& gm_t, double alpha_bar,
                                        std::span<const double> x);

// Lookahead state x_hat = r*x + beta*(score + g1) + sigma*z.
std::vector<double> intermediate_state(const StepCoeffs& sc, std::span<const double> x,
                                       std::span<const double> score,
                                       std::span<const double> g1, std::span<const double> z);

// Two-condition dependent gradient: cond1 contributes its plain gradient
// (term I); cond2 is evaluated at the lookahead state and pulled back through
// the update map's Jacobian (term II), with the Hessian product taken
// matrix-free. No d-by-d matrix is formed.
GuidanceBreakdown dependent_pair_grad(const GaussianMixture& gm_t, const StepCoeffs& sc,
                                      const Condition& cond1, const Condition& cond2,
                                      std::span<const double> x, std::span<const double> z);

// dependent_pair_grad with roles assigned by `order` over a 2-condition list.
GuidanceBreakdown sequenced_combine(std::span<const Condition> conds, std::span<const int> order,
                                    const GaussianMixture& gm_t, const StepCoeffs& sc,
                                    std::span<const double> x, std::span<const double> z);

// Test hook: "hessian_sign" flips the sign of hessian_part inside
// dependent_pair_grad; empty string restores normal behavior.
void set_fault_injection(std::string_view name);

}  // namespace guidelab
