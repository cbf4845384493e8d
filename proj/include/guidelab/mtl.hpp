#pragma once

#include <span>
#include <utility>
#include <vector>

#include "guidelab/condition.hpp"
#include "guidelab/guidance.hpp"
#include "guidelab/schedule.hpp"
#include "guidelab/score.hpp"

namespace guidelab {

// All ordered-pair dependent gradients for n >= 2 conditions.
struct PairGradientSet {
    int n = 0;
    std::vector<std::pair<int, int>> pairs;        // sorted (i, j), i != j
    std::vector<std::vector<double>> entries;      // combined gradient per pair
    std::vector<double> g0;                        // mean of entries
    double mean_cos_raw = 0.0;                     // mean over pair breakdowns
    double mean_cos_terms = 0.0;
};

struct CagradConfig {
    double c = 0.4;
    int inner_iters = 200;
    double inner_step = 0.1;
    double inner_tol = 1e-8;
    double norm_guard = 1e-12;
};

struct CagradOutcome {
    std::vector<double> g;       // combined gradient
    std::vector<double> w;       // solver weights on the simplex
    double phi = 0.0;            // c^2 ||g0||^2
    double objective = 0.0;      // F at the returned weights
    bool warning = false;        // inner solver hit the iteration cap
};

PairGradientSet pairwise_gradients(std::span<const Condition> conds, const GaussianMixture& gm_t,
                                   const StepCoeffs& sc, std::span<const double> x,
                                   std::span<const double> z);

// F(w) = g_w . g0 + sqrt(phi) * ||g_w||, g_w = sum_a w_a * entries[a].
double inner_objective(std::span<const double> w, const PairGradientSet& set,
                       const CagradConfig& cfg);

// Conflict-averse combination: g0 plus a correction of norm sqrt(phi) along
// the minimizing simplex combination. c = 0 short-circuits to g0.
CagradOutcome cagrad_combine(const PairGradientSet& set, const CagradConfig& cfg);

// Euclidean projection onto {w >= 0, sum w = 1}, sort-and-threshold.
std::vector<double> project_simplex(std::span<const double> v);

}  // namespace guidelab
