#pragma once

#include <vector>

namespace guidelab {

// Coefficients of one ancestral update x_{t-1} = r*x + beta*(score+guidance) + sigma*z.
struct StepCoeffs {
    double r;
    double beta;
    double sigma;
    double alpha_bar;
};

// Discrete variance-preserving noise schedule, t = 1..N, reverse loop t = N..1.
struct NoiseSchedule {
    int n_steps = 0;
    std::vector<double> betas;       // betas[t-1] = beta_t
    std::vector<double> alphas;      // 1 - beta_t
    std::vector<double> alpha_bars;  // alpha_bars[t] = prod_{s<=t}, alpha_bars[0] = 1

    double beta(int t) const { return betas[t - 1]; }
    double alpha_bar(int t) const { return alpha_bars[t]; }
    StepCoeffs coeffs(int t) const;
};

// Linear interpolation from beta_min (t=1) to beta_max (t=N).
NoiseSchedule linear_schedule(int n_steps, double beta_min, double beta_max);

}  // namespace guidelab
