#include "guidelab/schedule.hpp"

#include <cmath>
#include <string>

#include "guidelab/errors.hpp"

namespace guidelab {

StepCoeffs NoiseSchedule::coeffs(int t) const {
    if (t < 1 || t > n_steps)
        throw ConfigError("step index " + std::to_string(t) + " outside 1.." +
                          std::to_string(n_steps));
    double b = betas[t - 1];
    return {2.0 - std::sqrt(1.0 - b), b, std::sqrt(b), alpha_bars[t]};
}

NoiseSchedule linear_schedule(int n_steps, double beta_min, double beta_max) {
    if (n_steps < 1)
        throw ConfigError("steps must be >= 1, got " + std::to_string(n_steps));
    if (!(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0))
        throw ConfigError("beta bounds must satisfy 0 < beta_min <= beta_max < 1, got [" +
                          std::to_string(beta_min) + ", " + std::to_string(beta_max) + "]");

    NoiseSchedule s;
    s.n_steps = n_steps;
    s.betas.resize(n_steps);
    s.alphas.resize(n_steps);
    s.alpha_bars.resize(n_steps + 1);
    s.alpha_bars[0] = 1.0;
    for (int t = 1; t <= n_steps; ++t) {
        double frac = n_steps == 1 ? 0.0 : double(t - 1) / double(n_steps - 1);
        double b = beta_min + (beta_max - beta_min) * frac;
        s.betas[t - 1] = b;
        s.alphas[t - 1] = 1.0 - b;
        s.alpha_bars[t] = s.alpha_bars[t - 1] * (1.0 - b);
    }
    return s;
}

}  // namespace guidelab
