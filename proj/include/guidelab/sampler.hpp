#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "guidelab/condition.hpp"
#include "guidelab/diagnostics.hpp"
#include "guidelab/mtl.hpp"
#include "guidelab/schedule.hpp"
#include "guidelab/score.hpp"

namespace guidelab {

enum class GuidanceMode { unconditional, independent, dependent_pair, cagrad_multi };

const char* to_string(GuidanceMode m);
GuidanceMode parse_mode(const std::string& s);  // throws ConfigError

struct SamplerSettings {
    int record_every = 1;
    int guidance_stop_t = 0;      // guidance zeroed at steps t < this
    bool suppress_final_noise = true;
    bool fresh_noise = false;     // lookahead state uses an independent draw
};

struct RunTrace {
    std::uint64_t run_id = 0;
    std::uint64_t seed = 0;
    GuidanceMode mode = GuidanceMode::unconditional;
    std::vector<StepRecord> records;
    std::vector<double> x0;
    std::vector<double> final_energies;  // per condition, recomputed at x0
    bool any_cagrad_warning = false;
};

// One reverse step from x at index t; exposed for tests. `z` is the shared
// per-step noise; `z_update` the noise entering the state update (equal to `z`
// unless fresh_noise). Returns x_{t-1} and fills `rec`.
std::vector<double> sampler_step(const GaussianMixture& gm0, const NoiseSchedule& sched, int t,
                                 std::span<const Condition> conds, GuidanceMode mode,
                                 std::span<const int> order, const CagradConfig& cagrad,
                                 const SamplerSettings& st, std::span<const double> x,
                                 std::span<const double> z, std::span<const double> z_update,
                                 StepRecord* rec);

// Full reverse trajectory from x_N ~ N(0, I) (or `x_init` when given).
RunTrace sample(const GaussianMixture& gm0, const NoiseSchedule& sched,
                std::span<const Condition> conds, GuidanceMode mode,
                std::span<const int> order, const CagradConfig& cagrad,
                const SamplerSettings& st, std::uint64_t seed, std::uint64_t run_id,
                const std::vector<double>* x_init = nullptr);

}  // namespace guidelab
