#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "guidelab/condition.hpp"
#include "guidelab/mtl.hpp"
#include "guidelab/sampler.hpp"
#include "guidelab/score.hpp"

namespace guidelab {

struct LandscapeSettings {
    int n_samples = 2000;
    int grid = 41;
    double extent = 3.0;
    int t = 0;  // 0: use steps/2
};

// Fully resolved experiment description. Every field except `score` and
// `conditions` has a default; unknown config keys are fatal.
struct ExperimentConfig {
    std::string name = "run";
    int dim = 2;
    int steps = 100;
    double beta_min = 1e-4;
    double beta_max = 0.2;
    std::uint64_t seed = 1;
    int runs = 1;
    int threads = 0;  // 0: all cores, 1: serial reference
    std::string out_dir = "out";

    GaussianMixture score;
    std::vector<Condition> conditions;

    GuidanceMode mode = GuidanceMode::unconditional;
    std::vector<int> order = {0, 1};
    int stop_t = 0;

    CagradConfig cagrad;
    SamplerSettings sampler;
    LandscapeSettings landscape;

    int landscape_t() const { return landscape.t > 0 ? landscape.t : std::max(1, steps / 2); }
};

// Parse + validate. Errors throw ConfigError naming the offending key path.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

}  // namespace guidelab
