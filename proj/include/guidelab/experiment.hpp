#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "guidelab/config.hpp"
#include "guidelab/sampler.hpp"

namespace guidelab {

struct RunOutcome {
    std::uint64_t run_id = 0;
    std::uint64_t seed = 0;
    std::string label;
    std::vector<double> final_energies;
    double final_total = 0.0;
    bool cagrad_warning = false;
    bool failed = false;
    std::string error;
};

// `runs` seeded trajectories under the configured mode. Writes trace.csv,
// summary.csv and energy.svg into cfg.out_dir unless write_files is false.
std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg, bool write_files = true);

struct CompareVariant {
    std::string label;
    GuidanceMode mode;
    std::vector<int> order;
};

struct WinRate {
    std::string challenger, baseline;
    double rate = 0.0;  // fraction of seeds where challenger < baseline, ties 0.5
    int paired = 0;
};

struct CompareResult {
    std::vector<CompareVariant> variants;
    std::vector<std::vector<RunOutcome>> outcomes;  // [variant][run]
    std::vector<double> mean_totals;                // per variant, successful runs
    std::vector<WinRate> win_rates;                 // consecutive later-vs-earlier pairs
};

// Identical seed sets (and so identical noise streams) across variants.
// Writes compare_pairs.csv, compare_curves.csv, compare.svg.
CompareResult compare_experiment(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& modes, bool swap_order,
                                 bool write_files = true);

// PCA landscape at cfg.landscape_t(); writes landscape.csv, landscape.svg, pca.csv.
void landscape_experiment(const ExperimentConfig& cfg);

// Re-runs the experiment with every condition scale multiplied by each factor;
// writes sweep.csv.
void sweep_experiment(const ExperimentConfig& cfg, const std::vector<double>& factors);

struct CagradBenchResult {
    int instances = 0;
    int grid_checked = 0;
    double max_gap = 0.0;   // solver objective minus grid minimum, relative
    double seconds = 0.0;
    int warnings = 0;
};

// Random-instance solver benchmark; grid cross-check when entries <= 6.
CagradBenchResult cagrad_bench(int entries, int dim, int instances, std::uint64_t seed,
                               bool with_grid, const CagradConfig& cfg);

// Condition rebuilt with a different guidance scale.
Condition with_scale(const Condition& c, double scale);

}  // namespace guidelab
