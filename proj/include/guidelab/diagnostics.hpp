#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "guidelab/condition.hpp"
#include "guidelab/schedule.hpp"
#include "guidelab/score.hpp"

namespace guidelab {

// Cosine similarity; returns quiet NaN (serialized "nan") when either norm is
// below 1e-12.
double cosine(std::span<const double> u, std::span<const double> v);

// One row of the step trace. Cosines may hold the NaN sentinel.
struct StepRecord {
    std::uint64_t run_id = 0;
    std::uint64_t seed = 0;
    std::string mode;
    int t = 0;
    double beta_t = 0.0;
    std::vector<double> energies;    // per condition, config order
    std::vector<double> grad_norms;  // per condition, config order
    double cos_raw = 0.0;
    double cos_terms = 0.0;
    double combined_norm = 0.0;
    double state_norm = 0.0;
    bool cagrad_warning = false;
};

std::string trace_csv_header(int n_conditions);
void write_trace_csv(const std::string& path, std::span<const StepRecord> records,
                     int n_conditions);

// Top-2 principal directions of a point cloud via power iteration with
// deflation. Deterministic: fixed start vector, re-randomized from `seed` only
// on stagnation. Signs fixed so each direction's first sizable entry is positive.
struct PcaResult {
    std::vector<double> dir1, dir2;
    double eigval1 = 0.0, eigval2 = 0.0;
    double var_ratio1 = 0.0, var_ratio2 = 0.0;  // eigval / trace(covariance)
};
PcaResult pca_top2(const std::vector<std::vector<double>>& points, std::uint64_t seed);

// Total condition energy evaluated on a 2D grid spanned by the top-2 PCA
// directions of samples from the diffused marginal at step t.
struct LandscapeGrid {
    std::vector<double> dir1, dir2;
    double var_ratio1 = 0.0, var_ratio2 = 0.0;
    std::vector<double> center;        // sample mean, embedding origin
    std::vector<double> a_coords, b_coords;
    std::vector<double> energy;        // row-major, a outer, b inner
};
LandscapeGrid landscape_scan(const GaussianMixture& gm0, const NoiseSchedule& sched,
                             std::span<const Condition> conds, int t, int n_samples,
                             int grid_n, double extent, std::uint64_t seed, int threads);

void write_landscape_csv(const std::string& path, const LandscapeGrid& grid);
void write_landscape_svg(const std::string& path, const LandscapeGrid& grid);

// Mean per-series curves over t, one polyline per series.
void write_curves_svg(const std::string& path, const std::string& title,
                      std::span<const std::string> series_names,
                      std::span<const std::vector<double>> series,  // indexed by series, then point
                      std::span<const double> t_values);

// 17-significant-digit float formatting shared by every CSV writer.
std::string fmt17(double v);

}  // namespace guidelab
