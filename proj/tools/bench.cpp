// Serial-reference vs OpenMP timing, with a bitwise determinism check: the
// two thread settings must produce identical bytes.

#include <chrono>
#include <cstring>
#include <iostream>
#include <vector>

#include "guidelab/condition.hpp"
#include "guidelab/diagnostics.hpp"
#include "guidelab/parallel.hpp"
#include "guidelab/sampler.hpp"
#include "guidelab/schedule.hpp"
#include "guidelab/score.hpp"

using namespace guidelab;

namespace {

struct BenchSetup {
    GaussianMixture gm0;
    NoiseSchedule sched = linear_schedule(60, 1e-4, 0.2);
    std::vector<Condition> conds;
    CagradConfig cagrad;
    SamplerSettings st;
    int runs = 32;
    int dim = 16;
};

BenchSetup make_setup() {
    BenchSetup s;
    s.gm0.weights = {0.5, 0.3, 0.2};
    s.gm0.means.assign(3, std::vector<double>(s.dim, 0.0));
    for (int i = 0; i < s.dim; ++i) {
        s.gm0.means[0][i] = 1.5;
        s.gm0.means[1][i] = -1.0;
        s.gm0.means[2][i] = (i % 2 == 0) ? 0.5 : -0.5;
    }
    s.gm0.vars = {0.8, 1.1, 0.6};
    std::vector<double> target(s.dim, 0.7), w(s.dim, 0.0), center(s.dim, 0.0);
    for (int i = 0; i < s.dim; ++i) w[i] = (i % 3 == 0) ? 0.4 : -0.2;
    s.conds.push_back(make_quadratic_target(target, 1.2, CondMode::denoised, "pull"));
    s.conds.push_back(make_logistic_classifier(w, 0.1, 1.0, 0.8, CondMode::direct, "side"));
    s.conds.push_back(make_ring(center, 2.5, 0.6, CondMode::denoised, "ring"));
    s.st.record_every = 60;
    return s;
}

double time_batch(const BenchSetup& s, int threads, std::vector<std::vector<double>>& x0s) {
    x0s.assign(s.runs, {});
    std::vector<int> order = {0, 1};
    auto start = std::chrono::steady_clock::now();
    parallel_for(static_cast<std::size_t>(s.runs), threads, [&](std::size_t i) {
        RunTrace tr = sample(s.gm0, s.sched, s.conds, GuidanceMode::cagrad_multi, order,
                             s.cagrad, s.st, 42 + i, i);
        x0s[i] = std::move(tr.x0);
    });
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool bitwise_equal(const std::vector<std::vector<double>>& a,
                   const std::vector<std::vector<double>>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        if (std::memcmp(a[i].data(), b[i].data(), a[i].size() * sizeof(double)) != 0)
            return false;
    }
    return true;
}

}  // namespace

int main() {
    BenchSetup s = make_setup();
    std::cout << "hardware threads: " << hardware_threads() << "\n";

    std::vector<std::vector<double>> serial_x0, parallel_x0;
    double warm = time_batch(s, 1, serial_x0);  // warm caches before timing
    double t_serial = time_batch(s, 1, serial_x0);
    double t_parallel = time_batch(s, 0, parallel_x0);
    (void)warm;
    std::cout << "trajectory batch (" << s.runs << " runs, dim " << s.dim << "): serial "
              << t_serial << " s, parallel " << t_parallel << " s, speedup "
              << (t_parallel > 0 ? t_serial / t_parallel : 0.0) << "x\n";
    bool traj_ok = bitwise_equal(serial_x0, parallel_x0);
    std::cout << "trajectory determinism: " << (traj_ok ? "bitwise identical" : "MISMATCH")
              << "\n";

    auto t0 = std::chrono::steady_clock::now();
    LandscapeGrid g1 = landscape_scan(s.gm0, s.sched, s.conds, 30, 1500, 41, 3.0, 9, 1);
    auto t1 = std::chrono::steady_clock::now();
    LandscapeGrid g2 = landscape_scan(s.gm0, s.sched, s.conds, 30, 1500, 41, 3.0, 9, 0);
    auto t2 = std::chrono::steady_clock::now();
    double ls = std::chrono::duration<double>(t1 - t0).count();
    double lp = std::chrono::duration<double>(t2 - t1).count();
    std::cout << "landscape scan (41x41): serial " << ls << " s, parallel " << lp
              << " s, speedup " << (lp > 0 ? ls / lp : 0.0) << "x\n";
    bool land_ok = g1.energy.size() == g2.energy.size() &&
                   std::memcmp(g1.energy.data(), g2.energy.data(),
                               g1.energy.size() * sizeof(double)) == 0;
    std::cout << "landscape determinism: " << (land_ok ? "bitwise identical" : "MISMATCH")
              << "\n";

    return traj_ok && land_ok ? 0 : 1;
}
