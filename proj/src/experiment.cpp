#include "guidelab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "guidelab/diagnostics.hpp"
#include "guidelab/errors.hpp"
#include "guidelab/parallel.hpp"
#include "guidelab/rng.hpp"
#include "guidelab/schedule.hpp"

namespace guidelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RunError(0, "emit", "cannot open " + path);
    return out;
}

std::string fmtg(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Batch {
    std::vector<RunOutcome> outcomes;
    std::vector<RunTrace> traces;  // empty slots for failed runs
};

Batch run_batch(const ExperimentConfig& cfg, GuidanceMode mode, const std::vector<int>& order,
                const std::string& label, bool collect_traces) {
    NoiseSchedule sched = linear_schedule(cfg.steps, cfg.beta_min, cfg.beta_max);
    Batch batch;
    batch.outcomes.resize(static_cast<std::size_t>(cfg.runs));
    batch.traces.resize(static_cast<std::size_t>(cfg.runs));
    parallel_for(static_cast<std::size_t>(cfg.runs), cfg.threads, [&](std::size_t i) {
        RunOutcome& out = batch.outcomes[i];
        out.run_id = i;
        out.seed = cfg.seed + i;
        out.label = label;
        try {
            RunTrace tr = sample(cfg.score, sched, cfg.conditions, mode, order, cfg.cagrad,
                                 cfg.sampler, out.seed, i);
            out.final_energies = tr.final_energies;
            out.final_total = 0.0;
            for (double e : tr.final_energies) out.final_total += e;
            out.cagrad_warning = tr.any_cagrad_warning;
            if (collect_traces) batch.traces[i] = std::move(tr);
        } catch (const std::exception& e) {
            out.failed = true;
            out.error = e.what();
            out.final_energies.assign(cfg.conditions.size(), kNaN);
            out.final_total = kNaN;
        }
    });
    return batch;
}

// Mean per-condition energy and mean total at each recorded step, over the
// successful runs. Returns false when no run succeeded.
bool mean_curves(const Batch& batch, std::size_t n_conds, std::vector<double>& t_values,
                 std::vector<std::vector<double>>& series) {
    const RunTrace* first = nullptr;
    for (std::size_t i = 0; i < batch.outcomes.size(); ++i)
        if (!batch.outcomes[i].failed) { first = &batch.traces[i]; break; }
    if (!first || first->records.empty()) return false;
    std::size_t n_rec = first->records.size();
    t_values.resize(n_rec);
    for (std::size_t r = 0; r < n_rec; ++r) t_values[r] = first->records[r].t;
    series.assign(n_conds + 1, std::vector<double>(n_rec, 0.0));
    std::size_t ok = 0;
    for (std::size_t i = 0; i < batch.outcomes.size(); ++i) {
        if (batch.outcomes[i].failed) continue;
        const RunTrace& tr = batch.traces[i];
        if (tr.records.size() != n_rec) continue;
        ++ok;
        for (std::size_t r = 0; r < n_rec; ++r) {
            double total = 0.0;
            for (std::size_t c = 0; c < n_conds; ++c) {
                double e = tr.records[r].energies[c];
                series[c][r] += e;
                total += e;
            }
            series[n_conds][r] += total;
        }
    }
    if (ok == 0) return false;
    for (auto& s : series)
        for (double& v : s) v /= static_cast<double>(ok);
    return true;
}

void write_summary_csv(const std::string& path, const std::vector<RunOutcome>& outcomes,
                       std::size_t n_conds) {
    std::ofstream out = open_out(path);
    out << "run_id,seed,mode";
    for (std::size_t c = 0; c < n_conds; ++c) out << ",energy_" << c;
    out << ",final_total,cagrad_warning,error\n";
    for (const RunOutcome& o : outcomes) {
        out << o.run_id << ',' << o.seed << ',' << o.label;
        for (std::size_t c = 0; c < n_conds; ++c) out << ',' << fmt17(o.final_energies[c]);
        out << ',' << fmt17(o.final_total) << ',' << (o.cagrad_warning ? 1 : 0) << ','
            << o.error << '\n';
    }
}

struct MeanStderr {
    double mean = kNaN, stderr_ = kNaN;
    int n = 0;
};

MeanStderr totals_summary(const std::vector<RunOutcome>& outcomes) {
    MeanStderr ms;
    double sum = 0.0;
    for (const RunOutcome& o : outcomes)
        if (!o.failed) { sum += o.final_total; ++ms.n; }
    if (ms.n == 0) return ms;
    ms.mean = sum / ms.n;
    if (ms.n > 1) {
        double ss = 0.0;
        for (const RunOutcome& o : outcomes)
            if (!o.failed) ss += (o.final_total - ms.mean) * (o.final_total - ms.mean);
        ms.stderr_ = std::sqrt(ss / (ms.n - 1)) / std::sqrt(static_cast<double>(ms.n));
    } else {
        ms.stderr_ = 0.0;
    }
    return ms;
}

}  // namespace

Condition with_scale(const Condition& c, double scale) {
    switch (c.kind) {
        case CondKind::quadratic_target:
            return make_quadratic_target(c.target, scale, c.mode, c.name);
        case CondKind::logistic_classifier:
            return make_logistic_classifier(c.w, c.b, c.y, scale, c.mode, c.name);
        case CondKind::ring:
            return make_ring(c.center, c.radius, scale, c.mode, c.name);
        case CondKind::alignment:
            return make_alignment(c.u, scale, c.mode, c.name);
    }
    throw ConfigError("with_scale: unknown condition kind");
}

std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg, bool write_files) {
    Batch batch = run_batch(cfg, cfg.mode, cfg.order, to_string(cfg.mode), write_files);
    std::size_t n_conds = cfg.conditions.size();
    if (write_files) {
        std::filesystem::create_directories(cfg.out_dir);
        std::vector<StepRecord> all;
        for (std::size_t i = 0; i < batch.traces.size(); ++i)
            if (!batch.outcomes[i].failed)
                all.insert(all.end(), batch.traces[i].records.begin(),
                           batch.traces[i].records.end());
        write_trace_csv(cfg.out_dir + "/trace.csv", all, static_cast<int>(n_conds));
        write_summary_csv(cfg.out_dir + "/summary.csv", batch.outcomes, n_conds);
        std::vector<double> t_values;
        std::vector<std::vector<double>> series;
        if (mean_curves(batch, n_conds, t_values, series)) {
            std::vector<std::string> names;
            for (const Condition& c : cfg.conditions) names.push_back(c.name);
            names.push_back("total");
            write_curves_svg(cfg.out_dir + "/energy.svg", cfg.name + " mean energy", names,
                             series, t_values);
        }
    }
    MeanStderr ms = totals_summary(batch.outcomes);
    int failed = static_cast<int>(batch.outcomes.size()) - ms.n;
    std::cout << "run " << cfg.name << " [" << to_string(cfg.mode) << "]: " << ms.n << "/"
              << cfg.runs << " ok, final total energy " << fmtg(ms.mean) << " +- "
              << fmtg(ms.stderr_);
    if (failed > 0) std::cout << " (" << failed << " failed)";
    std::cout << "\n";
    return batch.outcomes;
}

CompareResult compare_experiment(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& modes, bool swap_order,
                                 bool write_files) {
    CompareResult res;
    for (const std::string& m : modes) {
        GuidanceMode gm = parse_mode(m);
        res.variants.push_back({m, gm, cfg.order});
        if (swap_order && gm == GuidanceMode::dependent_pair) {
            std::vector<int> rev(cfg.order.rbegin(), cfg.order.rend());
            res.variants.push_back({m + "_swapped", gm, rev});
        }
    }
    if (swap_order && modes.empty() && cfg.mode == GuidanceMode::dependent_pair) {
        std::vector<int> rev(cfg.order.rbegin(), cfg.order.rend());
        res.variants.push_back({std::string(to_string(cfg.mode)), cfg.mode, cfg.order});
        res.variants.push_back({std::string(to_string(cfg.mode)) + "_swapped", cfg.mode, rev});
    }
    if (res.variants.size() < 2)
        throw ConfigError("compare needs at least two variants; pass --modes a,b or --swap-order "
                          "with a dependent_pair config");

    std::size_t n_conds = cfg.conditions.size();
    std::vector<Batch> batches;
    for (const CompareVariant& v : res.variants)
        batches.push_back(run_batch(cfg, v.mode, v.order, v.label, true));
    for (const Batch& b : batches) res.outcomes.push_back(b.outcomes);

    for (const Batch& b : batches) res.mean_totals.push_back(totals_summary(b.outcomes).mean);

    for (std::size_t j = 1; j < res.variants.size(); ++j)
        for (std::size_t i = 0; i < j; ++i) {
            WinRate wr;
            wr.challenger = res.variants[j].label;
            wr.baseline = res.variants[i].label;
            double wins = 0.0;
            for (int r = 0; r < cfg.runs; ++r) {
                const RunOutcome& a = res.outcomes[i][r];
                const RunOutcome& b = res.outcomes[j][r];
                if (a.failed || b.failed) continue;
                ++wr.paired;
                if (b.final_total < a.final_total) wins += 1.0;
                else if (b.final_total == a.final_total) wins += 0.5;
            }
            wr.rate = wr.paired > 0 ? wins / wr.paired : kNaN;
            res.win_rates.push_back(wr);
        }

    if (write_files) {
        std::filesystem::create_directories(cfg.out_dir);
        {
            std::ofstream out = open_out(cfg.out_dir + "/compare_pairs.csv");
            out << "run_id,seed";
            for (const CompareVariant& v : res.variants) {
                out << ',' << v.label << "_total";
                for (std::size_t c = 0; c < n_conds; ++c)
                    out << ',' << v.label << "_energy_" << c;
            }
            out << '\n';
            for (int r = 0; r < cfg.runs; ++r) {
                out << r << ',' << (cfg.seed + r);
                for (std::size_t v = 0; v < res.variants.size(); ++v) {
                    const RunOutcome& o = res.outcomes[v][r];
                    out << ',' << fmt17(o.final_total);
                    for (std::size_t c = 0; c < n_conds; ++c)
                        out << ',' << fmt17(o.final_energies[c]);
                }
                out << '\n';
            }
        }
        {
            std::ofstream out = open_out(cfg.out_dir + "/compare_curves.csv");
            out << "variant,t";
            for (std::size_t c = 0; c < n_conds; ++c) out << ",mean_energy_" << c;
            out << ",mean_total\n";
            for (std::size_t v = 0; v < res.variants.size(); ++v) {
                std::vector<double> t_values;
                std::vector<std::vector<double>> series;
                if (!mean_curves(batches[v], n_conds, t_values, series)) continue;
                for (std::size_t r = 0; r < t_values.size(); ++r) {
                    out << res.variants[v].label << ',' << t_values[r];
                    for (std::size_t c = 0; c <= n_conds; ++c) out << ',' << fmt17(series[c][r]);
                    out << '\n';
                }
            }
        }
        {
            std::vector<std::string> names;
            std::vector<std::vector<double>> totals;
            std::vector<double> t_values;
            for (std::size_t v = 0; v < res.variants.size(); ++v) {
                std::vector<double> tv;
                std::vector<std::vector<double>> series;
                if (!mean_curves(batches[v], n_conds, tv, series)) continue;
                names.push_back(res.variants[v].label);
                totals.push_back(series[n_conds]);
                if (t_values.empty()) t_values = tv;
            }
            if (!names.empty())
                write_curves_svg(cfg.out_dir + "/compare.svg", cfg.name + " mean total energy",
                                 names, totals, t_values);
        }
    }

    std::cout << "compare " << cfg.name << ": " << cfg.runs << " paired seeds\n";
    for (std::size_t v = 0; v < res.variants.size(); ++v)
        std::cout << "  " << res.variants[v].label << ": mean final total "
                  << fmtg(res.mean_totals[v]) << "\n";
    for (const WinRate& wr : res.win_rates)
        std::cout << "  win rate " << wr.challenger << " vs " << wr.baseline << ": "
                  << fmtg(wr.rate) << " (" << wr.paired << " pairs)\n";
    return res;
}

void landscape_experiment(const ExperimentConfig& cfg) {
    NoiseSchedule sched = linear_schedule(cfg.steps, cfg.beta_min, cfg.beta_max);
    int t = cfg.landscape_t();
    LandscapeGrid grid = landscape_scan(cfg.score, sched, cfg.conditions, t,
                                        cfg.landscape.n_samples, cfg.landscape.grid,
                                        cfg.landscape.extent, cfg.seed, cfg.threads);
    std::filesystem::create_directories(cfg.out_dir);
    write_landscape_csv(cfg.out_dir + "/landscape.csv", grid);
    write_landscape_svg(cfg.out_dir + "/landscape.svg", grid);
    {
        std::ofstream out = open_out(cfg.out_dir + "/pca.csv");
        auto row = [&](const std::string& key, const std::vector<double>& v) {
            out << key;
            for (double x : v) out << ',' << fmt17(x);
            out << '\n';
        };
        row("dir1", grid.dir1);
        row("dir2", grid.dir2);
        row("center", grid.center);
        row("var_ratio", {grid.var_ratio1, grid.var_ratio2});
    }
    std::cout << "landscape " << cfg.name << ": t=" << t << ", variance ratios "
              << fmtg(grid.var_ratio1) << ", " << fmtg(grid.var_ratio2) << "\n";
}

void sweep_experiment(const ExperimentConfig& cfg, const std::vector<double>& factors) {
    if (factors.empty()) throw ConfigError("sweep needs at least one scale factor");
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out = open_out(cfg.out_dir + "/sweep.csv");
    out << "factor,ok_runs";
    for (std::size_t c = 0; c < cfg.conditions.size(); ++c) out << ",mean_energy_" << c;
    out << ",mean_total\n";
    for (double f : factors) {
        if (!(f >= 0.0)) throw ConfigError("sweep scale factors must be >= 0");
        ExperimentConfig scaled = cfg;
        for (Condition& c : scaled.conditions) c = with_scale(c, c.scale * f);
        Batch batch = run_batch(scaled, scaled.mode, scaled.order, to_string(scaled.mode), false);
        MeanStderr ms = totals_summary(batch.outcomes);
        std::vector<double> mean_e(cfg.conditions.size(), 0.0);
        int ok = 0;
        for (const RunOutcome& o : batch.outcomes) {
            if (o.failed) continue;
            ++ok;
            for (std::size_t c = 0; c < mean_e.size(); ++c) mean_e[c] += o.final_energies[c];
        }
        for (double& v : mean_e) v /= ok > 0 ? ok : 1;
        out << fmt17(f) << ',' << ok;
        for (double v : mean_e) out << ',' << fmt17(v);
        out << ',' << fmt17(ms.mean) << '\n';
        std::cout << "  scale x" << fmtg(f) << ": mean final total " << fmtg(ms.mean) << " +- "
                  << fmtg(ms.stderr_) << " (" << ok << " ok)\n";
    }
}

namespace {

// Exact minimum of F over the 0.01-grid on the simplex, via the Gram matrix.
// Prefix sums make each node O(m); the innermost two coordinates collapse to a
// quadratic-in-k scan.
double grid_min_objective(const std::vector<std::vector<double>>& entries,
                          const std::vector<double>& g0, double sqrt_phi) {
    int m = static_cast<int>(entries.size());
    const int G = 100;
    const double h = 0.01;
    std::vector<std::vector<double>> M(m, std::vector<double>(m));
    std::vector<double> b(m);
    for (int a = 0; a < m; ++a) {
        for (int c = 0; c < m; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < g0.size(); ++i) s += entries[a][i] * entries[c][i];
            M[a][c] = s;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < g0.size(); ++i) s += entries[a][i] * g0[i];
        b[a] = s;
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> tvec(m, 0.0);
    // depth d assigns w_d, coordinates m-2 and m-1 are scanned in closed form
    auto rec = [&](auto&& self, int d, int remaining, double L0, double Q0) -> void {
        if (d == m - 2) {
            int p = m - 2, q = m - 1;
            double R = remaining;
            for (int k = 0; k <= remaining; ++k) {
                double wp = k * h, wq = (R - k) * h;
                double lin = L0 + b[p] * wp + b[q] * wq;
                double quad = Q0 + 2.0 * wp * tvec[p] + 2.0 * wq * tvec[q] + wp * wp * M[p][p] +
                              wq * wq * M[q][q] + 2.0 * wp * wq * M[p][q];
                double f = lin + sqrt_phi * std::sqrt(std::max(quad, 0.0));
                if (f < best) best = f;
            }
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            double v = k * h;
            double L1 = L0 + b[d] * v;
            double Q1 = Q0 + 2.0 * v * tvec[d] + v * v * M[d][d];
            for (int j = 0; j < m; ++j) tvec[j] += v * M[d][j];
            self(self, d + 1, remaining - k, L1, Q1);
            for (int j = 0; j < m; ++j) tvec[j] -= v * M[d][j];
        }
    };
    rec(rec, 0, G, 0.0, 0.0);
    return best;
}

}  // namespace

CagradBenchResult cagrad_bench(int entries, int dim, int instances, std::uint64_t seed,
                               bool with_grid, const CagradConfig& cfg) {
    if (entries < 2 || dim < 1 || instances < 1)
        throw ConfigError("cagrad-bench needs entries >= 2, dim >= 1, instances >= 1");
    CagradBenchResult res;
    res.instances = instances;
    CounterRng rng(seed);
    auto start = std::chrono::steady_clock::now();
    for (int inst = 0; inst < instances; ++inst) {
        PairGradientSet set;
        set.n = entries;
        set.entries.resize(entries);
        set.g0.assign(dim, 0.0);
        for (int a = 0; a < entries; ++a) {
            set.entries[a].resize(dim);
            for (int i = 0; i < dim; ++i) {
                double v = rng.normal(CounterRng::kScatter, static_cast<std::uint64_t>(inst),
                                      static_cast<std::uint64_t>(a * dim + i));
                set.entries[a][i] = v;
                set.g0[i] += v / entries;
            }
        }
        CagradOutcome out = cagrad_combine(set, cfg);
        if (out.warning) ++res.warnings;
        if (with_grid && entries <= 6) {
            double sqrt_phi = std::sqrt(out.phi);
            double gmin = grid_min_objective(set.entries, set.g0, sqrt_phi);
            double gap = (out.objective - gmin) / std::max(1.0, std::fabs(gmin));
            res.max_gap = std::max(res.max_gap, gap);
            ++res.grid_checked;
        }
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "cagrad-bench: " << instances << " instances, entries=" << entries
              << ", dim=" << dim << ", " << fmtg(res.seconds) << " s";
    if (res.grid_checked > 0)
        std::cout << ", grid-checked " << res.grid_checked << ", max relative gap "
                  << fmtg(res.max_gap);
    if (res.warnings > 0) std::cout << ", " << res.warnings << " convergence warnings";
    std::cout << "\n";
    return res;
}

}  // namespace guidelab
