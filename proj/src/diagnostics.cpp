#include "guidelab/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "guidelab/algebra.hpp"
#include "guidelab/errors.hpp"
#include "guidelab/parallel.hpp"
#include "guidelab/rng.hpp"

namespace guidelab {

double cosine(std::span<const double> u, std::span<const double> v) {
    double nu = norm(u), nv = norm(v);
    if (nu < 1e-12 || nv < 1e-12) return std::numeric_limits<double>::quiet_NaN();
    return dot(u, v) / (nu * nv);
}

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trace_csv_header(int n_conditions) {
    std::string h = "run_id,seed,mode,t,beta_t";
    for (int i = 0; i < n_conditions; ++i) h += ",energy_" + std::to_string(i);
    for (int i = 0; i < n_conditions; ++i) h += ",gradnorm_" + std::to_string(i);
    h += ",cos_raw,cos_terms,combined_norm,state_norm,cagrad_warning";
    return h;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RunError(0, "emit", "cannot open '" + path + "' for writing");
    return f;
}

}  // namespace

void write_trace_csv(const std::string& path, std::span<const StepRecord> records,
                     int n_conditions) {
    std::ofstream f = open_out(path);
    f << trace_csv_header(n_conditions) << "\n";
    for (const StepRecord& r : records) {
        f << r.run_id << ',' << r.seed << ',' << r.mode << ',' << r.t << ','
          << fmt17(r.beta_t);
        for (int i = 0; i < n_conditions; ++i) f << ',' << fmt17(r.energies[i]);
        for (int i = 0; i < n_conditions; ++i) f << ',' << fmt17(r.grad_norms[i]);
        f << ',' << fmt17(r.cos_raw) << ',' << fmt17(r.cos_terms) << ','
          << fmt17(r.combined_norm) << ',' << fmt17(r.state_norm) << ','
          << (r.cagrad_warning ? 1 : 0) << "\n";
    }
}

namespace {

// power iteration on the (deflated) covariance; `ortho` is re-projected out
// every iteration to keep the second component orthogonal.
std::vector<double> power_iterate(const std::vector<std::vector<double>>& cov,
                                  const std::vector<double>* ortho, std::uint64_t seed,
                                  double* eigval_out) {
    const int d = static_cast<int>(cov.size());
    std::vector<double> v(d, 0.0);
    v[0] = 1.0;
    auto project = [&](std::vector<double>& w) {
        if (!ortho) return;
        double p = dot(w, *ortho);
        for (int i = 0; i < d; ++i) w[i] -= p * (*ortho)[i];
    };
    project(v);
    double nv = norm(v);
    if (nv < 1e-12) {
        // start vector collinear with the removed direction; fall back to e1
        v.assign(d, 0.0);
        v[std::min(1, d - 1)] = 1.0;
        project(v);
        nv = norm(v);
    }
    for (int i = 0; i < d; ++i) v[i] /= nv;

    CounterRng rng(seed ^ 0x5ca1ab1eull);
    std::vector<double> w(d);
    int restarts = 0;
    for (int it = 0; it < 100; ++it) {
        for (int i = 0; i < d; ++i) w[i] = dot(cov[i], v);
        project(w);
        double nw = norm(w);
        if (nw < 1e-14) {
            // stagnated in (numerical) null space: re-randomize from the seed
            if (++restarts > 3) break;
            for (int i = 0; i < d; ++i)
                w[i] = rng.normal(CounterRng::kScatter, static_cast<std::uint64_t>(restarts), i);
            project(w);
            nw = norm(w);
            if (nw < 1e-14) break;
        }
        for (int i = 0; i < d; ++i) w[i] /= nw;
        double delta = 0.0;
        for (int i = 0; i < d; ++i) delta = std::max(delta, std::abs(w[i] - v[i]));
        v = w;
        if (delta < 1e-9) break;
    }
    // Rayleigh quotient for the reported eigenvalue
    for (int i = 0; i < d; ++i) w[i] = dot(cov[i], v);
    *eigval_out = dot(v, w);

    for (int i = 0; i < d; ++i) {
        if (std::abs(v[i]) > 1e-10) {
            if (v[i] < 0.0)
                for (int j = 0; j < d; ++j) v[j] = -v[j];
            break;
        }
    }
    return v;
}

}  // namespace

PcaResult pca_top2(const std::vector<std::vector<double>>& points, std::uint64_t seed) {
    const int n = static_cast<int>(points.size());
    if (n < 3) throw ConfigError("pca: need at least 3 points");
    const int d = static_cast<int>(points[0].size());
    if (d < 2) throw ConfigError("pca: need dimension >= 2");

    std::vector<double> mean(d, 0.0);
    for (const auto& p : points)
        for (int i = 0; i < d; ++i) mean[i] += p[i];
    for (int i = 0; i < d; ++i) mean[i] /= n;

    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (const auto& p : points)
        for (int i = 0; i < d; ++i) {
            double di = p[i] - mean[i];
            for (int j = 0; j < d; ++j) cov[i][j] += di * (p[j] - mean[j]);
        }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) cov[i][j] /= (n - 1);

    double trace = 0.0;
    for (int i = 0; i < d; ++i) trace += cov[i][i];

    PcaResult r;
    r.dir1 = power_iterate(cov, nullptr, seed, &r.eigval1);
    r.dir2 = power_iterate(cov, &r.dir1, seed + 1, &r.eigval2);
    if (r.eigval1 < 0.0) r.eigval1 = 0.0;
    if (r.eigval2 < 0.0) r.eigval2 = 0.0;
    if (trace > 0.0) {
        r.var_ratio1 = r.eigval1 / trace;
        r.var_ratio2 = r.eigval2 / trace;
    }
    return r;
}

LandscapeGrid landscape_scan(const GaussianMixture& gm0, const NoiseSchedule& sched,
                             std::span<const Condition> conds, int t, int n_samples,
                             int grid_n, double extent, std::uint64_t seed, int threads) {
    if (n_samples < 100) throw ConfigError("landscape: n_samples must be >= 100");
    if (grid_n < 2) throw ConfigError("landscape: grid must be >= 2");
    double alpha_bar = sched.alpha_bar(t);
    GaussianMixture gm_t = marginal_at(gm0, alpha_bar);

    CounterRng rng(seed);
    std::vector<std::vector<double>> pts(n_samples);
    for (int i = 0; i < n_samples; ++i)
        pts[i] = sample_mixture(gm_t, rng, static_cast<std::uint64_t>(i));

    PcaResult pca = pca_top2(pts, seed);

    const int d = gm_t.dim();
    LandscapeGrid grid;
    grid.dir1 = pca.dir1;
    grid.dir2 = pca.dir2;
    grid.var_ratio1 = pca.var_ratio1;
    grid.var_ratio2 = pca.var_ratio2;
    grid.center.assign(d, 0.0);
    for (const auto& p : pts)
        for (int i = 0; i < d; ++i) grid.center[i] += p[i];
    for (int i = 0; i < d; ++i) grid.center[i] /= n_samples;

    double span_a = extent * std::sqrt(pca.eigval1);
    double span_b = extent * std::sqrt(pca.eigval2);
    grid.a_coords.resize(grid_n);
    grid.b_coords.resize(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        double frac = -1.0 + 2.0 * i / (grid_n - 1);
        grid.a_coords[i] = frac * span_a;
        grid.b_coords[i] = frac * span_b;
    }

    grid.energy.assign(static_cast<std::size_t>(grid_n) * grid_n, 0.0);
    parallel_for(grid.energy.size(), threads, [&](std::size_t idx) {
        int ia = static_cast<int>(idx) / grid_n;
        int ib = static_cast<int>(idx) % grid_n;
        std::vector<double> p(d);
        for (int i = 0; i < d; ++i)
            p[i] = grid.center[i] + grid.a_coords[ia] * grid.dir1[i] +
                   grid.b_coords[ib] * grid.dir2[i];
        double e = 0.0;
        for (const Condition& c : conds) e += energy_value(c, gm_t, alpha_bar, p);
        grid.energy[idx] = e;
    });
    return grid;
}

void write_landscape_csv(const std::string& path, const LandscapeGrid& grid) {
    std::ofstream f = open_out(path);
    f << "a,b,energy\n";
    const int nb = static_cast<int>(grid.b_coords.size());
    for (std::size_t idx = 0; idx < grid.energy.size(); ++idx) {
        int ia = static_cast<int>(idx) / nb;
        int ib = static_cast<int>(idx) % nb;
        f << fmt17(grid.a_coords[ia]) << ',' << fmt17(grid.b_coords[ib]) << ','
          << fmt17(grid.energy[idx]) << "\n";
    }
}

namespace {

void heat_color(double v, int* rr, int* gg, int* bb) {
    // five-stop map, dark blue -> teal -> green -> yellow -> light
    static const double stops[5][3] = {{68, 1, 84},
                                       {59, 82, 139},
                                       {33, 145, 140},
                                       {94, 201, 98},
                                       {253, 231, 37}};
    v = std::min(1.0, std::max(0.0, v));
    double pos = v * 4.0;
    int k = std::min(3, static_cast<int>(pos));
    double frac = pos - k;
    *rr = static_cast<int>(stops[k][0] + frac * (stops[k + 1][0] - stops[k][0]));
    *gg = static_cast<int>(stops[k][1] + frac * (stops[k + 1][1] - stops[k][1]));
    *bb = static_cast<int>(stops[k][2] + frac * (stops[k + 1][2] - stops[k][2]));
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

void write_landscape_svg(const std::string& path, const LandscapeGrid& grid) {
    const int na = static_cast<int>(grid.a_coords.size());
    const int nb = static_cast<int>(grid.b_coords.size());
    const int cell = 12, margin = 40;
    const int wpx = margin * 2 + na * cell, hpx = margin * 2 + nb * cell;

    double lo = grid.energy[0], hi = grid.energy[0];
    for (double e : grid.energy) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    double range = hi - lo;

    std::ofstream f = open_out(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << wpx << "\" height=\"" << hpx
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    char buf[256];
    for (int ia = 0; ia < na; ++ia)
        for (int ib = 0; ib < nb; ++ib) {
            double e = grid.energy[static_cast<std::size_t>(ia) * nb + ib];
            double v = range > 0.0 ? (e - lo) / range : 0.0;
            int rr, gg, bb;
            heat_color(1.0 - v, &rr, &gg, &bb);  // low energy bright
            std::snprintf(buf, sizeof buf,
                          "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"#%02x%02x%02x\"/>\n",
                          margin + ia * cell, margin + (nb - 1 - ib) * cell, cell, cell, rr, gg, bb);
            f << buf;
        }
    f << "<text x=\"" << margin << "\" y=\"" << margin - 12
      << "\" font-family=\"monospace\" font-size=\"12\">total energy, pc1 ("
      << fmt2(grid.var_ratio1 * 100.0) << "%) vs pc2 (" << fmt2(grid.var_ratio2 * 100.0)
      << "%), min " << fmt2(lo) << ", max " << fmt2(hi) << "</text>\n";
    f << "</svg>\n";
}

void write_curves_svg(const std::string& path, const std::string& title,
                      std::span<const std::string> series_names,
                      std::span<const std::vector<double>> series,
                      std::span<const double> t_values) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const int w = 640, h = 400, ml = 60, mr = 20, mt = 30, mb = 40;
    std::ofstream f = open_out(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << ml << "\" y=\"20\" font-family=\"monospace\" font-size=\"13\">" << title
      << "</text>\n";

    if (!series.empty() && !t_values.empty()) {
        double ylo = series[0][0], yhi = series[0][0];
        for (const auto& s : series)
            for (double v : s) {
                ylo = std::min(ylo, v);
                yhi = std::max(yhi, v);
            }
        if (yhi - ylo < 1e-300) yhi = ylo + 1.0;
        double xlo = t_values[0], xhi = t_values[0];
        for (double v : t_values) {
            xlo = std::min(xlo, v);
            xhi = std::max(xhi, v);
        }
        if (xhi - xlo < 1e-300) xhi = xlo + 1.0;

        auto X = [&](double t) { return ml + (t - xlo) / (xhi - xlo) * (w - ml - mr); };
        auto Y = [&](double v) { return h - mb - (v - ylo) / (yhi - ylo) * (h - mt - mb); };

        f << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
          << h - mb << "\" stroke=\"black\"/>\n";
        f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
          << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << ml << "\" y=\"" << h - mb + 16
          << "\" font-family=\"monospace\" font-size=\"11\">t=" << fmt2(xlo) << "</text>\n";
        f << "<text x=\"" << w - mr - 60 << "\" y=\"" << h - mb + 16
          << "\" font-family=\"monospace\" font-size=\"11\">t=" << fmt2(xhi) << "</text>\n";
        f << "<text x=\"2\" y=\"" << h - mb << "\" font-family=\"monospace\" font-size=\"11\">"
          << fmt2(ylo) << "</text>\n";
        f << "<text x=\"2\" y=\"" << mt + 10 << "\" font-family=\"monospace\" font-size=\"11\">"
          << fmt2(yhi) << "</text>\n";

        char buf[64];
        for (std::size_t s = 0; s < series.size(); ++s) {
            const char* color = palette[s % 8];
            f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < t_values.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.3f,%.3f ", X(t_values[i]), Y(series[s][i]));
                f << buf;
            }
            f << "\"/>\n";
            f << "<text x=\"" << w - mr - 150 << "\" y=\"" << mt + 14 * (s + 1)
              << "\" font-family=\"monospace\" font-size=\"11\" fill=\"" << color << "\">"
              << series_names[s] << "</text>\n";
        }
    }
    f << "</svg>\n";
}

}  // namespace guidelab
