#include "guidelab/mtl.hpp"

#include <algorithm>
#include <cmath>

#include "guidelab/algebra.hpp"
#include "guidelab/errors.hpp"

namespace guidelab {

PairGradientSet pairwise_gradients(std::span<const Condition> conds, const GaussianMixture& gm_t,
                                   const StepCoeffs& sc, std::span<const double> x,
                                   std::span<const double> z) {
    const int n = static_cast<int>(conds.size());
    if (n < 2)
        throw ConfigError("cagrad_multi needs at least 2 conditions; use dependent_pair or "
                          "independent for fewer");
    PairGradientSet set;
    set.n = n;
    double cr = 0.0, ct = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            GuidanceBreakdown bd = dependent_pair_grad(gm_t, sc, conds[i], conds[j], x, z);
            set.pairs.emplace_back(i, j);
            set.entries.push_back(std::move(bd.combined));
            cr += bd.cos_raw;
            ct += bd.cos_terms;
        }
    const int m = static_cast<int>(set.entries.size());
    set.g0.assign(x.size(), 0.0);
    for (const auto& e : set.entries)
        for (std::size_t k = 0; k < x.size(); ++k) set.g0[k] += e[k];
    for (double& v : set.g0) v /= m;
    set.mean_cos_raw = cr / m;
    set.mean_cos_terms = ct / m;
    return set;
}

double inner_objective(std::span<const double> w, const PairGradientSet& set,
                       const CagradConfig& cfg) {
    const std::size_t d = set.g0.size();
    std::vector<double> gw(d, 0.0);
    for (std::size_t a = 0; a < set.entries.size(); ++a)
        for (std::size_t k = 0; k < d; ++k) gw[k] += w[a] * set.entries[a][k];
    double phi = cfg.c * cfg.c * sum_sq(set.g0);
    return dot(gw, set.g0) + std::sqrt(phi) * std::sqrt(sum_sq(gw) + 1e-18);
}

std::vector<double> project_simplex(std::span<const double> v) {
    const int m = static_cast<int>(v.size());
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    int rho = 0;
    for (int j = 0; j < m; ++j) {
        css += u[j];
        double th = (css - 1.0) / (j + 1);
        if (u[j] - th > 0.0) {
            rho = j + 1;
            theta = th;
        }
    }
    (void)rho;
    std::vector<double> w(m);
    for (int j = 0; j < m; ++j) w[j] = std::max(v[j] - theta, 0.0);
    return w;
}

CagradOutcome cagrad_combine(const PairGradientSet& set, const CagradConfig& cfg) {
    const int m = static_cast<int>(set.entries.size());
    const std::size_t d = set.g0.size();

    CagradOutcome out;
    out.w.assign(m, 1.0 / m);
    out.phi = cfg.c * cfg.c * sum_sq(set.g0);
    if (cfg.c == 0.0 || out.phi <= 0.0) {
        out.g = set.g0;
        out.objective = inner_objective(out.w, set, cfg);
        return out;
    }
    double sqrt_phi = std::sqrt(out.phi);

    // Gram form: F(w) = w.b + sqrt(phi)*sqrt(w M w), b_a = entries[a] . g0
    std::vector<std::vector<double>> M(m, std::vector<double>(m));
    std::vector<double> b(m);
    for (int a = 0; a < m; ++a) {
        b[a] = dot(set.entries[a], set.g0);
        for (int c = a; c < m; ++c) {
            M[a][c] = dot(set.entries[a], set.entries[c]);
            M[c][a] = M[a][c];
        }
    }
    auto objective = [&](const std::vector<double>& w) {
        std::vector<double> Mw(m, 0.0);
        for (int a = 0; a < m; ++a) Mw[a] = dot(M[a], w);
        return dot(w, b) + sqrt_phi * std::sqrt(dot(w, Mw) + 1e-18);
    };

    // Projected gradient with Armijo backtracking on the proximal decrease
    // condition; the step adapts instead of following a fixed decay, which is
    // what lets the solver track the grid oracle to 1e-4 and beyond.
    std::vector<double> w(m, 1.0 / m), grad(m), Mw(m);
    std::vector<double> best_w = w;
    double f_cur = objective(w);
    double best_f = f_cur;
    double step = cfg.inner_step;
    bool converged = false;
    for (int k = 1; k <= cfg.inner_iters; ++k) {
        for (int a = 0; a < m; ++a) Mw[a] = dot(M[a], w);
        double qn = std::sqrt(dot(w, Mw) + 1e-18);
        for (int a = 0; a < m; ++a) grad[a] = b[a] + sqrt_phi * Mw[a] / qn;
        std::vector<double> next;
        double f_next = 0.0;
        bool accepted = false;
        for (int h = 0; h < 60 && !accepted; ++h) {
            std::vector<double> cand(m);
            for (int a = 0; a < m; ++a) cand[a] = w[a] - step * grad[a];
            cand = project_simplex(cand);
            double gd = 0.0, dd = 0.0;
            for (int a = 0; a < m; ++a) {
                double delta = cand[a] - w[a];
                gd += grad[a] * delta;
                dd += delta * delta;
            }
            double f_cand = objective(cand);
            if (f_cand <= f_cur + gd + dd / (2.0 * step) + 1e-15) {
                next = std::move(cand);
                f_next = f_cand;
                accepted = true;
            } else {
                step *= 0.5;
            }
        }
        if (!accepted) {  // step underflowed: numerically stationary
            converged = true;
            break;
        }
        double move = 0.0;
        for (int a = 0; a < m; ++a) move = std::max(move, std::abs(next[a] - w[a]));
        w = std::move(next);
        f_cur = f_next;
        if (f_cur < best_f) {
            best_f = f_cur;
            best_w = w;
        }
        if (move < cfg.inner_tol) {
            converged = true;
            break;
        }
        step *= 1.3;
    }
    out.warning = !converged;
    out.w = best_w;
    out.objective = best_f;

    std::vector<double> gw(d, 0.0);
    for (int a = 0; a < m; ++a)
        for (std::size_t i = 0; i < d; ++i) gw[i] += best_w[a] * set.entries[a][i];
    double gw_norm = std::sqrt(sum_sq(gw));
    out.g = set.g0;
    if (gw_norm > cfg.norm_guard) {
        double coef = sqrt_phi / gw_norm;
        for (std::size_t i = 0; i < d; ++i) out.g[i] += coef * gw[i];
    }
    return out;
}

}  // namespace guidelab
