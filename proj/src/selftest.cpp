#include "guidelab/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "guidelab/condition.hpp"
#include "guidelab/diagnostics.hpp"
#include "guidelab/guidance.hpp"
#include "guidelab/mtl.hpp"
#include "guidelab/sampler.hpp"
#include "guidelab/schedule.hpp"
#include "guidelab/score.hpp"

namespace guidelab {

namespace {

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double d2 = 0.0, a2 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d2 += (a[i] - b[i]) * (a[i] - b[i]);
        a2 += a[i] * a[i];
        b2 += b[i] * b[i];
    }
    return std::sqrt(d2) / std::max({1.0, std::sqrt(a2), std::sqrt(b2)});
}

GaussianMixture gm_single() {
    GaussianMixture m;
    m.weights = {1.0};
    m.means = {{0.3, -0.2, 0.5}};
    m.vars = {0.8};
    return m;
}

GaussianMixture gm_pair() {
    GaussianMixture m;
    m.weights = {0.4, 0.6};
    m.means = {{1.0, 0.0, -1.0}, {-0.5, 0.7, 0.2}};
    m.vars = {0.6, 1.2};
    return m;
}

std::vector<Condition> probe_conditions(CondMode mode) {
    return {
        make_quadratic_target({0.5, -0.3, 1.0}, 1.3, mode, "quad"),
        make_logistic_classifier({0.8, -0.5, 0.3}, 0.2, -1.0, 0.9, mode, "cls"),
        make_ring({0.1, 0.2, -0.3}, 0.7, 1.1, mode, "ring"),
        make_alignment({1.0 / 3, 2.0 / 3, 2.0 / 3}, 0.7, mode, "align"),
    };
}

// Central-difference gradient of the scaled energy (including the clean-sample
// mapping in denoised mode), negated to match the guidance sign.
std::vector<double> fd_cond_grad(const Condition& c, const GaussianMixture& gm_t,
                                 double alpha_bar, std::vector<double> x) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double h = 1e-5 * (1.0 + std::fabs(x[i]));
        double xi = x[i];
        x[i] = xi + h;
        double ep = energy_value(c, gm_t, alpha_bar, x);
        x[i] = xi - h;
        double em = energy_value(c, gm_t, alpha_bar, x);
        x[i] = xi;
        g[i] = -(ep - em) / (2.0 * h);
    }
    return g;
}

bool check_fd_gradients(std::string& why) {
    double ab = 0.64;
    std::vector<double> x = {0.4, -0.6, 0.9};
    for (const GaussianMixture& gm0 : {gm_single(), gm_pair()}) {
        GaussianMixture gm_t = marginal_at(gm0, ab);
        for (CondMode mode : {CondMode::direct, CondMode::denoised}) {
            for (const Condition& c : probe_conditions(mode)) {
                auto g = cond_grad(c, gm_t, ab, x);
                auto fd = fd_cond_grad(c, gm_t, ab, x);
                double e = rel_err(g, fd);
                if (!(e <= 1e-6)) {
                    why = c.name + std::string("/") + to_string(mode) + " rel err " +
                          std::to_string(e);
                    return false;
                }
            }
        }
    }
    return true;
}

bool check_fd_hvps(std::string& why) {
    double ab = 0.64;
    std::vector<double> x = {0.4, -0.6, 0.9};
    std::vector<double> v = {0.7, 0.2, -0.5};
    double eps = 1e-5;
    for (const GaussianMixture& gm0 : {gm_single(), gm_pair()}) {
        GaussianMixture gm_t = marginal_at(gm0, ab);
        for (CondMode mode : {CondMode::direct, CondMode::denoised}) {
            for (const Condition& c : probe_conditions(mode)) {
                auto hv = cond_hvp(c, gm_t, ab, x, v);
                std::vector<double> xp = x, xm = x;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    xp[i] += eps * v[i];
                    xm[i] -= eps * v[i];
                }
                auto gp = cond_grad(c, gm_t, ab, xp);
                auto gm = cond_grad(c, gm_t, ab, xm);
                std::vector<double> fd(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) fd[i] = (gp[i] - gm[i]) / (2.0 * eps);
                double e = rel_err(hv, fd);
                if (!(e <= 1e-4)) {
                    why = c.name + std::string("/") + to_string(mode) + " rel err " +
                          std::to_string(e);
                    return false;
                }
            }
        }
    }
    return true;
}

// The second-order sub-term of the dependent-pair gradient recomputed through
// the columnwise dual route; catches a wrong sign or a wrong Jacobian side.
bool check_scalar_trick(std::string& why) {
    NoiseSchedule sched = linear_schedule(50, 1e-4, 0.2);
    StepCoeffs sc = sched.coeffs(25);
    std::vector<double> x = {0.4, -0.6, 0.9};
    std::vector<double> z = {0.3, -0.8, 0.1};
    struct Setup {
        GaussianMixture gm0;
        Condition c1, c2;
    };
    std::vector<Setup> setups;
    setups.push_back({gm_single(),
                      make_quadratic_target({0.5, -0.3, 1.0}, 1.3, CondMode::denoised, "quad"),
                      make_logistic_classifier({0.8, -0.5, 0.3}, 0.2, -1.0, 0.9,
                                               CondMode::direct, "cls")});
    setups.push_back({gm_pair(), make_ring({0.1, 0.2, -0.3}, 0.7, 1.1, CondMode::direct, "ring"),
                      make_alignment({1.0 / 3, 2.0 / 3, 2.0 / 3}, 0.7, CondMode::denoised,
                                     "align")});
    for (const Setup& s : setups) {
        GaussianMixture gm_t = marginal_at(s.gm0, sc.alpha_bar);
        GuidanceBreakdown bd = dependent_pair_grad(gm_t, sc, s.c1, s.c2, x, z);
        auto via_trick = scalar_trick_grad(cond_grad_field(s.c1, gm_t, sc.alpha_bar), x, bd.g_hat);
        for (double& t : via_trick) t *= sc.beta;
        double e = rel_err(bd.hessian_part, via_trick);
        if (!(e <= 1e-8)) {
            why = s.c1.name + std::string("->") + s.c2.name + " rel err " + std::to_string(e);
            return false;
        }
    }
    return true;
}

bool check_cagrad_grid(std::string& why) {
    PairGradientSet set;
    set.n = 3;
    set.entries = {{1.2, -0.5, 0.3, 0.8}, {-0.7, 0.9, 0.1, -0.2}, {0.4, 0.4, -1.0, 0.6}};
    set.g0.assign(4, 0.0);
    for (const auto& e : set.entries)
        for (std::size_t i = 0; i < 4; ++i) set.g0[i] += e[i] / 3.0;
    CagradConfig cfg;
    cfg.c = 0.5;
    CagradOutcome out = cagrad_combine(set, cfg);

    CagradConfig zero = cfg;
    zero.c = 0.0;
    CagradOutcome base = cagrad_combine(set, zero);
    for (std::size_t i = 0; i < 4; ++i)
        if (base.g[i] != set.g0[i]) {
            why = "c=0 is not the plain mean";
            return false;
        }

    double corr = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        corr += (out.g[i] - set.g0[i]) * (out.g[i] - set.g0[i]);
    if (std::fabs(std::sqrt(corr) - std::sqrt(out.phi)) > 1e-10) {
        why = "correction norm does not match sqrt(phi)";
        return false;
    }

    double sumw = 0.0;
    for (double w : out.w) {
        if (w < 0.0) {
            why = "negative weight";
            return false;
        }
        sumw += w;
    }
    if (std::fabs(sumw - 1.0) > 1e-12) {
        why = "weights do not sum to 1";
        return false;
    }

    // coarse grid reference, direct objective evaluation
    double sqrt_phi = std::sqrt(out.phi);
    double best = 1e300;
    int G = 50;
    for (int a = 0; a <= G; ++a)
        for (int b = 0; b <= G - a; ++b) {
            double w0 = a / double(G), w1 = b / double(G), w2 = 1.0 - w0 - w1;
            double dot0 = 0.0, n2 = 0.0;
            for (std::size_t i = 0; i < 4; ++i) {
                double gw = w0 * set.entries[0][i] + w1 * set.entries[1][i] +
                            w2 * set.entries[2][i];
                dot0 += gw * set.g0[i];
                n2 += gw * gw;
            }
            double f = dot0 + sqrt_phi * std::sqrt(n2);
            if (f < best) best = f;
        }
    if (!(out.objective <= best + 1e-6)) {
        why = "solver objective " + std::to_string(out.objective) + " above grid minimum " +
              std::to_string(best);
        return false;
    }
    return true;
}

bool check_simplex_projection(std::string& why) {
    auto close = [](const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::fabs(a[i] - b[i]) > 1e-12) return false;
        return true;
    };
    if (!close(project_simplex(std::vector<double>{0.2, 0.3, 0.5}), {0.2, 0.3, 0.5})) {
        why = "point on simplex moved";
        return false;
    }
    if (!close(project_simplex(std::vector<double>{2.0, 1.0, -3.0}), {1.0, 0.0, 0.0})) {
        why = "dominant coordinate case";
        return false;
    }
    if (!close(project_simplex(std::vector<double>{0.5, 0.5, 0.5}),
               {1.0 / 3, 1.0 / 3, 1.0 / 3})) {
        why = "symmetric case";
        return false;
    }
    auto p = project_simplex(std::vector<double>{0.9, -0.4, 0.1, 0.7});
    double s = 0.0;
    for (double w : p) {
        if (w < 0.0) {
            why = "negative weight";
            return false;
        }
        s += w;
    }
    if (std::fabs(s - 1.0) > 1e-12) {
        why = "sum " + std::to_string(s);
        return false;
    }
    if (!close(project_simplex(p), p)) {
        why = "projection is not idempotent";
        return false;
    }
    return true;
}

bool check_pca_2x2(std::string& why) {
    std::vector<double> u = {0.6, 0.8}, w = {-0.8, 0.6};
    std::vector<std::vector<double>> pts;
    for (double a : {-2.0, -1.0, 1.0, 2.0})
        for (double b : {-0.25, 0.25})
            pts.push_back({3 * a * u[0] + b * w[0], 3 * a * u[1] + b * w[1]});
    PcaResult r = pca_top2(pts, 123);
    double d1 = std::fabs(r.dir1[0] * u[0] + r.dir1[1] * u[1]);
    double d2 = std::fabs(r.dir2[0] * w[0] + r.dir2[1] * w[1]);
    if (d1 < 1.0 - 1e-8 || d2 < 1.0 - 1e-8) {
        why = "directions off axis: |d1.u|=" + std::to_string(d1) +
              " |d2.w|=" + std::to_string(d2);
        return false;
    }
    double ev1 = 180.0 / 7.0, ev2 = 0.5 / 7.0;
    if (std::fabs(r.eigval1 - ev1) > 1e-8 * ev1 || std::fabs(r.eigval2 - ev2) > 1e-6) {
        why = "eigenvalues " + std::to_string(r.eigval1) + ", " + std::to_string(r.eigval2);
        return false;
    }
    if (std::fabs(r.var_ratio1 - ev1 / (ev1 + ev2)) > 1e-8) {
        why = "variance ratio " + std::to_string(r.var_ratio1);
        return false;
    }
    return true;
}

bool check_sampler_moments(std::string& why) {
    GaussianMixture gm0;
    gm0.weights = {1.0};
    gm0.means = {{0.0, 0.0}};
    gm0.vars = {1.0};
    NoiseSchedule sched = linear_schedule(20, 1e-4, 0.2);
    SamplerSettings st;
    st.record_every = 20;
    CagradConfig cg;
    std::vector<Condition> conds;
    std::vector<int> order;
    int n = 300;
    std::vector<double> mean(2, 0.0), sq(2, 0.0);
    for (int i = 0; i < n; ++i) {
        RunTrace tr = sample(gm0, sched, conds, GuidanceMode::unconditional, order, cg, st,
                             7777 + i, i);
        for (int d = 0; d < 2; ++d) {
            mean[d] += tr.x0[d];
            sq[d] += tr.x0[d] * tr.x0[d];
        }
    }
    for (int d = 0; d < 2; ++d) {
        mean[d] /= n;
        double var = sq[d] / n - mean[d] * mean[d];
        if (std::fabs(mean[d]) > 0.15 || std::fabs(var - 1.0) > 0.3) {
            why = "coordinate " + std::to_string(d) + ": mean " + std::to_string(mean[d]) +
                  ", var " + std::to_string(var);
            return false;
        }
    }
    return true;
}

}  // namespace

int run_selftest() {
    struct Group {
        const char* name;
        bool (*fn)(std::string&);
    };
    const Group groups[] = {
        {"fd_gradients", check_fd_gradients},
        {"fd_hvps", check_fd_hvps},
        {"scalar_trick", check_scalar_trick},
        {"cagrad_grid", check_cagrad_grid},
        {"simplex_projection", check_simplex_projection},
        {"pca_2x2", check_pca_2x2},
        {"sampler_moments", check_sampler_moments},
    };
    int failures = 0;
    for (const Group& g : groups) {
        std::string why;
        bool ok = false;
        try {
            ok = g.fn(why);
        } catch (const std::exception& e) {
            why = e.what();
        }
        if (ok) {
            std::cout << "ok " << g.name << "\n";
        } else {
            ++failures;
            std::cout << "FAIL " << g.name;
            if (!why.empty()) std::cout << " (" << why << ")";
            std::cout << "\n";
        }
    }
    return failures;
}

}  // namespace guidelab
