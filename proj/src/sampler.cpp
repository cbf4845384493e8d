#include "guidelab/sampler.hpp"

#include <cmath>
#include <limits>

#include "guidelab/algebra.hpp"
#include "guidelab/errors.hpp"
#include "guidelab/guidance.hpp"
#include "guidelab/rng.hpp"

namespace guidelab {

const char* to_string(GuidanceMode m) {
    switch (m) {
        case GuidanceMode::unconditional: return "unconditional";
        case GuidanceMode::independent: return "independent";
        case GuidanceMode::dependent_pair: return "dependent_pair";
        case GuidanceMode::cagrad_multi: return "cagrad_multi";
    }
    return "?";
}

GuidanceMode parse_mode(const std::string& s) {
    if (s == "unconditional") return GuidanceMode::unconditional;
    if (s == "independent") return GuidanceMode::independent;
    if (s == "dependent_pair") return GuidanceMode::dependent_pair;
    if (s == "cagrad_multi") return GuidanceMode::cagrad_multi;
    throw ConfigError("guidance.mode must be one of unconditional, independent, dependent_pair, "
                      "cagrad_multi; got '" + s + "'");
}

std::vector<double> sampler_step(const GaussianMixture& gm0, const NoiseSchedule& sched, int t,
                                 std::span<const Condition> conds, GuidanceMode mode,
                                 std::span<const int> order, const CagradConfig& cagrad,
                                 const SamplerSettings& st, std::span<const double> x,
                                 std::span<const double> z, std::span<const double> z_update,
                                 StepRecord* rec) {
    const std::size_t d = x.size();
    const StepCoeffs sc = sched.coeffs(t);
    const GaussianMixture gm_t = marginal_at(gm0, sc.alpha_bar);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> s;
    try {
        s = score_at(gm_t, x);
    } catch (const EvalError& e) {
        throw RunError(t, "score", e.what());
    }

    bool active = t >= st.guidance_stop_t && mode != GuidanceMode::unconditional;
    std::vector<double> g(d, 0.0);
    double cos_raw = nan, cos_terms = nan;
    bool warning = false;
    try {
        if (active) {
            switch (mode) {
                case GuidanceMode::independent:
                    g = independent_combine(conds, gm_t, sc.alpha_bar, x);
                    break;
                case GuidanceMode::dependent_pair: {
                    GuidanceBreakdown bd = sequenced_combine(conds, order, gm_t, sc, x, z);
                    g = std::move(bd.combined);
                    cos_raw = bd.cos_raw;
                    cos_terms = bd.cos_terms;
                    break;
                }
                case GuidanceMode::cagrad_multi: {
                    PairGradientSet set = pairwise_gradients(conds, gm_t, sc, x, z);
                    CagradOutcome co = cagrad_combine(set, cagrad);
                    g = std::move(co.g);
                    warning = co.warning;
                    cos_raw = set.mean_cos_raw;
                    cos_terms = set.mean_cos_terms;
                    break;
                }
                case GuidanceMode::unconditional:
                    break;
            }
        }
    } catch (const RunError&) {
        throw;
    } catch (const EvalError& e) {
        throw RunError(t, e.context().empty() ? "guidance" : e.context(), e.what());
    }

    if (rec) {
        rec->t = t;
        rec->beta_t = sc.beta;
        rec->energies.resize(conds.size());
        rec->grad_norms.resize(conds.size());
        std::vector<std::vector<double>> raw(conds.size());
        for (std::size_t i = 0; i < conds.size(); ++i) {
            rec->energies[i] = energy_value(conds[i], gm_t, sc.alpha_bar, x);
            raw[i] = cond_grad(conds[i], gm_t, sc.alpha_bar, x);
            rec->grad_norms[i] = std::sqrt(sum_sq(raw[i]));
        }
        if (std::isnan(cos_raw) && conds.size() >= 2) {
            std::size_t a = 0, b = 1;
            if (order.size() == 2 && order[0] >= 0 && order[1] >= 0 &&
                order[0] < static_cast<int>(conds.size()) &&
                order[1] < static_cast<int>(conds.size())) {
                a = static_cast<std::size_t>(order[0]);
                b = static_cast<std::size_t>(order[1]);
            }
            cos_raw = cosine(raw[a], raw[b]);
        }
        rec->cos_raw = cos_raw;
        rec->cos_terms = cos_terms;
        rec->combined_norm = g.empty() ? 0.0 : std::sqrt(sum_sq(g));
        rec->state_norm = x.empty() ? 0.0 : std::sqrt(sum_sq(x));
        rec->cagrad_warning = warning;
    }

    bool noise = !(t == 1 && st.suppress_final_noise);
    std::vector<double> next(d);
    for (std::size_t i = 0; i < d; ++i) {
        double upd = sc.r * x[i] + sc.beta * (s[i] + g[i]);
        next[i] = noise ? upd + sc.sigma * z_update[i] : upd;
    }
    for (double v : next)
        if (!std::isfinite(v)) throw RunError(t, "update", "non-finite state after update");
    return next;
}

RunTrace sample(const GaussianMixture& gm0, const NoiseSchedule& sched,
                std::span<const Condition> conds, GuidanceMode mode,
                std::span<const int> order, const CagradConfig& cagrad,
                const SamplerSettings& st, std::uint64_t seed, std::uint64_t run_id,
                const std::vector<double>* x_init) {
    const int d = gm0.dim();
    const int N = sched.n_steps;
    CounterRng rng(seed);

    RunTrace trace;
    trace.run_id = run_id;
    trace.seed = seed;
    trace.mode = mode;

    std::vector<double> x(d);
    if (x_init) {
        x = *x_init;
    } else {
        for (int i = 0; i < d; ++i) x[i] = rng.normal(CounterRng::kInitState, 0, i);
    }

    std::vector<double> z(d), zu(d);
    for (int t = N; t >= 1; --t) {
        for (int i = 0; i < d; ++i) z[i] = rng.normal(CounterRng::kStepNoise, t, i);
        if (st.fresh_noise) {
            // sensitivity study: the lookahead state sees an independent draw,
            // the trajectory update keeps the canonical stream
            for (int i = 0; i < d; ++i) zu[i] = z[i];
            for (int i = 0; i < d; ++i) z[i] = rng.normal(CounterRng::kFreshNoise, t, i);
        } else {
            for (int i = 0; i < d; ++i) zu[i] = z[i];
        }

        bool record = (N - t) % st.record_every == 0 || t == 1;
        StepRecord rec;
        x = sampler_step(gm0, sched, t, conds, mode, order, cagrad, st, x, z, zu,
                         record ? &rec : nullptr);
        if (record) {
            rec.run_id = run_id;
            rec.seed = seed;
            rec.mode = to_string(mode);
            trace.any_cagrad_warning = trace.any_cagrad_warning || rec.cagrad_warning;
            trace.records.push_back(std::move(rec));
        }
    }

    trace.x0 = x;
    trace.final_energies.resize(conds.size());
    GaussianMixture gm_clean = gm0;  // alpha_bar = 1: denoised and direct coincide
    for (std::size_t i = 0; i < conds.size(); ++i)
        trace.final_energies[i] = energy_value(conds[i], gm_clean, 1.0, x);
    return trace;
}

}  // namespace guidelab
