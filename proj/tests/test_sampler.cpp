#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "guidelab/errors.hpp"
#include "guidelab/rng.hpp"
#include "guidelab/sampler.hpp"
#include "guidelab/schedule.hpp"
#include "guidelab/score.hpp"

using namespace guidelab;

namespace {

GaussianMixture std_normal(int d) {
    GaussianMixture m;
    m.weights = {1.0};
    m.means = {std::vector<double>(d, 0.0)};
    m.vars = {1.0};
    return m;
}

GaussianMixture mix2_d2() {
    GaussianMixture m;
    m.weights = {0.5, 0.5};
    m.means = {{1.5, 0.0}, {-1.5, 0.0}};
    m.vars = {0.6, 0.6};
    return m;
}

bool same_doubles(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

const CagradConfig kCg;
const std::vector<int> kOrder01 = {0, 1};

}  // namespace

TEST_CASE("mode names round trip") {
    for (GuidanceMode m : {GuidanceMode::unconditional, GuidanceMode::independent,
                           GuidanceMode::dependent_pair, GuidanceMode::cagrad_multi})
        CHECK(parse_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_mode("dependent"), ConfigError);
}

TEST_CASE("same seed reproduces the run bitwise") {
    GaussianMixture gm0 = mix2_d2();
    NoiseSchedule sched = linear_schedule(20, 1e-4, 0.2);
    std::vector<Condition> conds = {
        make_quadratic_target({1.0, 0.5}, 0.8, CondMode::denoised, "pull"),
        make_ring({0.0, 0.0}, 1.2, 0.5, CondMode::direct, "ring"),
    };
    SamplerSettings st;
    RunTrace a = sample(gm0, sched, conds, GuidanceMode::dependent_pair, kOrder01, kCg, st, 42, 0);
    RunTrace b = sample(gm0, sched, conds, GuidanceMode::dependent_pair, kOrder01, kCg, st, 42, 0);
    CHECK(same_doubles(a.x0, b.x0));
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].state_norm == b.records[i].state_norm);
        CHECK(a.records[i].combined_norm == b.records[i].combined_norm);
    }
    RunTrace c = sample(gm0, sched, conds, GuidanceMode::dependent_pair, kOrder01, kCg, st, 43, 0);
    CHECK_FALSE(same_doubles(a.x0, c.x0));
}

TEST_CASE("single step closed form for a standard normal prior") {
    // N(0, I) stays N(0, I) at every noise level, so the score is -x and the
    // unguided update contracts by (r - beta).
    GaussianMixture gm0 = std_normal(2);
    NoiseSchedule sched = linear_schedule(10, 1e-4, 0.2);
    int t = 5;
    StepCoeffs sc = sched.coeffs(t);
    std::vector<double> x = {0.8, -1.4};
    std::vector<double> zero = {0.0, 0.0};
    SamplerSettings st;
    StepRecord rec;
    auto next = sampler_step(gm0, sched, t, {}, GuidanceMode::unconditional, {}, kCg, st, x,
                             zero, zero, &rec);
    for (int i = 0; i < 2; ++i)
        CHECK(next[i] == doctest::Approx((sc.r - sc.beta) * x[i]).epsilon(1e-14));
    CHECK(rec.t == t);
    CHECK(rec.beta_t == sc.beta);
    CHECK(rec.state_norm == doctest::Approx(std::sqrt(0.64 + 1.96)).epsilon(1e-14));
    CHECK(rec.combined_norm == 0.0);

    std::vector<double> z = {0.7, -0.3};
    auto noisy = sampler_step(gm0, sched, t, {}, GuidanceMode::unconditional, {}, kCg, st, x,
                              z, z, nullptr);
    for (int i = 0; i < 2; ++i)
        CHECK(noisy[i] ==
              doctest::Approx((sc.r - sc.beta) * x[i] + sc.sigma * z[i]).epsilon(1e-14));
}

TEST_CASE("final-step noise suppression") {
    GaussianMixture gm0 = std_normal(2);
    NoiseSchedule sched = linear_schedule(10, 1e-4, 0.2);
    std::vector<double> x = {0.5, 0.9}, z = {2.0, -1.0};
    SamplerSettings st;

    auto quiet = sampler_step(gm0, sched, 1, {}, GuidanceMode::unconditional, {}, kCg, st, x,
                              z, z, nullptr);
    StepCoeffs sc = sched.coeffs(1);
    for (int i = 0; i < 2; ++i)
        CHECK(quiet[i] == doctest::Approx((sc.r - sc.beta) * x[i]).epsilon(1e-14));

    st.suppress_final_noise = false;
    auto loud = sampler_step(gm0, sched, 1, {}, GuidanceMode::unconditional, {}, kCg, st, x,
                             z, z, nullptr);
    for (int i = 0; i < 2; ++i)
        CHECK(loud[i] ==
              doctest::Approx((sc.r - sc.beta) * x[i] + sc.sigma * z[i]).epsilon(1e-14));
}

TEST_CASE("zero-scale conditions reproduce the unconditional run bitwise") {
    GaussianMixture gm0 = mix2_d2();
    NoiseSchedule sched = linear_schedule(15, 1e-4, 0.2);
    std::vector<Condition> off = {
        make_quadratic_target({1.0, 0.5}, 0.0, CondMode::direct, "off1"),
        make_ring({0.0, 0.0}, 1.0, 0.0, CondMode::direct, "off2"),
    };
    SamplerSettings st;
    RunTrace base = sample(gm0, sched, off, GuidanceMode::unconditional, kOrder01, kCg, st, 7, 0);
    RunTrace ind = sample(gm0, sched, off, GuidanceMode::independent, kOrder01, kCg, st, 7, 0);
    RunTrace dep = sample(gm0, sched, off, GuidanceMode::dependent_pair, kOrder01, kCg, st, 7, 0);
    RunTrace cg = sample(gm0, sched, off, GuidanceMode::cagrad_multi, kOrder01, kCg, st, 7, 0);
    CHECK(same_doubles(base.x0, ind.x0));
    CHECK(same_doubles(base.x0, dep.x0));
    CHECK(same_doubles(base.x0, cg.x0));
}

TEST_CASE("guidance stop zeroes the combined gradient below the threshold") {
    GaussianMixture gm0 = mix2_d2();
    NoiseSchedule sched = linear_schedule(12, 1e-4, 0.2);
    std::vector<Condition> conds = {
        make_quadratic_target({1.0, 0.5}, 1.0, CondMode::direct, "a"),
        make_ring({0.0, 0.0}, 1.0, 0.7, CondMode::direct, "b"),
    };
    SamplerSettings st;
    st.guidance_stop_t = 5;
    RunTrace tr = sample(gm0, sched, conds, GuidanceMode::dependent_pair, kOrder01, kCg, st, 3, 0);
    REQUIRE(tr.records.size() == 12);
    for (const StepRecord& rec : tr.records) {
        if (rec.t < 5)
            CHECK(rec.combined_norm == 0.0);
        else
            CHECK(rec.combined_norm > 0.0);
    }
}

TEST_CASE("lookahead noise refresh changes only the dependent modes") {
    GaussianMixture gm0 = mix2_d2();
    NoiseSchedule sched = linear_schedule(15, 1e-4, 0.2);
    std::vector<Condition> conds = {
        make_quadratic_target({1.0, 0.5}, 0.9, CondMode::direct, "a"),
        make_ring({0.0, 0.0}, 1.1, 0.6, CondMode::direct, "b"),
    };
    SamplerSettings plain, fresh;
    fresh.fresh_noise = true;
    for (GuidanceMode m : {GuidanceMode::unconditional, GuidanceMode::independent}) {
        RunTrace a = sample(gm0, sched, conds, m, kOrder01, kCg, plain, 11, 0);
        RunTrace b = sample(gm0, sched, conds, m, kOrder01, kCg, fresh, 11, 0);
        CHECK(same_doubles(a.x0, b.x0));
    }
    RunTrace a = sample(gm0, sched, conds, GuidanceMode::dependent_pair, kOrder01, kCg, plain, 11, 0);
    RunTrace b = sample(gm0, sched, conds, GuidanceMode::dependent_pair, kOrder01, kCg, fresh, 11, 0);
    CHECK_FALSE(same_doubles(a.x0, b.x0));
}

TEST_CASE("record schedule keeps the first and last steps") {
    GaussianMixture gm0 = std_normal(2);
    NoiseSchedule sched = linear_schedule(10, 1e-4, 0.2);
    SamplerSettings st;
    st.record_every = 3;
    RunTrace tr = sample(gm0, sched, {}, GuidanceMode::unconditional, {}, kCg, st, 1, 0);
    std::vector<int> ts;
    for (const auto& r : tr.records) ts.push_back(r.t);
    CHECK(ts == std::vector<int>{10, 7, 4, 1});

    st.record_every = 4;
    RunTrace tr2 = sample(gm0, sched, {}, GuidanceMode::unconditional, {}, kCg, st, 1, 0);
    ts.clear();
    for (const auto& r : tr2.records) ts.push_back(r.t);
    CHECK(ts == std::vector<int>{10, 6, 2, 1});

    st.record_every = 100;
    RunTrace tr3 = sample(gm0, sched, {}, GuidanceMode::unconditional, {}, kCg, st, 1, 0);
    ts.clear();
    for (const auto& r : tr3.records) ts.push_back(r.t);
    CHECK(ts == std::vector<int>{10, 1});
}

TEST_CASE("records carry the mode label and final energies use the clean density") {
    GaussianMixture gm0 = mix2_d2();
    NoiseSchedule sched = linear_schedule(8, 1e-4, 0.2);
    std::vector<Condition> conds = {
        make_quadratic_target({1.0, 0.5}, 0.8, CondMode::denoised, "a"),
        make_ring({0.0, 0.0}, 1.2, 0.5, CondMode::direct, "b"),
    };
    SamplerSettings st;
    RunTrace tr = sample(gm0, sched, conds, GuidanceMode::dependent_pair, kOrder01, kCg, st, 9, 4);
    CHECK(tr.run_id == 4);
    CHECK(tr.seed == 9);
    for (const auto& r : tr.records) {
        CHECK(r.mode == "dependent_pair");
        CHECK(r.run_id == 4);
        CHECK(r.seed == 9);
    }
    REQUIRE(tr.final_energies.size() == 2);
    for (int i = 0; i < 2; ++i)
        CHECK(tr.final_energies[i] ==
              doctest::Approx(energy_value(conds[i], gm0, 1.0, tr.x0)).epsilon(1e-14));
}

TEST_CASE("an explicit start state is used verbatim") {
    GaussianMixture gm0 = std_normal(2);
    NoiseSchedule sched = linear_schedule(6, 1e-4, 0.2);
    SamplerSettings st;
    std::vector<double> x_init = {3.0, -4.0};
    RunTrace tr = sample(gm0, sched, {}, GuidanceMode::unconditional, {}, kCg, st, 2, 0, &x_init);
    REQUIRE(!tr.records.empty());
    CHECK(tr.records[0].t == 6);
    CHECK(tr.records[0].state_norm == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("full trajectory matches a hand-rolled recursion") {
    // K = 1 prior with one quadratic condition: every map has a closed form,
    // so the whole run can be replayed outside the sampler.
    GaussianMixture gm0;
    gm0.weights = {1.0};
    gm0.means = {{0.4, -0.8}};
    gm0.vars = {1.5};
    NoiseSchedule sched = linear_schedule(5, 1e-3, 0.15);
    std::vector<Condition> conds = {
        make_quadratic_target({1.2, 0.3}, 0.7, CondMode::direct, "pull"),
    };
    SamplerSettings st;
    std::uint64_t seed = 31;
    RunTrace tr = sample(gm0, sched, conds, GuidanceMode::independent, {}, kCg, st, seed, 0);

    CounterRng rng(seed);
    std::vector<double> x(2);
    for (int i = 0; i < 2; ++i) x[i] = rng.normal(CounterRng::kInitState, 0, i);
    for (int t = 5; t >= 1; --t) {
        std::vector<double> z(2);
        for (int i = 0; i < 2; ++i) z[i] = rng.normal(CounterRng::kStepNoise, t, i);
        StepCoeffs sc = sched.coeffs(t);
        double v_t = sc.alpha_bar * 1.5 + (1.0 - sc.alpha_bar);
        double root = std::sqrt(sc.alpha_bar);
        for (int i = 0; i < 2; ++i) {
            double s = (root * gm0.means[0][i] - x[i]) / v_t;
            double g = -0.7 * (x[i] - conds[0].target[i]);
            double upd = sc.r * x[i] + sc.beta * (s + g);
            x[i] = t == 1 ? upd : upd + sc.sigma * z[i];
        }
    }
    for (int i = 0; i < 2; ++i)
        CHECK(tr.x0[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("runaway guidance surfaces as a stepwise failure") {
    GaussianMixture gm0 = std_normal(2);
    NoiseSchedule sched = linear_schedule(10, 1e-4, 0.2);
    std::vector<Condition> conds = {
        make_quadratic_target({1.0, 0.0}, 1e300, CondMode::direct, "blowup"),
        make_quadratic_target({-1.0, 0.0}, 1e300, CondMode::direct, "blowup2"),
    };
    SamplerSettings st;
    CHECK_THROWS_AS(
        sample(gm0, sched, conds, GuidanceMode::independent, kOrder01, kCg, st, 1, 0),
        RunError);
}
