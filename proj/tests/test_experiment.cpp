#include <doctest.h>

#include <cmath>
#include <vector>

#include "guidelab/config.hpp"
#include "guidelab/errors.hpp"
#include "guidelab/experiment.hpp"

using namespace guidelab;

namespace {

ExperimentConfig small_cfg() {
    return parse_config(R"({
      "name": "exp_test",
      "dim": 2,
      "steps": 10,
      "seed": 100,
      "runs": 6,
      "threads": 1,
      "score": {"weights": [0.5, 0.5], "means": [[1.2, 0.0], [-1.2, 0.0]], "vars": [0.6, 0.6]},
      "conditions": [
        {"kind": "quadratic_target", "params": {"target": [0.8, 0.4]}, "scale": 0.9,
         "name": "pull"},
        {"kind": "ring", "params": {"center": [0.0, 0.0], "radius": 1.1}, "scale": 0.6,
         "name": "ring"}
      ],
      "guidance": {"mode": "dependent_pair", "order": [0, 1]}
    })");
}

}  // namespace

TEST_CASE("run outcomes carry seeds and consistent totals") {
    ExperimentConfig cfg = small_cfg();
    std::vector<RunOutcome> out = run_experiment(cfg, false);
    REQUIRE(out.size() == 6);
    for (std::size_t r = 0; r < out.size(); ++r) {
        const RunOutcome& o = out[r];
        CHECK(o.run_id == r);
        CHECK(o.seed == 100 + r);
        CHECK_FALSE(o.failed);
        REQUIRE(o.final_energies.size() == 2);
        CHECK(o.final_total ==
              doctest::Approx(o.final_energies[0] + o.final_energies[1]).epsilon(1e-14));
    }
}

TEST_CASE("a variant compared against itself ties every seed") {
    ExperimentConfig cfg = small_cfg();
    CompareResult res = compare_experiment(cfg, {"independent", "independent"}, false, false);
    REQUIRE(res.variants.size() == 2);
    REQUIRE(res.win_rates.size() == 1);
    CHECK(res.win_rates[0].paired == 6);
    CHECK(res.win_rates[0].rate == 0.5);
    CHECK(res.mean_totals[0] == res.mean_totals[1]);
}

TEST_CASE("swap-order expands a dependent config into both orders") {
    ExperimentConfig cfg = small_cfg();
    CompareResult res = compare_experiment(cfg, {}, true, false);
    REQUIRE(res.variants.size() == 2);
    CHECK(res.variants[0].label == "dependent_pair");
    CHECK(res.variants[1].label == "dependent_pair_swapped");
    CHECK(res.variants[0].order == std::vector<int>{0, 1});
    CHECK(res.variants[1].order == std::vector<int>{1, 0});

    CompareResult both = compare_experiment(cfg, {"independent", "dependent_pair"}, true, false);
    REQUIRE(both.variants.size() == 3);
    CHECK(both.variants[2].label == "dependent_pair_swapped");
    CHECK(both.win_rates.size() == 3);

    CHECK_THROWS_AS(compare_experiment(cfg, {"independent"}, false, false), ConfigError);
    CHECK_THROWS_AS(compare_experiment(cfg, {}, false, false), ConfigError);
}

TEST_CASE("rescaled conditions change only the scale") {
    ExperimentConfig cfg = small_cfg();
    Condition doubled = with_scale(cfg.conditions[0], 1.8);
    CHECK(doubled.kind == cfg.conditions[0].kind);
    CHECK(doubled.mode == cfg.conditions[0].mode);
    CHECK(doubled.name == cfg.conditions[0].name);
    CHECK(doubled.scale == 1.8);
    std::vector<double> x = {0.3, -0.4};
    double base = energy_value(cfg.conditions[0], cfg.score, 1.0, x);
    double twice = energy_value(doubled, cfg.score, 1.0, x);
    CHECK(twice == doctest::Approx(2.0 * base).epsilon(1e-12));

    Condition off = with_scale(cfg.conditions[1], 0.0);
    CHECK(off.scale == 0.0);
    CHECK(energy_value(off, cfg.score, 1.0, x) == 0.0);
}

TEST_CASE("solver benchmark tracks the grid minimum") {
    CagradConfig cg;
    CagradBenchResult res = cagrad_bench(3, 4, 5, 9, true, cg);
    CHECK(res.instances == 5);
    CHECK(res.grid_checked == 5);
    CHECK(res.max_gap <= 1e-4);
    CHECK(res.warnings == 0);
    CHECK(res.seconds >= 0.0);

    CagradBenchResult wide = cagrad_bench(8, 4, 2, 9, true, cg);
    CHECK(wide.grid_checked == 0);  // grid check only runs for small entry counts
}
