#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "guidelab/cli.hpp"
#include "guidelab/config.hpp"
#include "guidelab/errors.hpp"

using namespace guidelab;

namespace {

std::string with_score(const std::string& extra) {
    std::string score =
        R"("score": {"weights": [1.0], "means": [[0.0, 0.0]], "vars": [1.0]})";
    if (extra.empty()) return "{" + score + "}";
    return "{" + extra + ", " + score + "}";
}

std::string err_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "(no error)";
}

bool err_has(const std::string& text, const std::string& needle) {
    return err_of(text).find(needle) != std::string::npos;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    f << body;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> full = {"guidelab"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const auto& s : full) argv.push_back(s.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

const char* kFullConfig = R"({
  "name": "clitest",
  "dim": 2,
  "steps": 12,
  "beta_min": 1e-4,
  "beta_max": 0.2,
  "seed": 5,
  "runs": 2,
  "threads": 1,
  "out_dir": "cli_out_full",
  "score": {
    "kind": "gmm",
    "weights": [0.5, 0.5],
    "means": [[1.0, 0.0], [-1.0, 0.0]],
    "vars": [0.7, 0.7]
  },
  "conditions": [
    {"kind": "quadratic_target", "params": {"target": [0.8, 0.4]},
     "scale": 0.9, "mode": "denoised", "name": "pull"},
    {"kind": "ring", "params": {"center": [0.0, 0.0], "radius": 1.1}, "scale": 0.6}
  ],
  "guidance": {"mode": "dependent_pair", "order": [1, 0], "stop_t": 2},
  "cagrad": {"c": 0.3, "inner_iters": 150, "inner_step": 0.2, "inner_tol": 1e-9},
  "sampler": {"suppress_final_noise": true, "fresh_noise": false, "record_every": 3},
  "landscape": {"n_samples": 150, "grid": 7, "extent": 2.0, "t": 6}
})";

}  // namespace

TEST_CASE("full config round trip") {
    ExperimentConfig cfg = parse_config(kFullConfig);
    CHECK(cfg.name == "clitest");
    CHECK(cfg.dim == 2);
    CHECK(cfg.steps == 12);
    CHECK(cfg.beta_min == 1e-4);
    CHECK(cfg.beta_max == 0.2);
    CHECK(cfg.seed == 5);
    CHECK(cfg.runs == 2);
    CHECK(cfg.threads == 1);
    CHECK(cfg.out_dir == "cli_out_full");
    REQUIRE(cfg.score.weights.size() == 2);
    CHECK(cfg.score.means[1][0] == -1.0);
    REQUIRE(cfg.conditions.size() == 2);
    CHECK(cfg.conditions[0].kind == CondKind::quadratic_target);
    CHECK(cfg.conditions[0].mode == CondMode::denoised);
    CHECK(cfg.conditions[0].scale == 0.9);
    CHECK(cfg.conditions[0].name == "pull");
    CHECK(cfg.conditions[1].kind == CondKind::ring);
    CHECK(cfg.conditions[1].mode == CondMode::direct);
    CHECK(cfg.conditions[1].name == "ring_1");  // defaulted from kind and index
    CHECK(cfg.conditions[1].radius == 1.1);
    CHECK(cfg.mode == GuidanceMode::dependent_pair);
    CHECK(cfg.order == std::vector<int>{1, 0});
    CHECK(cfg.stop_t == 2);
    CHECK(cfg.sampler.guidance_stop_t == 2);
    CHECK(cfg.cagrad.c == 0.3);
    CHECK(cfg.cagrad.inner_iters == 150);
    CHECK(cfg.cagrad.inner_step == 0.2);
    CHECK(cfg.cagrad.inner_tol == 1e-9);
    CHECK(cfg.sampler.record_every == 3);
    CHECK(cfg.landscape.n_samples == 150);
    CHECK(cfg.landscape.grid == 7);
    CHECK(cfg.landscape.extent == 2.0);
    CHECK(cfg.landscape_t() == 6);
}

TEST_CASE("defaults cover everything but the score") {
    ExperimentConfig cfg = parse_config(with_score(""));
    CHECK(cfg.name == "run");
    CHECK(cfg.dim == 2);
    CHECK(cfg.steps == 100);
    CHECK(cfg.beta_min == 1e-4);
    CHECK(cfg.beta_max == 0.2);
    CHECK(cfg.seed == 1);
    CHECK(cfg.runs == 1);
    CHECK(cfg.threads == 0);
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.conditions.empty());
    CHECK(cfg.mode == GuidanceMode::unconditional);
    CHECK(cfg.order == std::vector<int>{0, 1});
    CHECK(cfg.stop_t == 0);
    CHECK(cfg.cagrad.c == 0.4);
    CHECK(cfg.cagrad.inner_iters == 200);
    CHECK(cfg.sampler.record_every == 1);
    CHECK(cfg.sampler.suppress_final_noise);
    CHECK_FALSE(cfg.sampler.fresh_noise);
    CHECK(cfg.landscape.n_samples == 2000);
    CHECK(cfg.landscape.grid == 41);
    CHECK(cfg.landscape.extent == 3.0);
    CHECK(cfg.landscape_t() == 50);
}

TEST_CASE("condition kinds parse with their defaults") {
    std::string text = R"({
      "dim": 2,
      "score": {"weights": [1.0], "means": [[0.0, 0.0]], "vars": [1.0]},
      "conditions": [
        {"kind": "logistic_classifier", "params": {"w": [1.0, -1.0]}},
        {"kind": "alignment", "params": {"u": [0.6, 0.8]}}
      ]
    })";
    ExperimentConfig cfg = parse_config(text);
    REQUIRE(cfg.conditions.size() == 2);
    CHECK(cfg.conditions[0].kind == CondKind::logistic_classifier);
    CHECK(cfg.conditions[0].b == 0.0);
    CHECK(cfg.conditions[0].y == 1.0);
    CHECK(cfg.conditions[0].scale == 1.0);
    CHECK(cfg.conditions[0].name == "logistic_classifier_0");
    CHECK(cfg.conditions[1].kind == CondKind::alignment);
    CHECK(cfg.conditions[1].u[0] == 0.6);
}

TEST_CASE("unknown keys are fatal and name their path") {
    CHECK(err_has(with_score(R"("betamax": 0.3)"), "betamax"));
    CHECK(err_has(with_score(R"("guidance": {"mdoe": "independent"})"), "guidance.mdoe"));
    CHECK(err_has(with_score(R"("sampler": {"recordevery": 2})"), "sampler.recordevery"));
    std::string cond = R"("conditions": [{"kind": "quadratic_target",
        "params": {"target": [0.0, 0.0], "radius": 1.0}}])";
    CHECK(err_has(with_score(cond), "conditions[0].params.radius"));
}

TEST_CASE("type errors name the key") {
    CHECK(err_has(with_score(R"("dim": "two")"), "'dim' must be an integer"));
    CHECK(err_has(with_score(R"("steps": 2.5)"), "'steps' must be an integer"));
    CHECK(err_has(with_score(R"("beta_min": "tiny")"), "'beta_min' must be a number"));
    CHECK(err_has(with_score(R"("seed": -1)"), "non-negative"));
    CHECK(err_has(with_score(R"("seed": 1.5)"), "non-negative"));
    CHECK(err_has(with_score(R"("name": 3)"), "'name' must be a string"));
    CHECK(err_has(with_score(R"("sampler": {"fresh_noise": 1})"),
                  "'sampler.fresh_noise' must be a boolean"));
    CHECK(err_has(with_score(R"("conditions": {})"), "'conditions' must be an array"));
}

TEST_CASE("range validation") {
    CHECK(err_has(with_score(R"("dim": 0)"), "'dim' must be >= 1"));
    CHECK(err_has(with_score(R"("steps": 0)"), "'steps' must be >= 1"));
    CHECK(err_has(with_score(R"("runs": 0)"), "'runs' must be >= 1"));
    CHECK(err_has(with_score(R"("threads": -1)"), "'threads' must be >= 0"));
    CHECK(err_has(with_score(R"("steps": 10, "guidance": {"stop_t": 10})"), "stop_t"));
    CHECK(err_has(with_score(R"("cagrad": {"c": 1.0})"), "'cagrad.c' must lie in [0, 1)"));
    CHECK(err_has(with_score(R"("cagrad": {"inner_iters": 0})"), "inner_iters"));
    CHECK(err_has(with_score(R"("cagrad": {"inner_step": 0.0})"), "inner_step"));
    CHECK(err_has(with_score(R"("sampler": {"record_every": 0})"), "record_every"));
    CHECK(err_has(with_score(R"("steps": 10, "landscape": {"t": 11})"), "landscape.t"));
    CHECK(err_has(with_score(R"("beta_min": 0.3, "beta_max": 0.2)"), "beta"));
}

TEST_CASE("score validation") {
    CHECK(err_has(R"({"dim": 2})", "'score' is required"));
    CHECK(err_has(R"({"score": {"weights": [1.0], "means": [[0.0, 0.0]]}})",
                  "requires keys"));
    CHECK(err_has(R"({"score": {"kind": "vae", "weights": [1.0], "means": [[0.0, 0.0]],
                     "vars": [1.0]}})",
                  "score.kind"));
    CHECK(err_has(R"({"dim": 3, "score": {"weights": [1.0], "means": [[0.0, 0.0]],
                     "vars": [1.0]}})",
                  "dimension"));
    CHECK(err_has(R"({"score": {"weights": [0.5, 0.6], "means": [[0.0, 0.0], [1.0, 1.0]],
                     "vars": [1.0, 1.0]}})",
                  "weights"));
    CHECK(err_has(R"({"score": {"weights": [1.0], "means": [[0.0, 0.0]], "vars": [-1.0]}})",
                  "var"));
}

TEST_CASE("condition validation") {
    CHECK(err_has(with_score(R"("conditions": [{"params": {"target": [0.0, 0.0]}}])"),
                  "conditions[0].kind' is required"));
    CHECK(err_has(with_score(R"("conditions": [{"kind": "spiral", "params": {}}])"),
                  "one of"));
    CHECK(err_has(with_score(R"("conditions": [{"kind": "quadratic_target",
                     "params": {"target": [0.0]}}])"),
                  "has dimension 1"));
    CHECK(err_has(with_score(R"("conditions": [{"kind": "quadratic_target",
                     "params": {"target": [0.0, 0.0]}, "mode": "late"}])"),
                  "direct or denoised"));
    CHECK(err_has(with_score(R"("conditions": [{"kind": "logistic_classifier",
                     "params": {"w": [1.0, 0.0], "y": 0.5}}])"),
                  "y"));
    CHECK(err_has(with_score(R"("conditions": [{"kind": "ring",
                     "params": {"center": [0.0, 0.0], "radius": -1.0}}])"),
                  "radius"));
}

TEST_CASE("mode and condition count must agree") {
    CHECK(err_has(with_score(R"("guidance": {"mode": "independent"})"),
                  "at least 1 condition"));
    std::string one_cond = R"("conditions": [{"kind": "quadratic_target",
        "params": {"target": [0.0, 0.0]}}], "guidance": {"mode": "dependent_pair"})";
    CHECK(err_has(with_score(one_cond), "at least 2"));
    std::string two = R"("conditions": [
        {"kind": "quadratic_target", "params": {"target": [0.0, 0.0]}},
        {"kind": "quadratic_target", "params": {"target": [1.0, 1.0]}}],
        "guidance": {"mode": "dependent_pair", "order": [0, 0]})";
    CHECK(err_has(with_score(two), "distinct"));
    std::string oob = R"("conditions": [
        {"kind": "quadratic_target", "params": {"target": [0.0, 0.0]}},
        {"kind": "quadratic_target", "params": {"target": [1.0, 1.0]}}],
        "guidance": {"mode": "dependent_pair", "order": [0, 5]})";
    CHECK(err_has(with_score(oob), "distinct"));
    std::string cg = R"("conditions": [{"kind": "quadratic_target",
        "params": {"target": [0.0, 0.0]}}], "guidance": {"mode": "cagrad_multi"})";
    CHECK(err_has(with_score(cg), "at least 2"));
    CHECK(err_has(with_score(R"("guidance": {"mode": "pairwise"})"), "guidance.mode"));
}

TEST_CASE("malformed documents") {
    CHECK(err_has("{", "not valid JSON"));
    CHECK(err_has("[]", "root must be a JSON object"));
    CHECK_THROWS_AS(load_config("no_such_config.json"), ConfigError);
}

TEST_CASE("cli exit codes") {
    write_file("cli_good.json", kFullConfig);
    write_file("cli_bad.json", R"({"betamax": 0.3})");

    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"run"}) == 1);  // --config is required

    CHECK(run_cli({"run", "--config", "cli_good.json", "--out", "cli_out_run"}) == 0);
    CHECK(std::filesystem::exists("cli_out_run/trace.csv"));
    CHECK(std::filesystem::exists("cli_out_run/summary.csv"));
    CHECK(std::filesystem::exists("cli_out_run/energy.svg"));

    CHECK(run_cli({"run", "--config", "cli_bad.json"}) == 1);
    CHECK(run_cli({"run", "--config", "cli_missing.json"}) == 1);
    CHECK(run_cli({"run", "--config", "cli_good.json", "--seed", "-3"}) == 1);

    CHECK(run_cli({"run", "--config", "cli_good.json", "--out", "cli_out_sweep",
                   "--sweep-scale", "0.5,1.0"}) == 0);
    CHECK(std::filesystem::exists("cli_out_sweep/sweep.csv"));
    CHECK(run_cli({"run", "--config", "cli_good.json", "--out", "cli_out_sweep2",
                   "--sweep-scale", "0.5,abc"}) == 1);

    CHECK(run_cli({"compare", "--config", "cli_good.json", "--out", "cli_out_cmp",
                   "--modes", "independent,dependent_pair"}) == 0);
    CHECK(std::filesystem::exists("cli_out_cmp/compare_pairs.csv"));
    CHECK(std::filesystem::exists("cli_out_cmp/compare_curves.csv"));
    CHECK(std::filesystem::exists("cli_out_cmp/compare.svg"));
    CHECK(run_cli({"compare", "--config", "cli_good.json", "--out", "cli_out_cmp1",
                   "--modes", "independent"}) == 1);

    CHECK(run_cli({"landscape", "--config", "cli_good.json", "--out", "cli_out_land"}) == 0);
    CHECK(std::filesystem::exists("cli_out_land/landscape.csv"));
    CHECK(std::filesystem::exists("cli_out_land/landscape.svg"));
    CHECK(std::filesystem::exists("cli_out_land/pca.csv"));

    CHECK(run_cli({"cagrad-bench", "--entries", "3", "--dim", "4", "--instances", "3",
                   "--grid"}) == 0);

    // a regular file where the output directory should go: runtime failure
    write_file("cli_blocker", "x");
    CHECK(run_cli({"run", "--config", "cli_good.json", "--out", "cli_blocker/sub"}) == 2);
}

TEST_CASE("cli selftest exit codes") {
    CHECK(run_cli({"selftest", "--inject-fault", "no_such_fault"}) == 1);
    CHECK(run_cli({"selftest", "--inject-fault", "hessian_sign"}) == 3);
    CHECK(run_cli({"selftest"}) == 0);
}
