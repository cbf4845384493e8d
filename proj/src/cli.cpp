#include "guidelab/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "guidelab/config.hpp"
#include "guidelab/errors.hpp"
#include "guidelab/experiment.hpp"
#include "guidelab/guidance.hpp"
#include "guidelab/selftest.hpp"

namespace guidelab {

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    for (const std::string& item : split_csv(s)) {
        try {
            std::size_t pos = 0;
            double v = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("not a number in scale list: '" + item + "'");
        }
    }
    return out;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"score-guided diffusion sampling with dependent-condition guidance"};
    app.require_subcommand(1);

    std::string config_path, out_dir, modes_csv, fault, sweep_csv;
    std::int64_t seed = -1;
    int runs = -1, threads = -1;
    bool swap = false;

    auto add_common = [&](CLI::App* s) {
        s->add_option("--config", config_path, "JSON experiment config")->required();
        s->add_option("--out", out_dir, "output directory override");
        s->add_option("--seed", seed, "base seed override")->check(CLI::NonNegativeNumber);
        s->add_option("--runs", runs, "run count override")->check(CLI::PositiveNumber);
        s->add_option("--threads", threads, "worker threads: 0 all cores, 1 serial reference");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "sample trajectories under one guidance mode");
    add_common(cmd_run);
    cmd_run->add_flag("--swap-order", swap, "reverse the dependent-pair evaluation order");
    cmd_run->add_option("--sweep-scale", sweep_csv,
                        "comma-separated factors applied to every condition scale; "
                        "writes sweep.csv instead of per-run traces");

    CLI::App* cmd_cmp =
        app.add_subcommand("compare", "run several guidance modes on identical noise streams");
    add_common(cmd_cmp);
    cmd_cmp->add_option("--modes", modes_csv, "comma-separated guidance modes to compare");
    cmd_cmp->add_flag("--swap-order", swap, "add an order-swapped dependent_pair variant");

    CLI::App* cmd_land =
        app.add_subcommand("landscape", "energy scan on the top-2 PCA plane of the marginal");
    add_common(cmd_land);

    CLI::App* cmd_bench = app.add_subcommand("cagrad-bench", "random-instance solver benchmark");
    int b_entries = 3, b_dim = 8, b_instances = 50;
    std::uint64_t b_seed = 1;
    bool b_grid = false;
    cmd_bench->add_option("--entries", b_entries, "gradient entries per instance");
    cmd_bench->add_option("--dim", b_dim, "entry dimension");
    cmd_bench->add_option("--instances", b_instances, "instance count");
    cmd_bench->add_option("--seed", b_seed, "instance seed");
    cmd_bench->add_flag("--grid", b_grid, "cross-check against the 0.01-grid minimum (entries <= 6)");

    CLI::App* cmd_self = app.add_subcommand("selftest", "built-in numerical check groups");
    cmd_self->add_option("--inject-fault", fault,
                         "named fault (e.g. hessian_sign) that must turn a group red");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_self->parsed()) {
            if (!fault.empty()) set_fault_injection(fault);
            int failures = run_selftest();
            set_fault_injection("");
            return failures == 0 ? 0 : 3;
        }
        if (cmd_bench->parsed()) {
            CagradConfig cg;
            cagrad_bench(b_entries, b_dim, b_instances, b_seed, b_grid, cg);
            return 0;
        }

        ExperimentConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (runs > 0) cfg.runs = runs;
        if (threads >= 0) cfg.threads = threads;

        if (cmd_run->parsed()) {
            if (swap) std::reverse(cfg.order.begin(), cfg.order.end());
            if (!sweep_csv.empty())
                sweep_experiment(cfg, split_doubles(sweep_csv));
            else
                run_experiment(cfg);
            return 0;
        }
        if (cmd_cmp->parsed()) {
            compare_experiment(cfg, split_csv(modes_csv), swap);
            return 0;
        }
        if (cmd_land->parsed()) {
            landscape_experiment(cfg);
            return 0;
        }
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace guidelab
