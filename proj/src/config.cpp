#include "guidelab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "guidelab/errors.hpp"

namespace guidelab {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& prefix) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown config key '" + prefix + it.key() + "'");
}

std::string path_str(const std::string& prefix, const char* key) {
    return prefix + key;
}

double get_num(const json& obj, const char* key, const std::string& prefix) {
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError("config key '" + path_str(prefix, key) + "' must be a number");
    return v.get<double>();
}

int get_int(const json& obj, const char* key, const std::string& prefix) {
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError("config key '" + path_str(prefix, key) + "' must be an integer");
    return v.get<int>();
}

bool get_bool(const json& obj, const char* key, const std::string& prefix) {
    const json& v = obj.at(key);
    if (!v.is_boolean())
        throw ConfigError("config key '" + path_str(prefix, key) + "' must be a boolean");
    return v.get<bool>();
}

std::string get_str(const json& obj, const char* key, const std::string& prefix) {
    const json& v = obj.at(key);
    if (!v.is_string())
        throw ConfigError("config key '" + path_str(prefix, key) + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> get_vec(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError("config key '" + path + "' must be an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number())
            throw ConfigError("config key '" + path + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

GaussianMixture parse_score(const json& s) {
    reject_unknown(s, {"kind", "weights", "means", "vars"}, "score.");
    if (s.contains("kind")) {
        std::string kind = get_str(s, "kind", "score.");
        if (kind != "gmm")
            throw ConfigError("score.kind must be \"gmm\", got '" + kind + "'");
    }
    GaussianMixture m;
    if (!s.contains("weights") || !s.contains("means") || !s.contains("vars"))
        throw ConfigError("score requires keys weights, means, vars");
    m.weights = get_vec(s.at("weights"), "score.weights");
    m.vars = get_vec(s.at("vars"), "score.vars");
    const json& means = s.at("means");
    if (!means.is_array())
        throw ConfigError("config key 'score.means' must be an array of arrays");
    for (std::size_t k = 0; k < means.size(); ++k)
        m.means.push_back(get_vec(means[k], "score.means[" + std::to_string(k) + "]"));
    m.validate();
    return m;
}

Condition parse_condition(const json& c, std::size_t idx, int dim) {
    std::string prefix = "conditions[" + std::to_string(idx) + "].";
    reject_unknown(c, {"kind", "params", "scale", "mode", "name"}, prefix);
    if (!c.contains("kind"))
        throw ConfigError("config key '" + prefix + "kind' is required");
    std::string kind = get_str(c, "kind", prefix);
    double scale = c.contains("scale") ? get_num(c, "scale", prefix) : 1.0;
    CondMode mode = CondMode::direct;
    if (c.contains("mode")) {
        std::string ms = get_str(c, "mode", prefix);
        if (ms == "direct")
            mode = CondMode::direct;
        else if (ms == "denoised")
            mode = CondMode::denoised;
        else
            throw ConfigError("config key '" + prefix + "mode' must be direct or denoised");
    }
    std::string name = c.contains("name") ? get_str(c, "name", prefix)
                                          : kind + "_" + std::to_string(idx);
    json params = c.contains("params") ? c.at("params") : json::object();
    if (!params.is_object())
        throw ConfigError("config key '" + prefix + "params' must be an object");
    std::string pp = prefix + "params.";

    Condition cond;
    if (kind == "quadratic_target") {
        reject_unknown(params, {"target"}, pp);
        if (!params.contains("target"))
            throw ConfigError("config key '" + pp + "target' is required");
        cond = make_quadratic_target(get_vec(params.at("target"), pp + "target"), scale, mode,
                                     name);
    } else if (kind == "logistic_classifier") {
        reject_unknown(params, {"w", "b", "y"}, pp);
        if (!params.contains("w"))
            throw ConfigError("config key '" + pp + "w' is required");
        double b = params.contains("b") ? get_num(params, "b", pp) : 0.0;
        double y = params.contains("y") ? get_num(params, "y", pp) : 1.0;
        cond = make_logistic_classifier(get_vec(params.at("w"), pp + "w"), b, y, scale, mode,
                                        name);
    } else if (kind == "ring") {
        reject_unknown(params, {"center", "radius"}, pp);
        if (!params.contains("center") || !params.contains("radius"))
            throw ConfigError("ring condition requires '" + pp + "center' and '" + pp + "radius'");
        cond = make_ring(get_vec(params.at("center"), pp + "center"),
                         get_num(params, "radius", pp), scale, mode, name);
    } else if (kind == "alignment") {
        reject_unknown(params, {"u"}, pp);
        if (!params.contains("u"))
            throw ConfigError("config key '" + pp + "u' is required");
        cond = make_alignment(get_vec(params.at("u"), pp + "u"), scale, mode, name);
    } else {
        throw ConfigError("config key '" + prefix + "kind' must be one of quadratic_target, "
                          "logistic_classifier, ring, alignment; got '" + kind + "'");
    }
    if (cond.energy.dim() != dim)
        throw ConfigError("condition '" + name + "' has dimension " +
                          std::to_string(cond.energy.dim()) + ", expected " +
                          std::to_string(dim));
    return cond;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");

    reject_unknown(root,
                   {"name", "dim", "steps", "beta_min", "beta_max", "seed", "runs", "threads",
                    "out_dir", "score", "conditions", "guidance", "cagrad", "sampler",
                    "landscape"},
                   "");

    ExperimentConfig cfg;
    if (root.contains("name")) cfg.name = get_str(root, "name", "");
    if (root.contains("dim")) cfg.dim = get_int(root, "dim", "");
    if (root.contains("steps")) cfg.steps = get_int(root, "steps", "");
    if (root.contains("beta_min")) cfg.beta_min = get_num(root, "beta_min", "");
    if (root.contains("beta_max")) cfg.beta_max = get_num(root, "beta_max", "");
    if (root.contains("seed")) {
        const json& v = root.at("seed");
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw ConfigError("config key 'seed' must be a non-negative integer");
        cfg.seed = v.get<std::uint64_t>();
    }
    if (root.contains("runs")) cfg.runs = get_int(root, "runs", "");
    if (root.contains("threads")) cfg.threads = get_int(root, "threads", "");
    if (root.contains("out_dir")) cfg.out_dir = get_str(root, "out_dir", "");

    if (cfg.dim < 1) throw ConfigError("config key 'dim' must be >= 1");
    if (cfg.steps < 1) throw ConfigError("config key 'steps' must be >= 1");
    if (cfg.runs < 1) throw ConfigError("config key 'runs' must be >= 1");
    if (cfg.threads < 0) throw ConfigError("config key 'threads' must be >= 0");

    if (!root.contains("score"))
        throw ConfigError("config key 'score' is required (no default data distribution)");
    cfg.score = parse_score(root.at("score"));
    if (cfg.score.dim() != cfg.dim)
        throw ConfigError("score means have dimension " + std::to_string(cfg.score.dim()) +
                          ", config key 'dim' says " + std::to_string(cfg.dim));

    if (root.contains("conditions")) {
        const json& cs = root.at("conditions");
        if (!cs.is_array()) throw ConfigError("config key 'conditions' must be an array");
        for (std::size_t i = 0; i < cs.size(); ++i)
            cfg.conditions.push_back(parse_condition(cs[i], i, cfg.dim));
    }

    if (root.contains("guidance")) {
        const json& g = root.at("guidance");
        reject_unknown(g, {"mode", "order", "stop_t"}, "guidance.");
        if (g.contains("mode")) cfg.mode = parse_mode(get_str(g, "mode", "guidance."));
        if (g.contains("order")) {
            const json& o = g.at("order");
            if (!o.is_array()) throw ConfigError("config key 'guidance.order' must be an array");
            cfg.order.clear();
            for (const auto& e : o) {
                if (!e.is_number_integer())
                    throw ConfigError("config key 'guidance.order' must hold integers");
                cfg.order.push_back(e.get<int>());
            }
        }
        if (g.contains("stop_t")) cfg.stop_t = get_int(g, "stop_t", "guidance.");
    }
    if (cfg.stop_t < 0 || cfg.stop_t >= cfg.steps)
        throw ConfigError("config key 'guidance.stop_t' must lie in [0, steps)");
    cfg.sampler.guidance_stop_t = cfg.stop_t;

    if (root.contains("cagrad")) {
        const json& c = root.at("cagrad");
        reject_unknown(c, {"c", "inner_iters", "inner_step", "inner_tol"}, "cagrad.");
        if (c.contains("c")) cfg.cagrad.c = get_num(c, "c", "cagrad.");
        if (c.contains("inner_iters")) cfg.cagrad.inner_iters = get_int(c, "inner_iters", "cagrad.");
        if (c.contains("inner_step")) cfg.cagrad.inner_step = get_num(c, "inner_step", "cagrad.");
        if (c.contains("inner_tol")) cfg.cagrad.inner_tol = get_num(c, "inner_tol", "cagrad.");
    }
    if (!(cfg.cagrad.c >= 0.0 && cfg.cagrad.c < 1.0))
        throw ConfigError("config key 'cagrad.c' must lie in [0, 1)");
    if (cfg.cagrad.inner_iters < 1)
        throw ConfigError("config key 'cagrad.inner_iters' must be >= 1");
    if (!(cfg.cagrad.inner_step > 0.0))
        throw ConfigError("config key 'cagrad.inner_step' must be > 0");
    if (!(cfg.cagrad.inner_tol >= 0.0))
        throw ConfigError("config key 'cagrad.inner_tol' must be >= 0");

    if (root.contains("sampler")) {
        const json& s = root.at("sampler");
        reject_unknown(s, {"suppress_final_noise", "fresh_noise", "record_every"}, "sampler.");
        if (s.contains("suppress_final_noise"))
            cfg.sampler.suppress_final_noise = get_bool(s, "suppress_final_noise", "sampler.");
        if (s.contains("fresh_noise"))
            cfg.sampler.fresh_noise = get_bool(s, "fresh_noise", "sampler.");
        if (s.contains("record_every"))
            cfg.sampler.record_every = get_int(s, "record_every", "sampler.");
    }
    if (cfg.sampler.record_every < 1)
        throw ConfigError("config key 'sampler.record_every' must be >= 1");

    if (root.contains("landscape")) {
        const json& l = root.at("landscape");
        reject_unknown(l, {"n_samples", "grid", "extent", "t"}, "landscape.");
        if (l.contains("n_samples")) cfg.landscape.n_samples = get_int(l, "n_samples", "landscape.");
        if (l.contains("grid")) cfg.landscape.grid = get_int(l, "grid", "landscape.");
        if (l.contains("extent")) cfg.landscape.extent = get_num(l, "extent", "landscape.");
        if (l.contains("t")) cfg.landscape.t = get_int(l, "t", "landscape.");
    }
    if (cfg.landscape.t < 0 || cfg.landscape.t > cfg.steps)
        throw ConfigError("config key 'landscape.t' must lie in [0, steps] (0 selects steps/2)");

    const int n = static_cast<int>(cfg.conditions.size());
    if (cfg.mode == GuidanceMode::independent && n < 1)
        throw ConfigError("guidance.mode independent needs at least 1 condition");
    if (cfg.mode == GuidanceMode::dependent_pair) {
        if (n < 2) throw ConfigError("guidance.mode dependent_pair needs at least 2 conditions");
        if (cfg.order.size() != 2 || cfg.order[0] == cfg.order[1] || cfg.order[0] < 0 ||
            cfg.order[1] < 0 || cfg.order[0] >= n || cfg.order[1] >= n)
            throw ConfigError("guidance.order must name two distinct condition indices");
    }
    if (cfg.mode == GuidanceMode::cagrad_multi && n < 2)
        throw ConfigError("guidance.mode cagrad_multi needs at least 2 conditions");

    // schedule bounds validated by construction
    linear_schedule(cfg.steps, cfg.beta_min, cfg.beta_max);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

}  // namespace guidelab
