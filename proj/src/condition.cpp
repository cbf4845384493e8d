#include "guidelab/condition.hpp"

#include <cmath>
#include <utility>

#include "guidelab/errors.hpp"

namespace guidelab {

namespace {

void check_dim(const std::vector<double>& v, const char* what, const std::string& name) {
    if (v.empty())
        throw ConfigError("condition '" + name + "': " + what + " must be non-empty");
}

void check_scale(double scale, const std::string& name) {
    if (!(scale >= 0.0))
        throw ConfigError("condition '" + name + "': scale must be >= 0");
}

}  // namespace

const char* to_string(CondKind k) {
    switch (k) {
        case CondKind::quadratic_target: return "quadratic_target";
        case CondKind::logistic_classifier: return "logistic_classifier";
        case CondKind::ring: return "ring";
        case CondKind::alignment: return "alignment";
    }
    return "?";
}

const char* to_string(CondMode m) {
    return m == CondMode::direct ? "direct" : "denoised";
}

Condition make_quadratic_target(std::vector<double> target, double scale,
                                CondMode mode, std::string name) {
    check_dim(target, "target", name);
    check_scale(scale, name);
    Condition c;
    c.kind = CondKind::quadratic_target;
    c.mode = mode;
    c.scale = scale;
    c.name = std::move(name);
    c.target = std::move(target);
    auto t = c.target;
    int d = static_cast<int>(t.size());
    c.energy = ScalarFunction(c.name, d, [t, scale](auto z) {
        using V = typename decltype(z)::value_type;
        std::vector<V> diff(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) diff[i] = z[i] - t[i];
        return sum_sq(diff) * (0.5 * scale);
    });
    return c;
}

Condition make_logistic_classifier(std::vector<double> w, double b, double y, double scale,
                                   CondMode mode, std::string name) {
    check_dim(w, "w", name);
    check_scale(scale, name);
    if (y != 1.0 && y != -1.0)
        throw ConfigError("condition '" + name + "': label y must be -1 or +1");
    Condition c;
    c.kind = CondKind::logistic_classifier;
    c.mode = mode;
    c.scale = scale;
    c.name = std::move(name);
    c.w = std::move(w);
    c.b = b;
    c.y = y;
    auto wv = c.w;
    int d = static_cast<int>(wv.size());
    c.energy = ScalarFunction(c.name, d, [wv, b, y, scale](auto z) {
        auto margin = (dot(wv, z) + b) * (-y);
        return softplus(margin) * scale;
    });
    return c;
}

Condition make_ring(std::vector<double> center, double radius, double scale,
                    CondMode mode, std::string name) {
    check_dim(center, "center", name);
    check_scale(scale, name);
    if (!(radius >= 0.0))
        throw ConfigError("condition '" + name + "': radius must be >= 0");
    Condition c;
    c.kind = CondKind::ring;
    c.mode = mode;
    c.scale = scale;
    c.name = std::move(name);
    c.center = std::move(center);
    c.radius = radius;
    auto o = c.center;
    int d = static_cast<int>(o.size());
    c.energy = ScalarFunction(c.name, d, [o, radius, scale](auto z) {
        using V = typename decltype(z)::value_type;
        std::vector<V> diff(o.size());
        for (std::size_t i = 0; i < o.size(); ++i) diff[i] = z[i] - o[i];
        return sq(norm(diff) - radius) * (0.5 * scale);
    });
    return c;
}

Condition make_alignment(std::vector<double> u, double scale, CondMode mode, std::string name) {
    check_dim(u, "u", name);
    check_scale(scale, name);
    double n = 0.0;
    for (double x : u) n += x * x;
    if (std::abs(std::sqrt(n) - 1.0) > 1e-12)
        throw ConfigError("condition '" + name + "': u must be unit norm");
    Condition c;
    c.kind = CondKind::alignment;
    c.mode = mode;
    c.scale = scale;
    c.name = std::move(name);
    c.u = std::move(u);
    auto uv = c.u;
    int d = static_cast<int>(uv.size());
    c.energy = ScalarFunction(c.name, d, [uv, scale](auto z) {
        double eps = 1e-8;
        auto cosine = dot(uv, z) / (norm(z) + eps);
        return (1.0 - cosine) * scale;
    });
    return c;
}

double energy_value(const Condition& c, const GaussianMixture& gm_t, double alpha_bar,
                    std::span<const double> x) {
    try {
        if (c.mode == CondMode::direct) return c.energy(x);
        if (!(alpha_bar > 0.0)) throw EvalError("predict_clean", c.name);
        std::vector<double> z = predict_clean(gm_t, alpha_bar, x);
        return c.energy(std::span<const double>(z));
    } catch (const EvalError& e) {
        if (e.context().empty()) throw EvalError(e.op(), c.name);
        throw;
    }
}

std::vector<double> cond_hvp(const Condition& c, const GaussianMixture& gm_t, double alpha_bar,
                             std::span<const double> x, std::span<const double> v) {
    std::vector<Dual> seeds(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) seeds[i] = Dual(x[i], v[i]);
    std::vector<Dual> g = cond_grad_s<Dual>(c, gm_t, alpha_bar, seeds);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = g[i].d;
    return out;
}

DualField cond_grad_field(const Condition& c, const GaussianMixture& gm_t, double alpha_bar) {
    return [c, gm_t, alpha_bar](std::span<const Dual> x) {
        return cond_grad_s<Dual>(c, gm_t, alpha_bar, x);
    };
}

}  // namespace guidelab
