#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "guidelab/algebra.hpp"
#include "guidelab/tape.hpp"

namespace guidelab {

using DVec = std::vector<double>;

namespace detail {

struct ScalarFnConcept {
    virtual ~ScalarFnConcept() = default;
    virtual double eval(std::span<const double> x) const = 0;
    virtual Dual eval(std::span<const Dual> x) const = 0;
    virtual Var<double> eval(std::span<const Var<double>> x) const = 0;
    virtual Var<Dual> eval(std::span<const Var<Dual>> x) const = 0;
};

template <typename F>
struct ScalarFnModel final : ScalarFnConcept {
    F f;
    explicit ScalarFnModel(F fn) : f(std::move(fn)) {}
    double eval(std::span<const double> x) const override { return f(x); }
    Dual eval(std::span<const Dual> x) const override { return f(x); }
    Var<double> eval(std::span<const Var<double>> x) const override { return f(x); }
    Var<Dual> eval(std::span<const Var<Dual>> x) const override { return f(x); }
};

}  // namespace detail

// One real-valued function of a real vector, evaluable over plain, dual, and
// taped scalars. Construct from a generic lambda taking std::span<const V>.
class ScalarFunction {
public:
    ScalarFunction() = default;

    template <typename F>
    ScalarFunction(std::string name, int dim, F f)
        : impl_(std::make_shared<detail::ScalarFnModel<F>>(std::move(f))),
          name_(std::move(name)),
          dim_(dim) {}

    template <typename V>
    V operator()(std::span<const V> x) const {
        return impl_->eval(x);
    }
    template <typename V>
    V operator()(const std::vector<V>& x) const {
        return impl_->eval(std::span<const V>(x));
    }

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    explicit operator bool() const { return impl_ != nullptr; }

private:
    std::shared_ptr<const detail::ScalarFnConcept> impl_;
    std::string name_;
    int dim_ = 0;
};

namespace detail {

// Rethrow evaluation failures with the enclosing function named.
[[noreturn]] inline void rethrow_with_context(const EvalError& e, const std::string& name) {
    throw EvalError(e.op(), name.empty() ? e.context() : name);
}

}  // namespace detail

// Gradient over scalar type S: reverse sweep on a fresh tape. With S = Dual
// the tangents of the result are second-derivative information.
template <typename S>
std::vector<S> gradient_s(const ScalarFunction& f, std::span<const S> x) {
    Tape<S> tape;
    tape.reserve(16 * x.size() + 64);
    std::vector<Var<S>> leaves(x.size());
    try {
        for (std::size_t i = 0; i < x.size(); ++i) leaves[i] = make_leaf(tape, x[i]);
        Var<S> out = f(std::span<const Var<S>>(leaves));
        std::vector<S> adj = tape.adjoints(out.idx);
        std::vector<S> g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = adj[leaves[i].idx];
        return g;
    } catch (const EvalError& e) {
        detail::rethrow_with_context(e, f.name());
    }
}

inline DVec gradient(const ScalarFunction& f, std::span<const double> x) {
    return gradient_s<double>(f, x);
}

// Hessian-vector product by running the reverse sweep over dual numbers
// seeded with v (forward-over-reverse).
inline DVec hvp(const ScalarFunction& f, std::span<const double> x, std::span<const double> v) {
    std::vector<Dual> seeds(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) seeds[i] = Dual(x[i], v[i]);
    std::vector<Dual> g = gradient_s<Dual>(f, seeds);
    DVec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = g[i].d;
    return out;
}

// A vector field evaluable over dual scalars (e.g. a gradient field).
using DualField = std::function<std::vector<Dual>(std::span<const Dual>)>;

// Gradient of x ↦ field(x)ᵀ v_hat with v_hat held constant: one forward pass
// per coordinate, each seeding a basis direction; entry j is v_hatᵀ (∂field/∂x_j).
inline DVec scalar_trick_grad(const DualField& field, std::span<const double> x,
                              std::span<const double> v_hat) {
    std::vector<Dual> seeds(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) seeds[i] = Dual(x[i], 0.0);
    DVec out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        seeds[j].d = 1.0;
        std::vector<Dual> g = field(seeds);
        double acc = 0.0;
        for (std::size_t i = 0; i < v_hat.size(); ++i) acc += v_hat[i] * g[i].d;
        out[j] = acc;
        seeds[j].d = 0.0;
    }
    return out;
}

}  // namespace guidelab
