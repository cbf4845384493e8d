#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "guidelab/dual.hpp"
#include "guidelab/tape.hpp"

namespace guidelab {

// Small generic kernels shared by every scalar type the engine supports
// (double, Dual, Var<double>, Var<Dual>). Accumulators start from the first
// term so no zero constant ever enters a recorded expression.

template <typename V>
V sq(const V& x) {
    return x * x;
}

template <typename A, typename B>
auto dot(const A& a, const B& b) {
    auto acc = a[0] * b[0];
    for (std::size_t i = 1; i < std::size(a); ++i) acc = acc + a[i] * b[i];
    return acc;
}

template <typename A>
auto sum(const A& a) {
    auto acc = a[0];
    for (std::size_t i = 1; i < std::size(a); ++i) acc = acc + a[i];
    return acc;
}

template <typename A>
auto sum_sq(const A& a) {
    auto acc = sq(a[0]);
    for (std::size_t i = 1; i < std::size(a); ++i) acc = acc + sq(a[i]);
    return acc;
}

template <typename A>
auto norm(const A& a) {
    using std::sqrt;
    return sqrt(sum_sq(a));
}

// Max-shifted log-sum-exp. The shift is the primal max held as a plain
// constant; the identity holds for any fixed shift, so derivatives pass
// through untouched.
template <typename A>
auto logsumexp(const A& a) {
    using std::exp;
    using std::log;
    double m = primal(a[0]);
    for (std::size_t i = 1; i < std::size(a); ++i) m = std::max(m, primal(a[i]));
    auto acc = exp(a[0] - m);
    for (std::size_t i = 1; i < std::size(a); ++i) acc = acc + exp(a[i] - m);
    return log(acc) + m;
}

// log(1 + e^t), stable on both tails via the same constant-shift identity.
template <typename V>
V softplus(const V& t) {
    using std::exp;
    using std::log;
    double m = std::max(primal(t), 0.0);
    return log(exp(t - m) + std::exp(-m)) + m;
}

}  // namespace guidelab
