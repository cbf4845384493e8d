#pragma once

#include <cmath>

namespace guidelab {

// Forward-mode scalar: value plus one directional-derivative tangent. Used on
// its own for directional derivatives and as the tape's scalar type for
// forward-over-reverse Hessian-vector products.
struct Dual {
    double v = 0.0;
    double d = 0.0;

    Dual() = default;
    Dual(double value) : v(value) {}
    Dual(double value, double tangent) : v(value), d(tangent) {}
};

inline Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator+(const Dual& a, double b) { return {a.v + b, a.d}; }
inline Dual operator+(double a, const Dual& b) { return {a + b.v, b.d}; }

inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(const Dual& a, double b) { return {a.v - b, a.d}; }
inline Dual operator-(double a, const Dual& b) { return {a - b.v, -b.d}; }

inline Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.v * b.d + a.d * b.v}; }
inline Dual operator*(const Dual& a, double b) { return {a.v * b, a.d * b}; }
inline Dual operator*(double a, const Dual& b) { return {a * b.v, a * b.d}; }

inline Dual operator/(const Dual& a, const Dual& b) {
    double inv = 1.0 / b.v;
    double q = a.v * inv;
    return {q, (a.d - q * b.d) * inv};
}
inline Dual operator/(const Dual& a, double b) { return {a.v / b, a.d / b}; }
inline Dual operator/(double a, const Dual& b) {
    double inv = 1.0 / b.v;
    double q = a * inv;
    return {q, -q * b.d * inv};
}

inline Dual& operator+=(Dual& a, const Dual& b) { a.v += b.v; a.d += b.d; return a; }

inline Dual exp(const Dual& a) {
    double e = std::exp(a.v);
    return {e, e * a.d};
}
inline Dual log(const Dual& a) { return {std::log(a.v), a.d / a.v}; }
inline Dual sqrt(const Dual& a) {
    double s = std::sqrt(a.v);
    return {s, 0.5 * a.d / s};
}

inline double primal(double x) { return x; }
inline double primal(const Dual& x) { return x.v; }

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Dual& x) { return std::isfinite(x.v) && std::isfinite(x.d); }

}  // namespace guidelab
