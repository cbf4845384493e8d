#pragma once

#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "guidelab/dual.hpp"
#include "guidelab/errors.hpp"

namespace guidelab {

// Reverse-mode tape over scalar type S. S = double gives plain gradients;
// S = Dual runs the same reverse sweep over dual numbers, so the tangent of
// each adjoint is a Hessian-vector product (forward-over-reverse). Nodes hold
// at most two parents with precomputed local partials. Values and partials are
// checked finite at record time so a failure names the op that produced it.
template <typename S>
class Tape {
public:
    struct Node {
        int p0, p1;
        S d0, d1;
    };

    void reserve(std::size_t n) { nodes_.reserve(n); }
    std::size_t size() const { return nodes_.size(); }

    int leaf(const S& v) {
        check(v, "input");
        nodes_.push_back({-1, -1, S(0.0), S(0.0)});
        return static_cast<int>(nodes_.size()) - 1;
    }

    int unary(int p, const S& v, const S& d, const char* op) {
        check(v, op);
        check(d, op);
        nodes_.push_back({p, -1, d, S(0.0)});
        return static_cast<int>(nodes_.size()) - 1;
    }

    int binary(int p0, int p1, const S& v, const S& d0, const S& d1, const char* op) {
        check(v, op);
        check(d0, op);
        check(d1, op);
        nodes_.push_back({p0, p1, d0, d1});
        return static_cast<int>(nodes_.size()) - 1;
    }

    // Adjoints of every node w.r.t. node `out`, seeded with 1.
    std::vector<S> adjoints(int out) const {
        std::vector<S> adj(nodes_.size(), S(0.0));
        adj[out] = S(1.0);
        for (int i = out; i >= 0; --i) {
            const Node& n = nodes_[i];
            if (n.p0 < 0) continue;
            adj[n.p0] += n.d0 * adj[i];
            if (n.p1 >= 0) adj[n.p1] += n.d1 * adj[i];
        }
        return adj;
    }

private:
    static void check(const S& x, const char* op) {
        if (!is_finite(x)) throw EvalError(op);
    }

    std::vector<Node> nodes_;
};

// A value recorded on a tape. Carries its own value so op implementations
// never consult the tape for forward data.
template <typename S>
struct Var {
    Tape<S>* tape = nullptr;
    int idx = -1;
    S val{};
};

template <typename S>
Var<S> make_leaf(Tape<S>& tape, const S& v) {
    return {&tape, tape.leaf(v), v};
}

template <typename S>
double primal(const Var<S>& x) {
    return primal(x.val);
}

// -- arithmetic ---------------------------------------------------------------
// Constants (S or double) never allocate a node; they fold into partials.

template <typename S>
Var<S> operator+(const Var<S>& a, const Var<S>& b) {
    S v = a.val + b.val;
    return {a.tape, a.tape->binary(a.idx, b.idx, v, S(1.0), S(1.0), "add"), v};
}
template <typename S>
Var<S> operator+(const Var<S>& a, const std::type_identity_t<S>& c) {
    S v = a.val + c;
    return {a.tape, a.tape->unary(a.idx, v, S(1.0), "add"), v};
}
template <typename S>
Var<S> operator+(const std::type_identity_t<S>& c, const Var<S>& a) {
    return a + c;
}

template <typename S>
Var<S> operator-(const Var<S>& a) {
    S v = -a.val;
    return {a.tape, a.tape->unary(a.idx, v, S(-1.0), "neg"), v};
}
template <typename S>
Var<S> operator-(const Var<S>& a, const Var<S>& b) {
    S v = a.val - b.val;
    return {a.tape, a.tape->binary(a.idx, b.idx, v, S(1.0), S(-1.0), "sub"), v};
}
template <typename S>
Var<S> operator-(const Var<S>& a, const std::type_identity_t<S>& c) {
    S v = a.val - c;
    return {a.tape, a.tape->unary(a.idx, v, S(1.0), "sub"), v};
}
template <typename S>
Var<S> operator-(const std::type_identity_t<S>& c, const Var<S>& a) {
    S v = c - a.val;
    return {a.tape, a.tape->unary(a.idx, v, S(-1.0), "sub"), v};
}

template <typename S>
Var<S> operator*(const Var<S>& a, const Var<S>& b) {
    S v = a.val * b.val;
    return {a.tape, a.tape->binary(a.idx, b.idx, v, b.val, a.val, "mul"), v};
}
template <typename S>
Var<S> operator*(const Var<S>& a, const std::type_identity_t<S>& c) {
    S v = a.val * c;
    return {a.tape, a.tape->unary(a.idx, v, c, "mul"), v};
}
template <typename S>
Var<S> operator*(const std::type_identity_t<S>& c, const Var<S>& a) {
    return a * c;
}

template <typename S>
Var<S> operator/(const Var<S>& a, const Var<S>& b) {
    S v = a.val / b.val;
    S inv = S(1.0) / b.val;
    return {a.tape, a.tape->binary(a.idx, b.idx, v, inv, -v * inv, "div"), v};
}
template <typename S>
Var<S> operator/(const Var<S>& a, const std::type_identity_t<S>& c) {
    S inv = S(1.0) / c;
    S v = a.val * inv;
    return {a.tape, a.tape->unary(a.idx, v, inv, "div"), v};
}
template <typename S>
Var<S> operator/(const std::type_identity_t<S>& c, const Var<S>& a) {
    S inv = S(1.0) / a.val;
    S v = c * inv;
    return {a.tape, a.tape->unary(a.idx, v, -v * inv, "div"), v};
}

template <typename S>
Var<S> exp(const Var<S>& a) {
    using std::exp;
    S v = exp(a.val);
    return {a.tape, a.tape->unary(a.idx, v, v, "exp"), v};
}
template <typename S>
Var<S> log(const Var<S>& a) {
    using std::log;
    S v = log(a.val);
    return {a.tape, a.tape->unary(a.idx, v, S(1.0) / a.val, "log"), v};
}
template <typename S>
Var<S> sqrt(const Var<S>& a) {
    using std::sqrt;
    S v = sqrt(a.val);
    return {a.tape, a.tape->unary(a.idx, v, S(0.5) / v, "sqrt"), v};
}

}  // namespace guidelab
