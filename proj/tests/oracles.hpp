#pragma once

// Reference computations that share no code with the library: closed forms,
// long-double bisection and sine-basis spectral sums.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace oracle {

using LD = long double;

struct Set {
    LD lo, hi;
};

// sign(rho), power(p, nu), btw(delta), linear(slope)
struct Graph {
    enum Kind { Sign, Power, Btw, Linear } kind = Sign;
    LD a = 1;  // rho, p, delta or slope
    LD nu = 0;

    Set eval(LD s) const {
        switch (kind) {
            case Sign:
                if (s > 0) return {a, a};
                if (s < 0) return {-a, -a};
                return {-a, a};
            case Power: {
                if (s == 0) return {-nu, nu};
                LD v = nu + std::pow(std::fabs(s), a - 1);
                return s > 0 ? Set{v, v} : Set{-v, -v};
            }
            case Btw:
                if (s > 0) return {1 + a * s, 1 + a * s};
                if (s < 0) return {0, 0};
                return {0, 1};
            case Linear: return {a * s, a * s};
        }
        return {0, 0};
    }

    std::string spec() const {
        auto num = [](LD x) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(x));
            return std::string(buf);
        };
        switch (kind) {
            case Sign: return "sign(" + num(a) + ")";
            case Power: return "power(" + num(a) + ", " + num(nu) + ")";
            case Btw: return "btw(" + num(a) + ")";
            case Linear: return "linear(" + num(a) + ")";
        }
        return "";
    }
};

inline LD j(LD r, LD alpha) {
    if (r == 0) return 0;
    return (r > 0 ? 1 : -1) * std::pow(std::fabs(r), alpha - 1);
}

// Root of the monotone set-valued map F(y) = c j(y - s) + lambda g(y) on
// [lo, hi]; assumes F(lo) has a point <= 0 and F(hi) a point >= 0.
inline LD bisect(const Graph& g, LD s, LD lambda, LD alpha, LD lo, LD hi, LD c = 1) {
    for (int it = 0; it < 400 && hi - lo > 0; ++it) {
        LD mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi) break;
        Set G = g.eval(mid);
        LD base = c * j(mid - s, alpha);
        if (base + lambda * G.lo > 0) hi = mid;
        else if (base + lambda * G.hi < 0) lo = mid;
        else return mid;
    }
    return lo + (hi - lo) / 2;
}

// 0 in j(y - s) + lambda g(y); every test graph has 0 in g(0), so the root
// lies between s and 0 (btw at s < 0 is pinned at s itself).
inline LD resolvent(const Graph& g, LD s, LD lambda, LD alpha) {
    return bisect(g, s, lambda, alpha, std::min<LD>(s, 0), std::max<LD>(s, 0));
}

// y in lambda j(x) + g(x), found by bisection with a doubling bracket.
inline LD range(const Graph& g, LD y, LD lambda, LD alpha) {
    auto F = [&](LD x) {
        Set G = g.eval(x);
        LD b = lambda * j(x, alpha) - y;
        return Set{b + G.lo, b + G.hi};
    };
    LD r = 1;
    while (F(-r).lo > 0 || F(r).hi < 0) r *= 2;
    LD lo = -r, hi = r;
    for (int it = 0; it < 400; ++it) {
        LD mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi) break;
        Set v = F(mid);
        if (v.lo > 0) hi = mid;
        else if (v.hi < 0) lo = mid;
        else return mid;
    }
    return lo + (hi - lo) / 2;
}

inline LD minimal(const Graph& g, LD s) {
    Set v = g.eval(s);
    if (v.lo <= 0 && v.hi >= 0) return 0;
    return v.lo > 0 ? v.lo : v.hi;
}

// Dirichlet stencil eigenpairs in d = 1: v_k(i) = sin(k pi i h), eigenvalue
// (2/h^2)(1 - cos(k pi h)), sum_i v_k(i)^2 = (n+1)/2.
inline double eigenvalue(int n, int k) {
    double h = 1.0 / (n + 1);
    return 2.0 / (h * h) * (1.0 - std::cos(k * std::numbers::pi * h));
}

inline Eigen::VectorXd mode(int n, int k) {
    double h = 1.0 / (n + 1);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = std::sin(k * std::numbers::pi * (i + 1) * h);
    return v;
}

// exp(-t c K) x through the sine basis
inline Eigen::VectorXd heat(const Eigen::VectorXd& x, double t, double c = 1.0) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int k = 1; k <= n; ++k) {
        Eigen::VectorXd v = mode(n, k);
        double coef = 2.0 / (n + 1) * v.dot(x);
        out += coef * std::exp(-t * c * eigenvalue(n, k)) * v;
    }
    return out;
}

// w u^T K^{-1} u via the sine basis
inline double hminus1_sq(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    double h = 1.0 / (n + 1), s = 0.0;
    for (int k = 1; k <= n; ++k) {
        double coef = 2.0 / (n + 1) * mode(n, k).dot(u);
        s += coef * coef * (n + 1) / 2.0 / eigenvalue(n, k);
    }
    return h * s;
}

// Dense 1-d stiffness matrix, built entry by entry.
inline Eigen::MatrixXd dense_stiffness(int n) {
    double h = 1.0 / (n + 1);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        K(i, i) = 2.0 / (h * h);
        if (i > 0) K(i, i - 1) = -1.0 / (h * h);
        if (i + 1 < n) K(i, i + 1) = -1.0 / (h * h);
    }
    return K;
}

struct Wilson {
    double lo, hi;
};

inline Wilson wilson(double k, double n, double z = 1.959963984540054) {
    double p = k / n, z2 = z * z;
    double den = 1 + z2 / n;
    double c = (p + z2 / (2 * n)) / den;
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / den;
    return {c - half, c + half};
}

}  // namespace oracle
