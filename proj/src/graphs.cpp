#include "yosida/graphs.hpp"

#include "yosida/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace yosida {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFar = 1e150;

double far(double x) { return std::isinf(x) ? std::copysign(kFar, x) : x; }

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

ScalarGraph::ScalarGraph(std::vector<double> breakpoints, std::vector<Branch> branches, GraphMeta meta)
    : bp_(std::move(breakpoints)), br_(std::move(branches)), meta_(std::move(meta)) {
    require(br_.size() == bp_.size() + 1, "graph needs one more branch than breakpoints");
    require(std::is_sorted(bp_.begin(), bp_.end()) &&
                std::adjacent_find(bp_.begin(), bp_.end()) == bp_.end(),
            "graph breakpoints must be strictly increasing");
    for (const auto& b : br_) require(static_cast<bool>(b.f), "graph branch without a function");
    jumps_.reserve(bp_.size());
    for (size_t j = 0; j < bp_.size(); ++j) {
        Interval I{br_[j].f(bp_[j]), br_[j + 1].f(bp_[j])};
        require(I.lo <= I.hi, "graph is not monotone across breakpoint " + fmt(bp_[j]));
        jumps_.push_back(I);
    }
}

int ScalarGraph::piece(double s) const {
    return static_cast<int>(std::lower_bound(bp_.begin(), bp_.end(), s) - bp_.begin());
}

Interval ScalarGraph::eval(double s) const {
    auto it = std::lower_bound(bp_.begin(), bp_.end(), s);
    if (it != bp_.end() && *it == s) return jumps_[it - bp_.begin()];
    double v = br_[it - bp_.begin()].f(s);
    return {v, v};
}

double ScalarGraph::minimal_section(double s) const {
    Interval I = eval(s);
    if (I.contains(0.0)) return 0.0;
    return I.lo > 0.0 ? I.lo : I.hi;
}

double ScalarGraph::slope(double s) const {
    auto it = std::lower_bound(bp_.begin(), bp_.end(), s);
    if (it != bp_.end() && *it == s) {
        size_t j = it - bp_.begin();
        if (jumps_[j].hi > jumps_[j].lo) return kInf;
        double l = br_[j].df ? br_[j].df(s) : 0.0;
        double r = br_[j + 1].df ? br_[j + 1].df(s) : 0.0;
        return std::max(l, r);
    }
    const Branch& b = br_[it - bp_.begin()];
    return b.df ? b.df(s) : 0.0;
}

double ScalarGraph::invert_branch(int k, double w) const {
    const Branch& b = br_[k];
    if (b.inv) return b.inv(w);
    double a = k > 0 ? bp_[k - 1] : -kInf;
    double c = k < static_cast<int>(bp_.size()) ? bp_[k] : kInf;
    double lo = a, hi = c;
    if (std::isinf(lo)) {
        lo = std::isinf(hi) ? -1.0 : hi - 1.0;
        while (b.f(lo) > w && lo > -kFar) lo = 2.0 * lo - (std::isinf(hi) ? 1.0 : hi);
    }
    if (std::isinf(hi)) {
        hi = lo + 2.0;
        while (b.f(hi) < w && hi < kFar) hi = 2.0 * hi - lo;
    }
    for (int it = 0; it < 300; ++it) {
        double m = 0.5 * (lo + hi);
        if (m <= lo || m >= hi) break;
        if (b.f(m) < w) lo = m; else hi = m;
    }
    return 0.5 * (lo + hi);
}

Interval ScalarGraph::inverse(double w) const {
    double lo = kInf, hi = -kInf;
    auto take = [&](double a, double b) {
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    };
    const int m = static_cast<int>(bp_.size());
    for (int k = 0; k <= m; ++k) {
        double a = k > 0 ? bp_[k - 1] : -kInf;
        double c = k < m ? bp_[k] : kInf;
        double fa = br_[k].f(far(a)), fc = br_[k].f(far(c));
        if (fa == fc) {
            if (w == fa) take(a, c);
        } else if (w > fa && w < fc) {
            double s = invert_branch(k, w);
            take(s, s);
        }
        if (k < m && jumps_[k].contains(w)) take(bp_[k], bp_[k]);
    }
    return {lo, hi};
}

double ScalarGraph::inverse_slope(double w) const {
    Interval I = inverse(w);
    if (I.empty()) return 0.0;
    if (I.hi > I.lo) return kInf;
    double s = I.lo;
    auto it = std::lower_bound(bp_.begin(), bp_.end(), s);
    if (it != bp_.end() && *it == s) {
        size_t j = it - bp_.begin();
        const Interval& J = jumps_[j];
        if (w > J.lo && w < J.hi) return 0.0;
        const Branch& b = (w >= J.hi) ? br_[j + 1] : br_[j];
        double d = b.df ? b.df(s) : 0.0;
        return d > 0.0 ? 1.0 / d : kInf;
    }
    double d = slope(s);
    if (std::isinf(d)) return 0.0;
    return d > 0.0 ? 1.0 / d : kInf;
}

std::vector<std::string> ScalarGraph::check() const {
    std::vector<std::string> issues;
    for (size_t j = 0; j < bp_.size(); ++j) {
        if (!(jumps_[j].lo <= jumps_[j].hi)) issues.push_back("non-monotone jump at " + fmt(bp_[j]));
        // maximality: interval endpoints are the one-sided branch limits
        // branch formulas extend continuously to their endpoints
        double l = br_[j].f(bp_[j]), r = br_[j + 1].f(bp_[j]);
        double tol = 1e-6 * std::max(1.0, std::abs(jumps_[j].hi) + std::abs(jumps_[j].lo));
        if (std::abs(l - jumps_[j].lo) > tol || std::abs(r - jumps_[j].hi) > tol)
            issues.push_back("branch limits disagree with interval at " + fmt(bp_[j]));
    }
    const int m = static_cast<int>(bp_.size());
    for (int k = 0; k <= m; ++k) {
        double a = k > 0 ? bp_[k - 1] : (m ? bp_[0] - 10.0 : -10.0);
        double c = k < m ? bp_[k] : (m ? bp_[m - 1] + 10.0 : 10.0);
        double prev = -kInf;
        for (int i = 1; i < 64; ++i) {
            double v = br_[k].f(a + (c - a) * i / 64.0);
            if (!std::isfinite(v)) issues.push_back("non-finite branch value");
            if (v < prev - 1e-12 * std::max(1.0, std::abs(v))) {
                issues.push_back("branch " + std::to_string(k) + " is decreasing");
                break;
            }
            prev = v;
        }
    }
    if (meta_.c1 < 0.0 || meta_.c2 < 0.0) issues.push_back("negative declared coercivity constants");
    if (!(meta_.p > 1.0)) issues.push_back("declared exponent p must exceed 1");
    return issues;
}

namespace graphs {

ScalarGraph sign(double rho) {
    require(rho > 0.0, "sign graph needs rho > 0");
    Branch neg{[rho](double) { return -rho; }, [](double) { return 0.0; }, {}};
    Branch pos{[rho](double) { return rho; }, [](double) { return 0.0; }, {}};
    GraphMeta m;
    m.spec = "sign(" + fmt(rho) + ")";
    m.c1 = 0.0;
    m.p = 2.0;
    m.growth = rho;
    m.odd = true;
    return ScalarGraph({0.0}, {neg, pos}, m);
}

ScalarGraph power(double p, double nu) {
    require(p > 1.0, "power graph needs p > 1");
    require(nu >= 0.0, "power graph needs nu >= 0");
    const double q = p - 1.0;
    Branch neg{[q, nu](double s) { return -(nu + std::pow(-s, q)); },
               [q](double s) { return q * std::pow(-s, q - 1.0); },
               [q, nu](double w) { return -std::pow(std::max(0.0, -w - nu), 1.0 / q); }};
    Branch pos{[q, nu](double s) { return nu + std::pow(s, q); },
               [q](double s) { return q * std::pow(s, q - 1.0); },
               [q, nu](double w) { return std::pow(std::max(0.0, w - nu), 1.0 / q); }};
    GraphMeta m;
    m.spec = "power(" + fmt(p) + ", " + fmt(nu) + ")";
    m.c1 = 1.0;
    m.p = p;
    m.c2 = 0.0;
    m.growth = std::max(1.0, nu);
    m.odd = true;
    m.strictly_increasing = true;
    return ScalarGraph({0.0}, {neg, pos}, m);
}

ScalarGraph btw(double delta) {
    require(delta >= 0.0, "btw graph needs delta >= 0");
    Branch neg{[](double) { return 0.0; }, [](double) { return 0.0; }, {}};
    Branch pos{[delta](double s) { return 1.0 + delta * s; }, [delta](double) { return delta; },
               delta > 0.0 ? std::function<double(double)>([delta](double w) { return (w - 1.0) / delta; })
                           : std::function<double(double)>()};
    GraphMeta m;
    m.spec = "btw(" + fmt(delta) + ")";
    m.c1 = 0.0;
    m.p = 2.0;
    m.growth = std::max(1.0, delta);
    return ScalarGraph({0.0}, {neg, pos}, m);
}

ScalarGraph linear(double slope) {
    require(slope >= 0.0, "linear graph needs slope >= 0");
    Branch b{[slope](double s) { return slope * s; }, [slope](double) { return slope; },
             slope > 0.0 ? std::function<double(double)>([slope](double w) { return w / slope; })
                         : std::function<double(double)>()};
    GraphMeta m;
    m.spec = "linear(" + fmt(slope) + ")";
    m.c1 = slope;
    m.p = 2.0;
    m.growth = std::max(slope, 1e-300);
    m.odd = true;
    m.strictly_increasing = slope > 0.0;
    m.linear_slope = slope;
    return ScalarGraph({}, {b}, m);
}

ScalarGraph non_newtonian(double p) {
    require(p > 1.0, "non-Newtonian graph needs p > 1");
    const double e = (p - 2.0) / 2.0;
    Branch b{[e](double s) { return std::pow(1.0 + s * s, e) * s; },
             [e, p](double s) { return std::pow(1.0 + s * s, e - 1.0) * (1.0 + (p - 1.0) * s * s); }, {}};
    GraphMeta m;
    m.spec = "non_newtonian(" + fmt(p) + ")";
    m.p = p;
    if (p >= 2.0) {
        m.c1 = 1.0;
        m.c2 = 0.0;
    } else {
        m.c1 = std::pow(2.0, e);
        m.c2 = m.c1;
    }
    m.growth = std::max(1.0, std::pow(2.0, e));
    m.odd = true;
    m.strictly_increasing = true;
    return ScalarGraph({}, {b}, m);
}

ScalarGraph piecewise(std::vector<double> breakpoints, std::vector<std::pair<double, double>> branches) {
    require(branches.size() == breakpoints.size() + 1, "piecewise graph needs one more branch than breakpoints");
    std::vector<Branch> br;
    double growth = 1e-300;
    bool strict = true;
    for (auto [a, c] : branches) {
        require(a >= 0.0, "piecewise branches must have nonnegative slope");
        strict = strict && a > 0.0;
        growth = std::max({growth, a, std::abs(c)});
        br.push_back(Branch{[a, c](double s) { return a * s + c; }, [a](double) { return a; },
                            a > 0.0 ? std::function<double(double)>([a, c](double w) { return (w - c) / a; })
                                    : std::function<double(double)>()});
    }
    bool odd = true;
    const size_t m = breakpoints.size();
    for (size_t j = 0; j < m && odd; ++j) odd = breakpoints[j] == -breakpoints[m - 1 - j];
    for (size_t k = 0; k <= m && odd; ++k)
        odd = branches[k].first == branches[m - k].first && branches[k].second == -branches[m - k].second;

    std::ostringstream os;
    os.precision(17);
    os << "piecewise([";
    for (size_t j = 0; j < m; ++j) os << (j ? ", " : "") << breakpoints[j];
    os << "], [";
    for (size_t k = 0; k <= m; ++k) os << (k ? ", " : "") << "[" << branches[k].first << ", " << branches[k].second << "]";
    os << "])";
    GraphMeta meta;
    meta.spec = os.str();
    meta.c1 = 0.0;
    meta.p = 2.0;
    meta.growth = growth;
    meta.odd = odd;
    meta.strictly_increasing = strict;
    if (m == 0 && branches[0].second == 0.0) meta.linear_slope = branches[0].first;
    return ScalarGraph(std::move(breakpoints), std::move(br), meta);
}

}  // namespace graphs

// ---------------------------------------------------------------------------

double scalar_duality(double r, double alpha) {
    if (r == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(r), alpha - 1.0), r);
}

double scalar_duality_inverse(double v, double alpha) {
    if (v == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(v), 1.0 / (alpha - 1.0)), v);
}

double scalar_duality_slope(double r, double alpha, double cap) {
    if (alpha == 2.0) return 1.0;
    double a = std::abs(r);
    if (a == 0.0) return alpha < 2.0 ? cap : 0.0;
    return std::min(cap, (alpha - 1.0) * std::pow(a, alpha - 2.0));
}

void validate(const YosidaParams& p) {
    require(p.lambda > 0.0 && std::isfinite(p.lambda), "lambda must be positive");
    require(p.alpha > 1.0 && std::isfinite(p.alpha), "gauge alpha must exceed 1");
    require(p.tol > 0.0, "tolerance must be positive");
    require(p.max_iter > 0, "max_iter must be positive");
    require(p.bracket_scale > 0.0, "bracket scale must be positive");
}

void validate(const YosidaParams& p, const ScalarGraph& g) {
    validate(p);
    if (g.delta() > 0.0)
        require(p.lambda * g.delta() < 1.0, "lambda must be below 1/delta for the declared coercivity constant");
}

namespace {

// Root of a nondecreasing set-valued map F, strictly increasing overall.
template <class F>
ScalarSolve bisect_inclusion(F&& Fset, double center, double radius, std::vector<double> snaps, double tol,
                             int max_iter) {
    ScalarSolve out;
    auto resid = [](const Interval& I) { return std::max({0.0, I.lo, -I.hi}); };
    auto done = [&](double x, const Interval& I) {
        out.x = x;
        out.residual = resid(I);
        out.converged = true;
        return out;
    };

    double a = center - radius, b = center + radius;
    int grow = 0;
    for (;; ++grow) {
        Interval Ia = Fset(a);
        if (Ia.contains(0.0)) return done(a, Ia);
        if (Ia.hi < 0.0) break;
        if (grow > 1100 || !std::isfinite(a)) throw BracketError("could not bracket the inclusion from below");
        b = std::min(b, a);
        a = center - (radius *= 2.0);
    }
    double rb = std::max(radius, b - center);
    for (grow = 0;; ++grow) {
        Interval Ib = Fset(b);
        if (Ib.contains(0.0)) return done(b, Ib);
        if (Ib.lo > 0.0) break;
        if (grow > 1100 || !std::isfinite(b)) throw BracketError("could not bracket the inclusion from above");
        a = std::max(a, b);
        b = center + (rb *= 2.0);
    }

    std::sort(snaps.begin(), snaps.end());
    for (double c : snaps) {
        if (!(c > a && c < b)) continue;
        Interval Ic = Fset(c);
        if (Ic.contains(0.0)) return done(c, Ic);
        if (Ic.hi < 0.0) a = c; else b = c;
    }

    double best_x = 0.5 * (a + b), best_r = kInf;
    int it = 0;
    for (; it < max_iter; ++it) {
        double m = 0.5 * (a + b);
        Interval I = Fset(m);
        double r = resid(I);
        if (r <= best_r) { best_r = r; best_x = m; }
        if (I.contains(0.0)) {
            out = done(m, I);
            out.iterations = it + 1;
            out.width = b - a;
            return out;
        }
        if (I.hi < 0.0) a = m; else b = m;
        double width = b - a;
        if (width <= tol * std::max(1.0, std::abs(m)) && r <= tol) break;
        if (!(a < 0.5 * (a + b) && 0.5 * (a + b) < b)) break;
    }
    out.x = best_x;
    out.residual = best_r;
    out.width = b - a;
    out.iterations = it;
    out.converged = out.width <= tol * std::max(1.0, std::abs(best_x)) || best_r <= tol;
    return out;
}

}  // namespace

ScalarSolve scalar_resolvent_solve(const ScalarGraph& g, double s, const YosidaParams& params) {
    validate(params);
    const double lam = params.lambda, alpha = params.alpha;
    auto F = [&](double y) {
        Interval G = g.eval(y);
        double j = scalar_duality(y - s, alpha);
        return Interval{j + lam * G.lo, j + lam * G.hi};
    };
    double r = 1.0 + std::pow(lam * std::abs(g.minimal_section(s)), 1.0 / (alpha - 1.0));
    // y lies between s and the zero set of g
    Interval Z = g.inverse(0.0);
    if (!Z.empty()) {
        double z = std::clamp(s, Z.lo, Z.hi);
        if (z == s) return ScalarSolve{s, 0.0, 0.0, 0, true};
        r = std::min(r, std::abs(s - z));
    }
    if (!std::isfinite(r)) r = std::max(1.0, std::abs(s));
    r *= params.bracket_scale;
    std::vector<double> snaps = g.breakpoints();
    snaps.push_back(s);
    return bisect_inclusion(F, s, r, snaps, params.tol, params.max_iter);
}

double scalar_resolvent(const ScalarGraph& g, double s, const YosidaParams& params) {
    return scalar_resolvent_solve(g, s, params).x;
}

namespace {

// j(s - y)/lambda projected onto g(y); j is steep near 0 for alpha close to
// 1, and the projection keeps the value inside the graph at the resolvent.
double yosida_value(const ScalarGraph& g, double s, double y, double lambda, double alpha) {
    Interval G = g.eval(y);
    return std::clamp(scalar_duality(s - y, alpha) / lambda, G.lo, G.hi);
}

}  // namespace

double scalar_yosida(const ScalarGraph& g, double s, const YosidaParams& params) {
    double y = scalar_resolvent(g, s, params);
    return yosida_value(g, s, y, params.lambda, params.alpha);
}

ScalarSolve range_solve_full(const ScalarGraph& g, double y, double lambda, double alpha, double tol, int max_iter) {
    require(lambda > 0.0, "lambda must be positive");
    require(alpha > 1.0, "gauge alpha must exceed 1");
    auto F = [&](double x) {
        Interval G = g.eval(x);
        double j = lambda * scalar_duality(x, alpha);
        return Interval{j + G.lo - y, j + G.hi - y};
    };
    double r = 1.0 + std::pow((std::abs(y) + std::abs(g.minimal_section(0.0))) / lambda, 1.0 / (alpha - 1.0));
    // x lies between 0 and g^{-1}(y)
    Interval Z = g.inverse(y);
    if (!Z.empty()) {
        double z = std::clamp(0.0, Z.lo, Z.hi);
        if (z == 0.0) {
            Interval G = g.eval(0.0);
            if (G.contains(y)) return ScalarSolve{0.0, 0.0, 0.0, 0, true};
        }
        r = std::min(r, std::max(std::abs(z), 1e-300));
    }
    if (!std::isfinite(r)) r = 1.0;
    std::vector<double> snaps = g.breakpoints();
    snaps.push_back(0.0);
    return bisect_inclusion(F, 0.0, r, snaps, tol, max_iter);
}

double range_solve(const ScalarGraph& g, double y, double lambda, double alpha) {
    return range_solve_full(g, y, lambda, alpha).x;
}

YosidaPoint scalar_yosida_point(const ScalarGraph& g, double s, double mu, double alpha, double cap) {
    YosidaParams p;
    p.lambda = mu;
    p.alpha = alpha;
    YosidaPoint out;
    out.resolvent = scalar_resolvent(g, s, p);
    const double r = s - out.resolvent;
    out.value = yosida_value(g, s, out.resolvent, mu, alpha);
    const double jp = scalar_duality_slope(r, alpha, cap);
    double gp;
    const auto& bp = g.breakpoints();
    auto it = std::lower_bound(bp.begin(), bp.end(), out.resolvent);
    if (it != bp.end() && *it == out.resolvent) {
        const Interval& J = g.jumps()[it - bp.begin()];
        gp = (out.value > J.lo && out.value < J.hi) ? kInf : g.slope(out.resolvent);
    } else {
        gp = g.slope(out.resolvent);
    }
    if (std::isinf(gp)) out.slope = jp / mu;
    else out.slope = gp * jp / (jp + mu * gp);
    if (!std::isfinite(out.slope)) out.slope = cap;
    out.slope = std::min(out.slope, cap);
    return out;
}

double yosida_inverse(const ScalarGraph& g, double w, double mu, double alpha) {
    Interval I = g.inverse(w);
    require(!I.empty() && I.lo == I.hi, "graph inverse is not single-valued here; need a strictly increasing graph");
    return I.lo + scalar_duality_inverse(mu * w, alpha);
}

double yosida_inverse_slope(const ScalarGraph& g, double w, double mu, double alpha, double cap) {
    double bi = g.inverse_slope(w);
    double v = std::abs(mu * w);
    double e = 1.0 / (alpha - 1.0) - 1.0;
    double ji;
    if (alpha == 2.0) ji = 1.0;
    else if (v == 0.0) ji = e < 0.0 ? cap : 0.0;
    else ji = std::pow(v, e) / (alpha - 1.0);
    return std::min(cap, bi + mu * std::min(cap, ji));
}

}  // namespace yosida
