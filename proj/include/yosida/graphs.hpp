#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace yosida {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return lo > hi; }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

/// Continuous nondecreasing function on one open piece of the line.
/// `inv` is optional; pieces without it are inverted by bisection.
struct Branch {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> inv;
};

/// Declared constants for s*x >= c1|s|^p - c2 and |x| <= c|s|^{p-1} + c.
struct GraphMeta {
    std::string spec;
    double c1 = 0.0;
    double p = 2.0;
    double c2 = 0.0;
    double growth = 1.0;
    bool odd = false;
    bool strictly_increasing = false;
    std::optional<double> linear_slope;
};

/// Maximal-monotone graph on the real line: continuous branches between
/// sorted breakpoints, closed value intervals at the breakpoints given by
/// the one-sided branch limits.
class ScalarGraph {
public:
    ScalarGraph() = default;
    ScalarGraph(std::vector<double> breakpoints, std::vector<Branch> branches, GraphMeta meta);

    Interval eval(double s) const;
    double minimal_section(double s) const;
    /// Branch derivative at s; +inf inside a jump at a breakpoint.
    double slope(double s) const;
    /// Preimage {s : w in g(s)} as a closed interval (possibly unbounded or empty).
    Interval inverse(double w) const;
    /// Derivative of the single-valued part of the inverse at w (0 on jump plateaus).
    double inverse_slope(double w) const;

    const std::vector<double>& breakpoints() const { return bp_; }
    const std::vector<Interval>& jumps() const { return jumps_; }
    const GraphMeta& meta() const { return meta_; }
    const std::string& spec() const { return meta_.spec; }
    double delta() const { return meta_.c1; }

    /// Monotonicity/maximality spot checks; returns a list of problems.
    std::vector<std::string> check() const;

private:
    int piece(double s) const;  // index of the branch containing s (s not a breakpoint)
    double invert_branch(int k, double w) const;

    std::vector<double> bp_;
    std::vector<Branch> br_;
    std::vector<Interval> jumps_;
    GraphMeta meta_;
};

namespace graphs {
ScalarGraph sign(double rho = 1.0);
/// sign(s)(nu + |s|^{p-1})
ScalarGraph power(double p, double nu = 0.0);
/// 1 + delta s for s > 0, [0,1] at 0, 0 for s < 0
ScalarGraph btw(double delta = 0.0);
ScalarGraph linear(double slope = 1.0);
/// (1 + s^2)^{(p-2)/2} s
ScalarGraph non_newtonian(double p);
/// Affine branches [slope, intercept], one more than breakpoints.
ScalarGraph piecewise(std::vector<double> breakpoints, std::vector<std::pair<double, double>> branches);
}  // namespace graphs

/// Parses builder expressions such as "power(1.5, 0)" or
/// "piecewise([0], [[0,-1],[1,1]])". Errors carry line/column.
ScalarGraph parse_graph(const std::string& text);

// ---------------------------------------------------------------------------
// Scalar generalized resolvent / Yosida

double scalar_duality(double r, double alpha);
double scalar_duality_inverse(double v, double alpha);
/// Derivative of scalar_duality, capped at `cap` near the origin.
double scalar_duality_slope(double r, double alpha, double cap = 1e12);

struct YosidaParams {
    double lambda = 1.0;
    double alpha = 2.0;
    double tol = 1e-12;
    int max_iter = 200;
    double bracket_scale = 1.0;  // initial radius multiplier, for independent runs
};

void validate(const YosidaParams& p);
/// Additionally enforces lambda < 1/delta for a declared delta > 0.
void validate(const YosidaParams& p, const ScalarGraph& g);

struct ScalarSolve {
    double x = 0.0;
    double residual = 0.0;  // distance from 0 to the inclusion map at x
    double width = 0.0;     // final bracket width
    int iterations = 0;
    bool converged = false;
};

/// Solve 0 in j(y - s) + lambda g(y).
ScalarSolve scalar_resolvent_solve(const ScalarGraph& g, double s, const YosidaParams& params);
double scalar_resolvent(const ScalarGraph& g, double s, const YosidaParams& params);
/// (1/lambda) j(s - R_lambda(s))
double scalar_yosida(const ScalarGraph& g, double s, const YosidaParams& params);
/// Solve y in lambda j(x) + g(x).
ScalarSolve range_solve_full(const ScalarGraph& g, double y, double lambda, double alpha, double tol = 1e-12,
                             int max_iter = 200);
double range_solve(const ScalarGraph& g, double y, double lambda, double alpha);

/// Value and derivative of the generalized Yosida approximation at s.
struct YosidaPoint {
    double value = 0.0;
    double slope = 0.0;
    double resolvent = 0.0;
};
YosidaPoint scalar_yosida_point(const ScalarGraph& g, double s, double mu, double alpha, double cap = 1e12);

/// Inverse of the generalized Yosida map, w -> g^{-1}(w) + j^{-1}(mu w);
/// requires a strictly increasing graph (single-valued inverse).
double yosida_inverse(const ScalarGraph& g, double w, double mu, double alpha);
double yosida_inverse_slope(const ScalarGraph& g, double w, double mu, double alpha, double cap = 1e12);

}  // namespace yosida
