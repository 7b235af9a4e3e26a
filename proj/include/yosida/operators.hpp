#pragma once

#include "yosida/graphs.hpp"
#include "yosida/spaces.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace yosida {

/// Constants of the standing assumptions: <v,x> >= delta |x|_V^alpha - f_coercive
/// and |A0(x)|_{V*}^{alpha/(alpha-1)} <= (f + C |x|_V^alpha)(1 + |x|_H^beta).
struct OperatorAssumptions {
    double delta = 0.0;
    double alpha = 2.0;
    double beta = 0.0;
    double C = 0.0;
    double f = 0.0;
    double f_coercive = 0.0;
    std::string f_description = "constant";
};

enum class OperatorKind { PorousMedia, PhiLaplace, Subdifferential };

std::string to_string(OperatorKind k);
OperatorKind operator_kind_from_string(const std::string& s);

class MultiValuedOperator {
public:
    MultiValuedOperator() = default;
    MultiValuedOperator(OperatorKind kind, ScalarGraph g, GelfandTriple t, const Grid& grid);

    OperatorKind kind() const { return kind_; }
    const ScalarGraph& graph() const { return g_; }
    const GelfandTriple& triple() const { return t_; }
    const Grid& grid() const { return grid_; }
    const OperatorAssumptions& assumptions() const { return a_; }
    double alpha() const { return t_.alpha; }

    /// Representation of elements of A(u).
    DualRep rep() const { return kind_ == OperatorKind::PhiLaplace ? DualRep::EdgeDensity : DualRep::NodeDensity; }
    /// Node or edge values the graph acts on: u itself, or D u.
    Vec graph_argument(const Vec& u) const;
    /// Functional L^T a on nodes for a graph-space density a.
    Vec graph_adjoint(const Vec& a) const;

private:
    OperatorKind kind_ = OperatorKind::PorousMedia;
    ScalarGraph g_;
    GelfandTriple t_;
    Grid grid_;
    OperatorAssumptions a_;
};

/// Gradient of u -> |u|_V^alpha / alpha in the triple's dual representation.
DualField duality_map(const Field& u, const GelfandTriple& t, double alpha);
DualField duality_map(const Field& u, const GelfandTriple& t);

DualField apply_minimal(const MultiValuedOperator& op, const Field& u);
/// Arbitrary selection a in A(u): `theta` in [0,1] picks lo + theta (hi - lo)
/// inside every jump interval.
DualField apply_selection(const MultiValuedOperator& op, const Field& u, double theta);

/// V*-norm of a dual element for this operator's triple.
DualNorm op_dual_norm(const MultiValuedOperator& op, const DualField& v);

struct SolverOpts {
    enum class Method { Auto, Exact, Continuation };
    Method method = Method::Auto;
    std::vector<double> schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    double tol = 1e-10;
    int max_newton = 100;
    bool polish = true;
};

struct ResolventResult {
    Field y;
    DualField selection;  // a in A(y) certifying the inclusion
    double residual = 0.0;
    int stages = 0;
    int newton_iterations = 0;
    bool converged = false;
    std::string method;
};

ResolventResult vector_resolvent_full(const MultiValuedOperator& op, const Field& x, const YosidaParams& params,
                                      const SolverOpts& solver = {});
Field vector_resolvent(const MultiValuedOperator& op, const Field& x, const YosidaParams& params,
                       const SolverOpts& solver = {});
DualField vector_yosida(const MultiValuedOperator& op, const Field& x, const YosidaParams& params,
                        const SolverOpts& solver = {});

/// Pointwise generalized Yosida regularization of the graph inside the
/// operator: -Delta psi_mu(u), -div phi_mu(grad u) or psi_mu(u).
DualField yosida_regularized_drift(const MultiValuedOperator& op, const Field& u, double mu);

/// H-space representative of a dual element for state-space time stepping.
Vec lift_to_H(const MultiValuedOperator& op, const DualField& v);

// ---------------------------------------------------------------------------
// Single-valued drift B

struct Reaction {
    enum class Kind { None, Linear, Cubic };
    Kind kind = Kind::None;
    double a = 0.0;
    // declared constants: g u >= -c_lower u^2 - f1, |g| <= c_growth(|z| + |u|^{(d+2)/d}) + f2
    double c_lower() const;
    double f1() const { return 0.0; }
    double c_growth() const;
    double f2() const { return kind == Kind::Linear ? std::abs(a) : 0.0; }
    double operator()(double t, const double* xi, double u, const double* grad) const;
    std::string name() const;
};

struct SingleValuedDrift {
    enum class Kind { Zero, ReactionDiffusion };
    Kind kind = Kind::Zero;
    Reaction reaction;

    static SingleValuedDrift zero() { return {}; }
    static SingleValuedDrift reaction_diffusion(Reaction r) { return {Kind::ReactionDiffusion, r}; }
    /// Forcing f(t) of the weak coercivity <B(u),u> >= -c |u|_H^2 - f.
    double forcing() const { return kind == Kind::Zero ? 0.0 : reaction.f1(); }
    /// f(t) of 2<B(u),u> >= -f(t) |u|_H^2, the form used by the extinction conditions.
    double extinction_forcing() const { return kind == Kind::Zero ? 0.0 : 2.0 * reaction.c_lower(); }
    std::string name() const;
};

/// -Delta_h u + g(t, xi, u, grad u) as a node density; zero for the Zero drift.
DualField drift_B(const SingleValuedDrift& d, double t, const Field& u);

// ---------------------------------------------------------------------------

struct NoiseModel;

struct AssumptionCheck {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // worst observed slack (>= 0 when passing)
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool all_pass() const;
    const AssumptionCheck* find(const std::string& name) const;
};

AssumptionReport validate_graph(const ScalarGraph& g, int samples = 200, unsigned long long seed = 7);
/// Symbolic checks plus randomized spot checks of every standing assumption.
/// `horizon` bounds the time samples for the noise conditions.
AssumptionReport validate_assumptions(const MultiValuedOperator& op, const SingleValuedDrift& drift,
                                      const NoiseModel& noise, double horizon = 10.0, int samples = 100,
                                      unsigned long long seed = 11);

}  // namespace yosida
