#include "yosida/operators.hpp"

#include "yosida/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace yosida {

std::string to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::PorousMedia: return "porous_media";
        case OperatorKind::PhiLaplace: return "phi_laplace";
        case OperatorKind::Subdifferential: return "subdifferential";
    }
    return "?";
}

OperatorKind operator_kind_from_string(const std::string& s) {
    if (s == "porous_media") return OperatorKind::PorousMedia;
    if (s == "phi_laplace") return OperatorKind::PhiLaplace;
    if (s == "subdifferential") return OperatorKind::Subdifferential;
    throw InvalidArgument("unknown model '" + s + "' (expected porous_media, phi_laplace or subdifferential)");
}

MultiValuedOperator::MultiValuedOperator(OperatorKind kind, ScalarGraph g, GelfandTriple t, const Grid& grid)
    : kind_(kind), g_(std::move(g)), t_(t), grid_(grid) {
    validate(t_, grid.d);
    switch (kind_) {
        case OperatorKind::PorousMedia:
            require(t_.kind == GelfandTriple::Kind::PorousMedia, "porous-media operator needs the porous-media triple");
            break;
        case OperatorKind::PhiLaplace:
            require(t_.kind == GelfandTriple::Kind::PhiLaplace, "phi-Laplace operator needs the phi-Laplace triple");
            break;
        case OperatorKind::Subdifferential:
            require(t_.kind == GelfandTriple::Kind::PhiLaplace && t_.p == 2.0 && t_.alpha == 2.0,
                    "subdifferential operator needs the phi-Laplace triple with p = alpha = 2");
            break;
    }

    const GraphMeta& m = g_.meta();
    const double p = t_.p, pc = p / (p - 1.0);
    a_.alpha = t_.alpha;
    a_.beta = 0.0;
    if (kind_ == OperatorKind::Subdifferential) {
        const double h = grid.h();
        const double mu1 = first_eigenvalue(grid);
        const double lmax = grid.d * (2.0 / (h * h)) * (1.0 + std::cos(std::numbers::pi * h));
        a_.delta = m.c1 / lmax;
        a_.C = 2.0 * m.growth * m.growth / (mu1 * mu1);
        a_.f = std::max(m.c2, 2.0 * m.growth * m.growth / mu1);
        a_.f_coercive = m.c2;
        a_.f_description = "constant; discrete coercivity c1/lambda_max(K)";
    } else {
        const double meas = kind_ == OperatorKind::PorousMedia ? 1.0 : grid.edges() * grid.w();
        a_.delta = m.c1;
        a_.C = std::pow(2.0, pc - 1.0) * std::pow(m.growth, pc);
        a_.f = std::max(m.c2, a_.C) * meas;
        a_.f_coercive = m.c2 * meas;
        a_.f_description = "constant";
    }
}

Vec MultiValuedOperator::graph_argument(const Vec& u) const {
    return kind_ == OperatorKind::PhiLaplace ? gradient(grid_, u) : u;
}

Vec MultiValuedOperator::graph_adjoint(const Vec& a) const {
    return kind_ == OperatorKind::PhiLaplace ? gradient_transpose(grid_, a) : a;
}

namespace {

Vec jp(const Vec& r, double p) {
    return r.unaryExpr([p](double x) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), p - 1.0), x); });
}

}  // namespace

DualField duality_map(const Field& u, const GelfandTriple& t, double alpha) {
    require(alpha > 1.0, "gauge alpha must exceed 1");
    const Grid& g = u.grid;
    const double p = t.p;
    if (t.kind == GelfandTriple::Kind::PorousMedia) {
        double n = lp_norm(g, u.values, p);
        if (n == 0.0) return DualField(g, DualRep::NodeDensity);
        return DualField(g, DualRep::NodeDensity, std::pow(n, alpha - p) * jp(u.values, p));
    }
    Vec du = gradient(g, u.values);
    double n = lp_norm(g, du, p);
    if (n == 0.0) return DualField(g, DualRep::EdgeDensity);
    return DualField(g, DualRep::EdgeDensity, std::pow(n, alpha - p) * jp(du, p));
}

DualField duality_map(const Field& u, const GelfandTriple& t) { return duality_map(u, t, t.alpha); }

DualField apply_minimal(const MultiValuedOperator& op, const Field& u) {
    require(u.grid == op.grid(), "field and operator live on different grids");
    Vec z = op.graph_argument(u.values);
    Vec a(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) a[i] = op.graph().minimal_section(z[i]);
    return DualField(u.grid, op.rep(), a);
}

DualField apply_selection(const MultiValuedOperator& op, const Field& u, double theta) {
    require(u.grid == op.grid(), "field and operator live on different grids");
    Vec z = op.graph_argument(u.values);
    Vec a(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        Interval I = op.graph().eval(z[i]);
        a[i] = I.lo + theta * (I.hi - I.lo);
    }
    return DualField(u.grid, op.rep(), a);
}

DualNorm op_dual_norm(const MultiValuedOperator& op, const DualField& v) { return dual_norm(v, op.triple()); }

DualField yosida_regularized_drift(const MultiValuedOperator& op, const Field& u, double mu) {
    require(mu > 0.0, "regularization mu must be positive");
    require(u.grid == op.grid(), "field and operator live on different grids");
    Vec z = op.graph_argument(u.values);
    Vec a(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) a[i] = scalar_yosida_point(op.graph(), z[i], mu, op.alpha()).value;
    return DualField(u.grid, op.rep(), a);
}

Vec lift_to_H(const MultiValuedOperator& op, const DualField& v) {
    if (op.kind() == OperatorKind::PorousMedia) {
        require(v.rep == DualRep::NodeDensity, "porous-media duals are node densities");
        return stiffness(v.grid) * v.values;
    }
    return node_functional(v);
}

// ---------------------------------------------------------------------------

double Reaction::c_lower() const {
    switch (kind) {
        case Kind::None: return 0.0;
        case Kind::Linear: return std::max(0.0, -a);
        case Kind::Cubic: return 0.0;
    }
    return 0.0;
}

double Reaction::c_growth() const { return kind == Kind::None ? 0.0 : std::abs(a); }

double Reaction::operator()(double, const double*, double u, const double*) const {
    switch (kind) {
        case Kind::None: return 0.0;
        case Kind::Linear: return a * u;
        case Kind::Cubic: return a * u * u * u;
    }
    return 0.0;
}

std::string Reaction::name() const {
    switch (kind) {
        case Kind::None: return "none";
        case Kind::Linear: return "linear";
        case Kind::Cubic: return "cubic";
    }
    return "?";
}

std::string SingleValuedDrift::name() const {
    return kind == Kind::Zero ? "zero" : "reaction_diffusion";
}

DualField drift_B(const SingleValuedDrift& d, double t, const Field& u) {
    const Grid& g = u.grid;
    if (d.kind == SingleValuedDrift::Kind::Zero) return DualField(g, DualRep::NodeDensity);
    Vec out = -laplacian(g, u.values);
    if (d.reaction.kind != Reaction::Kind::None) {
        Vec gx = central_gradient(g, u.values, 0);
        Vec gy = g.d == 2 ? central_gradient(g, u.values, 1) : Vec();
        for (int i = 0; i < g.size(); ++i) {
            double xi[2] = {g.coord(i, 0), g.d == 2 ? g.coord(i, 1) : 0.0};
            double grad[2] = {gx[i], g.d == 2 ? gy[i] : 0.0};
            out[i] += d.reaction(t, xi, u.values[i], grad);
        }
    }
    return DualField(g, DualRep::NodeDensity, out);
}

}  // namespace yosida
