#include "yosida/error.hpp"
#include "yosida/operators.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace yosida {

namespace {

constexpr double kSlopeCap = 1e10;

double jp1(double r, double p) { return r == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(r), p - 1.0), r); }

double jp_slope(double r, double p) {
    if (p == 2.0) return 1.0;
    double a = std::abs(r);
    if (a == 0.0) return p < 2.0 ? kSlopeCap : 0.0;
    return std::min(kSlopeCap, (p - 1.0) * std::pow(a, p - 2.0));
}

double project(const Interval& I, double v) { return std::clamp(v, I.lo, I.hi); }

Eigen::MatrixXd gradient_matrix(const Grid& g) {
    const int N = g.size();
    Eigen::MatrixXd D(g.edges(), N);
    for (int i = 0; i < N; ++i) D.col(i) = gradient(g, Vec::Unit(N, i));
    return D;
}

// Dense matrix of the graph-argument map L (identity or D).
Eigen::MatrixXd argument_matrix(const MultiValuedOperator& op) {
    const int N = op.grid().size();
    if (op.kind() != OperatorKind::PhiLaplace) return Eigen::MatrixXd::Identity(N, N);
    return gradient_matrix(op.grid());
}

// Matrix feeding the duality map: D unless V is a Lebesgue space.
Eigen::MatrixXd duality_matrix(const MultiValuedOperator& op) {
    const int N = op.grid().size();
    if (op.kind() == OperatorKind::PorousMedia) return Eigen::MatrixXd::Identity(N, N);
    return gradient_matrix(op.grid());
}

// Node functional of J(d) and its Jacobian with respect to d.
struct DualityPart {
    Vec f;
    Eigen::MatrixXd jac;
};

DualityPart duality_part(const MultiValuedOperator& op, const Eigen::MatrixXd& L, const Vec& d, double alpha) {
    const Grid& g = op.grid();
    const double p = op.triple().p, w = g.w();
    const bool edges = op.kind() != OperatorKind::PorousMedia;
    Vec z = edges ? Vec(L * d) : d;
    const double tau = lp_norm(g, z, p);
    const double pre = tau > 0.0 ? std::pow(tau, alpha - p) : (alpha == p ? 1.0 : 0.0);
    Vec jz = z.unaryExpr([p](double x) { return jp1(x, p); });
    Vec sl = z.unaryExpr([p](double x) { return jp_slope(x, p); });
    DualityPart out;
    if (edges) {
        out.f = L.transpose() * (pre * jz);
        out.jac = L.transpose() * (pre * sl).asDiagonal() * L;
    } else {
        out.f = pre * jz;
        out.jac = Eigen::MatrixXd((pre * sl).asDiagonal());
    }
    if (alpha != p && tau > 0.0) {
        Vec u = edges ? Vec(L.transpose() * jz) : jz;
        out.jac += (alpha - p) * std::pow(tau, alpha - 2.0 * p) * w * u * u.transpose();
    }
    return out;
}

// Dual-norm of the certificate residual J(y-x) + lambda a.
double certificate_residual(const MultiValuedOperator& op, const Field& y, const Field& x, const Vec& a,
                            double lambda, double alpha) {
    const Grid& g = op.grid();
    DualField J = duality_map(y - x, op.triple(), alpha);
    Vec r = node_functional(J) + lambda * op.graph_adjoint(a);
    if (op.kind() == OperatorKind::PorousMedia) return density_norm(DualField(g, DualRep::NodeDensity, r), op.triple().p);
    return dual_norm(DualField(g, DualRep::NodeDensity, r), op.triple()).upper;
}

Vec selection_for(const MultiValuedOperator& op, const Vec& y, const Vec& wanted) {
    Vec z = op.graph_argument(y);
    Vec a(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) a[i] = project(op.graph().eval(z[i]), wanted[i]);
    return a;
}

// Separable route for the porous-media triple: J and A are pointwise
// densities, so y_i is a scalar resolvent with an effective lambda fixed by
// tau = |y - x|_p.
ResolventResult exact_porous(const MultiValuedOperator& op, const Field& x, const YosidaParams& params) {
    const Grid& g = x.grid;
    const ScalarGraph& gr = op.graph();
    const double p = op.triple().p, alpha = params.alpha, lam = params.lambda;
    const int N = g.size();

    auto solve_at = [&](double lam_eff) {
        YosidaParams sp = params;
        sp.lambda = lam_eff;
        sp.alpha = p;
        Vec y(N);
        for (int i = 0; i < N; ++i) y[i] = scalar_resolvent(gr, x.values[i], sp);
        return y;
    };

    ResolventResult res;
    res.method = "exact";
    Vec y;
    if (alpha == p) {
        y = solve_at(lam);
    } else {
        Vec m(N);
        for (int i = 0; i < N; ++i) m[i] = std::pow(std::abs(gr.minimal_section(x.values[i])), 1.0 / (p - 1.0));
        const double G = lp_norm(g, m, p);
        if (G == 0.0) {
            y = x.values;
        } else {
            auto phi = [&](double tau) { return lp_norm(g, solve_at(lam * std::pow(tau, p - alpha)) - x.values, p); };
            auto h = [&](double ell) {
                double f = phi(std::exp(ell));
                return f > 0.0 ? ell - std::log(f) : std::numeric_limits<double>::infinity();
            };
            const double ell0 = std::log(lam) / (alpha - 1.0) + (p - 1.0) / (alpha - 1.0) * std::log(G);
            double lo = ell0 - 1.0, hi = ell0 + 1.0;
            for (int k = 0; k < 200 && h(lo) > 0.0; ++k) lo -= 2.0 * (k + 1);
            for (int k = 0; k < 200 && h(hi) < 0.0; ++k) hi += 2.0 * (k + 1);
            if (!(h(lo) <= 0.0 && h(hi) >= 0.0)) throw BracketError("could not bracket the resolvent norm");
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
                double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (h(mid) <= 0.0) lo = mid; else hi = mid;
                ++res.newton_iterations;
            }
            y = solve_at(lam * std::pow(std::exp(0.5 * (lo + hi)), p - alpha));
        }
    }
    res.y = Field(g, y);
    DualField J = duality_map(res.y - x, op.triple(), alpha);
    Vec a = selection_for(op, y, -J.values / lam);
    res.selection = DualField(g, op.rep(), a);
    res.residual = certificate_residual(op, res.y, x, a, lam, alpha);
    res.converged = true;
    return res;
}

struct NewtonOutcome {
    Vec y;
    double rnorm = 0.0;
    int iterations = 0;
    bool ok = false;
};

// Damped Newton for J(y-x) + lambda L^T g_mu(L y) = 0.
NewtonOutcome smooth_stage(const MultiValuedOperator& op, const Eigen::MatrixXd& L, const Eigen::MatrixXd& Dm,
                           const Vec& x, Vec y, double mu, double lambda, double alpha, double tol, int max_newton) {
    const ScalarGraph& gr = op.graph();
    auto eval = [&](const Vec& yy, Eigen::MatrixXd* jac) {
        DualityPart dp = duality_part(op, Dm, yy - x, alpha);
        Vec z = op.graph_argument(yy);
        Vec gm(z.size()), gs(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            YosidaPoint pt = scalar_yosida_point(gr, z[i], mu, 2.0);
            gm[i] = pt.value;
            gs[i] = pt.slope;
        }
        Vec r = dp.f + lambda * op.graph_adjoint(gm);
        if (jac) {
            if (op.kind() == OperatorKind::PhiLaplace) *jac = dp.jac + lambda * L.transpose() * gs.asDiagonal() * L;
            else *jac = dp.jac + Eigen::MatrixXd((lambda * gs).asDiagonal());
        }
        return r;
    };
    NewtonOutcome out;
    Eigen::MatrixXd jac;
    Vec r = eval(y, &jac);
    double rn = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < max_newton; ++it) {
        if (rn <= tol) { out.ok = true; break; }
        double reg = 1e-14 * std::max(1.0, jac.diagonal().cwiseAbs().maxCoeff());
        jac.diagonal().array() += reg;
        Vec step = jac.partialPivLu().solve(-r);
        double t = 1.0;
        Vec yn;
        Vec rn_vec;
        double rnn = rn;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            yn = y + t * step;
            rn_vec = eval(yn, nullptr);
            rnn = rn_vec.lpNorm<Eigen::Infinity>();
            if (std::isfinite(rnn) && rnn <= (1.0 - 1e-4 * t) * rn) { accepted = true; break; }
            t *= 0.5;
        }
        ++out.iterations;
        if (!accepted) break;
        y = yn;
        r = eval(y, &jac);
        rn = r.lpNorm<Eigen::Infinity>();
    }
    if (rn <= tol) out.ok = true;
    out.y = y;
    out.rnorm = rn;
    return out;
}

// Newton on the true graph with active breakpoints held fixed.
bool polish(const MultiValuedOperator& op, const Eigen::MatrixXd& L, const Eigen::MatrixXd& Dm, const Vec& x,
            double mu, double lambda, double alpha, double tol, Vec& y, Vec& a_out) {
    const ScalarGraph& gr = op.graph();
    const auto& bps = gr.breakpoints();
    const auto& jumps = gr.jumps();
    Vec z = op.graph_argument(y);
    const int M = static_cast<int>(z.size()), N = static_cast<int>(y.size());
    std::vector<int> active;
    std::vector<int> which;  // breakpoint index per active entry
    Vec a0(M);
    for (int e = 0; e < M; ++e) {
        YosidaPoint pt = scalar_yosida_point(gr, z[e], mu, 2.0);
        a0[e] = pt.value;
        auto it = std::find(bps.begin(), bps.end(), pt.resolvent);
        if (it != bps.end()) {
            const Interval& J = jumps[it - bps.begin()];
            if (J.hi > J.lo && pt.value > J.lo && pt.value < J.hi) {
                active.push_back(e);
                which.push_back(static_cast<int>(it - bps.begin()));
            }
        }
    }
    const int A = static_cast<int>(active.size());
    Vec aA(A);
    for (int k = 0; k < A; ++k) aA[k] = a0[active[k]];
    Vec yy = y;

    auto residual = [&](const Vec& yv, const Vec& av, Vec* full_a, Eigen::MatrixXd* jac) {
        DualityPart dp = duality_part(op, Dm, yv - x, alpha);
        Vec zz = op.graph_argument(yv);
        Vec af(M), slope = Vec::Zero(M);
        for (int e = 0; e < M; ++e) {
            Interval I = gr.eval(zz[e]);
            af[e] = I.lo;
            double s = gr.slope(zz[e]);
            slope[e] = std::isfinite(s) ? std::min(s, kSlopeCap) : 0.0;
        }
        for (int k = 0; k < A; ++k) {
            af[active[k]] = av[k];
            slope[active[k]] = 0.0;
        }
        Vec r(N + A);
        r.head(N) = dp.f + lambda * op.graph_adjoint(af);
        for (int k = 0; k < A; ++k) r[N + k] = zz[active[k]] - bps[which[k]];
        if (full_a) *full_a = af;
        if (jac) {
            jac->setZero(N + A, N + A);
            if (op.kind() == OperatorKind::PhiLaplace)
                jac->topLeftCorner(N, N) = dp.jac + lambda * L.transpose() * slope.asDiagonal() * L;
            else
                jac->topLeftCorner(N, N) = dp.jac + Eigen::MatrixXd((lambda * slope).asDiagonal());
            for (int k = 0; k < A; ++k) {
                jac->block(0, N + k, N, 1) = lambda * L.row(active[k]).transpose();
                jac->block(N + k, 0, 1, N) = L.row(active[k]);
            }
        }
        return r;
    };

    Eigen::MatrixXd jac;
    Vec af;
    Vec r = residual(yy, aA, &af, &jac);
    double rn = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 40 && rn > tol; ++it) {
        Vec step = jac.fullPivLu().solve(-r);
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            Vec yn = yy + t * step.head(N);
            Vec an = aA + t * step.tail(A);
            Vec rr = residual(yn, an, nullptr, nullptr);
            double rnn = rr.lpNorm<Eigen::Infinity>();
            if (std::isfinite(rnn) && rnn <= (1.0 - 1e-4 * t) * rn) {
                yy = yn;
                aA = an;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        r = residual(yy, aA, &af, &jac);
        rn = r.lpNorm<Eigen::Infinity>();
    }
    if (!(rn <= tol)) return false;
    for (int k = 0; k < A; ++k) {
        const Interval& J = jumps[which[k]];
        if (!J.contains(aA[k], 1e-12 * std::max(1.0, std::abs(aA[k])))) return false;
    }
    y = yy;
    a_out = af;
    return true;
}

ResolventResult continuation(const MultiValuedOperator& op, const Field& x, const YosidaParams& params,
                             const SolverOpts& solver) {
    const Grid& g = x.grid;
    require(g.size() <= 4096, "continuation resolvent is limited to 4096 nodes (dense Newton)");
    require(!solver.schedule.empty(), "continuation schedule is empty");
    const Eigen::MatrixXd L = argument_matrix(op);
    const Eigen::MatrixXd Dm = duality_matrix(op);
    const double lam = params.lambda, alpha = params.alpha;
    ResolventResult res;
    res.method = "continuation";
    Vec y = x.values;
    double mu_last = solver.schedule.front();
    for (size_t k = 0; k < solver.schedule.size(); ++k) {
        double mu = solver.schedule[k];
        bool last = k + 1 == solver.schedule.size();
        double tol = last ? std::min(solver.tol, 1e-10) : std::max(solver.tol, 1e-8);
        NewtonOutcome st = smooth_stage(op, L, Dm, x.values, y, mu, lam, alpha, tol, solver.max_newton);
        res.newton_iterations += st.iterations;
        res.stages = static_cast<int>(k) + 1;
        if (!std::isfinite(st.rnorm))
            throw SolverError("Newton diverged at continuation stage " + std::to_string(k + 1), st.rnorm);
        y = st.y;
        mu_last = mu;
    }
    Vec a;
    bool polished = false;
    if (solver.polish) {
        Vec yp = y;
        polished = polish(op, L, Dm, x.values, mu_last, lam, alpha, std::max(solver.tol * 1e-2, 1e-12), yp, a);
        if (polished) {
            y = yp;
            res.method = "continuation+polish";
        }
    }
    if (!polished) {
        // shift to the point where the smoothed value is an exact selection
        Vec z = op.graph_argument(y);
        Vec gm(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) gm[i] = scalar_yosida_point(op.graph(), z[i], mu_last, 2.0).value;
        a = selection_for(op, y, gm);
    }
    res.y = Field(g, y);
    res.selection = DualField(g, op.rep(), a);
    res.residual = certificate_residual(op, res.y, x, a, lam, alpha);
    double scale = std::max(1.0, lam * lp_norm(g, a, 2.0));
    res.converged = res.residual <= std::max(solver.tol, 1e-6) * scale;
    return res;
}

}  // namespace

ResolventResult vector_resolvent_full(const MultiValuedOperator& op, const Field& x, const YosidaParams& params,
                                      const SolverOpts& solver) {
    validate(params);
    require(x.grid == op.grid(), "field and operator live on different grids");
    require(x.finite(), "resolvent input has non-finite entries");
    if (op.kind() == OperatorKind::Subdifferential) require(params.alpha == 2.0, "subdifferential resolvent needs alpha = 2");
    auto method = solver.method;
    if (method == SolverOpts::Method::Auto)
        method = op.kind() == OperatorKind::PorousMedia ? SolverOpts::Method::Exact : SolverOpts::Method::Continuation;
    if (method == SolverOpts::Method::Exact) {
        require(op.kind() == OperatorKind::PorousMedia, "the separable resolvent route needs the porous-media operator");
        return exact_porous(op, x, params);
    }
    return continuation(op, x, params, solver);
}

Field vector_resolvent(const MultiValuedOperator& op, const Field& x, const YosidaParams& params,
                       const SolverOpts& solver) {
    return vector_resolvent_full(op, x, params, solver).y;
}

DualField vector_yosida(const MultiValuedOperator& op, const Field& x, const YosidaParams& params,
                        const SolverOpts& solver) {
    Field y = vector_resolvent(op, x, params, solver);
    DualField J = duality_map(x - y, op.triple(), params.alpha);
    J *= 1.0 / params.lambda;
    if (op.kind() == OperatorKind::Subdifferential) return DualField(x.grid, DualRep::NodeDensity, node_functional(J));
    return J;
}

}  // namespace yosida
