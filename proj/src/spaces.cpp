#include "yosida/spaces.hpp"

#include "yosida/error.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <vector>

namespace yosida {

Grid::Grid(int dim, int nodes) : d(dim), n(nodes) {
    require(dim == 1 || dim == 2, "grid dimension must be 1 or 2");
    require(nodes >= 2, "grid needs at least 2 interior nodes per axis");
}

double Grid::w() const { return d == 1 ? h() : h() * h(); }

int Grid::size() const { return d == 1 ? n : n * n; }

int Grid::edges() const { return d == 1 ? n + 1 : 2 * n * (n + 1); }

double Grid::coord(int i, int axis) const {
    int k = (d == 1 || axis == 0) ? i % n : i / n;
    return (k + 1) * h();
}

Field::Field(const Grid& g, Vec v) : grid(g), values(std::move(v)) {
    require(values.size() == g.size(), "field length does not match grid");
}

Field& Field::operator+=(const Field& o) {
    require(grid == o.grid, "field arithmetic on different grids");
    values += o.values;
    return *this;
}

Field& Field::operator-=(const Field& o) {
    require(grid == o.grid, "field arithmetic on different grids");
    values -= o.values;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field b) { return b *= a; }

Field sine_mode(const Grid& g) {
    Vec v(g.size());
    for (int i = 0; i < g.size(); ++i) {
        double s = std::sin(std::numbers::pi * g.coord(i, 0));
        if (g.d == 2) s *= std::sin(std::numbers::pi * g.coord(i, 1));
        v[i] = s;
    }
    return Field(g, v);
}

Vec gradient(const Grid& g, const Vec& u) {
    const int n = g.n;
    const double ih = 1.0 / g.h();
    Vec e(g.edges());
    if (g.d == 1) {
        for (int k = 0; k <= n; ++k) {
            double r = k < n ? u[k] : 0.0;
            double l = k > 0 ? u[k - 1] : 0.0;
            e[k] = (r - l) * ih;
        }
        return e;
    }
    const int off = n * (n + 1);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k <= n; ++k) {
            double r = k < n ? u[k + n * j] : 0.0;
            double l = k > 0 ? u[k - 1 + n * j] : 0.0;
            e[j * (n + 1) + k] = (r - l) * ih;
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k <= n; ++k) {
            double r = k < n ? u[i + n * k] : 0.0;
            double l = k > 0 ? u[i + n * (k - 1)] : 0.0;
            e[off + i * (n + 1) + k] = (r - l) * ih;
        }
    }
    return e;
}

Vec gradient_transpose(const Grid& g, const Vec& e) {
    const int n = g.n;
    const double ih = 1.0 / g.h();
    Vec u = Vec::Zero(g.size());
    if (g.d == 1) {
        for (int i = 0; i < n; ++i) u[i] = (e[i] - e[i + 1]) * ih;
        return u;
    }
    const int off = n * (n + 1);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double x = e[j * (n + 1) + i] - e[j * (n + 1) + i + 1];
            double y = e[off + i * (n + 1) + j] - e[off + i * (n + 1) + j + 1];
            u[i + n * j] = (x + y) * ih;
        }
    }
    return u;
}

Vec laplacian(const Grid& g, const Vec& u) {
    const int n = g.n;
    const double ih2 = 1.0 / (g.h() * g.h());
    Vec out(g.size());
    if (g.d == 1) {
        for (int i = 0; i < n; ++i) {
            double l = i > 0 ? u[i - 1] : 0.0;
            double r = i + 1 < n ? u[i + 1] : 0.0;
            out[i] = (l - 2.0 * u[i] + r) * ih2;
        }
        return out;
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double c = u[i + n * j];
            double s = -4.0 * c;
            if (i > 0) s += u[i - 1 + n * j];
            if (i + 1 < n) s += u[i + 1 + n * j];
            if (j > 0) s += u[i + n * (j - 1)];
            if (j + 1 < n) s += u[i + n * (j + 1)];
            out[i + n * j] = s * ih2;
        }
    }
    return out;
}

Vec central_gradient(const Grid& g, const Vec& u, int axis) {
    const int n = g.n;
    const double i2h = 0.5 / g.h();
    Vec out(g.size());
    for (int idx = 0; idx < g.size(); ++idx) {
        int i = idx % n, j = idx / n;
        double l, r;
        if (g.d == 1 || axis == 0) {
            l = i > 0 ? u[idx - 1] : 0.0;
            r = i + 1 < n ? u[idx + 1] : 0.0;
        } else {
            l = j > 0 ? u[idx - n] : 0.0;
            r = j + 1 < n ? u[idx + n] : 0.0;
        }
        out[idx] = (r - l) * i2h;
    }
    return out;
}

SpMat stiffness(const Grid& g) {
    const int n = g.n;
    const double ih2 = 1.0 / (g.h() * g.h());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<size_t>(g.size()) * (g.d == 1 ? 3 : 5));
    for (int idx = 0; idx < g.size(); ++idx) {
        int i = idx % n, j = idx / n;
        t.emplace_back(idx, idx, 2.0 * g.d * ih2);
        if (i > 0) t.emplace_back(idx, idx - 1, -ih2);
        if (i + 1 < n) t.emplace_back(idx, idx + 1, -ih2);
        if (g.d == 2) {
            if (j > 0) t.emplace_back(idx, idx - n, -ih2);
            if (j + 1 < n) t.emplace_back(idx, idx + n, -ih2);
        }
    }
    SpMat K(g.size(), g.size());
    K.setFromTriplets(t.begin(), t.end());
    return K;
}

double first_eigenvalue(const Grid& g) {
    double h = g.h();
    return g.d * (2.0 / (h * h)) * (1.0 - std::cos(std::numbers::pi * h));
}

Field laplacian(const Field& u) { return Field(u.grid, laplacian(u.grid, u.values)); }

struct PoissonSolver::Impl {
    bool direct = true;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
};

PoissonSolver::PoissonSolver(const Grid& g) : grid_(g), K_(stiffness(g)), impl_(std::make_shared<Impl>()) {
    impl_->direct = g.size() <= 10000;
    if (impl_->direct) {
        impl_->ldlt.compute(K_);
        if (impl_->ldlt.info() != Eigen::Success) throw SolverError("Poisson factorization failed", 0.0);
    } else {
        impl_->cg.setTolerance(1e-14);
        impl_->cg.setMaxIterations(20 * g.size());
        impl_->cg.compute(K_);
    }
}

std::shared_ptr<const PoissonSolver> PoissonSolver::get(const Grid& g) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const PoissonSolver>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{g.d, g.n}];
    if (!slot) slot = std::make_shared<const PoissonSolver>(g);
    return slot;
}

Vec PoissonSolver::solve(const Vec& f) const {
    require(f.size() == grid_.size(), "Poisson right-hand side has wrong length");
    const double fn = f.norm();
    if (fn == 0.0) return Vec::Zero(f.size());
    Vec u;
    if (impl_->direct) {
        u = impl_->ldlt.solve(f);
        Vec r = f - K_ * u;
        u += impl_->ldlt.solve(r);
    } else {
        u = impl_->cg.solve(f);
        if (impl_->cg.info() != Eigen::Success) {
            throw SolverError("conjugate gradient did not converge", (f - K_ * u).norm() / fn);
        }
    }
    return u;
}

Field inv_laplacian(const Field& f) {
    return Field(f.grid, PoissonSolver::get(f.grid)->solve(f.values));
}

double lp_norm(const Grid& g, const Vec& u, double p) {
    require(p >= 1.0, "norm exponent must be >= 1");
    double amax = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
    if (amax == 0.0) return 0.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]) / amax, p);
    return amax * std::pow(s * g.w(), 1.0 / p);
}

double w1p_norm(const Grid& g, const Vec& u, double p) { return lp_norm(g, gradient(g, u), p); }

double hminus1_norm(const Grid& g, const Vec& u) {
    Vec z = PoissonSolver::get(g)->solve(u);
    return std::sqrt(std::max(0.0, u.dot(z) * g.w()));
}

double norm(const Field& u, NormSpace space, double p) {
    switch (space) {
        case NormSpace::Lp: return lp_norm(u.grid, u.values, p);
        case NormSpace::L2: return lp_norm(u.grid, u.values, 2.0);
        case NormSpace::Hminus1: return hminus1_norm(u.grid, u.values);
        case NormSpace::W1p: return w1p_norm(u.grid, u.values, p);
    }
    return 0.0;
}

DualField::DualField(const Grid& g, DualRep r)
    : grid(g), rep(r), values(Vec::Zero(r == DualRep::NodeDensity ? g.size() : g.edges())) {}

DualField::DualField(const Grid& g, DualRep r, Vec v) : grid(g), rep(r), values(std::move(v)) {
    require(values.size() == (r == DualRep::NodeDensity ? g.size() : g.edges()),
            "dual field length does not match its representation");
}

DualField& DualField::operator+=(const DualField& o) {
    require(grid == o.grid && rep == o.rep, "dual arithmetic with mismatched representation");
    values += o.values;
    return *this;
}

DualField& DualField::operator-=(const DualField& o) {
    require(grid == o.grid && rep == o.rep, "dual arithmetic with mismatched representation");
    values -= o.values;
    return *this;
}

DualField operator+(DualField a, const DualField& b) { return a += b; }
DualField operator-(DualField a, const DualField& b) { return a -= b; }
DualField operator*(double a, DualField b) { return b *= a; }

Vec node_functional(const DualField& v) {
    return v.rep == DualRep::NodeDensity ? v.values : gradient_transpose(v.grid, v.values);
}

GelfandTriple GelfandTriple::porous_media(double p, double alpha) {
    require(p > 1.0, "exponent p must exceed 1");
    GelfandTriple t;
    t.kind = Kind::PorousMedia;
    t.p = p;
    t.alpha = alpha > 0.0 ? alpha : p;
    require(t.alpha > 1.0, "gauge alpha must exceed 1");
    return t;
}

GelfandTriple GelfandTriple::phi_laplace(double p, double alpha) {
    require(p > 1.0, "exponent p must exceed 1");
    GelfandTriple t;
    t.kind = Kind::PhiLaplace;
    t.p = p;
    t.alpha = alpha > 0.0 ? alpha : p;
    require(t.alpha > 1.0, "gauge alpha must exceed 1");
    return t;
}

void validate(const GelfandTriple& t, int d) {
    require(t.p > 1.0, "exponent p must exceed 1");
    require(t.alpha > 1.0, "gauge alpha must exceed 1");
    if (t.kind == GelfandTriple::Kind::PorousMedia && d >= 3)
        require(t.p > 2.0 * d / (d + 2.0), "porous-media exponent too small for this dimension");
}

double GelfandTriple::norm_V(const Grid& g, const Vec& u) const {
    return kind == Kind::PorousMedia ? lp_norm(g, u, p) : w1p_norm(g, u, p);
}

double GelfandTriple::norm_H(const Grid& g, const Vec& u) const {
    return kind == Kind::PorousMedia ? hminus1_norm(g, u) : lp_norm(g, u, 2.0);
}

double GelfandTriple::norm_V(const Field& u) const { return norm_V(u.grid, u.values); }
double GelfandTriple::norm_H(const Field& u) const { return norm_H(u.grid, u.values); }

std::string GelfandTriple::name() const {
    return kind == Kind::PorousMedia ? "porous_media" : "phi_laplace";
}

double pairing(const DualField& v, const Field& u) {
    require(v.grid == u.grid, "pairing on different grids");
    if (v.rep == DualRep::NodeDensity) return v.values.dot(u.values) * u.grid.w();
    return v.values.dot(gradient(u.grid, u.values)) * u.grid.w();
}

double pairing(const DualField& v, const Field& u, const GelfandTriple& t) {
    if (t.kind == GelfandTriple::Kind::PorousMedia)
        require(v.rep == DualRep::NodeDensity, "porous-media duals are node densities");
    return pairing(v, u);
}

double density_norm(const DualField& v, double p) {
    return lp_norm(v.grid, v.values, p / (p - 1.0));
}

namespace {

const std::vector<Vec>& dictionary(const Grid& g) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<Vec>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& dict = cache[{g.d, g.n}];
    if (dict.empty()) {
        std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> nd;
        for (int k = 0; k < 64; ++k) {
            Vec u(g.size());
            for (int i = 0; i < g.size(); ++i) u[i] = nd(rng);
            dict.push_back(u);
        }
        dict.push_back(sine_mode(g).values);
    }
    return dict;
}

}  // namespace

DualNorm dual_norm(const DualField& v, const GelfandTriple& t) {
    DualNorm out;
    const Grid& g = v.grid;
    if (t.kind == GelfandTriple::Kind::PorousMedia) {
        require(v.rep == DualRep::NodeDensity, "porous-media duals are node densities");
        out.upper = out.lower = density_norm(v, t.p);
        out.exact = true;
        return out;
    }
    Vec f = node_functional(v);
    auto solver = PoissonSolver::get(g);
    Vec z = solver->solve(f);
    if (t.p == 2.0) {
        out.upper = out.lower = std::sqrt(std::max(0.0, f.dot(z) * g.w()));
        out.exact = true;
        return out;
    }
    if (v.rep == DualRep::EdgeDensity) {
        out.upper = density_norm(v, t.p);
    } else {
        DualField lift(g, DualRep::EdgeDensity, gradient(g, z));
        out.upper = density_norm(lift, t.p);
    }
    double best = 0.0;
    auto probe = [&](const Vec& u) {
        double nv = w1p_norm(g, u, t.p);
        if (nv > 0.0) best = std::max(best, std::abs(f.dot(u)) * g.w() / nv);
    };
    for (const Vec& u : dictionary(g)) probe(u);
    for (int i = 0; i < g.size(); ++i) probe(Vec::Unit(g.size(), i));
    probe(z);
    out.lower = std::min(best, out.upper);
    return out;
}

namespace {

struct RatioObjective {
    GelfandTriple t;
    Grid g;
    std::shared_ptr<const PoissonSolver> solver;

    // log ||u||_V - log ||u||_H and its Euclidean gradient
    double eval(const Vec& u, Vec* grad) const {
        const double p = t.p;
        double nv, nh;
        Vec gv, gh;
        if (t.kind == GelfandTriple::Kind::PorousMedia) {
            nv = lp_norm(g, u, p);
            Vec z = solver->solve(u);
            double q = u.dot(z) * g.w();
            nh = std::sqrt(q);
            if (grad) {
                gv = u.unaryExpr([p](double x) { return std::copysign(std::pow(std::abs(x), p - 1.0), x); });
                gv *= g.w() / std::pow(nv, p);
                gh = z * (g.w() / q);
            }
        } else {
            Vec du = gradient(g, u);
            nv = lp_norm(g, du, p);
            nh = lp_norm(g, u, 2.0);
            if (grad) {
                Vec s = du.unaryExpr([p](double x) { return std::copysign(std::pow(std::abs(x), p - 1.0), x); });
                gv = gradient_transpose(g, s) * (g.w() / std::pow(nv, p));
                gh = u * (g.w() / (nh * nh));
            }
        }
        if (grad) *grad = gv - gh;
        return std::log(nv) - std::log(nh);
    }
};

}  // namespace

EmbeddingResult embedding_constant(const GelfandTriple& t, const Grid& g, const EmbeddingOptions& opts) {
    validate(t, g.d);
    RatioObjective obj{t, g, PoissonSolver::get(g)};
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> nd;

    EmbeddingResult res;
    double best = std::numeric_limits<double>::infinity();
    bool best_conv = false;
    const int starts = std::max(opts.restarts, 8) + 1;
    for (int r = 0; r < starts; ++r) {
        Vec u(g.size());
        if (r == 0) {
            u = sine_mode(g).values;
        } else {
            for (int i = 0; i < g.size(); ++i) u[i] = nd(rng);
        }
        u.normalize();
        Vec grad;
        double f = obj.eval(u, &grad);
        double step = 1.0 / std::max(1.0, grad.norm() * g.size());
        Vec u_prev = u, g_prev = grad;
        bool conv = false;
        for (int it = 0; it < opts.max_iter; ++it) {
            // project out the radial component; the objective is 0-homogeneous
            Vec d = -(grad - grad.dot(u) * u);
            double gn = d.norm();
            if (gn < opts.tol) { conv = true; break; }
            double a = step;
            Vec un;
            double fn = f;
            Vec gnew;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                un = (u + a * d).normalized();
                fn = obj.eval(un, &gnew);
                if (std::isfinite(fn) && fn <= f - 1e-4 * a * gn * gn) { accepted = true; break; }
                a *= 0.5;
            }
            if (!accepted) { conv = std::abs(gn) < 1e-7; break; }
            Vec s = un - u, y = gnew - grad;
            double sy = s.dot(y);
            step = sy > 0.0 ? s.squaredNorm() / sy : a * 2.0;
            step = std::clamp(step, 1e-12, 1e6);
            double df = f - fn;
            u = un;
            grad = gnew;
            f = fn;
            if (df >= 0.0 && df < opts.tol * std::max(1.0, std::abs(f)) && gn < 1e-6) { conv = true; break; }
        }
        // certify by re-evaluating the ratio directly
        double ratio = t.norm_V(g, u) / t.norm_H(g, u);
        if (ratio < best) {
            best = ratio;
            best_conv = conv;
            res.minimizer = u;
        }
        ++res.restarts;
    }
    res.c0 = best;
    res.converged = best_conv;
    if (t.p == 2.0) res.eigen_check = std::sqrt(first_eigenvalue(g));
    return res;
}

}  // namespace yosida
