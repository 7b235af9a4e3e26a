#include "yosida/sde.hpp"

#include "yosida/error.hpp"
#include "yosida/parallel.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace yosida {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::Explicit: return "explicit";
        case Scheme::SemiImplicitLinear: return "semi-implicit-linear";
        case Scheme::Implicit: return "implicit";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "explicit") return Scheme::Explicit;
    if (s == "semi-implicit-linear") return Scheme::SemiImplicitLinear;
    if (s == "implicit") return Scheme::Implicit;
    throw InvalidArgument("unknown scheme '" + s + "' (expected explicit, semi-implicit-linear or implicit)");
}

double SimConfig::effective_epsilon() const {
    if (epsilon > 0.0) return epsilon;
    return 1e-6 * op.triple().norm_H(x);
}

int SimConfig::steps() const { return static_cast<int>(std::llround(T / dt)); }

void validate(const SimConfig& c) {
    require(c.T > 0.0 && std::isfinite(c.T), "horizon T must be positive");
    require(c.dt > 0.0 && c.dt <= c.T, "time step must satisfy 0 < dt <= T");
    require(c.mu > 0.0, "regularization mu must be positive");
    const double delta = c.op.graph().meta().c1;
    if (delta > 0.0) {
        std::ostringstream os;
        os << "regularization mu = " << c.mu << " must be below 1/delta = " << 1.0 / delta;
        require(c.mu < 1.0 / delta, os.str());
    }
    require(c.x.grid == c.op.grid(), "initial field and operator live on different grids");
    require(c.x.values.allFinite(), "initial field must be finite");
    require(c.record_stride >= 1, "record stride must be at least 1");
    validate(c.noise);
    if (c.drift.kind == SingleValuedDrift::Kind::ReactionDiffusion)
        require(c.op.triple().kind == GelfandTriple::Kind::PhiLaplace,
                "reaction-diffusion drift needs an L2 pivot space (phi_laplace or subdifferential model)");
    double nx = c.op.triple().norm_H(c.x);
    if (nx > 0.0) require(c.effective_epsilon() < nx, "extinction threshold must be below |x|_H");
    for (double t : c.checkpoints) require(t >= 0.0 && t <= c.T * (1.0 + 1e-12), "checkpoints must lie in [0, T]");
}

// ---------------------------------------------------------------------------

struct Stepper::Impl {
    SpMat K;
    SpMat I;
    SpMat lin;  // linear part of the H-space drift treated implicitly
    bool has_lin = false;
    mutable std::mutex mu;
    mutable std::map<double, std::shared_ptr<Eigen::SimplicialLDLT<SpMat>>> cache;

    std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> factor(double dt) const {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(dt);
        if (it != cache.end()) return it->second;
        auto f = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
        SpMat M = I + dt * lin;
        f->compute(M);
        if (f->info() != Eigen::Success) throw SolverError("factorization of the semi-implicit operator failed", 0.0);
        cache.emplace(dt, f);
        return f;
    }
};

Stepper::Stepper(const SimConfig& c) : c_(c), impl_(std::make_unique<Impl>()) {
    const Grid& g = c.op.grid();
    impl_->K = stiffness(g);
    impl_->I = SpMat(g.size(), g.size());
    impl_->I.setIdentity();
    impl_->lin = SpMat(g.size(), g.size());
    if (c.scheme == Scheme::SemiImplicitLinear) {
        const GraphMeta& m = c.op.graph().meta();
        if (m.linear_slope && c.op.alpha() == 2.0) {
            double k = *m.linear_slope;
            double kappa = k / (1.0 + c.mu * k);
            impl_->lin += kappa * (c.op.kind() == OperatorKind::Subdifferential ? impl_->I : impl_->K);
            impl_->has_lin = true;
        }
        if (c.drift.kind == SingleValuedDrift::Kind::ReactionDiffusion) {
            impl_->lin += impl_->K;
            impl_->has_lin = true;
        }
    }
}

Stepper::~Stepper() = default;

Vec Stepper::drift(const Vec& X, double t) const {
    const Grid& g = c_.op.grid();
    Field u(g, X);
    Vec s = lift_to_H(c_.op, yosida_regularized_drift(c_.op, u, c_.mu));
    if (c_.drift.kind != SingleValuedDrift::Kind::Zero) s += drift_B(c_.drift, t, u).values;
    return s;
}

namespace {

double reaction_slope(const Reaction& r, double u) {
    switch (r.kind) {
        case Reaction::Kind::None: return 0.0;
        case Reaction::Kind::Linear: return r.a;
        case Reaction::Kind::Cubic: return 3.0 * r.a * u * u;
    }
    return 0.0;
}

// dt K w + beta_mu(w) = Y, X' = beta_mu(w)
Vec implicit_porous(const SimConfig& c, const SpMat& K, const Vec& Y, double dt, Vec* warm) {
    const ScalarGraph& g = c.op.graph();
    const double mu = c.mu, alpha = c.op.alpha();
    const Eigen::Index n = Y.size();
    double scale = Y.lpNorm<Eigen::Infinity>();
    if (scale == 0.0) {
        if (warm) *warm = Vec::Zero(n);
        return Vec::Zero(n);
    }
    Vec w(n);
    if (warm && warm->size() == n) {
        w = *warm;
    } else {
        for (Eigen::Index i = 0; i < n; ++i) w[i] = scalar_yosida_point(g, Y[i], mu, alpha).value;
    }
    auto beta = [&](const Vec& v) {
        Vec b(n);
        for (Eigen::Index i = 0; i < n; ++i) b[i] = yosida_inverse(g, v[i], mu, alpha);
        return b;
    };
    auto resid = [&](const Vec& v) -> Vec { return dt * (K * v) + beta(v) - Y; };
    Vec F = resid(w);
    double fn = F.lpNorm<Eigen::Infinity>();
    const double tol = 1e-13 * scale;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    SpMat J = dt * K;
    bool analyzed = false;
    for (int it = 0; it < 100 && fn > tol; ++it) {
        J = dt * K;
        for (Eigen::Index i = 0; i < n; ++i) J.coeffRef(i, i) += yosida_inverse_slope(g, w[i], mu, alpha);
        if (!analyzed) {
            ldlt.analyzePattern(J);
            analyzed = true;
        }
        ldlt.factorize(J);
        if (ldlt.info() != Eigen::Success) throw SolverError("implicit step: Newton matrix not factorizable", fn);
        Vec dw = ldlt.solve(-F);
        double step = 1.0;
        Vec wn, Fn;
        double fnn = fn;
        for (int b = 0; b < 40; ++b) {
            wn = w + step * dw;
            Fn = resid(wn);
            fnn = Fn.lpNorm<Eigen::Infinity>();
            if (fnn < (1.0 - 1e-4 * step) * fn) break;
            step *= 0.5;
        }
        if (!(fnn < fn)) break;
        w = wn;
        F = Fn;
        fn = fnn;
    }
    if (!(fn <= 1e-9 * scale)) throw SolverError("implicit step: Newton did not converge", fn);
    if (warm) *warm = w;
    return beta(w);
}

// X' - Y + dt S(X') = 0 in state space
Vec implicit_l2(const Stepper& st, const SimConfig& c, const SpMat& K, const Vec& Y, double t, double dt,
                const Vec& X0) {
    const MultiValuedOperator& op = c.op;
    const Grid& g = op.grid();
    const Eigen::Index n = Y.size();
    const double mu = c.mu, alpha = op.alpha();
    SpMat L;
    if (op.kind() == OperatorKind::PhiLaplace) {
        // D as a sparse matrix from its action on unit vectors
        std::vector<Eigen::Triplet<double>> trip;
        for (int j = 0; j < g.size(); ++j) {
            Vec e = Vec::Zero(g.size());
            e[j] = 1.0;
            Vec col = gradient(g, e);
            for (Eigen::Index i = 0; i < col.size(); ++i)
                if (col[i] != 0.0) trip.emplace_back(static_cast<int>(i), j, col[i]);
        }
        L = SpMat(g.edges(), g.size());
        L.setFromTriplets(trip.begin(), trip.end());
    } else {
        L = SpMat(n, n);
        L.setIdentity();
    }
    const bool rd = c.drift.kind != SingleValuedDrift::Kind::Zero;
    auto resid = [&](const Vec& X) -> Vec { return X - Y + dt * st.drift(X, t + dt); };
    Vec X = X0;
    Vec F = resid(X);
    double fn = F.lpNorm<Eigen::Infinity>();
    const double scale = std::max(Y.lpNorm<Eigen::Infinity>(), 1e-300);
    const double tol = 1e-13 * scale;
    Eigen::SparseLU<SpMat> lu;
    for (int it = 0; it < 100 && fn > tol; ++it) {
        Vec z = L * X;
        std::vector<Eigen::Triplet<double>> d;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            double s = scalar_yosida_point(op.graph(), z[i], mu, alpha).slope;
            d.emplace_back(static_cast<int>(i), static_cast<int>(i), s);
        }
        SpMat Dg(z.size(), z.size());
        Dg.setFromTriplets(d.begin(), d.end());
        SpMat J = SpMat(L.transpose()) * Dg * L;
        if (op.kind() == OperatorKind::PorousMedia) J = K * J;
        if (rd) {
            J += K;
            for (Eigen::Index i = 0; i < n; ++i) J.coeffRef(i, i) += reaction_slope(c.drift.reaction, X[i]);
        }
        SpMat I(n, n);
        I.setIdentity();
        J = I + dt * J;
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw SolverError("implicit step: Newton matrix singular", fn);
        Vec dx = lu.solve(-F);
        double step = 1.0;
        Vec Xn, Fn;
        double fnn = fn;
        for (int b = 0; b < 40; ++b) {
            Xn = X + step * dx;
            Fn = resid(Xn);
            fnn = Fn.lpNorm<Eigen::Infinity>();
            if (fnn < (1.0 - 1e-4 * step) * fn) break;
            step *= 0.5;
        }
        if (!(fnn < fn)) break;
        X = Xn;
        F = Fn;
        fn = fnn;
    }
    if (!(fn <= 1e-9 * scale)) throw SolverError("implicit step: Newton did not converge", fn);
    return X;
}

}  // namespace

Vec Stepper::advance(const Vec& X, double t, double dt, const std::vector<double>& dW, Vec* w) const {
    const double fac = c_.noise.factor(t, dW);
    switch (c_.scheme) {
        case Scheme::Explicit: return X - dt * drift(X, t) + fac * X;
        case Scheme::SemiImplicitLinear: {
            if (!impl_->has_lin) return X - dt * drift(X, t) + fac * X;
            Vec rhs = X - dt * (drift(X, t) - impl_->lin * X) + fac * X;
            return impl_->factor(dt)->solve(rhs);
        }
        case Scheme::Implicit: {
            Vec Y = (1.0 + fac) * X;
            if (c_.op.kind() == OperatorKind::PorousMedia && c_.op.graph().meta().strictly_increasing)
                return implicit_porous(c_, impl_->K, Y, dt, w);
            return implicit_l2(*this, c_, impl_->K, Y, t, dt, Y);
        }
    }
    return X;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxHalvings = 8;

struct Guard {
    const Stepper& st;
    const SimConfig& c;
    double x_norm;
    Rng& aux;
    int rejections = 0;

    bool accept(const Vec& Xn, double bound) const {
        if (!Xn.allFinite()) return false;
        return c.op.triple().norm_H(c.op.grid(), Xn) <= bound;
    }

    // Advances over [t, t+dt] with increments dW; splits along a Brownian
    // bridge when the step is rejected.
    Vec run(const Vec& X, double t, double dt, const std::vector<double>& dW, Vec* w, int depth) {
        double bound = 10.0 * std::max(c.op.triple().norm_H(c.op.grid(), X), x_norm);
        Vec wsave = w ? *w : Vec();
        Vec Xn;
        bool ok = false;
        try {
            Xn = st.advance(X, t, dt, dW, w);
            ok = accept(Xn, bound);
        } catch (const SolverError&) {
            ok = false;
        }
        if (ok) return Xn;
        if (w) *w = wsave;
        ++rejections;
        if (depth >= kMaxHalvings) {
            std::ostringstream os;
            os << "persistent step rejection at t = " << t << " (dt = " << dt
               << ", |X|_H = " << c.op.triple().norm_H(c.op.grid(), X) << ", |x|_H = " << x_norm << ")";
            throw SolverError(os.str(), Xn.size() ? c.op.triple().norm_H(c.op.grid(), Xn) : 0.0);
        }
        const double h = 0.5 * dt;
        std::normal_distribution<double> nd(0.0, std::sqrt(h / 2.0));
        std::vector<double> d1(dW.size()), d2(dW.size());
        for (size_t k = 0; k < dW.size(); ++k) {
            d1[k] = 0.5 * dW[k] + nd(aux);
            d2[k] = dW[k] - d1[k];
        }
        Vec Xm = run(X, t, h, d1, w, depth + 1);
        return run(Xm, t + h, h, d2, w, depth + 1);
    }
};

}  // namespace

Vec step(const Vec& X, double t, const SimConfig& config, Rng& rng) {
    validate(config);
    const double eps = config.effective_epsilon();
    const GelfandTriple& tr = config.op.triple();
    const Grid& g = config.op.grid();
    if (tr.norm_H(g, X) <= eps) return Vec::Zero(X.size());
    Stepper st(config);
    auto dW = brownian_increments(rng, config.noise, config.dt);
    Rng aux = make_rng(config.seed, rng(), 1);
    Guard guard{st, config, tr.norm_H(config.x), aux};
    Vec Xn = guard.run(X, t, config.dt, dW, nullptr, 0);
    if (tr.norm_H(g, Xn) <= eps) Xn.setZero();
    return Xn;
}

Trajectory simulate(const SimConfig& config, std::uint64_t trajectory_index) {
    validate(config);
    const Grid& g = config.op.grid();
    const GelfandTriple& tr = config.op.triple();
    const double eps = config.effective_epsilon();
    const double pw = 2.0 - config.op.alpha();
    const int steps = config.steps();

    Trajectory out;
    out.seed = config.seed;
    out.index = trajectory_index;
    out.epsilon = eps;

    std::vector<int> cp_steps;
    for (double t : config.checkpoints) cp_steps.push_back(static_cast<int>(std::llround(t / config.dt)));
    out.checkpoint_states.assign(cp_steps.size(), Vec());

    Stepper st(config);
    Rng rng = make_rng(config.seed, trajectory_index, 0);
    Rng aux = make_rng(config.seed, trajectory_index, 1);
    Guard guard{st, config, tr.norm_H(config.x), aux};

    Vec X = config.x.values;
    Vec w;
    Vec* wp = config.scheme == Scheme::Implicit && config.op.kind() == OperatorKind::PorousMedia &&
                      config.op.graph().meta().strictly_increasing
                  ? &w
                  : nullptr;

    auto record = [&](int k, const Vec& state) {
        double nh = out.extinct ? 0.0 : tr.norm_H(g, state);
        out.times.push_back(k * config.dt);
        out.norm_H.push_back(nh);
        out.norm_V.push_back(out.extinct ? 0.0 : tr.norm_V(g, state));
        out.norm_H_pow.push_back(nh == 0.0 ? 0.0 : std::pow(nh, pw));
        out.extinct_flag.push_back(out.extinct ? 1 : 0);
        if (config.snapshots) out.snapshots.push_back(state);
    };
    auto keep_checkpoints = [&](int k, const Vec& state) {
        for (size_t j = 0; j < cp_steps.size(); ++j)
            if (cp_steps[j] == k) out.checkpoint_states[j] = state;
    };

    if (tr.norm_H(g, X) <= eps) {
        out.extinct = true;
        out.tau = 0.0;
        X.setZero();
    }
    record(0, X);
    keep_checkpoints(0, X);

    for (int k = 1; k <= steps; ++k) {
        const double t = (k - 1) * config.dt;
        // draws happen every step so paths stay coupled across configurations
        auto dW = brownian_increments(rng, config.noise, config.dt);
        if (!out.extinct) {
            X = guard.run(X, t, config.dt, dW, wp, 0);
            if (tr.norm_H(g, X) <= eps) {
                X.setZero();
                out.extinct = true;
                out.tau = k * config.dt;
            }
        }
        if (k % config.record_stride == 0 || k == steps) record(k, X);
        keep_checkpoints(k, X);
    }
    out.rejections = guard.rejections;
    out.final_state = X;
    return out;
}

std::vector<Trajectory> simulate_many(const SimConfig& config, int N, int threads) {
    require(N >= 0, "trajectory count must be nonnegative");
    validate(config);
    std::vector<Trajectory> out(static_cast<size_t>(N));
    parallel_for(N, threads, [&](int i) { out[static_cast<size_t>(i)] = simulate(config, static_cast<std::uint64_t>(i)); });
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> SweepTable::column(size_t j) const {
    std::vector<double> c;
    for (const auto& r : rows)
        if (r.t == checkpoints.at(j)) c.push_back(r.mean_sq_diff);
    return c;
}

SweepTable lambda_sweep(const SimConfig& config, const std::vector<double>& mus, int N,
                        const std::vector<double>& checkpoints, int threads) {
    require(mus.size() >= 2, "sweep needs at least two mu values");
    for (size_t i = 1; i < mus.size(); ++i) require(mus[i] <= mus[i - 1], "mu list must be nonincreasing");
    require(N >= 1, "sweep needs at least one trajectory");
    require(!checkpoints.empty(), "sweep needs at least one checkpoint");

    std::vector<SimConfig> cfgs;
    for (double m : mus) {
        SimConfig c = config;
        c.mu = m;
        c.checkpoints = checkpoints;
        c.record_stride = std::max(1, c.steps());
        c.snapshots = false;
        validate(c);
        cfgs.push_back(std::move(c));
    }
    const size_t P = mus.size() - 1, C = checkpoints.size();
    const Grid& g = config.op.grid();
    const GelfandTriple& tr = config.op.triple();
    // diffs[i][pair][checkpoint]
    std::vector<std::vector<double>> diffs(static_cast<size_t>(N), std::vector<double>(P * C));
    parallel_for(N, threads, [&](int i) {
        std::vector<Trajectory> tr_i;
        for (const auto& c : cfgs) tr_i.push_back(simulate(c, static_cast<std::uint64_t>(i)));
        for (size_t a = 0; a < P; ++a)
            for (size_t j = 0; j < C; ++j) {
                Vec d = tr_i[a].checkpoint_states[j] - tr_i[a + 1].checkpoint_states[j];
                double n = tr.norm_H(g, d);
                diffs[static_cast<size_t>(i)][a * C + j] = n * n;
            }
    });

    SweepTable tab;
    tab.mus = mus;
    tab.checkpoints = checkpoints;
    tab.N = N;
    for (size_t j = 0; j < C; ++j)
        for (size_t a = 0; a < P; ++a) {
            double s = 0.0, s2 = 0.0;
            for (int i = 0; i < N; ++i) s += diffs[static_cast<size_t>(i)][a * C + j];
            double mean = s / N;
            for (int i = 0; i < N; ++i) {
                double e = diffs[static_cast<size_t>(i)][a * C + j] - mean;
                s2 += e * e;
            }
            SweepRow r;
            r.t = checkpoints[j];
            r.mu_a = mus[a];
            r.mu_b = mus[a + 1];
            r.mean_sq_diff = mean;
            r.se = N > 1 ? std::sqrt(s2 / (N - 1) / N) : 0.0;
            tab.rows.push_back(r);
        }
    return tab;
}

}  // namespace yosida
