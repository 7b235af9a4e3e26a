#include "yosida/verify.hpp"

#include "yosida/error.hpp"
#include "yosida/extinction.hpp"
#include "yosida/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace yosida {

bool SuiteResult::all_pass() const {
    return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.pass; });
}

namespace {

struct Ctx {
    bool full;
    std::uint64_t seed;
    int threads;
    int cap(int fast, int full_n) const { return full ? full_n : fast; }
};

// Tracks the worst relative slack of a family of inequalities lhs <= rhs.
struct Worst {
    double margin = std::numeric_limits<double>::infinity();
    int samples = 0;
    std::string where;
    void le(double lhs, double rhs, double rel_tol, const std::string& tag = "") {
        if (std::isinf(rhs) && rhs > 0.0 && std::isfinite(lhs)) {
            ++samples;
            return;
        }
        double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        double m = (rhs - lhs) / scale + rel_tol;
        ++samples;
        if (m < margin || !std::isfinite(m)) {
            margin = std::isfinite(m) ? m : -std::numeric_limits<double>::infinity();
            where = tag;
        }
    }
    PropertyResult result(const std::string& name, const std::string& detail) const {
        PropertyResult r;
        r.name = name;
        r.margin = samples ? margin : 0.0;
        r.pass = r.margin >= 0.0;
        r.samples = samples;
        r.detail = detail + (where.empty() || r.pass ? "" : "; worst at " + where);
        return r;
    }
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

std::vector<std::pair<std::string, ScalarGraph>> scalar_family() {
    return {{"sign(1)", graphs::sign(1.0)},       {"power(1.5,1)", graphs::power(1.5, 1.0)},
            {"power(3,1)", graphs::power(3.0, 1.0)}, {"power(1.5,0)", graphs::power(1.5, 0.0)},
            {"btw(0.5)", graphs::btw(0.5)},        {"linear(2)", graphs::linear(2.0)}};
}

std::vector<std::pair<std::string, ScalarGraph>> shipped_graphs() {
    auto v = scalar_family();
    v.push_back({"non_newtonian(3)", graphs::non_newtonian(3.0)});
    v.push_back({"non_newtonian(1.5)", graphs::non_newtonian(1.5)});
    v.push_back({"piecewise", graphs::piecewise({-1.0, 1.0}, {{1.0, -1.0}, {0.5, 0.0}, {2.0, 1.0}})});
    return v;
}

double dist_to(const Interval& I, double v) { return v < I.lo ? I.lo - v : (v > I.hi ? v - I.hi : 0.0); }

Field random_field(const Grid& g, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> nd;
    Vec v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = scale * nd(rng);
    return Field(g, v);
}

// --------------------------------------------------------------------------

PropertyResult duality_identities(const Ctx& c) {
    std::mt19937_64 rng(c.seed + 1);
    Worst w;
    Grid g(1, c.cap(16, 32));
    Grid g2(2, c.cap(6, 8));
    const int fields = c.cap(100, 500);
    for (int k = 0; k < fields; ++k) {
        const Grid& gr = k % 2 ? g2 : g;
        for (double p : {1.5, 3.0}) {
            for (double a : {p, 1.5, 2.0}) {
                for (auto t : {GelfandTriple::porous_media(p, a), GelfandTriple::phi_laplace(p, a)}) {
                    Field u = random_field(gr, rng, std::pow(10.0, (k % 5) - 2.0));
                    DualField J = duality_map(u, t);
                    double nv = t.norm_V(u);
                    double pr = pairing(J, u);
                    double target = std::pow(nv, a);
                    w.le(std::abs(pr - target), 1e-9 * target, 0.0, t.name() + " pairing");
                    double dn = density_norm(J, p);
                    double tn = std::pow(nv, a - 1.0);
                    w.le(std::abs(dn - tn), 1e-9 * tn, 0.0, t.name() + " density norm");
                }
            }
        }
    }
    return w.result("duality.identities", "<J(u),u> = |u|^alpha and |J(u)|_{p'} = |u|^{alpha-1}, relative 1e-9");
}

PropertyResult scalar_resolvent_agreement(const Ctx& c) {
    std::mt19937_64 rng(c.seed + 2);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto fam = scalar_family();
    Worst w;
    const int n = c.cap(1000, 10000);
    for (int k = 0; k < n; ++k) {
        const auto& [name, g] = fam[static_cast<size_t>(k) % fam.size()];
        YosidaParams p;
        p.alpha = 1.0 + 2.0 * (1.0 - U(rng));  // (1,3]
        p.lambda = std::pow(10.0, -3.0 + 4.0 * U(rng));
        double s = (U(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -3.0 + 4.0 * U(rng));
        auto a = scalar_resolvent_solve(g, s, p);
        YosidaParams q = p;
        q.bracket_scale = 37.0;
        q.max_iter = 400;
        auto b = scalar_resolvent_solve(g, s, q);
        w.le(std::abs(a.x - b.x), 1e-10 * std::max(1.0, std::abs(s)), 0.0, name + " s=" + fmt(s));
        w.le(a.converged ? 0.0 : 1.0, 0.0, 0.0, name + " not converged");
    }
    return w.result("scalar_resolvent.agreement", "two independent brackets agree within 1e-10");
}

PropertyResult scalar_yosida_bounds(const Ctx& c) {
    std::mt19937_64 rng(c.seed + 3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Worst w;
    const int n = c.cap(100, 1000);
    for (double pe : {1.5, 3.0}) {
        ScalarGraph g = graphs::power(pe, 1.0);
        for (int k = 0; k < n; ++k) {
            double s = (U(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -2.0 + 3.0 * U(rng));
            double a0 = g.minimal_section(s);
            for (double lam : {1.0, 0.1, 0.01}) {
                YosidaParams p{lam, pe};
                double y = scalar_resolvent(g, s, p);
                double al = scalar_yosida(g, s, p);
                w.le(std::abs(al), std::abs(a0), 1e-6, "norm bound");
                w.le(dist_to(g.eval(y), al), 0.0, 1e-6, "membership");
            }
        }
    }
    return w.result("scalar.yosida_bounds", "|A_lambda(s)| <= |A0(s)| and A_lambda(s) in A(R_lambda(s)), slack 1e-6");
}

PropertyResult scalar_limit(const Ctx& c) {
    std::mt19937_64 rng(c.seed + 4);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Worst w;
    double worst_p3 = 0.0;
    const int n = c.cap(100, 1000);
    for (double pe : {1.5, 3.0}) {
        ScalarGraph g = graphs::power(pe, 1.0);
        for (int k = 0; k < n; ++k) {
            double s = (U(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -2.0 + 2.0 * U(rng));
            double a0 = g.minimal_section(s), prev = std::numeric_limits<double>::infinity(), gap = 0.0;
            for (int e = 0; e <= 6; ++e) {
                gap = std::abs(scalar_yosida(g, s, {std::pow(10.0, -e), pe}) - a0);
                w.le(gap, prev, 1e-4, "p=" + fmt(pe) + " s=" + fmt(s) + " not monotone");
                prev = gap;
            }
            if (pe == 1.5) w.le(gap, 1e-3, 0.0, "p=1.5 s=" + fmt(s));
            else worst_p3 = std::max(worst_p3, gap);
        }
    }
    return w.result("scalar.yosida_limit", "gap to A0 nonincreasing (1e-4) over lambda = 1..1e-6 (gauge p); final gap <= 1e-3 "
                                           "for p = 1.5; p = 3 final gap " + fmt(worst_p3) +
                                           " (rate lambda^{1/(alpha-1)})");
}

PropertyResult vector_yosida_bounds(const Ctx& c) {
    std::mt19937_64 rng(c.seed + 5);
    Grid g = c.full ? Grid(2, 8) : Grid(1, 8);
    const int fields = c.cap(10, 50);
    Worst w;
    int nonmono = 0;
    for (double pe : {1.5, 3.0}) {
        MultiValuedOperator op(OperatorKind::PorousMedia, graphs::power(pe, 1.0), GelfandTriple::porous_media(pe), g);
        for (int k = 0; k < fields; ++k) {
            Field x = random_field(g, rng, 1.0);
            DualField a0 = apply_minimal(op, x);
            double n0 = op_dual_norm(op, a0).value();
            double prev_gap = std::numeric_limits<double>::infinity();
            for (double lam : {1.0, 0.1, 0.01}) {
                YosidaParams p{lam, pe};
                auto R = vector_resolvent_full(op, x, p);
                DualField al = vector_yosida(op, x, p);
                w.le(op_dual_norm(op, al).value(), n0, 1e-6, "norm bound");
                double worst = 0.0;
                for (int i = 0; i < g.size(); ++i)
                    worst = std::max(worst, dist_to(op.graph().eval(R.y.values[i]), al.values[i]) /
                                                std::max(1.0, std::abs(al.values[i])));
                w.le(worst, 0.0, 1e-6, "membership");
                double gap = op_dual_norm(op, al - a0).value();
                if (!(gap < prev_gap)) ++nonmono;
                prev_gap = gap;
            }
        }
    }
    PropertyResult r = w.result("vector.yosida_bounds",
                                "|A_lambda x|_* <= |A0 x|_*, membership, gap decreasing in lambda");
    if (nonmono) {
        r.pass = false;
        r.detail += "; gap not decreasing in " + std::to_string(nonmono) + " cases";
    }
    return r;
}

PropertyResult coercivity(const Ctx& c) {
    std::mt19937_64 rng(c.seed + 6);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Worst w;
    const int n = c.cap(100, 500);
    for (double pe : {1.5, 3.0}) {
        ScalarGraph g = graphs::power(pe, 0.0);
        for (int k = 0; k < n; ++k) {
            double s = (U(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -2.0 + 3.0 * U(rng));
            double lam = 0.99 * U(rng) + 1e-3;
            double a = scalar_yosida(g, s, {lam, pe});
            w.le(std::pow(2.0, -pe) * std::pow(std::abs(s), pe), a * s, 1e-8, "scalar");
        }
    }
    Grid g = c.full ? Grid(2, 8) : Grid(1, 8);
    const int fields = c.cap(10, 50);
    for (double pe : {1.5, 3.0}) {
        MultiValuedOperator op(OperatorKind::PorousMedia, graphs::power(pe, 0.0), GelfandTriple::porous_media(pe), g);
        const auto& A = op.assumptions();
        for (int k = 0; k < fields; ++k) {
            Field x = random_field(g, rng, std::pow(10.0, -1.0 + 2.0 * U(rng)));
            double lam = 0.99 * U(rng) + 1e-3;
            DualField al = vector_yosida(op, x, {lam, pe});
            double lhs = pairing(al, x);
            double rhs = A.delta * std::pow(2.0, -A.alpha) * std::pow(op.triple().norm_V(x), A.alpha) - A.f_coercive;
            w.le(rhs, lhs, 1e-8, "vector");
        }
    }
    return w.result("coercivity.regularized", "<A_lambda x, x> >= delta 2^-alpha |x|^alpha + C for lambda < 1/delta");
}

PropertyResult range_condition(const Ctx& c) {
    std::mt19937_64 rng(c.seed + 7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Worst w;
    auto gs = shipped_graphs();
    const int n = c.cap(100, 1000);
    for (int k = 0; k < n; ++k) {
        const auto& [name, g] = gs[static_cast<size_t>(k) % gs.size()];
        double y = (U(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -3.0 + 5.0 * U(rng));
        double alpha = 1.2 + 1.8 * U(rng);
        for (double lam : {0.1, 1.0, 10.0}) {
            auto r = range_solve_full(g, y, lam, alpha);
            w.le(r.residual, 1e-10 * std::max(1.0, std::abs(y)), 0.0, name);
        }
    }
    return w.result("range.condition", "y in lambda j(x) + g(x) solvable with residual <= 1e-10");
}

SimConfig fast_diffusion(int n, double T, double dt, int K, double h) {
    Grid g(1, n);
    SimConfig s;
    s.op = MultiValuedOperator(OperatorKind::PorousMedia, graphs::power(1.5, 0.0), GelfandTriple::porous_media(1.5), g);
    s.noise = NoiseModel::constant(K, h);
    s.x = 0.2 * sine_mode(g);
    s.T = T;
    s.dt = dt;
    s.mu = 1e-2;
    s.scheme = Scheme::Implicit;
    return s;
}

PropertyResult assumptions_fast_diffusion(const Ctx&) {
    SimConfig s = fast_diffusion(16, 1.0, 1e-2, 2, 0.02);
    auto rep = validate_assumptions(s.op, s.drift, s.noise, s.T);
    PropertyResult r;
    r.name = "assumptions.fast_diffusion";
    r.pass = rep.all_pass();
    r.margin = std::numeric_limits<double>::infinity();
    for (const auto& ch : rep.checks) {
        r.margin = std::min(r.margin, ch.margin);
        if (!ch.pass) r.detail += (r.detail.empty() ? "failed: " : ", ") + ch.name;
    }
    if (r.detail.empty()) r.detail = "all standing assumptions hold";
    r.samples = static_cast<int>(rep.checks.size());
    return r;
}

Vec heat_oracle(const Grid& g, const Vec& x, double t, double kappa) {
    Eigen::MatrixXd K = Eigen::MatrixXd(stiffness(g));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    Vec lam = (-t * kappa * es.eigenvalues().array()).exp().matrix();
    return es.eigenvectors() * lam.asDiagonal() * (es.eigenvectors().transpose() * x);
}

PropertyResult scheme_consistency(const Ctx& c) {
    Grid g(1, c.cap(16, 32));
    SimConfig s;
    s.op = MultiValuedOperator(OperatorKind::PorousMedia, graphs::linear(1.0), GelfandTriple::porous_media(2.0), g);
    Vec x(g.size());
    for (int i = 0; i < g.size(); ++i) {
        double xi = g.coord(i, 0);
        x[i] = 4.0 * xi * (1.0 - xi) + 0.3 * std::sin(3.0 * M_PI * xi);
    }
    s.x = Field(g, x);
    s.T = 0.1;
    s.mu = 1e-2;
    s.scheme = Scheme::SemiImplicitLinear;
    s.record_stride = 1000000;
    const double kappa = 1.0 / (1.0 + s.mu);
    Vec exact = heat_oracle(g, x, s.T, kappa);
    double err[2];
    int i = 0;
    for (double dt : {1e-3, 5e-4}) {
        s.dt = dt;
        Trajectory tr = simulate(s, 0);
        err[i++] = s.op.triple().norm_H(g, tr.final_state - exact);
    }
    PropertyResult r;
    r.name = "scheme.consistency";
    double ratio = err[0] / err[1];
    r.margin = std::min(ratio - 1.7, 2.3 - ratio);
    r.pass = r.margin >= 0.0;
    r.samples = 2;
    r.detail = "error ratio " + fmt(ratio) + " (errors " + fmt(err[0]) + ", " + fmt(err[1]) + ")";
    return r;
}

PropertyResult determinism_and_absorption(const Ctx& c) {
    SimConfig s = fast_diffusion(c.cap(16, 32), 0.5, 1e-2, 2, 0.02);
    Trajectory a = simulate(s, 3), b = simulate(s, 3);
    bool same = a.norm_H == b.norm_H && a.norm_V == b.norm_V && a.final_state == b.final_state;
    bool absorbing = true;
    bool seen = false;
    for (size_t k = 0; k < a.norm_H.size(); ++k) {
        if (a.extinct_flag[k]) seen = true;
        if (seen && a.norm_H[k] != 0.0) absorbing = false;
    }
    PropertyResult r;
    r.name = "simulate.determinism_absorbing";
    r.pass = same && absorbing;
    r.margin = r.pass ? 0.0 : -1.0;
    r.samples = 2;
    r.detail = std::string(same ? "bit-identical reruns" : "reruns differ") + ", " +
               (absorbing ? "zero absorbing" : "nonzero after extinction") +
               (a.extinct ? ", extinct at t = " + fmt(a.tau) : ", not extinct");
    return r;
}

PropertyResult deterministic_decay(const Ctx& c) {
    SimConfig s = fast_diffusion(c.cap(16, 32), 1.0, 1e-3, 0, 0.0);
    Trajectory a = simulate(s, 0);
    Worst w;
    for (size_t k = 1; k < a.norm_H.size(); ++k) {
        if (a.extinct_flag[k]) break;
        w.le(a.norm_H[k], a.norm_H[k - 1] * (1.0 - 1e-15), 0.0, "t=" + fmt(a.times[k]));
    }
    PropertyResult r = w.result("simulate.energy_decay", "K = 0 fast diffusion: |X(t)|_H strictly decreasing");
    if (!a.extinct) {
        r.pass = false;
        r.detail += "; no extinction on [0,1]";
    } else {
        r.detail += "; extinct at t = " + fmt(a.tau);
    }
    return r;
}

PropertyResult noise_structure(const Ctx&) {
    Grid g(1, 12);
    SimConfig s;
    s.op = MultiValuedOperator(OperatorKind::PorousMedia, graphs::linear(0.0), GelfandTriple::porous_media(2.0), g);
    s.noise = NoiseModel::constant(3, 0.3);
    Vec x(g.size());
    for (int i = 0; i < g.size(); ++i) x[i] = std::cos(3.0 * g.coord(i, 0)) + 0.1 * i;
    s.x = Field(g, x);
    s.T = 1.0;
    s.dt = 1e-2;
    s.snapshots = true;
    Trajectory tr = simulate(s, 0);
    Worst w;
    for (const Vec& v : tr.snapshots) {
        double f = v.dot(x) / x.dot(x);
        w.le((v - f * x).lpNorm<Eigen::Infinity>(), 1e-12 * std::max(1.0, std::abs(f) * x.lpNorm<Eigen::Infinity>()),
             0.0);
    }
    return w.result("noise.scalar_multiple", "zero drift: X(t) stays a scalar multiple of x to 1e-12");
}

PropertyResult sweep_identity(const Ctx&) {
    SimConfig s = fast_diffusion(8, 0.2, 1e-2, 2, 0.05);
    auto tab = lambda_sweep(s, {1e-2, 1e-2}, 4, {0.1, 0.2});
    PropertyResult r;
    r.name = "sweep.identical_mu";
    r.pass = true;
    for (const auto& row : tab.rows) r.pass = r.pass && row.mean_sq_diff == 0.0;
    r.margin = r.pass ? 0.0 : -1.0;
    r.samples = static_cast<int>(tab.rows.size());
    r.detail = r.pass ? "coupled differences exactly zero" : "identical mu gave nonzero differences";
    return r;
}

PropertyResult extinction_constants(const Ctx&) {
    PropertyResult r;
    r.name = "extinction.constants";
    double a = c_star(1.0, 1.5, 2.0);
    double b = c_star(1.0, 1.5, 4.0);
    bool ok = std::abs(a - 4.0) <= 1e-12 && std::abs(b / a - std::pow(2.0, -1.5)) <= 1e-12;
    // floor increases in T and decreases in |x|
    ok = ok && extinction_floor(a, 0.1, 1.5, 2.0) > extinction_floor(a, 0.1, 1.5, 1.0);
    ok = ok && extinction_floor(a, 0.2, 1.5, 2.0) < extinction_floor(a, 0.1, 1.5, 2.0);
    r.pass = ok;
    r.margin = ok ? 0.0 : -1.0;
    r.samples = 4;
    r.detail = "c*(1,1.5,2) = " + fmt(a);
    return r;
}

}  // namespace

SuiteResult run_verify(VerifyLevel level, std::uint64_t seed, int threads) {
    Ctx c{level == VerifyLevel::Full, seed, threads};
    std::vector<std::function<PropertyResult(const Ctx&)>> blocks = {
        duality_identities,     scalar_resolvent_agreement, scalar_yosida_bounds, scalar_limit,
        vector_yosida_bounds,       coercivity,                 range_condition,  assumptions_fast_diffusion,
        scheme_consistency,     determinism_and_absorption, deterministic_decay, noise_structure,
        sweep_identity,         extinction_constants};
    SuiteResult out;
    out.level = level;
    out.seed = seed;
    out.properties.resize(blocks.size());
    parallel_for(static_cast<int>(blocks.size()), threads, [&](int i) {
        auto& slot = out.properties[static_cast<size_t>(i)];
        try {
            slot = blocks[static_cast<size_t>(i)](c);
        } catch (const std::exception& e) {
            slot.name = "block " + std::to_string(i);
            slot.pass = false;
            slot.margin = -1.0;
            slot.detail = std::string("error: ") + e.what();
        }
    });
    return out;
}

nlohmann::ordered_json to_json(const SuiteResult& r) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["level"] = r.level == VerifyLevel::Full ? "full" : "fast";
    j["seed"] = r.seed;
    j["all_pass"] = r.all_pass();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : r.properties) {
        nlohmann::ordered_json e;
        e["name"] = p.name;
        e["pass"] = p.pass;
        e["margin"] = std::isfinite(p.margin) ? nlohmann::ordered_json(p.margin) : nlohmann::ordered_json(nullptr);
        e["samples"] = p.samples;
        e["detail"] = p.detail;
        arr.push_back(e);
    }
    j["properties"] = arr;
    return j;
}

}  // namespace yosida
