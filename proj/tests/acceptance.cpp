// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.

#include "oracles.hpp"

#include <yosida/commands.hpp>
#include <yosida/parallel.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace yosida;

namespace {

struct Line {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(const std::string& name, const std::function<Line()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Line l;
    try {
        l = body();
    } catch (const std::exception& e) {
        l.pass = false;
        l.detail = std::string("error: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!l.pass) ++failures;
    std::printf("%s  %-34s %s  [%.2f s]\n", l.pass ? "PASS" : "FAIL", name.c_str(), l.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

YosidaParams params(double lambda, double alpha) {
    YosidaParams p;
    p.lambda = lambda;
    p.alpha = alpha;
    return p;
}

Field random_field(const Grid& g, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> N(0.0, scale);
    Vec v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = N(rng);
    return Field(g, v);
}

std::string config_path(const char* name) { return std::string(YOSIDA_SOURCE_DIR) + "/configs/" + name; }

// ---------------------------------------------------------------------------

Line scalar_oracle() {
    // 1e4 draws; |solver - oracle| <= 1e-10 max(1, |oracle|); under 10 s
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        oracle::Graph og;
        og.kind = static_cast<oracle::Graph::Kind>(k % 4);
        switch (og.kind) {
            case oracle::Graph::Sign: og.a = 0.1 + 3.0 * U(rng); break;
            case oracle::Graph::Power:
                og.a = 1.1 + 2.4 * U(rng);
                og.nu = U(rng) < 0.5 ? 0.0 : 3.0 * U(rng);
                break;
            case oracle::Graph::Btw: og.a = 2.0 * U(rng); break;
            case oracle::Graph::Linear: og.a = 0.05 + 4.0 * U(rng); break;
        }
        double s = (U(rng) - 0.5) * 20.0;
        double lambda = std::pow(10.0, -3.0 + 4.0 * U(rng));
        double alpha = 3.0 - 1.99 * U(rng);  // (1.01, 3]
        double ref = static_cast<double>(oracle::resolvent(og, s, lambda, alpha));
        double got = scalar_resolvent(parse_graph(og.spec()), s, params(lambda, alpha));
        worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
    }
    double secs = since(t0);
    return {worst <= 1e-10 && secs < 10.0, "max scaled error " + fmt(worst) + " (tol 1e-10), " + fmt(secs) + " s (< 10)"};
}

Line yosida_limits() {
    // gauge alpha = p; relative slack 1e-6; scalar limit gap <= 1e-3 at lambda = 1e-6
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::ostringstream os;
    bool ok = true;
    for (double p : {1.5, 3.0}) {
        ScalarGraph g = graphs::power(p, 1.0);
        double bound = 0.0, incl = 0.0, gap = 0.0, gap_s = 0.0;
        for (int k = 0; k < 1000; ++k) {
            double s = (U(rng) - 0.5) * 6.0;
            double a0 = g.minimal_section(s);
            for (double lambda : {1.0, 0.1, 0.01}) {
                auto P = params(lambda, p);
                double A = scalar_yosida(g, s, P);
                Interval I = g.eval(scalar_resolvent(g, s, P));
                bound = std::max(bound, (std::abs(A) - std::abs(a0)) / std::max(1.0, std::abs(a0)));
                incl = std::max(incl, std::max(I.lo - A, A - I.hi) / std::max(1.0, std::abs(A)));
            }
            double gk = std::abs(scalar_yosida(g, s, params(1e-6, p)) - a0);
            if (gk > gap) gap = gk, gap_s = s;
        }
        bool pb = bound <= 1e-6 && incl <= 1e-6 && gap <= 1e-3;

        // vector: 50 fields on 8x8, gap to A0 decreasing in lambda
        Grid grid(2, 8);
        MultiValuedOperator op(OperatorKind::PorousMedia, g, GelfandTriple::porous_media(p), grid);
        double vbound = 0.0, vincl = 0.0, vmono = 0.0;
        for (int k = 0; k < 50; ++k) {
            Field x = random_field(grid, rng, 2.0);
            DualField a0 = apply_minimal(op, x);
            double n0 = op_dual_norm(op, a0).value();
            double prev = INFINITY;
            for (double lambda : {1.0, 0.1, 0.01}) {
                auto P = params(lambda, p);
                auto r = vector_resolvent_full(op, x, P);
                DualField A = vector_yosida(op, x, P);
                vbound = std::max(vbound, (op_dual_norm(op, A).value() - n0) / std::max(1.0, n0));
                for (int i = 0; i < grid.size(); ++i) {
                    Interval I = g.eval(r.y.values[i]);
                    vincl = std::max(vincl, std::max(I.lo - A.values[i], A.values[i] - I.hi) /
                                                std::max(1.0, std::abs(A.values[i])));
                }
                double gapv = op_dual_norm(op, A - a0).value();
                vmono = std::max(vmono, (gapv - prev) / std::max(1.0, n0));
                prev = gapv;
            }
        }
        bool pv = vbound <= 1e-6 && vincl <= 1e-6 && vmono <= 1e-6;
        ok = ok && pb && pv;
        os << "p=" << p << ": scalar bound " << fmt(bound) << ", inclusion " << fmt(incl) << ", limit gap "
           << fmt(gap) << " at s=" << fmt(gap_s) << (gap <= 1e-3 ? "" : " (> 1e-3)") << "; vector bound " << fmt(vbound) << ", inclusion "
           << fmt(vincl) << ", gap increase " << fmt(vmono) << "; ";
    }
    double secs = since(t0);
    ok = ok && secs < 300.0;
    os << fmt(secs) << " s (< 300)";
    return {ok, os.str()};
}

Line regularized_coercivity() {
    // A_lambda(s) s >= delta 2^-alpha |s|^alpha + C - 1e-8, lambda in (0, 1/delta)
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = INFINITY;
    for (double p : {1.5, 2.0, 3.0}) {
        ScalarGraph g = graphs::power(p);
        const double delta = g.meta().c1, C = -g.meta().c2;
        for (int k = 0; k < 500; ++k) {
            double lambda = (0.001 + 0.998 * U(rng)) / delta;
            double s = (U(rng) - 0.5) * 10.0;
            double lhs = scalar_yosida(g, s, params(lambda, p)) * s;
            worst = std::min(worst, lhs - (delta * std::pow(2.0, -p) * std::pow(std::abs(s), p) + C));
        }
        Grid grid(2, 8);
        MultiValuedOperator op(OperatorKind::PorousMedia, g, GelfandTriple::porous_media(p), grid);
        const auto& A = op.assumptions();
        for (int k = 0; k < 50; ++k) {
            Field x = random_field(grid, rng, 2.0);
            double lambda = (0.001 + 0.998 * U(rng)) / A.delta;
            double lhs = pairing(vector_yosida(op, x, params(lambda, p)), x);
            double rhs = A.delta * std::pow(2.0, -p) * std::pow(op.triple().norm_V(x), p) - A.f_coercive;
            worst = std::min(worst, lhs - rhs);
        }
    }
    return {worst >= -1e-8, "worst slack " + fmt(worst) + " (>= -1e-8)"};
}

Line range_condition() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<ScalarGraph> gs = {graphs::sign(),
                                   graphs::power(1.5),
                                   graphs::power(3.0, 1.0),
                                   graphs::btw(),
                                   graphs::btw(0.5),
                                   graphs::linear(),
                                   graphs::non_newtonian(1.5),
                                   graphs::non_newtonian(3.0),
                                   graphs::piecewise({0.0}, {{0.0, -1.0}, {1.0, 1.0}})};
    double worst = 0.0;
    int fails = 0;
    for (int k = 0; k < 1000; ++k) {
        double y = (U(rng) - 0.5) * 40.0;
        for (const auto& g : gs)
            for (double lambda : {0.1, 1.0, 10.0}) {
                for (double alpha : {1.5, 2.0, 3.0}) {
                    ScalarSolve r = range_solve_full(g, y, lambda, alpha);
                    worst = std::max(worst, r.residual);
                    if (!r.converged || !(r.residual <= 1e-10)) ++fails;
                }
            }
    }
    return {fails == 0, "max residual " + fmt(worst) + " (tol 1e-10), unsolved " + std::to_string(fails)};
}

Line duality() {
    std::mt19937_64 rng(505);
    double worst = 0.0;
    Grid g(2, 8);
    for (int kind = 0; kind < 2; ++kind)
        for (double p : {1.5, 3.0})
            for (double alpha : {p, 1.5, 2.0}) {
                GelfandTriple t = kind == 0 ? GelfandTriple::porous_media(p, alpha) : GelfandTriple::phi_laplace(p, alpha);
                for (int k = 0; k < 500; ++k) {
                    Field u = random_field(g, rng, std::exp(3.0 * (k % 3 - 1)));
                    DualField J = duality_map(u, t);
                    double nv = t.norm_V(u);
                    worst = std::max(worst, std::abs(pairing(J, u) / std::pow(nv, alpha) - 1.0));
                    worst = std::max(worst, std::abs(density_norm(J, p) / std::pow(nv, alpha - 1.0) - 1.0));
                }
            }
    return {worst <= 1e-9, "max relative error " + fmt(worst) + " (tol 1e-9)"};
}

Line scheme_consistency() {
    // linear graph, alpha = 2: X(T) = exp(-T K/(1+mu)) x
    const int n = 32;
    Grid grid(1, n);
    double err[2];
    int k = 0;
    for (double dt : {1e-3, 5e-4}) {
        SimConfig c;
        c.T = 0.1;
        c.dt = dt;
        c.mu = 1e-2;
        c.op = MultiValuedOperator(OperatorKind::PorousMedia, graphs::linear(), GelfandTriple::porous_media(2.0), grid);
        c.x = sine_mode(grid);
        c.x.values += 0.5 * oracle::mode(n, 2) + 0.25 * oracle::mode(n, 5);
        c.scheme = Scheme::SemiImplicitLinear;
        Trajectory t = simulate(c, 0);
        Vec exact = oracle::heat(c.x.values, c.T, 1.0 / (1.0 + c.mu));
        err[k++] = std::sqrt(oracle::hminus1_sq(t.final_state - exact));
    }
    double ratio = err[0] / err[1];
    return {ratio >= 1.7 && ratio <= 2.3,
            "ratio " + fmt(ratio) + " in [1.7, 2.3] (errors " + fmt(err[0]) + ", " + fmt(err[1]) + ")"};
}

Line sweep() {
    auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = load_run_config(config_path("fast_diffusion_sweep.json"));
    SimConfig s = build_sim_config(cfg);
    SweepTable tab = lambda_sweep(s, cfg.sweep_mus, cfg.sweep_N, {cfg.T}, default_threads());
    auto col = tab.column(0);
    bool ok = cfg.sweep_N == 100 && col.size() == 3;
    std::ostringstream os;
    os << "E|X_a(T) - X_b(T)|^2 =";
    for (size_t i = 0; i < col.size(); ++i) {
        os << ' ' << fmt(col[i]);
        if (i > 0) ok = ok && col[i] < col[i - 1];
    }
    double secs = since(t0);
    ok = ok && secs < 300.0;
    os << " (strictly decreasing), " << fmt(secs) << " s (< 300)";
    return {ok, os.str()};
}

struct ExtinctionRun {
    ExtinctionReport report;
    double seconds = 0.0;
};

const ExtinctionRun& extinction_run() {
    static ExtinctionRun run = [] {
        auto t0 = std::chrono::steady_clock::now();
        RunConfig cfg = load_run_config(config_path("fast_diffusion_extinction.json"));
        ExtinctionRun r;
        r.report = run_extinction(cfg, default_threads());
        r.seconds = since(t0);
        return r;
    }();
    return run;
}

Line probability() {
    const auto& run = extinction_run();
    const auto& r = run.report;
    double se = std::sqrt(r.p_hat * (1.0 - r.p_hat) / r.N);
    bool ok = r.N == 400 && r.p_hat >= r.floor - 3.0 * se && run.seconds < 600.0;
    return {ok, "P_hat " + fmt(r.p_hat) + " >= floor " + fmt(r.floor) + " - 3 SE (SE " + fmt(se) + "), T " + fmt(r.T) +
                    ", c0 " + fmt(r.c0) + ", c* " + fmt(r.c_star) + ", |x|_H " + fmt(r.x_norm) + ", " +
                    fmt(run.seconds) + " s (< 600)"};
}

Line mean_bound() {
    const auto& r = extinction_run().report;
    double mean = 0.0;
    for (double t : r.tau) mean += t;
    mean /= r.tau.size();
    double q = 0.0;
    for (double t : r.tau) q += (t - mean) * (t - mean);
    double se = std::sqrt(q / (r.tau.size() - 1) / r.tau.size());
    double bound = r.c_star * std::pow(r.x_norm, 2.0 - r.alpha);
    double lim = bound * (1.0 + 3.0 * (mean > 0.0 ? se / mean : 0.0));
    return {mean <= lim, "censored mean " + fmt(mean) + " <= " + fmt(lim) + " (c*|x|^{2-alpha} " + fmt(bound) + ")"};
}

Line supermartingale() {
    const auto& t = extinction_run().report.supermartingale;
    double worst = INFINITY;
    for (size_t j = 1; j < t.rows.size(); ++j) worst = std::min(worst, t.rows[j].margin);
    return {t.pass && t.rows.size() == 11,
            std::to_string(t.rows.size() - 1) + " steps, min margin (2 SE of paired difference) " + fmt(worst)};
}

Line energy() {
    const auto& t = extinction_run().report.energy;
    std::ostringstream os;
    for (const auto& row : t.rows) os << "t=" << fmt(row.t) << ": " << fmt(row.mean) << " <= " << fmt(row.bound) << " + 2 SE; ";
    return {t.pass && t.rows.size() == 3, os.str()};
}

Line moments() {
    const auto& r = extinction_run().report;
    return {r.sup_ratio <= 10.0, "max sup_t |X|_H^2 / |x|_H^2 = " + fmt(r.sup_ratio) + " (<= 10)"};
}

Line determinism() {
    std::string a = to_json(run_verify(VerifyLevel::Fast, 2024, 1)).dump(2);
    std::string b = to_json(run_verify(VerifyLevel::Fast, 2024, 1)).dump(2);
    std::string c = to_json(run_verify(VerifyLevel::Fast, 2024, 8)).dump(2);
    RunConfig cfg = load_run_config(config_path("fast_diffusion_extinction.json"));
    SimConfig s = build_sim_config(cfg, 0.05);
    auto one = simulate_many(s, 16, 1), eight = simulate_many(s, 16, 8);
    bool same = true;
    for (size_t i = 0; i < one.size(); ++i)
        same = same && one[i].norm_H == eight[i].norm_H && one[i].final_state == eight[i].final_state;
    bool ok = a == b && a == c && same;
    return {ok, std::string("verify fast JSON ") + (a == b ? "identical" : "differs") + " across runs, " +
                    (a == c ? "identical" : "differs") + " for 1 vs 8 threads; 16 trajectories " +
                    (same ? "bit-identical" : "differ") + " for 1 vs 8 threads"};
}

}  // namespace

int main() {
    run("scalar resolvent oracle", scalar_oracle);
    run("Yosida bound/limit/inclusion", yosida_limits);
    run("regularized coercivity", regularized_coercivity);
    run("range condition", range_condition);
    run("duality identities", duality);
    run("scheme consistency", scheme_consistency);
    run("coupled mu sweep", sweep);
    run("extinction probability bound", probability);
    run("extinction mean bound", mean_bound);
    run("supermartingale", supermartingale);
    run("energy inequality", energy);
    run("moment sanity", moments);
    run("determinism", determinism);
    std::printf("%d failing\n", failures);
    return failures == 0 ? 0 : 1;
}
