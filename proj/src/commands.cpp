#include "yosida/commands.hpp"

#include "yosida/extinction.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace yosida {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace {

std::ostream& out(const CommandContext& c) { return c.out ? *c.out : std::cout; }

fs::path prepare(const CommandContext& c) {
    fs::path p(c.out_dir.empty() ? "." : c.out_dir);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write '" + p.string() + "'");
    f << text;
}

ojson jnum(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

void apply_overrides(RunConfig& cfg, const CommandContext& ctx) {
    if (ctx.seed) cfg.seed = *ctx.seed;
}

void trajectory_rows(std::ostream& os, const Trajectory& t, bool with_index) {
    for (size_t k = 0; k < t.times.size(); ++k) {
        if (with_index) os << t.index << ',';
        os << format_double(t.times[k]) << ',' << format_double(t.norm_H[k]) << ',' << format_double(t.norm_V[k])
           << ',' << format_double(t.norm_H_pow[k]) << ',' << t.extinct_flag[k] << '\n';
    }
}

ojson assumptions_json(const AssumptionReport& r) {
    ojson a = ojson::array();
    for (const auto& c : r.checks)
        a.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", jnum(c.margin)}, {"detail", c.detail}});
    return a;
}

ojson table_json(const CheckTable& t) {
    ojson rows = ojson::array();
    for (const auto& r : t.rows)
        rows.push_back({{"t", r.t},
                        {"mean", r.mean},
                        {"se", r.se},
                        {"bound", r.bound},
                        {"margin", r.margin},
                        {"pass", r.pass}});
    return {{"pass", t.pass}, {"rows", rows}};
}

}  // namespace

int cmd_resolve(const std::string& spec, double s, double lambda, double alpha, const CommandContext& ctx) {
    ScalarGraph g = parse_graph(spec);
    YosidaParams p;
    p.lambda = lambda;
    p.alpha = alpha;
    validate(p);
    ScalarSolve r = scalar_resolvent_solve(g, s, p);
    double a = scalar_duality(s - r.x, alpha) / lambda;
    double a0 = g.minimal_section(s);
    double gauge = a * (s - r.x) - std::pow(std::abs(s - r.x), alpha) / lambda;
    std::ostream& os = out(ctx);
    auto line = [&](const char* k, const std::string& v) { os << std::left << std::setw(20) << k << v << '\n'; };
    line("graph", g.spec());
    line("s", format_double(s));
    line("lambda", format_double(lambda));
    line("alpha", format_double(alpha));
    line("R_lambda(s)", format_double(r.x));
    line("A_lambda(s)", format_double(a));
    line("A0(s)", format_double(a0));
    line("gauge_residual", format_double(gauge));
    line("inclusion_residual", format_double(r.residual));
    line("converged", r.converged ? "true" : "false");
    return r.converged ? kExitPass : kExitFailure;
}

int cmd_simulate(RunConfig cfg, const CommandContext& ctx) {
    apply_overrides(cfg, ctx);
    SimConfig s = build_sim_config(cfg);
    auto runs = simulate_many(s, cfg.trajectories, ctx.threads);
    fs::path dir = prepare(ctx);
    const char* header = "time,norm_H,norm_V,norm_H_pow,extinct_flag\n";
    std::vector<std::string> files;
    if (cfg.trajectory_output == "per_trajectory") {
        for (const auto& t : runs) {
            std::ostringstream os, name;
            os << header;
            trajectory_rows(os, t, false);
            name << "trajectory_" << std::setw(4) << std::setfill('0') << t.index << ".csv";
            write_file(dir / name.str(), os.str());
            files.push_back(name.str());
        }
    } else {
        std::ostringstream os;
        os << "trajectory," << header;
        for (const auto& t : runs) trajectory_rows(os, t, true);
        write_file(dir / "trajectories.csv", os.str());
        files.push_back("trajectories.csv");
    }
    if (cfg.snapshots) {
        std::ostringstream os;
        os << "trajectory,time";
        for (int i = 0; i < s.x.grid.size(); ++i) os << ",u" << i;
        os << '\n';
        for (const auto& t : runs)
            for (size_t k = 0; k < t.snapshots.size(); ++k) {
                os << t.index << ',' << format_double(t.times[k]);
                for (Eigen::Index i = 0; i < t.snapshots[k].size(); ++i) os << ',' << format_double(t.snapshots[k][i]);
                os << '\n';
            }
        write_file(dir / "snapshots.csv", os.str());
        files.push_back("snapshots.csv");
    }
    ojson summary = ojson::array();
    for (const auto& t : runs)
        summary.push_back({{"index", t.index},
                           {"extinct", t.extinct},
                           {"tau", t.extinct ? ojson(t.tau) : ojson(nullptr)},
                           {"rejections", t.rejections},
                           {"final_norm_H", t.norm_H.back()}});
    ojson j;
    j["command"] = "simulate";
    j["config"] = to_json(cfg);
    j["epsilon"] = s.effective_epsilon();
    j["files"] = files;
    j["trajectories"] = summary;
    write_file(dir / "simulate.json", j.dump(2) + "\n");
    out(ctx) << "wrote " << files.size() + 1 << " files to " << dir.string() << '\n';
    return kExitPass;
}

ExtinctionReport run_extinction(const RunConfig& cfg, int threads) {
    SimConfig base = build_sim_config(cfg);
    ExtinctionOptions opts;
    opts.threads = threads;
    opts.epsilon_sensitivity = cfg.epsilon_sensitivity;
    double c0 = cfg.c0 ? *cfg.c0 : embedding_constant(base.op.triple(), base.op.grid()).c0;
    opts.c0 = c0;
    double T = cfg.T;
    const double xn = base.op.triple().norm_H(base.x);
    if (cfg.target_floor && xn > 0.0) {
        double cs = c_star(base.op.assumptions().delta, base.op.alpha(), c0);
        T = horizon_for_floor(cs, xn, base.op.alpha(), *cfg.target_floor);
        // snap to the step grid
        T = std::max(1, static_cast<int>(std::llround(T / cfg.dt))) * cfg.dt;
    }
    SimConfig s = build_sim_config(cfg, T);
    const int m = cfg.extinction_checkpoints;
    for (int j = 0; j <= m; ++j) opts.checkpoints.push_back(std::llround(T / cfg.dt * j / m) * cfg.dt);
    for (double f : {0.25, 0.5, 1.0}) opts.energy_times.push_back(std::llround(T / cfg.dt * f) * cfg.dt);
    return mc_extinction(s, cfg.extinction_N, opts);
}

ojson to_json(const ExtinctionReport& r) {
    ojson j;
    j["N"] = r.N;
    j["T"] = r.T;
    j["epsilon"] = r.epsilon;
    j["x_norm_H"] = r.x_norm;
    j["constants"] = {{"c0", r.c0}, {"rho", r.rho}, {"delta", r.delta}, {"alpha", r.alpha}, {"c_star", r.c_star}};
    j["probability"] = {{"empirical", r.p_hat},
                        {"se", r.p_se},
                        {"wilson95", {r.wilson.lo, r.wilson.hi}},
                        {"floor", r.floor},
                        {"pass", r.prob_pass}};
    j["mean"] = {{"censored_at_T", r.mean_lower},
                 {"se", r.mean_se},
                 {"upper_bracket", r.mean_upper},
                 {"bound", r.mean_bound},
                 {"pass", r.mean_pass}};
    j["sup_norm_ratio"] = r.sup_ratio;
    if (r.sensitivity_run)
        j["epsilon_sensitivity"] = {{"epsilon", r.eps_small},
                                    {"empirical_probability", r.p_hat_small},
                                    {"censored_mean", r.mean_lower_small}};
    j["supermartingale"] = table_json(r.supermartingale);
    j["energy_inequality"] = table_json(r.energy);
    j["assumptions"] = assumptions_json(r.assumptions);
    j["pass"] = r.pass();
    return j;
}

int cmd_extinction(RunConfig cfg, const CommandContext& ctx) {
    apply_overrides(cfg, ctx);
    ExtinctionReport r = run_extinction(cfg, ctx.threads);

    fs::path dir = prepare(ctx);
    std::ostringstream csv;
    csv << "trajectory,tau,censored\n";
    for (size_t i = 0; i < r.tau.size(); ++i) csv << i << ',' << format_double(r.tau[i]) << ',' << r.censored[i] << '\n';
    write_file(dir / "tau_samples.csv", csv.str());

    ojson j;
    j["command"] = "extinction";
    j["config"] = to_json(cfg);
    j.update(to_json(r));
    write_file(dir / "extinction_report.json", j.dump(2) + "\n");

    std::ostream& os = out(ctx);
    os << "P(tau <= T) = " << format_double(r.p_hat) << " (floor " << format_double(r.floor) << ") "
       << (r.prob_pass ? "PASS" : "FAIL") << '\n';
    os << "E tau (censored) = " << format_double(r.mean_lower) << " (bound " << format_double(r.mean_bound) << ") "
       << (r.mean_pass ? "PASS" : "FAIL") << '\n';
    os << "supermartingale " << (r.supermartingale.pass ? "PASS" : "FAIL") << ", energy inequality "
       << (r.energy.pass ? "PASS" : "FAIL") << '\n';
    return r.pass() ? kExitPass : kExitFailure;
}

int cmd_sweep(RunConfig cfg, const std::optional<std::vector<double>>& mus, const CommandContext& ctx) {
    apply_overrides(cfg, ctx);
    if (mus) cfg.sweep_mus = *mus;
    SimConfig s = build_sim_config(cfg);
    std::vector<double> cps = cfg.sweep_checkpoints.empty() ? std::vector<double>{cfg.T} : cfg.sweep_checkpoints;
    SweepTable tab = lambda_sweep(s, cfg.sweep_mus, cfg.sweep_N, cps, ctx.threads);
    fs::path dir = prepare(ctx);
    std::ostringstream csv;
    csv << "t,mu_a,mu_b,mean_sq_diff,se\n";
    for (const auto& r : tab.rows)
        csv << format_double(r.t) << ',' << format_double(r.mu_a) << ',' << format_double(r.mu_b) << ','
            << format_double(r.mean_sq_diff) << ',' << format_double(r.se) << '\n';
    write_file(dir / "sweep.csv", csv.str());
    ojson j;
    j["command"] = "sweep";
    j["config"] = to_json(cfg);
    j["files"] = {"sweep.csv"};
    write_file(dir / "sweep.json", j.dump(2) + "\n");
    out(ctx) << csv.str();
    return kExitPass;
}

int cmd_verify(VerifyLevel level, const CommandContext& ctx) {
    SuiteResult r = run_verify(level, ctx.seed ? *ctx.seed : 2024, ctx.threads);
    fs::path dir = prepare(ctx);
    write_file(dir / "verify_summary.json", to_json(r).dump(2) + "\n");
    std::ostream& os = out(ctx);
    for (const auto& p : r.properties)
        os << (p.pass ? "PASS " : "FAIL ") << std::left << std::setw(34) << p.name << " margin "
           << format_double(p.margin) << "  " << p.detail << '\n';
    return r.all_pass() ? kExitPass : kExitFailure;
}

}  // namespace yosida
