#include "yosida/extinction.hpp"

#include "yosida/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace yosida {

double c_star(double delta, double alpha, double c0) {
    require(alpha > 1.0 && alpha < 2.0, "c* needs alpha in (1,2); the extinction bound is vacuous otherwise");
    require(delta > 0.0, "c* needs delta > 0");
    require(c0 > 0.0, "c* needs c0 > 0");
    return 1.0 / (delta * std::pow(c0 / 2.0, alpha) * (1.0 - alpha / 2.0));
}

double extinction_floor(double cstar, double x_norm, double alpha, double T) {
    return 1.0 - cstar * std::pow(x_norm, 2.0 - alpha) / T;
}

double horizon_for_floor(double cstar, double x_norm, double alpha, double floor) {
    require(floor < 1.0, "floor must be below 1");
    return cstar * std::pow(x_norm, 2.0 - alpha) / (1.0 - floor);
}

ExtinctionTime extinction_time(const Trajectory& traj) {
    ExtinctionTime e;
    if (traj.extinct && traj.tau >= 0.0) {
        e.censored = false;
        e.tau = traj.tau;
        return e;
    }
    for (size_t k = 0; k < traj.norm_H.size(); ++k) {
        if (traj.norm_H[k] <= traj.epsilon) {
            e.censored = false;
            e.tau = traj.times[k];
            return e;
        }
    }
    e.tau = traj.times.empty() ? 0.0 : traj.times.back();
    return e;
}

Interval95 wilson_interval(int k, int n, double z) {
    if (n <= 0) return {0.0, 1.0};
    double p = static_cast<double>(k) / n, z2 = z * z;
    double den = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / den;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / den;
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

namespace {

struct Stats {
    double mean = 0.0;
    double se = 0.0;
};

Stats stats(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    // shifted by the first sample: identical samples give their value and SE 0 exactly
    const double x0 = v.front();
    double sum = 0.0;
    for (double x : v) sum += x - x0;
    const double dm = sum / static_cast<double>(v.size());
    s.mean = x0 + dm;
    if (v.size() > 1) {
        double q = 0.0;
        for (double x : v) q += (x - x0 - dm) * (x - x0 - dm);
        s.se = std::sqrt(q / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return s;
}

size_t checkpoint_index(const SimConfig& c, double t) {
    for (size_t j = 0; j < c.checkpoints.size(); ++j)
        if (std::abs(c.checkpoints[j] - t) <= 1e-12 * std::max(1.0, c.T)) return j;
    throw InvalidArgument("time is not among the simulated checkpoints");
}

double pow_norm(const SimConfig& c, const Vec& state) {
    double n = c.op.triple().norm_H(c.op.grid(), state);
    return n == 0.0 ? 0.0 : std::pow(n, 2.0 - c.op.alpha());
}

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

std::vector<double> equispaced(double T, int m) {
    std::vector<double> t;
    for (int j = 0; j <= m; ++j) t.push_back(T * j / m);
    return t;
}

}  // namespace

CheckTable supermartingale_table(const std::vector<Trajectory>& runs, const SimConfig& config,
                                 const std::vector<double>& checkpoints) {
    CheckTable tab;
    std::vector<std::vector<double>> m(checkpoints.size());
    for (size_t j = 0; j < checkpoints.size(); ++j) {
        size_t idx = checkpoint_index(config, checkpoints[j]);
        for (const auto& r : runs) m[j].push_back(pow_norm(config, r.checkpoint_states[idx]));
    }
    for (size_t j = 0; j < checkpoints.size(); ++j) {
        CheckpointRow row;
        row.t = checkpoints[j];
        Stats s = stats(m[j]);
        row.mean = s.mean;
        row.se = s.se;
        if (j == 0) {
            row.bound = s.mean;
            row.margin = 0.0;
        } else {
            std::vector<double> d(runs.size());
            for (size_t i = 0; i < runs.size(); ++i) d[i] = m[j][i] - m[j - 1][i];
            Stats sd = stats(d);
            row.bound = tab.rows.back().mean;
            row.margin = row.bound + 2.0 * sd.se - row.mean;
            // exact ties (e.g. everything extinct) pass with zero margin
            row.pass = row.margin >= 0.0;
        }
        tab.pass = tab.pass && row.pass;
        tab.rows.push_back(row);
    }
    return tab;
}

CheckTable energy_table(const std::vector<Trajectory>& runs, const SimConfig& config,
                        const std::vector<double>& times, double c0) {
    CheckTable tab;
    const double alpha = config.op.alpha();
    const double delta = config.op.assumptions().delta;
    const double kappa = delta * std::pow(c0 / 2.0, alpha) * (1.0 - alpha / 2.0);
    const double rhs = pow_norm(config, config.x.values);
    for (double t : times) {
        size_t idx = checkpoint_index(config, t);
        std::vector<double> lhs;
        for (const auto& r : runs) {
            double alive = r.extinct ? std::min(r.tau, t) : t;
            lhs.push_back(pow_norm(config, r.checkpoint_states[idx]) + kappa * alive);
        }
        Stats s = stats(lhs);
        CheckpointRow row;
        row.t = t;
        row.mean = s.mean;
        row.se = s.se;
        row.bound = rhs;
        row.margin = rhs + 2.0 * s.se - s.mean;
        row.pass = row.margin >= -1e-12 * std::max(1.0, rhs);
        tab.pass = tab.pass && row.pass;
        tab.rows.push_back(row);
    }
    return tab;
}

CheckTable supermartingale_check(const SimConfig& config, int N, const std::vector<double>& checkpoints,
                                 int threads) {
    require(config.op.alpha() > 1.0 && config.op.alpha() < 2.0, "supermartingale check needs alpha in (1,2)");
    SimConfig c = config;
    c.checkpoints = checkpoints;
    auto runs = simulate_many(c, N, threads);
    return supermartingale_table(runs, c, checkpoints);
}

CheckTable energy_inequality_check(const SimConfig& config, int N, const std::vector<double>& times, double c0,
                                   int threads) {
    require(config.op.alpha() > 1.0 && config.op.alpha() < 2.0, "energy inequality check needs alpha in (1,2)");
    SimConfig c = config;
    c.checkpoints = times;
    auto runs = simulate_many(c, N, threads);
    return energy_table(runs, c, times, c0);
}

ExtinctionReport mc_extinction(const SimConfig& config, int N, const ExtinctionOptions& opts) {
    const double alpha = config.op.alpha();
    if (!(alpha > 1.0 && alpha < 2.0)) {
        std::ostringstream os;
        os << "extinction analysis needs alpha in (1,2), got alpha = " << alpha << " (the bound is vacuous)";
        throw InvalidArgument(os.str());
    }
    require(N >= 100, "extinction analysis needs at least N = 100 trajectories");
    require(config.drift.kind == SingleValuedDrift::Kind::Zero,
            "extinction analysis runs with zero drift B (f = 0)");
    validate(config);

    ExtinctionReport rep;
    rep.assumptions = validate_assumptions(config.op, config.drift, config.noise, config.T);
    if (!rep.assumptions.all_pass()) {
        std::string failed;
        for (const auto& c : rep.assumptions.checks)
            if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name + (c.detail.empty() ? "" : " (" + c.detail + ")");
        throw InvalidArgument("standing assumptions fail: " + failed);
    }

    const GelfandTriple& tr = config.op.triple();
    rep.N = N;
    rep.T = config.T;
    rep.alpha = alpha;
    rep.delta = config.op.assumptions().delta;
    rep.x_norm = tr.norm_H(config.x);
    rep.epsilon = config.effective_epsilon();
    rep.c0 = opts.c0 ? *opts.c0 : embedding_constant(tr, config.op.grid()).c0;
    rep.rho = rep.c0 / 2.0;
    rep.c_star = c_star(rep.delta, alpha, rep.c0);
    rep.floor = extinction_floor(rep.c_star, rep.x_norm, alpha, rep.T);
    rep.mean_bound = rep.c_star * std::pow(rep.x_norm, 2.0 - alpha);

    std::vector<double> cps = opts.checkpoints.empty() ? equispaced(config.T, 10) : opts.checkpoints;
    std::vector<double> ets = opts.energy_times.empty()
                                  ? std::vector<double>{config.T / 4.0, config.T / 2.0, config.T}
                                  : opts.energy_times;
    SimConfig c = config;
    c.epsilon = rep.epsilon;
    c.checkpoints = merged(merged(cps, ets), {config.T});
    auto runs = simulate_many(c, N, opts.threads);

    size_t iT = checkpoint_index(c, config.T);
    int hits = 0;
    std::vector<double> lower, upper;
    double sup = 0.0;
    for (const auto& r : runs) {
        ExtinctionTime e = extinction_time(r);
        rep.tau.push_back(e.tau);
        rep.censored.push_back(e.censored ? 1 : 0);
        if (!e.censored) ++hits;
        lower.push_back(e.censored ? config.T : e.tau);
        upper.push_back(e.censored ? config.T + rep.c_star * pow_norm(c, r.checkpoint_states[iT]) : e.tau);
        for (double n : r.norm_H) sup = std::max(sup, n * n);
    }
    rep.sup_ratio = rep.x_norm > 0.0 ? sup / (rep.x_norm * rep.x_norm) : 0.0;
    rep.p_hat = static_cast<double>(hits) / N;
    rep.p_se = std::sqrt(rep.p_hat * (1.0 - rep.p_hat) / N);
    rep.wilson = wilson_interval(hits, N);
    Stats sl = stats(lower);
    rep.mean_lower = sl.mean;
    rep.mean_se = sl.se;
    rep.mean_upper = stats(upper).mean;
    rep.prob_pass = rep.p_hat >= rep.floor - 3.0 * rep.p_se;
    double rel = sl.mean > 0.0 ? sl.se / sl.mean : 0.0;
    rep.mean_pass = rep.mean_lower <= rep.mean_bound * (1.0 + 3.0 * rel);

    rep.supermartingale = supermartingale_table(runs, c, cps);
    rep.energy = energy_table(runs, c, ets, rep.c0);

    if (opts.epsilon_sensitivity && rep.x_norm > 0.0) {
        SimConfig cs = c;
        cs.epsilon = rep.epsilon / 10.0;
        cs.checkpoints = {config.T};
        auto small = simulate_many(cs, N, opts.threads);
        int k = 0;
        std::vector<double> ls;
        for (const auto& r : small) {
            ExtinctionTime e = extinction_time(r);
            if (!e.censored) ++k;
            ls.push_back(e.censored ? config.T : e.tau);
        }
        rep.sensitivity_run = true;
        rep.eps_small = cs.epsilon;
        rep.p_hat_small = static_cast<double>(k) / N;
        rep.mean_lower_small = stats(ls).mean;
    }
    return rep;
}

}  // namespace yosida
