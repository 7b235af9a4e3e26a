#pragma once

#include "yosida/sde.hpp"

#include <optional>
#include <vector>

namespace yosida {

/// 1 / (delta (c0/2)^alpha (1 - alpha/2)); alpha must lie in (1,2).
double c_star(double delta, double alpha, double c0);
/// 1 - c* |x|^{2-alpha} / T
double extinction_floor(double cstar, double x_norm, double alpha, double T);
/// Horizon at which the floor equals `floor`.
double horizon_for_floor(double cstar, double x_norm, double alpha, double floor);

struct ExtinctionTime {
    bool censored = true;
    double tau = 0.0;  // extinction time, or T when censored
};

/// First recorded time with |X|_H <= epsilon; censored at the last record.
ExtinctionTime extinction_time(const Trajectory& traj);

struct Interval95 {
    double lo = 0.0;
    double hi = 0.0;
};
Interval95 wilson_interval(int successes, int n, double z = 1.959963984540054);

struct CheckpointRow {
    double t = 0.0;
    double mean = 0.0;
    double se = 0.0;
    double bound = 0.0;  // right-hand side the mean is compared with
    double margin = 0.0; // bound + buffer - mean
    bool pass = true;
};

struct CheckTable {
    std::vector<CheckpointRow> rows;
    bool pass = true;
};

struct ExtinctionOptions {
    int threads = 1;
    std::optional<double> c0;          // computed from the grid when absent
    std::vector<double> checkpoints;   // supermartingale checkpoints; 10 equispaced when empty
    std::vector<double> energy_times;  // T/4, T/2, T when empty
    bool epsilon_sensitivity = true;   // rerun at epsilon/10
};

struct ExtinctionReport {
    int N = 0;
    double T = 0.0;
    double epsilon = 0.0;
    double x_norm = 0.0;
    double c0 = 0.0;
    double rho = 0.0;
    double delta = 0.0;
    double alpha = 0.0;
    double c_star = 0.0;
    double floor = 0.0;       // theoretical probability floor
    double mean_bound = 0.0;  // c* |x|^{2-alpha}

    std::vector<double> tau;
    std::vector<int> censored;

    double p_hat = 0.0;
    double p_se = 0.0;
    Interval95 wilson;
    double mean_lower = 0.0;  // censored samples counted as T
    double mean_se = 0.0;
    double mean_upper = 0.0;  // censored samples counted as T + c*|X(T)|^{2-alpha}
    bool prob_pass = false;
    bool mean_pass = false;

    double sup_ratio = 0.0;  // max_i sup_t |X_i|_H^2 / |x|_H^2

    bool sensitivity_run = false;
    double eps_small = 0.0;
    double p_hat_small = 0.0;
    double mean_lower_small = 0.0;

    CheckTable supermartingale;
    CheckTable energy;
    AssumptionReport assumptions;

    bool pass() const { return prob_pass && mean_pass && supermartingale.pass && energy.pass; }
};

/// Preconditions: alpha in (1,2), zero drift B, every standing assumption
/// passes (including (alpha-1) h(t) >= f(t)) and N >= 100.
ExtinctionReport mc_extinction(const SimConfig& config, int N, const ExtinctionOptions& opts = {});

/// Mean of |X(t)|^{2-alpha} at checkpoints; successive means must not
/// increase by more than 2 SE of the paired difference.
CheckTable supermartingale_check(const SimConfig& config, int N, const std::vector<double>& checkpoints,
                                 int threads = 1);
CheckTable supermartingale_table(const std::vector<Trajectory>& runs, const SimConfig& config,
                                 const std::vector<double>& checkpoints);

/// E|X(t)|^{2-alpha} + delta rho^alpha (1 - alpha/2) E int_0^t 1_alive <= |x|^{2-alpha} + 2 SE.
CheckTable energy_inequality_check(const SimConfig& config, int N, const std::vector<double>& times, double c0,
                                   int threads = 1);
CheckTable energy_table(const std::vector<Trajectory>& runs, const SimConfig& config,
                        const std::vector<double>& times, double c0);

}  // namespace yosida
