#pragma once

#include "yosida/noise.hpp"
#include "yosida/operators.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace yosida {

enum class Scheme { Explicit, SemiImplicitLinear, Implicit };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SimConfig {
    double T = 1.0;
    double dt = 1e-3;
    double mu = 1e-2;
    MultiValuedOperator op;
    SingleValuedDrift drift;
    NoiseModel noise;
    Field x;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::Explicit;
    double epsilon = 0.0;  // <= 0 selects 1e-6 |x|_H
    int record_stride = 1;
    bool snapshots = false;
    std::vector<double> checkpoints;  // extra times at which the state is kept

    double effective_epsilon() const;
    int steps() const;
};

void validate(const SimConfig& c);

struct Trajectory {
    std::vector<double> times;
    std::vector<double> norm_H;
    std::vector<double> norm_V;
    std::vector<double> norm_H_pow;  // |X|_H^{2 - alpha}
    std::vector<int> extinct_flag;
    std::vector<Vec> snapshots;
    std::vector<Vec> checkpoint_states;
    bool extinct = false;
    double tau = -1.0;  // first time |X|_H <= epsilon, -1 when censored
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    int rejections = 0;
    Vec final_state;
};

/// Precomputed per-config state (factorizations, warm starts are per call).
class Stepper {
public:
    explicit Stepper(const SimConfig& c);
    ~Stepper();

    /// One step of size dt with given Brownian increments, no guard and no
    /// absorption. `w` carries the dual warm start of the implicit scheme.
    Vec advance(const Vec& X, double t, double dt, const std::vector<double>& dW, Vec* w = nullptr) const;
    /// H-space drift S(X) such that dX = -S(X) dt + noise.
    Vec drift(const Vec& X, double t) const;
    const SimConfig& config() const { return c_; }

private:
    struct Impl;
    const SimConfig& c_;
    std::unique_ptr<Impl> impl_;
};

/// One guarded step: rejected steps are split along a Brownian bridge (up to
/// 8 halvings). Returns the new state; absorbs at epsilon.
Vec step(const Vec& X, double t, const SimConfig& config, Rng& rng);

Trajectory simulate(const SimConfig& config, std::uint64_t trajectory_index);
std::vector<Trajectory> simulate_many(const SimConfig& config, int N, int threads);

struct SweepRow {
    double t = 0.0;
    double mu_a = 0.0;
    double mu_b = 0.0;
    double mean_sq_diff = 0.0;  // E |X_a(t) - X_b(t)|_H^2
    double se = 0.0;
};

struct SweepTable {
    std::vector<double> mus;
    std::vector<double> checkpoints;
    int N = 0;
    std::vector<SweepRow> rows;
    /// successive differences at checkpoint index j
    std::vector<double> column(size_t j) const;
};

SweepTable lambda_sweep(const SimConfig& config, const std::vector<double>& mus, int N,
                        const std::vector<double>& checkpoints, int threads = 1);

}  // namespace yosida
