#pragma once

#include "yosida/spaces.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace yosida {

using Rng = std::mt19937_64;

/// Generator for trajectory `index` under `base_seed`; independent of any
/// scheduling. `stream` separates auxiliary draws (e.g. step refinement).
Rng make_rng(std::uint64_t base_seed, std::uint64_t index, std::uint64_t stream = 0);

/// Linear multiplicative noise sigma(t,x)dW = x * sum_k h_k(t) dbeta_k with
/// h_k(t) = c_k exp(-gamma_k t).
struct NoiseModel {
    struct Mode {
        double c = 0.0;
        double gamma = 0.0;
        bool operator==(const Mode&) const = default;
    };
    std::vector<Mode> modes;

    static NoiseModel none() { return {}; }
    static NoiseModel constant(int K, double c);

    int K() const { return static_cast<int>(modes.size()); }
    double h_k(int k, double t) const;
    /// h(t) = sum_k h_k(t)^2
    double h(double t) const;
    /// int_0^T h(t) dt
    double h_integral(double T) const;
    double factor(double t, const std::vector<double>& dW) const;
};

void validate(const NoiseModel& n);

std::vector<double> brownian_increments(Rng& rng, const NoiseModel& noise, double dt);
Field noise_increment(const Field& X, double t, double dt, const NoiseModel& noise, Rng& rng);

}  // namespace yosida
