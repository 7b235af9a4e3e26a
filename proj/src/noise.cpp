#include "yosida/noise.hpp"

#include "yosida/error.hpp"

#include <cmath>

namespace yosida {

Rng make_rng(std::uint64_t base_seed, std::uint64_t index, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(stream), 0x59u};
    return Rng(seq);
}

NoiseModel NoiseModel::constant(int K, double c) {
    NoiseModel n;
    n.modes.assign(static_cast<size_t>(K), Mode{c, 0.0});
    return n;
}

double NoiseModel::h_k(int k, double t) const {
    const Mode& m = modes[static_cast<size_t>(k)];
    return m.gamma == 0.0 ? m.c : m.c * std::exp(-m.gamma * t);
}

double NoiseModel::h(double t) const {
    double s = 0.0;
    for (int k = 0; k < K(); ++k) s += h_k(k, t) * h_k(k, t);
    return s;
}

double NoiseModel::h_integral(double T) const {
    double s = 0.0;
    for (const Mode& m : modes) {
        if (m.gamma == 0.0) s += m.c * m.c * T;
        else s += m.c * m.c * (1.0 - std::exp(-2.0 * m.gamma * T)) / (2.0 * m.gamma);
    }
    return s;
}

double NoiseModel::factor(double t, const std::vector<double>& dW) const {
    double s = 0.0;
    for (int k = 0; k < K(); ++k) s += h_k(k, t) * dW[static_cast<size_t>(k)];
    return s;
}

void validate(const NoiseModel& n) {
    for (const auto& m : n.modes) {
        require(std::isfinite(m.c), "noise coefficient must be finite");
        require(m.gamma >= 0.0 && std::isfinite(m.gamma), "noise decay rate must be nonnegative");
    }
}

std::vector<double> brownian_increments(Rng& rng, const NoiseModel& noise, double dt) {
    require(dt > 0.0, "time step must be positive");
    std::normal_distribution<double> nd(0.0, std::sqrt(dt));
    std::vector<double> dW(static_cast<size_t>(noise.K()));
    for (double& x : dW) x = nd(rng);
    return dW;
}

Field noise_increment(const Field& X, double t, double dt, const NoiseModel& noise, Rng& rng) {
    auto dW = brownian_increments(rng, noise, dt);
    return noise.factor(t, dW) * X;
}

}  // namespace yosida
