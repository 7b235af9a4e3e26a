#include "oracles.hpp"

#include <doctest.h>
#include <yosida/error.hpp>
#include <yosida/sde.hpp>

#include <cmath>
#include <numeric>

using namespace yosida;

namespace {

SimConfig make_config(const ScalarGraph& g, double p, int n, double T, double dt, double mu, Scheme scheme,
                      NoiseModel noise = {}, double amplitude = 0.2) {
    Grid grid(1, n);
    SimConfig c;
    c.T = T;
    c.dt = dt;
    c.mu = mu;
    c.op = MultiValuedOperator(OperatorKind::PorousMedia, g, GelfandTriple::porous_media(p), grid);
    c.noise = std::move(noise);
    c.x = amplitude * sine_mode(grid);
    c.scheme = scheme;
    c.seed = 99;
    return c;
}

double hnorm(const Vec& v) { return std::sqrt(oracle::hminus1_sq(v)); }

}  // namespace

TEST_CASE("brownian increments") {
    Rng rng = make_rng(1, 0);
    CHECK(brownian_increments(rng, NoiseModel::none(), 0.01).empty());
    CHECK_THROWS_AS(brownian_increments(rng, NoiseModel::constant(1, 1.0), 0.0), InvalidArgument);
    const double dt = 0.01;
    const int M = 100000;
    auto noise = NoiseModel::constant(1, 1.0);
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < M; ++k) {
        double x = brownian_increments(rng, noise, dt)[0];
        s += x;
        s2 += x * x;
    }
    double mean = s / M, var = s2 / M - mean * mean;
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(dt / M));
    CHECK(std::abs(var - dt) <= 0.05 * dt);
}

TEST_CASE("generator streams are reproducible and distinct") {
    Rng a = make_rng(7, 3), b = make_rng(7, 3), c = make_rng(7, 4), d = make_rng(7, 3, 1);
    auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("noise increment") {
    Grid g(1, 8);
    Rng rng = make_rng(2, 0);
    auto noise = NoiseModel::constant(2, 0.3);
    for (int k = 0; k < 10; ++k) CHECK(noise_increment(Field(g), 0.0, 0.01, noise, rng).values.norm() == 0.0);

    Field X = sine_mode(g);
    auto one = NoiseModel::constant(1, 0.7);
    Rng replay = rng;
    double dW = brownian_increments(replay, one, 0.01)[0];
    Field inc = noise_increment(X, 0.0, 0.01, one, rng);
    CHECK((inc.values - 0.7 * dW * X.values).norm() == 0.0);

    // conditional variance h(t) dt X_i^2
    NoiseModel decaying;
    decaying.modes = {{0.5, 1.0}, {0.2, 0.0}};
    const double t = 0.3, dt = 0.02;
    const int M = 10000;
    double s2 = 0.0;
    for (int k = 0; k < M; ++k) {
        double v = noise_increment(X, t, dt, decaying, rng).values[3];
        s2 += v * v;
    }
    double expect = decaying.h(t) * dt * X.values[3] * X.values[3];
    CHECK(s2 / M == doctest::Approx(expect).epsilon(0.1));
    CHECK(decaying.h(t) == doctest::Approx(0.25 * std::exp(-0.6) + 0.04));
    CHECK(decaying.h_integral(2.0) == doctest::Approx(0.25 * (1 - std::exp(-4.0)) / 2 + 0.08));
}

TEST_CASE("config validation") {
    auto c = make_config(graphs::power(1.5), 1.5, 16, 1.0, 1e-3, 0.1, Scheme::Implicit);
    CHECK_NOTHROW(validate(c));
    auto bad = c;
    bad.dt = 2.0;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = c;
    bad.mu = 1.0;  // delta = 1
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = c;
    bad.epsilon = 10.0;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = c;
    bad.checkpoints = {2.0};
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    CHECK(scheme_from_string(to_string(Scheme::SemiImplicitLinear)) == Scheme::SemiImplicitLinear);
    CHECK_THROWS_AS(scheme_from_string("rk4"), InvalidArgument);
}

TEST_CASE("step: trivial cases") {
    // zero drift, zero noise
    auto c = make_config(graphs::linear(0.0), 2.0, 8, 1.0, 1e-2, 0.1, Scheme::Explicit);
    Rng rng = make_rng(1, 0);
    Vec X = c.x.values;
    CHECK((step(X, 0.0, c, rng) - X).norm() == 0.0);
    // absorbing
    auto f = make_config(graphs::power(1.5), 1.5, 8, 1.0, 1e-3, 0.1, Scheme::Implicit, NoiseModel::constant(2, 0.5));
    Vec tiny = 0.5 * f.effective_epsilon() / hnorm(f.x.values) * f.x.values;
    CHECK(step(tiny, 0.0, f, rng).norm() == 0.0);
}

TEST_CASE("noise keeps a driftless state on the ray of x") {
    auto c = make_config(graphs::linear(0.0), 2.0, 8, 0.5, 1e-2, 0.1, Scheme::Explicit, NoiseModel::constant(3, 0.4));
    c.snapshots = true;
    Trajectory t = simulate(c, 5);
    for (const Vec& s : t.snapshots) {
        double a = s.dot(c.x.values) / c.x.values.squaredNorm();
        CHECK((s - a * c.x.values).lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("heat equation consistency") {
    // linear graph, alpha = 2: dX = -K X/(1+mu) dt
    for (Scheme scheme : {Scheme::Explicit, Scheme::SemiImplicitLinear, Scheme::Implicit}) {
        CAPTURE(to_string(scheme));
        double err[2];
        int k = 0;
        for (double dt : {1e-3, 5e-4}) {
            auto c = make_config(graphs::linear(), 2.0, 8, 0.1, dt, 0.01, scheme, {}, 1.0);
            c.x.values += 0.3 * oracle::mode(8, 3);
            Trajectory t = simulate(c, 0);
            Vec exact = oracle::heat(c.x.values, c.T, 1.0 / (1.0 + c.mu));
            err[k++] = hnorm(t.final_state - exact);
        }
        double ratio = err[0] / err[1];
        CHECK(ratio >= 1.7);
        CHECK(ratio <= 2.3);
    }
}

TEST_CASE("simulate is deterministic") {
    auto c = make_config(graphs::power(1.5), 1.5, 16, 0.05, 1e-3, 1e-2, Scheme::Implicit, NoiseModel::constant(2, 0.3));
    Trajectory a = simulate(c, 3), b = simulate(c, 3), d = simulate(c, 4);
    CHECK(a.norm_H == b.norm_H);
    CHECK(a.final_state == b.final_state);
    CHECK(a.norm_H != d.norm_H);
    auto one = simulate_many(c, 6, 1), many = simulate_many(c, 6, 8);
    for (int i = 0; i < 6; ++i) {
        CHECK(one[i].index == static_cast<std::uint64_t>(i));
        CHECK(one[i].norm_H == many[i].norm_H);
        CHECK(one[i].final_state == many[i].final_state);
    }
}

TEST_CASE("recording layout") {
    auto c = make_config(graphs::power(1.5), 1.5, 16, 0.05, 1e-3, 1e-2, Scheme::Implicit);
    c.record_stride = 10;
    c.checkpoints = {0.0, 0.025};
    Trajectory t = simulate(c, 0);
    CHECK(t.times.size() == 6);
    CHECK(t.times.back() == doctest::Approx(0.05));
    CHECK(t.checkpoint_states.size() == 2);
    CHECK(t.checkpoint_states[0] == c.x.values);
    CHECK(t.norm_H.front() == doctest::Approx(hnorm(c.x.values)).epsilon(1e-12));
    CHECK(t.norm_H_pow.front() == doctest::Approx(std::pow(t.norm_H.front(), 0.5)).epsilon(1e-12));
}

TEST_CASE("fast diffusion without noise decays to extinction") {
    auto c = make_config(graphs::power(1.5), 1.5, 32, 0.2, 1e-3, 1e-3, Scheme::Implicit);
    Trajectory t = simulate(c, 0);
    REQUIRE(t.extinct);
    CHECK(t.tau > 0.0);
    size_t k = 1;
    for (; k < t.times.size() && t.extinct_flag[k] == 0; ++k) CHECK(t.norm_H[k] < t.norm_H[k - 1]);
    for (; k < t.times.size(); ++k) CHECK(t.norm_H[k] == 0.0);
}

TEST_CASE("small noise keeps moments bounded") {
    auto c = make_config(graphs::power(1.5), 1.5, 16, 0.1, 1e-3, 1e-3, Scheme::Implicit, NoiseModel::constant(2, 0.02));
    auto runs = simulate_many(c, 100, 2);
    double x2 = std::pow(hnorm(c.x.values), 2);
    double worst = 0.0;
    for (const auto& t : runs)
        for (double v : t.norm_H) worst = std::max(worst, v * v);
    CHECK(std::isfinite(worst));
    CHECK(worst <= 10.0 * x2);
}

TEST_CASE("sweep") {
    SUBCASE("identical mu gives exactly zero") {
        auto c = make_config(graphs::power(1.5), 1.5, 16, 0.02, 1e-3, 1e-2, Scheme::Implicit,
                             NoiseModel::constant(2, 0.3));
        auto tab = lambda_sweep(c, {1e-2, 1e-2}, 10, {0.01, 0.02});
        REQUIRE(tab.rows.size() == 2);
        for (const auto& r : tab.rows) CHECK(r.mean_sq_diff == 0.0);
    }
    SUBCASE("mu list must not increase") {
        auto c = make_config(graphs::power(1.5), 1.5, 16, 0.02, 1e-3, 1e-2, Scheme::Implicit);
        CHECK_THROWS_AS(lambda_sweep(c, {1e-3, 1e-2}, 10, {0.02}), InvalidArgument);
    }
    SUBCASE("sign-graph porous medium: Cauchy differences shrink") {
        auto c = make_config(graphs::sign(), 2.0, 8, 0.02, 1e-3, 1e-1, Scheme::Implicit, NoiseModel::constant(2, 0.2),
                             1.0);
        auto tab = lambda_sweep(c, {1e-1, 1e-2, 1e-3, 1e-4}, 20, {0.01, 0.02});
        for (size_t j = 0; j < 2; ++j) {
            auto col = tab.column(j);
            REQUIRE(col.size() == 3);
            CHECK(col[0] > col[1]);
            CHECK(col[1] > col[2]);
        }
    }
    SUBCASE("linear graph matches the discrete closed form") {
        // semi-implicit: X_n = (I + dt K/(1+mu))^{-n} x
        auto c = make_config(graphs::linear(), 2.0, 8, 0.05, 1e-3, 1e-1, Scheme::SemiImplicitLinear, {}, 1.0);
        c.x.values += 0.5 * oracle::mode(8, 2);
        std::vector<double> mus = {1e-1, 1e-2, 1e-3};
        auto tab = lambda_sweep(c, mus, 3, {0.05});
        Eigen::MatrixXd K = oracle::dense_stiffness(8);
        auto state = [&](double mu) {
            Eigen::MatrixXd M = Eigen::MatrixXd::Identity(8, 8) + c.dt / (1.0 + mu) * K;
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
            Vec X = c.x.values;
            for (int n = 0; n < c.steps(); ++n) X = lu.solve(X);
            return X;
        };
        for (size_t i = 0; i + 1 < mus.size(); ++i) {
            double ref = oracle::hminus1_sq(state(mus[i]) - state(mus[i + 1]));
            CHECK(tab.rows[i].mean_sq_diff == doctest::Approx(ref).epsilon(1e-8));
            CHECK(tab.rows[i].se == doctest::Approx(0.0).scale(1e-12 * ref));
        }
    }
}
