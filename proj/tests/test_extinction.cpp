#include "oracles.hpp"

#include <doctest.h>
#include <yosida/error.hpp>
#include <yosida/extinction.hpp>

#include <cmath>

using namespace yosida;

namespace {

SimConfig fast_diffusion(int n, double T, NoiseModel noise = {}, double amplitude = 0.2, double p = 1.5) {
    Grid grid(1, n);
    SimConfig c;
    c.T = T;
    c.dt = 1e-3;
    c.mu = 1e-3;
    c.op = MultiValuedOperator(OperatorKind::PorousMedia, graphs::power(p), GelfandTriple::porous_media(p), grid);
    c.noise = std::move(noise);
    c.x = amplitude * sine_mode(grid);
    c.scheme = Scheme::Implicit;
    c.seed = 5;
    return c;
}

}  // namespace

TEST_CASE("c_star") {
    CHECK(c_star(1.0, 1.5, 2.0) == doctest::Approx(4.0));
    CHECK(c_star(1.0, 1.5, 4.0) == doctest::Approx(4.0 * std::pow(2.0, -1.5)));
    CHECK(c_star(2.0, 1.5, 2.0) == doctest::Approx(2.0));
    CHECK(c_star(1.0, 1.999999, 2.0) > 1e5);
    CHECK(c_star(1.0, 1.0 + 1e-9, 2.0) == doctest::Approx(2.0).epsilon(1e-6));  // prefactor -> delta (c0/2)/2
    CHECK_THROWS_AS(c_star(1.0, 2.5, 2.0), InvalidArgument);
    CHECK_THROWS_AS(c_star(1.0, 2.0, 2.0), InvalidArgument);
    CHECK_THROWS_AS(c_star(0.0, 1.5, 2.0), InvalidArgument);
}

TEST_CASE("floor arithmetic") {
    double cs = 4.0, x = 0.09;
    double T = horizon_for_floor(cs, x, 1.5, 0.5);
    CHECK(extinction_floor(cs, x, 1.5, T) == doctest::Approx(0.5));
    CHECK(T == doctest::Approx(2 * cs * std::sqrt(x)));
    CHECK(extinction_floor(cs, x, 1.5, 2 * T) > extinction_floor(cs, x, 1.5, T));
    CHECK_THROWS_AS(horizon_for_floor(cs, x, 1.5, 1.0), InvalidArgument);
}

TEST_CASE("Wilson interval") {
    for (auto [k, n] : {std::pair{0, 100}, {37, 100}, {400, 400}, {1, 3}}) {
        auto w = wilson_interval(k, n);
        auto ref = oracle::wilson(k, n);
        CHECK(std::abs(w.lo - ref.lo) <= 1e-12);
        CHECK(std::abs(w.hi - ref.hi) <= 1e-12);
        CHECK(w.lo <= static_cast<double>(k) / n);
        CHECK(w.hi >= static_cast<double>(k) / n);
    }
}

TEST_CASE("extinction time") {
    Trajectory t;
    t.times = {0.0, 0.1, 0.2};
    t.norm_H = {0.0, 0.0, 0.0};
    t.epsilon = 1e-8;
    CHECK_FALSE(extinction_time(t).censored);
    CHECK(extinction_time(t).tau == 0.0);
    t.norm_H = {1.0, 0.5, 0.2};
    CHECK(extinction_time(t).censored);
    CHECK(extinction_time(t).tau == 0.2);

    auto c = fast_diffusion(32, 0.02);
    auto e = extinction_time(simulate(c, 0));
    CHECK(e.censored);
}

TEST_CASE("deterministic extinction time is stable under refinement") {
    std::vector<double> taus;
    for (int n : {32, 64, 128}) {
        auto c = fast_diffusion(n, 0.3);
        auto e = extinction_time(simulate(c, 0));
        REQUIRE_FALSE(e.censored);
        taus.push_back(e.tau);
    }
    CHECK(std::abs(taus[1] - taus[0]) <= 0.1 * taus[1]);
    CHECK(std::abs(taus[2] - taus[1]) <= 0.1 * taus[2]);
}

TEST_CASE("Monte Carlo preconditions") {
    auto c = fast_diffusion(16, 0.2, NoiseModel::constant(2, 0.02));
    CHECK_THROWS_AS(mc_extinction(c, 50), InvalidArgument);
    auto slow = fast_diffusion(16, 0.2, {}, 0.2, 2.5);
    CHECK_THROWS_AS(mc_extinction(slow, 100), InvalidArgument);
    auto forced = c;
    forced.op = MultiValuedOperator(OperatorKind::PhiLaplace, graphs::power(1.5), GelfandTriple::phi_laplace(1.5),
                                    c.op.grid());
    forced.drift = SingleValuedDrift::reaction_diffusion({});
    CHECK_THROWS_AS(mc_extinction(forced, 100), InvalidArgument);
}

TEST_CASE("degenerate Monte Carlo cases") {
    ExtinctionOptions opts;
    opts.epsilon_sensitivity = false;
    SUBCASE("x = 0") {
        auto c = fast_diffusion(16, 0.1, NoiseModel::constant(2, 0.02), 0.0);
        auto r = mc_extinction(c, 100, opts);
        CHECK(r.x_norm == 0.0);
        CHECK(r.p_hat == 1.0);
        CHECK(r.mean_lower == 0.0);
        CHECK(r.floor == 1.0);
        for (const auto& row : r.supermartingale.rows) CHECK(row.mean == 0.0);
        CHECK(r.pass());
    }
    SUBCASE("no noise: yes/no at T") {
        auto early = mc_extinction(fast_diffusion(16, 0.02), 100, opts);
        CHECK(early.p_hat == 0.0);
        CHECK(early.p_se == 0.0);
        auto late = mc_extinction(fast_diffusion(16, 0.3), 100, opts);
        CHECK(late.p_hat == 1.0);
        for (double tau : late.tau) CHECK(tau == late.tau[0]);
    }
}

TEST_CASE("supermartingale and energy tables") {
    auto c = fast_diffusion(16, 0.1, NoiseModel::constant(2, 0.05));
    std::vector<double> cps = {0.0, 0.025, 0.05, 0.075, 0.1};
    auto sm = supermartingale_check(c, 100, cps, 2);
    REQUIRE(sm.rows.size() == cps.size());
    double x_pow = std::pow(c.op.triple().norm_H(c.x), 0.5);
    CHECK(sm.rows[0].mean == x_pow);
    CHECK(sm.rows[0].se == 0.0);
    CHECK(sm.pass);

    double c0 = embedding_constant(c.op.triple(), c.op.grid()).c0;
    auto en = energy_inequality_check(c, 100, {0.0, 0.05, 0.1}, c0, 2);
    REQUIRE(en.rows.size() == 3);
    CHECK(en.rows[0].mean == doctest::Approx(x_pow));
    CHECK(en.rows[0].bound == doctest::Approx(x_pow));
    CHECK(en.rows[0].margin >= 0.0);
    CHECK(en.pass);

    auto alpha2 = fast_diffusion(16, 0.1, {}, 0.2, 2.0);
    CHECK_THROWS_AS(supermartingale_check(alpha2, 100, cps), InvalidArgument);
}

TEST_CASE("report is deterministic") {
    auto c = fast_diffusion(16, 0.15, NoiseModel::constant(2, 0.05));
    ExtinctionOptions opts;
    opts.epsilon_sensitivity = false;
    opts.threads = 1;
    auto a = mc_extinction(c, 100, opts);
    opts.threads = 4;
    auto b = mc_extinction(c, 100, opts);
    CHECK(a.tau == b.tau);
    CHECK(a.censored == b.censored);
    CHECK(a.p_hat == b.p_hat);
    CHECK(a.mean_lower == b.mean_lower);
    CHECK(a.mean_lower <= a.mean_upper);
    CHECK(a.p_hat >= 0.0);
    CHECK(a.p_hat <= 1.0);
}
