// Population-dynamics tests: initial-condition factories, conservation under
// pairwise interaction, the mean-field update law, snapshot cadence, the
// small-trade scaling, and the determinism contract.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "kinex/ensemble.hpp"
#include "kinex/rng.hpp"

using namespace kinex;

TEST_CASE("factories: totals, means, and input validation") {
    const Ensemble e = Ensemble::from_agents({{1.0, 2.0}, {3.0, 4.0}});
    CHECK(e.total_x == 4.0);
    CHECK(e.total_y == 6.0);
    CHECK(e.mean_x == 2.0);
    CHECK(e.mean_y == 3.0);
    CHECK(e.time == 0.0);
    const auto [rx, ry] = e.recompute_totals();
    CHECK(rx == 4.0);
    CHECK(ry == 6.0);

    CHECK_THROWS_AS(Ensemble::from_agents({{1.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble::from_agents({{1.0, -2.0}, {3.0, 4.0}}), std::invalid_argument);

    const Ensemble pt = make_point_ensemble(5, 1.5, 2.5);
    CHECK(pt.size() == 5);
    for (const auto& a : pt.agents) {
        CHECK(a.x == 1.5);
        CHECK(a.y == 2.5);
    }
    CHECK(pt.total_x == 7.5);

    const Ensemble two = make_two_point_ensemble(4, 1.0, 1.0, 0.25, 0.25);
    CHECK(two.agents[0].x == 1.25);
    CHECK(two.agents[0].y == 0.75);
    CHECK(two.agents[1].x == 0.75);
    CHECK(two.agents[1].y == 1.25);
    CHECK(two.mean_x == 1.0);
    CHECK(two.mean_y == 1.0);
    CHECK_THROWS_AS(make_two_point_ensemble(5, 1.0, 1.0, 0.25, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(make_two_point_ensemble(4, 1.0, 1.0, 1.5, 0.25), std::invalid_argument);

    RngStream rng(1);
    const Ensemble uni = make_uniform_ensemble(2000, 0.5, 1.5, 0.5, 1.5, rng);
    double lo_x = 10.0, hi_x = -10.0;
    for (const auto& a : uni.agents) {
        lo_x = std::min(lo_x, a.x);
        hi_x = std::max(hi_x, a.x);
        CHECK(a.y >= 0.5);
        CHECK(a.y <= 1.5);
    }
    CHECK(lo_x >= 0.5);
    CHECK(hi_x <= 1.5);
    // Mean within 3.5 SE of the rectangle center.
    const double se = (1.0 / std::sqrt(12.0)) / std::sqrt(2000.0);
    CHECK(std::abs(uni.mean_x - 1.0) < 3.5 * se);

    const Ensemble ex = make_exponential_ensemble(20000, 2.0, 3.0, rng);
    for (const auto& a : ex.agents) {
        CHECK(a.x > 0.0);
        CHECK(a.y > 0.0);
    }
    CHECK(std::abs(ex.mean_x - 2.0) < 3.5 * 2.0 / std::sqrt(20000.0));
    CHECK(std::abs(ex.mean_y - 3.0) < 3.5 * 3.0 / std::sqrt(20000.0));
}

TEST_CASE("pairwise interaction: totals never move") {
    RngStream init_rng(7);
    Ensemble e = make_exponential_ensemble(50, 1.0, 2.0, init_rng);
    const double tx = e.total_x;
    const double ty = e.total_y;
    const auto [ix, iy] = e.recompute_totals();

    TradeParams tp;
    tp.lambda = 0.5;
    tp.noise = NoiseSpec::uniform(0.1);
    RngStream rng(8);
    for (int i = 0; i < 10000; ++i) step_nonlinear(e, tp, rng);

    CHECK(e.total_x == tx);  // cached totals are conserved by construction
    CHECK(e.total_y == ty);
    const auto [fx, fy] = e.recompute_totals();
    CHECK(std::abs(fx - ix) <= 1e-12 * ix);  // re-summation confirms no drift
    CHECK(std::abs(fy - iy) <= 1e-12 * iy);
    CHECK(e.time == doctest::Approx(10000.0 * 2.0 / 50.0).epsilon(1e-12));
    CHECK(e.skipped_trades == 0);
    for (const auto& a : e.agents) {
        CHECK(a.x >= 0.0);
        CHECK(a.y >= 0.0);
    }
}

TEST_CASE("degenerate pools are skipped and counted") {
    Ensemble e = Ensemble::from_agents({{1.0, 0.0}, {2.0, 0.0}, {0.5, 0.0}, {3.0, 0.0}});
    const std::vector<AgentState> before = e.agents;
    TradeParams tp;
    RngStream rng(3);
    for (int i = 0; i < 10; ++i) step_nonlinear(e, tp, rng);
    CHECK(e.skipped_trades == 10);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(e.agents[i].x == before[i].x);
        CHECK(e.agents[i].y == before[i].y);
    }
    CHECK(e.time > 0.0);
}

TEST_CASE("mean-field sweep: one-pass update oracle") {
    // Frozen means (1, 1); zero noise, lambda = 0.5 => propensities 0.25.
    // x' = x + 0.25((m_x/m_y) y - x), y' = y + 0.25((m_y/m_x) x - y).
    Ensemble e = Ensemble::from_agents({{2.0, 1.0}, {0.0, 1.0}});
    REQUIRE(e.mean_x == 1.0);
    REQUIRE(e.mean_y == 1.0);

    TradeParams tp;
    tp.lambda = 0.5;
    SimSettings st;
    st.mode = InteractionMode::Linear;
    st.selection = SelectionScheme::Sweep;
    st.horizon = 1.0;
    RngStream rng(17);
    run_simulation(e, tp, st, rng, nullptr);

    CHECK(e.agents[0].x == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(e.agents[0].y == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(e.agents[1].x == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(e.agents[1].y == doctest::Approx(0.75).epsilon(1e-15));

    // In the diagonalized coordinate w = m_y x - m_x y the zero-noise update
    // is a pure contraction by (1 - lambda) per sweep.
    const VWSample vw = to_vw(e);
    CHECK(vw.w[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(vw.w[1] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("mean-field sweeps: per-sweep gap contraction on every agent") {
    RngStream init_rng(21);
    Ensemble e = make_exponential_ensemble(40, 1.0, 1.0, init_rng);
    const VWSample before = to_vw(e);

    TradeParams tp;
    tp.lambda = 0.5;
    SimSettings st;
    st.mode = InteractionMode::Linear;
    st.selection = SelectionScheme::Sweep;
    st.horizon = 3.0;
    RngStream rng(22);
    run_simulation(e, tp, st, rng, nullptr);

    const VWSample after = to_vw(e);
    const double factor = std::pow(1.0 - tp.lambda, 3.0);  // three full sweeps
    for (std::size_t i = 0; i < before.w.size(); ++i) {
        CHECK(after.w[i] ==
              doctest::Approx(factor * before.w[i]).epsilon(1e-12).scale(1.0));
        // alpha = beta makes v invariant under the zero-noise update.
        CHECK(after.v[i] == doctest::Approx(before.v[i]).epsilon(1e-12));
    }
}

TEST_CASE("mean-field mode: sample means drift only statistically") {
    RngStream init_rng(33);
    Ensemble e = make_exponential_ensemble(2000, 1.0, 1.0, init_rng);
    TradeParams tp;
    tp.lambda = 0.5;
    tp.noise = NoiseSpec::uniform(0.1);
    SimSettings st;
    st.mode = InteractionMode::Linear;
    st.horizon = 5.0;
    RngStream rng(34);
    run_simulation(e, tp, st, rng, nullptr);
    const auto [fx, fy] = e.recompute_totals();
    // Only the expectation is conserved; the sample mean fluctuates.
    CHECK(std::abs(fx / 2000.0 - 1.0) < 0.05);
    CHECK(std::abs(fy / 2000.0 - 1.0) < 0.05);
    for (const auto& a : e.agents) {
        CHECK(a.x >= 0.0);
        CHECK(a.y >= 0.0);
    }
}

TEST_CASE("snapshot cadence: initial, interval crossings, final") {
    RngStream init_rng(44);
    Ensemble e = make_exponential_ensemble(100, 1.0, 1.0, init_rng);
    TradeParams tp;
    SimSettings st;
    st.horizon = 1.0;
    st.snapshot_interval = 0.25;
    std::vector<double> times;
    RngStream rng(45);
    run_simulation(e, tp, st, rng, [&](const Ensemble& snap) { times.push_back(snap.time); });

    REQUIRE(times.size() == 5);
    CHECK(times.front() == 0.0);
    CHECK(times.back() >= 1.0 - 1e-12);
    const double step = 2.0 / 100.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(times[k] >= 0.25 * static_cast<double>(k) - 1e-12);
        CHECK(times[k] <= 0.25 * static_cast<double>(k) + step + 1e-12);
        if (k) CHECK(times[k] > times[k - 1]);
    }

    // Horizon zero: exactly the initial snapshot.
    Ensemble e0 = make_point_ensemble(10, 1.0, 1.0);
    st.horizon = 0.0;
    std::size_t count = 0;
    run_simulation(e0, tp, st, rng, [&](const Ensemble&) { ++count; });
    CHECK(count == 1);

    // No interval: initial and final only.
    Ensemble e2 = make_point_ensemble(10, 1.0, 1.0);
    st.horizon = 1.0;
    st.snapshot_interval = 0.0;
    count = 0;
    run_simulation(e2, tp, st, rng, [&](const Ensemble&) { ++count; });
    CHECK(count == 2);
}

TEST_CASE("small-trade scaling: parameter mapping and admissibility guard") {
    TradeParams tp;
    tp.lambda = 0.5;
    // Stay clear of the scaled admissibility bound eps*lambda*beta = 0.01:
    // the half-width maps to sqrt(eps)*delta = 0.008.
    tp.noise = NoiseSpec::uniform(0.04);
    const TradeParams scaled = quasi_invariant_scaling(tp, 0.04);
    CHECK(scaled.lambda == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(scaled.noise.delta == doctest::Approx(0.008).epsilon(1e-15));
    // Variance scales linearly, so variance/strength stays fixed.
    CHECK(scaled.noise.variance() / scaled.lambda ==
          doctest::Approx(tp.noise.variance() / tp.lambda).epsilon(1e-12));

    CHECK_THROWS_AS(quasi_invariant_scaling(tp, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(quasi_invariant_scaling(tp, 1.5), std::invalid_argument);

    // Half-width shrinks like sqrt(eps) but the admissible bound shrinks like
    // eps, so a boundary-tight configuration breaks under scaling.
    TradeParams tight;
    tight.lambda = 0.5;
    tight.noise = NoiseSpec::uniform(0.25);
    REQUIRE(tight.validation_errors().empty());
    CHECK_THROWS_AS(quasi_invariant_scaling(tight, 0.25), std::invalid_argument);
}

TEST_CASE("small-trade run: macroscopic clock and cadence") {
    TradeParams tp;
    tp.lambda = 0.5;
    tp.noise = NoiseSpec::uniform(0.1);
    Ensemble e = make_two_point_ensemble(20, 1.0, 1.0, 0.25, 0.25);
    std::vector<double> times;
    RngStream rng(55);
    quasi_invariant_run(e, tp, 0.5, 1.0, 0.25, rng,
                        [&](const Ensemble& snap) { times.push_back(snap.time); });
    REQUIRE(times.size() == 5);
    CHECK(times.front() == 0.0);
    CHECK(times.back() == doctest::Approx(1.0).epsilon(0.1));
    for (std::size_t k = 1; k < times.size(); ++k) CHECK(times[k] > times[k - 1]);
    CHECK(e.time == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("to_vw: diagonalized coordinates against the frozen means") {
    const Ensemble e = Ensemble::from_agents({{2.0, 0.0}, {0.0, 2.0}});
    REQUIRE(e.mean_x == 1.0);
    REQUIRE(e.mean_y == 1.0);
    const VWSample vw = to_vw(e);
    CHECK(vw.v[0] == 2.0);
    CHECK(vw.v[1] == 2.0);
    CHECK(vw.w[0] == 2.0);
    CHECK(vw.w[1] == -2.0);

    RngStream rng(66);
    const Ensemble r = make_exponential_ensemble(100, 1.5, 0.5, rng);
    const VWSample rv = to_vw(r);
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(rv.v[i] + rv.w[i] ==
              doctest::Approx(2.0 * r.mean_y * r.agents[i].x).epsilon(1e-12));
        CHECK(rv.v[i] - rv.w[i] ==
              doctest::Approx(2.0 * r.mean_x * r.agents[i].y).epsilon(1e-12));
    }
}

TEST_CASE("determinism: same seed bit-identical, different seed distinct") {
    const auto run_once = [](std::uint64_t seed) {
        RngStream init_rng = RngStream::derive(seed, stream_tag::kInitialCondition);
        Ensemble e = make_exponential_ensemble(100, 1.0, 1.0, init_rng);
        TradeParams tp;
        tp.lambda = 0.5;
        tp.noise = NoiseSpec::uniform(0.1);
        SimSettings st;
        st.horizon = 2.0;
        RngStream rng = RngStream::derive(seed, stream_tag::kSimulation);
        run_simulation(e, tp, st, rng, nullptr);
        return e;
    };
    const Ensemble a = run_once(42);
    const Ensemble b = run_once(42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.agents[i].x == b.agents[i].x);
        CHECK(a.agents[i].y == b.agents[i].y);
    }

    const Ensemble c = run_once(43);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.agents[i].x != c.agents[i].x || a.agents[i].y != c.agents[i].y) any_diff = true;
    }
    CHECK(any_diff);
}
