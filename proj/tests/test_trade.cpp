// Trade-kernel tests: utility evaluation, share bookkeeping, propensity
// construction, admissibility, conservation, and the mutual-benefit property
// of the deterministic trade.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kinex/rng.hpp"
#include "kinex/trade.hpp"

using namespace kinex;

namespace {

bool contains(const std::vector<std::string>& msgs, const std::string& needle) {
    for (const auto& m : msgs) {
        if (m.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("utility: closed-form values and domain guards") {
    CHECK(utility({1.0, 1.0}, UtilityParams::from_alpha(0.3)) == 1.0);
    CHECK(utility({0.0, 0.7}, UtilityParams::from_alpha(0.5)) == 0.0);
    CHECK(utility({0.7, 0.0}, UtilityParams::from_alpha(0.5)) == 0.0);
    // sqrt(0.25) * sqrt(0.16) = 0.5 * 0.4
    CHECK(utility({0.25, 0.16}, UtilityParams::from_alpha(0.5)) ==
          doctest::Approx(0.2).epsilon(1e-14));
    // Geometric mean never exceeds the arithmetic mean on [0,1]^2.
    RngStream rng(123);
    for (int i = 0; i < 1000; ++i) {
        const double p = rng.uniform01();
        const double q = rng.uniform01();
        const double alpha = rng.uniform(0.05, 0.95);
        const double u = utility({p, q}, UtilityParams::from_alpha(alpha));
        CHECK(u <= alpha * p + (1.0 - alpha) * q + 1e-12);
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
    }
    CHECK_THROWS_AS(utility({-0.1, 0.5}, UtilityParams::from_alpha(0.5)), std::domain_error);
    CHECK_THROWS_AS(utility({0.5, 1.5}, UtilityParams::from_alpha(0.5)), std::domain_error);
    CHECK_THROWS_AS(utility({0.5, 0.5}, UtilityParams{0.3, 0.5}), std::domain_error);
}

TEST_CASE("percentages: pooled shares and degenerate pools") {
    const PercentPair s = percentages({1.0, 2.0}, {3.0, 2.0});
    CHECK(s.p == 0.25);
    CHECK(s.q == 0.5);

    CHECK(pool_degenerate({1.0, 0.0}, {3.0, 0.0}));
    CHECK(pool_degenerate({0.0, 1.0}, {0.0, 3.0}));
    CHECK_FALSE(pool_degenerate({1.0, 2.0}, {3.0, 2.0}));
    CHECK_THROWS_AS(percentages({1.0, 0.0}, {3.0, 0.0}), DegeneratePoolError);
    CHECK_THROWS_AS(percentages({0.0, 1.0}, {0.0, 3.0}), DegeneratePoolError);
    CHECK_THROWS_AS(percentages({-1.0, 1.0}, {3.0, 1.0}), std::domain_error);
}

TEST_CASE("make_coefficients: propensities from strength, exponents, noise") {
    const CoefficientDraw cd = make_coefficients(0.5, UtilityParams::from_alpha(0.5), 0.0, 0.0);
    CHECK(cd.a == 0.25);
    CHECK(cd.b == 0.25);
    CHECK(cd.mu == 0.0);
    CHECK(cd.mu_tilde == 0.0);

    const CoefficientDraw cn = make_coefficients(0.5, UtilityParams::from_alpha(0.5), 0.1, -0.05);
    CHECK(cn.a == doctest::Approx(0.35).epsilon(1e-15));
    CHECK(cn.b == doctest::Approx(0.20).epsilon(1e-15));
}

TEST_CASE("sample_coefficients: draws stay inside the admissible band") {
    TradeParams tp;
    tp.lambda = 1.0;
    tp.utility = UtilityParams::from_alpha(0.9);
    tp.noise = NoiseSpec::uniform(0.05);
    tp.require_valid();

    RngStream rng(7);
    const std::size_t n = 20000;
    double sum_a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const CoefficientDraw cd = sample_coefficients(tp, rng);
        // a = lambda*beta + mu in (0.05, 0.15); b = lambda*alpha + mu_tilde in (0.85, 0.95)
        CHECK(cd.a > 0.05);
        CHECK(cd.a < 0.15);
        CHECK(cd.b > 0.85);
        CHECK(cd.b < 0.95);
        sum_a += cd.a;
    }
    // E[a] = lambda*beta = 0.1; SE = delta/sqrt(3n)
    const double se = 0.05 / std::sqrt(3.0 * static_cast<double>(n));
    CHECK(std::abs(sum_a / static_cast<double>(n) - 0.1) < 3.5 * se);
}

TEST_CASE("admissible_noise_bound: worst case over the exponent support") {
    TradeParams tp;
    tp.lambda = 0.5;
    tp.utility = UtilityParams::from_alpha(0.5);
    CHECK(tp.admissible_noise_bound() == doctest::Approx(0.25).epsilon(1e-15));

    tp.exponents = ExponentRandomization::uniform(0.4, 0.9);
    // min over alpha in [0.4, 0.9] of min(l*b, 1-l*b, l*a, 1-l*a) = 0.5*0.1
    CHECK(tp.admissible_noise_bound() == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("validation_errors: every violated constraint is reported") {
    TradeParams bad;
    bad.lambda = 1.5;
    bad.utility = UtilityParams{1.2, -0.2};
    bad.noise = NoiseSpec::uniform(-1.0);
    const auto errors = bad.validation_errors();
    CHECK(errors.size() >= 3);
    CHECK(contains(errors, "0 < lambda <= 1"));
    CHECK(contains(errors, "alpha must lie in (0,1)"));
    CHECK(contains(errors, "half-width"));
    CHECK_THROWS_AS(bad.require_valid(), std::invalid_argument);

    TradeParams bad_exp;
    bad_exp.exponents = ExponentRandomization::uniform(0.9, 0.4);
    CHECK(contains(bad_exp.validation_errors(), "0 < lo < hi <= 1"));

    TradeParams inadmissible;
    inadmissible.lambda = 0.5;
    inadmissible.noise = NoiseSpec::uniform(0.3);
    const auto adm = inadmissible.validation_errors();
    REQUIRE(adm.size() == 1);
    CHECK(adm.front().find("admissibility") != std::string::npos);
    CHECK(adm.front().find("0.25") != std::string::npos);

    TradeParams good;
    good.noise = NoiseSpec::uniform(0.2);
    CHECK(good.validation_errors().empty());
    CHECK_NOTHROW(good.require_valid());
}

TEST_CASE("trade_percent: update rule, gap identity, fixed point") {
    const CoefficientDraw cd = make_coefficients(0.5, UtilityParams::from_alpha(0.5), 0.0, 0.0);
    const PercentPair post = trade_percent({0.2, 0.8}, cd);
    CHECK(post.p == doctest::Approx(0.35).epsilon(1e-15));
    CHECK(post.q == doctest::Approx(0.65).epsilon(1e-15));

    RngStream rng(99);
    for (int i = 0; i < 10000; ++i) {
        const double p = rng.uniform01();
        const double q = rng.uniform01();
        const double lambda = rng.uniform(0.05, 1.0);
        const double alpha = rng.uniform(0.05, 0.95);
        TradeParams tp;
        tp.lambda = lambda;
        tp.utility = UtilityParams::from_alpha(alpha);
        const double delta = 0.5 * tp.admissible_noise_bound();
        tp.noise = delta > 0.0 ? NoiseSpec::uniform(delta) : NoiseSpec::degenerate();
        const CoefficientDraw c = sample_coefficients(tp, rng);
        const PercentPair out = trade_percent({p, q}, c);
        CHECK(out.p >= 0.0);
        CHECK(out.p <= 1.0);
        CHECK(out.q >= 0.0);
        CHECK(out.q <= 1.0);
        // The share gap contracts by exactly (1 - a - b).
        const double expected_gap = (1.0 - c.a - c.b) * (p - q);
        CHECK(std::abs((out.p - out.q) - expected_gap) <= 1e-12 * (1.0 + std::abs(p - q)));
    }

    // Equal shares are a fixed point of every admissible draw.
    const PercentPair fixed = trade_percent({0.4, 0.4}, cd);
    CHECK(fixed.p == 0.4);
    CHECK(fixed.q == 0.4);
}

TEST_CASE("trade_goods: pair totals conserved bit-exactly") {
    const CoefficientDraw cd = make_coefficients(0.5, UtilityParams::from_alpha(0.5), 0.0, 0.0);
    const auto [a_post, b_post] = trade_goods({1.0, 2.0}, {3.0, 2.0}, cd);
    CHECK(a_post.x == 1.25);
    CHECK(a_post.y == 1.75);
    CHECK(b_post.x == 2.75);
    CHECK(b_post.y == 2.25);

    RngStream rng(2024);
    for (int i = 0; i < 10000; ++i) {
        const AgentState a{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
        const AgentState b{rng.uniform(0.01, 10.0), rng.uniform(0.01, 10.0)};
        TradeParams tp;
        tp.lambda = rng.uniform(0.05, 1.0);
        tp.utility = UtilityParams::from_alpha(rng.uniform(0.1, 0.9));
        const CoefficientDraw c = sample_coefficients(tp, rng);
        const double tx = a.x + b.x;
        const double ty = a.y + b.y;
        const auto [pa, pb] = trade_goods(a, b, c);
        // The partner takes exactly what is left of the pool: the subtraction
        // form reproduces bit-identically. Re-summing the pair rounds once
        // more, so it may sit an ulp off the pooled total but no further.
        CHECK(pb.x == tx - pa.x);
        CHECK(pb.y == ty - pa.y);
        const double eps = std::numeric_limits<double>::epsilon();
        CHECK(std::abs((pa.x + pb.x) - tx) <= 4.0 * eps * tx);
        CHECK(std::abs((pa.y + pb.y) - ty) <= 4.0 * eps * ty);
        CHECK(pa.x >= 0.0);
        CHECK(pa.y >= 0.0);
        CHECK(pb.x >= 0.0);
        CHECK(pb.y >= 0.0);
    }

    CHECK_THROWS_AS(trade_goods({0.0, 1.0}, {0.0, 2.0}, cd), DegeneratePoolError);
}

TEST_CASE("deterministic trade strictly raises both agents' utility") {
    // Zero noise: a = lambda*beta, b = lambda*alpha. The first agent values
    // shares (p, q); the partner holds the complements (1-p, 1-q) under the
    // same preferences, and the post-trade complements are (1-p*, 1-q*).
    RngStream rng(5150);
    for (int i = 0; i < 20000; ++i) {
        const double p = rng.uniform(0.02, 0.98);
        double q = rng.uniform(0.02, 0.98);
        if (std::abs(p - q) < 1e-3) q = p + (q >= p ? 1e-3 : -1e-3);
        const double lambda = rng.uniform(0.1, 1.0);
        const UtilityParams u = UtilityParams::from_alpha(rng.uniform(0.1, 0.9));
        const CoefficientDraw cd = make_coefficients(lambda, u, 0.0, 0.0);
        const PercentPair post = trade_percent({p, q}, cd);

        const double before_a = utility({p, q}, u);
        const double after_a = utility(post, u);
        CHECK(after_a > before_a);

        const double before_b = utility({1.0 - p, 1.0 - q}, u);
        const double after_b = utility({1.0 - post.p, 1.0 - post.q}, u);
        CHECK(after_b > before_b);
    }
}

TEST_CASE("proportional variant: update rule and clamping") {
    const VariantShares post =
        trade_percent_variant({0.5, 0.5}, 0.5, UtilityParams::from_alpha(0.5), 0.1, -0.1);
    CHECK(post.shares.p == doctest::Approx(0.55).epsilon(1e-15));
    CHECK(post.shares.q == doctest::Approx(0.45).epsilon(1e-15));
    CHECK_FALSE(post.clamped);

    const VariantShares clamped =
        trade_percent_variant({0.95, 0.5}, 0.5, UtilityParams::from_alpha(0.5), 0.2, 0.0);
    CHECK(clamped.clamped);
    CHECK(clamped.shares.p == 1.0);

    // The goods-space variant hands the partner exactly the rest of the pool;
    // re-summing the pair rounds once more, so allow an ulp there.
    RngStream rng(31);
    const double eps = std::numeric_limits<double>::epsilon();
    for (int i = 0; i < 2000; ++i) {
        const AgentState a{rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0)};
        const AgentState b{rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0)};
        const double mu = rng.symmetric_uniform(0.1);
        const double mu_tilde = rng.symmetric_uniform(0.1);
        const VariantGoods out =
            trade_goods_variant(a, b, 0.5, UtilityParams::from_alpha(0.5), mu, mu_tilde);
        CHECK(out.b.x == (a.x + b.x) - out.a.x);
        CHECK(out.b.y == (a.y + b.y) - out.a.y);
        CHECK(std::abs((out.a.x + out.b.x) - (a.x + b.x)) <= 4.0 * eps * (a.x + b.x));
        CHECK(std::abs((out.a.y + out.b.y) - (a.y + b.y)) <= 4.0 * eps * (a.y + b.y));
    }
}

TEST_CASE("random exponents: distribution over trades") {
    TradeParams tp;
    tp.exponents = ExponentRandomization::uniform(0.4, 1.0);
    RngStream rng(88);
    const std::size_t n = 20000;
    double sum_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const UtilityParams u = sample_random_exponents(tp, rng);
        CHECK(u.alpha >= 0.4);
        CHECK(u.alpha < 1.0);
        CHECK(u.alpha + u.beta == doctest::Approx(1.0).epsilon(1e-15));
        sum_diff += u.alpha - u.beta;
    }
    // E[alpha - beta] = 2 E[alpha] - 1 = 0.4; Var = 4 * 0.6^2 / 12
    const double se = std::sqrt(4.0 * 0.36 / 12.0 / static_cast<double>(n));
    CHECK(std::abs(sum_diff / static_cast<double>(n) - 0.4) < 3.5 * se);

    tp.exponents = ExponentRandomization::degenerate(0.3);
    const UtilityParams fixed = sample_random_exponents(tp, rng);
    CHECK(fixed.alpha == 0.3);
    CHECK(fixed.beta == 0.7);

    tp.exponents = ExponentRandomization::none();
    tp.utility = UtilityParams::from_alpha(0.6);
    const UtilityParams passthrough = sample_random_exponents(tp, rng);
    CHECK(passthrough.alpha == 0.6);
}

TEST_CASE("noise specifications: support and variance law") {
    RngStream rng(404);
    const std::size_t n = 100000;

    const NoiseSpec uni = NoiseSpec::uniform(0.3);
    CHECK(uni.variance() == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(uni.support_halfwidth() == 0.3);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = uni.draw(rng);
        CHECK(std::abs(d) < 0.3);
        sum += d;
        sum_sq += d * d;
    }
    CHECK(sum_sq / static_cast<double>(n) == doctest::Approx(0.03).epsilon(0.02));
    CHECK(std::abs(sum / static_cast<double>(n)) < 0.002);

    const NoiseSpec tg = NoiseSpec::truncated_gaussian(0.3);
    double tg_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = tg.draw(rng);
        CHECK(std::abs(d) < 0.3);
        tg_sq += d * d;
    }
    CHECK(tg_sq / static_cast<double>(n) == doctest::Approx(tg.variance()).epsilon(0.03));

    CHECK(NoiseSpec::degenerate().variance() == 0.0);
    CHECK(NoiseSpec::degenerate().draw(rng) == 0.0);
}
