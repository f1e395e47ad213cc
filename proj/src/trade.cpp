#include "kinex/trade.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kinex {

namespace {

constexpr double kExponentSumTol = 1e-12;

bool finite_in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void require_shares(const PercentPair& s) {
    if (!finite_in_unit(s.p) || !finite_in_unit(s.q)) {
        throw std::domain_error("shares must be finite and lie in [0,1]");
    }
}

void require_utility(const UtilityParams& u) {
    if (!(u.alpha > 0.0) || !(u.beta > 0.0) || !std::isfinite(u.alpha) || !std::isfinite(u.beta) ||
        std::abs(u.alpha + u.beta - 1.0) > kExponentSumTol) {
        throw std::domain_error("utility exponents must be positive and sum to 1");
    }
}

void require_agent(const AgentState& a) {
    if (!std::isfinite(a.x) || !std::isfinite(a.y) || a.x < 0.0 || a.y < 0.0) {
        throw std::domain_error("agent holdings must be finite and non-negative");
    }
}

double clamp_share(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double NoiseSpec::variance() const {
    switch (kind) {
        case NoiseKind::DegenerateZero:
            return 0.0;
        case NoiseKind::UniformSymmetric:
            return delta * delta / 3.0;
        case NoiseKind::TruncatedGaussian: {
            // N(0, (delta/3)^2) truncated at +/-delta, i.e. at 3 standard deviations:
            // Var = s^2 * (1 - 2c phi(c) / (2Phi(c)-1)) with c = 3.
            const double s = delta / 3.0;
            const double c = 3.0;
            const double phi_c = std::exp(-0.5 * c * c) / std::sqrt(2.0 * M_PI);
            const double mass = std::erf(c / std::sqrt(2.0));
            return s * s * (1.0 - 2.0 * c * phi_c / mass);
        }
    }
    return 0.0;
}

double NoiseSpec::draw(RngStream& rng) const {
    switch (kind) {
        case NoiseKind::DegenerateZero:
            return 0.0;
        case NoiseKind::UniformSymmetric:
            return rng.symmetric_uniform(delta);
        case NoiseKind::TruncatedGaussian: {
            const double s = delta / 3.0;
            for (;;) {
                const double v = s * rng.normal();
                if (std::abs(v) < delta) return v;
            }
        }
    }
    return 0.0;
}

double TradeParams::admissible_noise_bound() const {
    double alpha_lo = utility.alpha;
    double alpha_hi = utility.alpha;
    switch (exponents.kind) {
        case ExponentRandomization::Kind::None:
            break;
        case ExponentRandomization::Kind::Degenerate:
            alpha_lo = alpha_hi = exponents.value;
            break;
        case ExponentRandomization::Kind::Uniform:
            alpha_lo = exponents.lo;
            alpha_hi = exponents.hi;
            break;
    }
    // Worst case over alpha in [alpha_lo, alpha_hi], beta = 1 - alpha:
    // need lambda*beta +/- delta in (0,1) and lambda*alpha + delta <= 1,
    // lambda*alpha - delta > 0.
    const double min_lb = lambda * (1.0 - alpha_hi);
    const double max_lb = lambda * (1.0 - alpha_lo);
    const double min_la = lambda * alpha_lo;
    const double max_la = lambda * alpha_hi;
    return std::min(std::min(min_lb, 1.0 - max_lb), std::min(min_la, 1.0 - max_la));
}

std::vector<std::string> TradeParams::validation_errors() const {
    std::vector<std::string> errors;
    auto fail = [&errors](const std::string& msg) { errors.push_back(msg); };

    if (!(lambda > 0.0) || !(lambda <= 1.0) || !std::isfinite(lambda)) {
        fail("lambda must satisfy 0 < lambda <= 1");
    }
    if (!(utility.alpha > 0.0) || !(utility.alpha < 1.0) || !std::isfinite(utility.alpha)) {
        fail("alpha must lie in (0,1)");
    }
    if (std::abs(utility.alpha + utility.beta - 1.0) > kExponentSumTol) {
        fail("utility exponents must sum to 1 within 1e-12");
    }
    if (noise.kind != NoiseKind::DegenerateZero) {
        if (!(noise.delta > 0.0) || !std::isfinite(noise.delta)) {
            fail("noise half-width must be positive and finite");
        }
    }
    if (exponents.kind == ExponentRandomization::Kind::Degenerate) {
        if (!(exponents.value > 0.0) || !(exponents.value < 1.0)) {
            fail("randomized exponent value must lie in (0,1)");
        }
    }
    if (exponents.kind == ExponentRandomization::Kind::Uniform) {
        if (!(exponents.lo > 0.0) || !(exponents.lo < exponents.hi) || !(exponents.hi <= 1.0)) {
            fail("randomized exponent bounds must satisfy 0 < lo < hi <= 1");
        }
    }
    if (errors.empty() && noise.kind != NoiseKind::DegenerateZero) {
        const double bound = admissible_noise_bound();
        if (noise.delta > bound) {
            std::ostringstream os;
            os << "noise half-width " << noise.delta
               << " breaks trade admissibility (propensities must stay in (0,1]): "
               << "requires delta <= min(lambda*beta, 1-lambda*beta, lambda*alpha, 1-lambda*alpha)"
               << " = " << bound;
            fail(os.str());
        }
    }
    return errors;
}

void TradeParams::require_valid() const {
    const auto errors = validation_errors();
    if (errors.empty()) return;
    std::string joined;
    for (const auto& e : errors) {
        if (!joined.empty()) joined += "; ";
        joined += e;
    }
    throw std::invalid_argument("invalid trade parameters: " + joined);
}

double utility(const PercentPair& shares, const UtilityParams& u) {
    require_shares(shares);
    require_utility(u);
    if (shares.p == 0.0 || shares.q == 0.0) return 0.0;
    return std::pow(shares.p, u.alpha) * std::pow(shares.q, u.beta);
}

bool pool_degenerate(const AgentState& a, const AgentState& b) {
    return (a.x + b.x) == 0.0 || (a.y + b.y) == 0.0;
}

PercentPair percentages(const AgentState& a, const AgentState& b) {
    require_agent(a);
    require_agent(b);
    const double total_x = a.x + b.x;
    const double total_y = a.y + b.y;
    if (total_x == 0.0 || total_y == 0.0) {
        throw DegeneratePoolError("pooled goods are zero; shares undefined");
    }
    return {a.x / total_x, a.y / total_y};
}

UtilityParams sample_random_exponents(const TradeParams& tp, RngStream& rng) {
    switch (tp.exponents.kind) {
        case ExponentRandomization::Kind::None:
            return tp.utility;
        case ExponentRandomization::Kind::Degenerate:
            return UtilityParams::from_alpha(tp.exponents.value);
        case ExponentRandomization::Kind::Uniform:
            return UtilityParams::from_alpha(rng.uniform(tp.exponents.lo, tp.exponents.hi));
    }
    return tp.utility;
}

CoefficientDraw make_coefficients(double lambda, const UtilityParams& u, double mu,
                                  double mu_tilde) {
    require_utility(u);
    CoefficientDraw cd;
    cd.mu = mu;
    cd.mu_tilde = mu_tilde;
    // Guard rounding at the support boundary; the open/half-open constraints
    // hold almost surely by construction.
    constexpr double tiny = 1e-300;
    cd.a = std::clamp(lambda * u.beta + mu, tiny, 1.0 - 1e-16);
    cd.b = std::clamp(lambda * u.alpha + mu_tilde, tiny, 1.0);
    return cd;
}

CoefficientDraw sample_coefficients(const TradeParams& tp, RngStream& rng) {
    const UtilityParams u = sample_random_exponents(tp, rng);
    const double mu = tp.noise.draw(rng);
    const double mu_tilde = tp.noise.draw(rng);
    return make_coefficients(tp.lambda, u, mu, mu_tilde);
}

PercentPair trade_percent(const PercentPair& shares, const CoefficientDraw& cd) {
    require_shares(shares);
    const double gap = shares.q - shares.p;
    return {clamp_share(shares.p + cd.a * gap), clamp_share(shares.q - cd.b * gap)};
}

std::pair<AgentState, AgentState> trade_goods(const AgentState& a, const AgentState& b,
                                              const CoefficientDraw& cd) {
    require_agent(a);
    require_agent(b);
    const double total_x = a.x + b.x;
    const double total_y = a.y + b.y;
    if (total_x == 0.0 || total_y == 0.0) {
        throw DegeneratePoolError("pooled goods are zero; trade undefined");
    }
    AgentState a_post;
    a_post.x = a.x + cd.a * ((total_x / total_y) * a.y - a.x);
    a_post.y = a.y + cd.b * ((total_y / total_x) * a.x - a.y);
    a_post.x = std::clamp(a_post.x, 0.0, total_x);
    a_post.y = std::clamp(a_post.y, 0.0, total_y);
    const AgentState b_post{total_x - a_post.x, total_y - a_post.y};
    return {a_post, b_post};
}

VariantShares trade_percent_variant(const PercentPair& shares, double lambda,
                                    const UtilityParams& u, double mu, double mu_tilde) {
    require_shares(shares);
    require_utility(u);
    const double gap = shares.q - shares.p;
    const double p_star = shares.p * (1.0 + mu) + lambda * u.beta * gap;
    const double q_star = shares.q * (1.0 + mu_tilde) - lambda * u.alpha * gap;
    VariantShares out;
    out.clamped = p_star < 0.0 || p_star > 1.0 || q_star < 0.0 || q_star > 1.0;
    out.shares = {clamp_share(p_star), clamp_share(q_star)};
    return out;
}

VariantShares trade_percent_variant(const PercentPair& shares, const TradeParams& tp,
                                    RngStream& rng) {
    const UtilityParams u = sample_random_exponents(tp, rng);
    const double mu = tp.noise.draw(rng);
    const double mu_tilde = tp.noise.draw(rng);
    return trade_percent_variant(shares, tp.lambda, u, mu, mu_tilde);
}

VariantGoods trade_goods_variant(const AgentState& a, const AgentState& b, double lambda,
                                 const UtilityParams& u, double mu, double mu_tilde) {
    const PercentPair shares = percentages(a, b);
    const VariantShares post = trade_percent_variant(shares, lambda, u, mu, mu_tilde);
    const double total_x = a.x + b.x;
    const double total_y = a.y + b.y;
    VariantGoods out;
    out.clamped = post.clamped;
    out.a = {post.shares.p * total_x, post.shares.q * total_y};
    out.b = {total_x - out.a.x, total_y - out.a.y};
    return out;
}

}  // namespace kinex
