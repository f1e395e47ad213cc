#pragma once

// Microscopic trade rules for a two-good exchange between a pair of agents.
// All kernels are pure functions of state plus explicitly supplied random
// draws; sampling wrappers turn a noise specification into draws.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kinex/rng.hpp"

namespace kinex {

// Fractions of the pair's pooled goods held by the first agent.
struct PercentPair {
    double p = 0.0;  // share of good x
    double q = 0.0;  // share of good y
};

struct AgentState {
    double x = 0.0;
    double y = 0.0;
};

struct UtilityParams {
    double alpha = 0.5;
    double beta = 0.5;  // must equal 1 - alpha

    static UtilityParams from_alpha(double alpha) { return UtilityParams{alpha, 1.0 - alpha}; }
};

enum class NoiseKind { DegenerateZero, UniformSymmetric, TruncatedGaussian };

// Zero-mean symmetric perturbation of the trade propensities. `delta` is the
// support half-width; the truncated Gaussian has standard deviation delta/3
// truncated at +/-delta (acceptance rate ~99.7%).
struct NoiseSpec {
    NoiseKind kind = NoiseKind::DegenerateZero;
    double delta = 0.0;

    static NoiseSpec degenerate() { return {}; }
    static NoiseSpec uniform(double delta) { return {NoiseKind::UniformSymmetric, delta}; }
    static NoiseSpec truncated_gaussian(double delta) { return {NoiseKind::TruncatedGaussian, delta}; }

    double support_halfwidth() const { return kind == NoiseKind::DegenerateZero ? 0.0 : delta; }
    double variance() const;
    double draw(RngStream& rng) const;
};

enum class TradeVariant { EdgeworthDifference, EdgeworthProportional };

struct ExponentRandomization {
    enum class Kind { None, Degenerate, Uniform };
    Kind kind = Kind::None;
    double value = 0.5;  // Degenerate
    double lo = 0.0;     // Uniform
    double hi = 0.0;

    static ExponentRandomization none() { return {}; }
    static ExponentRandomization degenerate(double alpha) {
        return {Kind::Degenerate, alpha, 0.0, 0.0};
    }
    static ExponentRandomization uniform(double lo, double hi) {
        return {Kind::Uniform, 0.5, lo, hi};
    }
};

struct TradeParams {
    double lambda = 0.5;
    UtilityParams utility{};
    NoiseSpec noise{};
    TradeVariant variant = TradeVariant::EdgeworthDifference;
    ExponentRandomization exponents = ExponentRandomization::none();

    // Largest noise half-width keeping every propensity inside its admissible
    // interval (0,1) resp. (0,1], for every exponent value the config can draw.
    double admissible_noise_bound() const;

    // All violated constraints, empty when valid.
    std::vector<std::string> validation_errors() const;
    void require_valid() const;
};

// Propensities actually applied to one trade: a scales the x-share update,
// b the y-share update. Kept with the raw noise draws for auditing.
struct CoefficientDraw {
    double a = 0.0;        // lambda*beta + mu, in (0,1)
    double b = 0.0;        // lambda*alpha + mu_tilde, in (0,1]
    double mu = 0.0;
    double mu_tilde = 0.0;
};

class DegeneratePoolError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Cobb-Douglas utility p^alpha * q^beta on shares.
double utility(const PercentPair& shares, const UtilityParams& u);

bool pool_degenerate(const AgentState& a, const AgentState& b);

// Shares of the pooled goods held by the first agent; throws DegeneratePoolError
// when either pooled total is zero.
PercentPair percentages(const AgentState& a, const AgentState& b);

// Effective exponents for one trade (re-drawn per trade when randomized).
UtilityParams sample_random_exponents(const TradeParams& tp, RngStream& rng);

CoefficientDraw make_coefficients(double lambda, const UtilityParams& u, double mu,
                                  double mu_tilde);
CoefficientDraw sample_coefficients(const TradeParams& tp, RngStream& rng);

// Share-space difference rule: p* = p + a(q-p), q* = q + b(p-q).
PercentPair trade_percent(const PercentPair& shares, const CoefficientDraw& cd);

// Goods-space trade. The first agent's post-trade holdings follow the share
// rule applied to the pooled totals; the partner's are computed by subtraction
// so the pair totals are conserved by construction.
std::pair<AgentState, AgentState> trade_goods(const AgentState& a, const AgentState& b,
                                              const CoefficientDraw& cd);

// Multiplicative-noise variant: p* = p(1+mu) + lambda*beta(q-p),
// q* = q(1+mu_tilde) + lambda*alpha(p-q). Results are clamped to [0,1];
// `clamped` records whether clamping fired.
struct VariantShares {
    PercentPair shares;
    bool clamped = false;
};
VariantShares trade_percent_variant(const PercentPair& shares, double lambda,
                                    const UtilityParams& u, double mu, double mu_tilde);
VariantShares trade_percent_variant(const PercentPair& shares, const TradeParams& tp,
                                    RngStream& rng);

struct VariantGoods {
    AgentState a;
    AgentState b;
    bool clamped = false;
};
VariantGoods trade_goods_variant(const AgentState& a, const AgentState& b, double lambda,
                                 const UtilityParams& u, double mu, double mu_tilde);

}  // namespace kinex
