#pragma once

// Verification instruments: empirical characteristic functions, the weighted
// sup-norm Fourier metric, contraction/dissipation audits, the concentration
// diagnostic, and heavy-tail detection (Hill estimator with bootstrap error
// and a rank-regression cross-check).

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "kinex/rng.hpp"
#include "kinex/trade.hpp"

namespace kinex {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Evaluation frequencies for the Fourier metric; the origin is excluded.
struct FourierGrid {
    std::vector<std::array<double, 2>> freqs;
    double s = 2.0;  // weight exponent, ratio denominator is |omega|^s

    // Log-spaced magnitudes on [mag_lo, mag_hi] along the axes and both
    // diagonals, per_ray points each.
    static FourierGrid log_rays(double mag_lo, double mag_hi, int per_ray, double s);
    static FourierGrid standard(double s) { return log_rays(1e-3, 10.0, 64, s); }
};

// f_hat(xi, eta) = (1/N) sum exp(-i (x xi + y eta)) on every grid frequency.
std::vector<std::complex<double>> empirical_cf(std::span<const Point2> sample,
                                               const FourierGrid& grid);

struct MetricReport {
    double value = 0.0;                     // max over grid of |f - g| / |omega|^s
    std::array<double, 2> argmax{0.0, 0.0};
    double s = 2.0;
    std::size_t sample_a_size = 0;
    std::size_t sample_b_size = 0;
    // Set when the max sits at the smallest magnitude of its ray and the ratio
    // increases monotonically toward it: the s-weighted ratio is blowing up at
    // small frequencies (unequal low-order moments).
    bool divergence_suspected = false;
};

MetricReport ds_distance(std::span<const Point2> sample_a, std::span<const Point2> sample_b,
                         const FourierGrid& grid);
MetricReport ds_distance(std::span<const std::complex<double>> cf_a,
                         std::span<const std::complex<double>> cf_b, const FourierGrid& grid);

// Same metric evaluated in the transformed frequencies (xi1, eta1) =
// (xi + eta, a xi - b eta): for each grid point (xi1, eta1) the returned grid
// holds its inverse image (xi, eta), where the characteristic functions are
// evaluated and whose own magnitude supplies the |omega|^s weight (an
// equivalent norm; the shear has bounded condition number). In the transformed
// variables the pair dynamics is non-expansive: xi1 is conserved and eta1 is
// scaled by (1 - a - b) on every trade.
FourierGrid transformed_frequencies(const FourierGrid& grid, double a, double b);

// Monte Carlo estimate of <|1 - lambda - mu - mu_tilde|^s> with its standard
// error; the trade map is a d_s-contraction when the estimate is below 1.
struct ContractionAudit {
    double estimate = 0.0;
    double std_error = 0.0;
    bool passes = false;  // estimate + 3 se < 1
};
ContractionAudit contraction_audit(const TradeParams& tp, double s, std::size_t draws,
                                   RngStream& rng);

// Grid-restricted estimate of the growth constant governing the Fourier-metric
// decay bound d_s(t) <= d_s(0) exp((C_s - 1) t): for each grid frequency the
// Monte Carlo average of ((|xi*|^2 + |eta*|^2) / (|xi|^2 + |eta|^2))^(s/2)
// under the random frequency map xi* = (1-a)xi + b eta, eta* = a xi + (1-b)eta,
// maximized over the grid. A lower bound to the true supremum.
struct ContractionConstant {
    double value = 0.0;
    std::array<double, 2> argmax{0.0, 0.0};
};
ContractionConstant contraction_constant_estimate(const TradeParams& tp, const FourierGrid& grid,
                                                  std::size_t draws, RngStream& rng);

// Exact dissipation factor (1-lambda)^2 + Var(mu + mu_tilde) of the
// diagonalized gap second moment.
struct DissipationAudit {
    double factor = 0.0;
    bool dissipative = false;  // factor < 1
};
DissipationAudit dissipation_audit(const TradeParams& tp);

// E[w^2] / E[v^2] against the reference means; 0 = fully concentrated on the
// proportional line, 1 = maximal spread.
double concentration_diagnostic(std::span<const AgentState> agents, double mean_x, double mean_y);

struct TailReport {
    double hill_index = 0.0;       // Pareto tail-index estimate on the top fraction
    double hill_bootstrap_se = 0.0;
    double rank_regression_index = 0.0;  // log-log rank regression cross-check
    double tail_fraction = 0.0;
    std::size_t tail_count = 0;
    // Hill estimate on the top 1% exceeding the top-10% estimate by more than
    // 10% signals no stable index (thin tail).
    bool thin_tailed = false;
    double hill_top1 = 0.0;
    double hill_top10 = 0.0;
};

// Hill tail-index estimate over the top `fraction` of the sample (positive
// values only; requires at least 1000 positive entries and fraction in (0, 0.2]).
TailReport tail_index(std::span<const double> sample, double fraction, std::size_t bootstrap = 200,
                      std::uint64_t bootstrap_seed = 0x7461696c);

// Growth rate of log E|w|^order between consecutive trajectory rows compared
// against the sign predicted by the moment law with the supplied threshold.
struct MomentRateRow {
    double order = 0.0;
    double measured_rate = 0.0;   // OLS slope of log moment vs tau
    double predicted_rate = 0.0;  // order * ((order-1) sigma2_sq / 2 - lambda)
    bool sign_consistent = false;
};
std::vector<MomentRateRow> moment_rate_report(std::span<const double> taus,
                                              const std::vector<std::vector<double>>& moments,
                                              std::span<const double> orders, double lambda,
                                              double sigma2_sq);

}  // namespace kinex
