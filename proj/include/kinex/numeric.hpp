#pragma once

// Shared numeric plumbing: compensated summation (conservation audits and moment
// estimates must not be limited by naive accumulation error), simple OLS with a
// slope standard error, normal CDF, and Kolmogorov-Smirnov statistics.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace kinex {

// Neumaier-compensated accumulator; error is O(1 ulp) independent of count.
class KahanSum {
  public:
    void add(double value) {
        const double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value)) {
            comp_ += (sum_ - t) + value;
        } else {
            comp_ += (value - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

inline double mean(std::span<const double> xs) {
    return xs.empty() ? 0.0 : compensated_sum(xs) / static_cast<double>(xs.size());
}

// Sample variance (unbiased, two-pass).
inline double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    KahanSum s;
    for (double x : xs) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(xs.size() - 1);
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    std::size_t n = 0;
};

OlsFit ols_fit(std::span<const double> xs, std::span<const double> ys);

// One-sided t critical values, conservative for df >= 50.
inline constexpr double kOneSided95 = 1.68;
inline constexpr double kOneSided99 = 2.41;

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample KS statistic; `sorted` must be ascending.
double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf);

// Two-sample KS statistic; both inputs must be ascending.
double ks_statistic_two_sample(std::span<const double> sorted_a, std::span<const double> sorted_b);

// E|w|^p along the multiplicative diffusion dw = -lambda w dtau + sqrt(s2) |w| dW.
inline double power_moment_rate(double order_p, double lambda, double sigma2_sq) {
    return order_p * ((order_p - 1.0) * sigma2_sq / 2.0 - lambda);
}

}  // namespace kinex
