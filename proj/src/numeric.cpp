#include "kinex/numeric.hpp"

#include <algorithm>
#include <stdexcept>

namespace kinex {

OlsFit ols_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3) {
        throw std::invalid_argument("ols_fit: need matching inputs with at least 3 points");
    }
    const auto n = static_cast<double>(xs.size());
    const double mx = mean(xs);
    const double my = mean(ys);
    KahanSum sxx, sxy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx.add((xs[i] - mx) * (xs[i] - mx));
        sxy.add((xs[i] - mx) * (ys[i] - my));
    }
    if (sxx.value() == 0.0) throw std::invalid_argument("ols_fit: degenerate abscissa");
    OlsFit fit;
    fit.n = xs.size();
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;
    KahanSum sse;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        sse.add(r * r);
    }
    fit.slope_se = std::sqrt(sse.value() / ((n - 2.0) * sxx.value()));
    return fit;
}

double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf) {
    if (sorted.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    const auto n = static_cast<double>(sorted.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        ks = std::max(ks, std::abs((static_cast<double>(i) + 1.0) / n - f));
        ks = std::max(ks, std::abs(static_cast<double>(i) / n - f));
    }
    return ks;
}

double ks_statistic_two_sample(std::span<const double> sorted_a, std::span<const double> sorted_b) {
    if (sorted_a.empty() || sorted_b.empty()) {
        throw std::invalid_argument("ks_statistic_two_sample: empty sample");
    }
    const auto na = static_cast<double>(sorted_a.size());
    const auto nb = static_cast<double>(sorted_b.size());
    std::size_t ia = 0, ib = 0;
    double ks = 0.0;
    while (ia < sorted_a.size() && ib < sorted_b.size()) {
        if (sorted_a[ia] <= sorted_b[ib]) {
            ++ia;
        } else {
            ++ib;
        }
        ks = std::max(ks, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
    }
    return ks;
}

}  // namespace kinex
