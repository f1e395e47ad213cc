#include "kinex/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kinex/numeric.hpp"

namespace kinex {

namespace {

double magnitude(const std::array<double, 2>& f) { return std::hypot(f[0], f[1]); }

}  // namespace

FourierGrid FourierGrid::log_rays(double mag_lo, double mag_hi, int per_ray, double s) {
    if (!(mag_lo > 0.0) || !(mag_hi > mag_lo)) {
        throw std::invalid_argument("log_rays: need 0 < mag_lo < mag_hi");
    }
    if (per_ray < 2) throw std::invalid_argument("log_rays: need at least 2 points per ray");
    if (!(s > 0.0)) throw std::invalid_argument("log_rays: weight exponent must be positive");

    // Axes and both diagonals, one sign each; conjugate symmetry of
    // characteristic functions of real samples makes the mirrored rays redundant.
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const std::array<std::array<double, 2>, 4> directions{{
        {1.0, 0.0},
        {0.0, 1.0},
        {inv_sqrt2, inv_sqrt2},
        {inv_sqrt2, -inv_sqrt2},
    }};

    FourierGrid grid;
    grid.s = s;
    grid.freqs.reserve(directions.size() * static_cast<std::size_t>(per_ray));
    const double log_lo = std::log(mag_lo);
    const double log_step = (std::log(mag_hi) - log_lo) / (per_ray - 1);
    for (const auto& dir : directions) {
        for (int k = 0; k < per_ray; ++k) {
            const double mag = std::exp(log_lo + log_step * k);
            grid.freqs.push_back({mag * dir[0], mag * dir[1]});
        }
    }
    return grid;
}

std::vector<std::complex<double>> empirical_cf(std::span<const Point2> sample,
                                               const FourierGrid& grid) {
    if (sample.empty()) throw std::invalid_argument("empirical_cf: empty sample");
    std::vector<std::complex<double>> out;
    out.reserve(grid.freqs.size());
    const double inv_n = 1.0 / static_cast<double>(sample.size());
    for (const auto& f : grid.freqs) {
        KahanSum re;
        KahanSum im;
        for (const auto& p : sample) {
            const double phase = -(p.x * f[0] + p.y * f[1]);
            re.add(std::cos(phase));
            im.add(std::sin(phase));
        }
        out.emplace_back(re.value() * inv_n, im.value() * inv_n);
    }
    return out;
}

MetricReport ds_distance(std::span<const std::complex<double>> cf_a,
                         std::span<const std::complex<double>> cf_b, const FourierGrid& grid) {
    if (cf_a.size() != grid.freqs.size() || cf_b.size() != grid.freqs.size()) {
        throw std::invalid_argument("ds_distance: characteristic function size mismatch with grid");
    }
    MetricReport report;
    report.s = grid.s;
    std::size_t arg = 0;
    std::vector<double> ratios(grid.freqs.size());
    for (std::size_t i = 0; i < grid.freqs.size(); ++i) {
        const double mag = magnitude(grid.freqs[i]);
        ratios[i] = std::abs(cf_a[i] - cf_b[i]) / std::pow(mag, grid.s);
        if (ratios[i] > report.value) {
            report.value = ratios[i];
            arg = i;
        }
    }
    report.argmax = grid.freqs[arg];

    // Divergence heuristic: the max sits at the smallest-magnitude point of
    // some ray and the ratio decreases monotonically for the next few points
    // outward along that ray.
    std::size_t ray_begin = arg;
    while (ray_begin > 0 && magnitude(grid.freqs[ray_begin - 1]) < magnitude(grid.freqs[ray_begin])) {
        --ray_begin;
    }
    if (arg == ray_begin) {
        bool decreasing = true;
        const std::size_t probe = std::min(arg + 4, ratios.size() - 1);
        for (std::size_t i = arg; i < probe; ++i) {
            if (i + 1 < ratios.size() && magnitude(grid.freqs[i + 1]) > magnitude(grid.freqs[i])) {
                if (ratios[i + 1] >= ratios[i]) decreasing = false;
            }
        }
        report.divergence_suspected = decreasing && report.value > 0.0;
    }
    return report;
}

MetricReport ds_distance(std::span<const Point2> sample_a, std::span<const Point2> sample_b,
                         const FourierGrid& grid) {
    const auto cf_a = empirical_cf(sample_a, grid);
    const auto cf_b = empirical_cf(sample_b, grid);
    auto report = ds_distance(cf_a, cf_b, grid);
    report.sample_a_size = sample_a.size();
    report.sample_b_size = sample_b.size();
    return report;
}

FourierGrid transformed_frequencies(const FourierGrid& grid, double a, double b) {
    if (!(a + b > 0.0)) {
        throw std::invalid_argument("transformed_frequencies: a + b must be positive");
    }
    // (xi1, eta1) = (xi + eta, a xi - b eta)  =>
    // xi = (b xi1 + eta1) / (a + b), eta = (a xi1 - eta1) / (a + b).
    FourierGrid out;
    out.s = grid.s;
    out.freqs.reserve(grid.freqs.size());
    const double inv = 1.0 / (a + b);
    for (const auto& f : grid.freqs) {
        out.freqs.push_back({(b * f[0] + f[1]) * inv, (a * f[0] - f[1]) * inv});
    }
    return out;
}

ContractionAudit contraction_audit(const TradeParams& tp, double s, std::size_t draws,
                                   RngStream& rng) {
    tp.require_valid();
    if (!(s > 0.0)) throw std::invalid_argument("contraction_audit: s must be positive");
    if (draws < 2) throw std::invalid_argument("contraction_audit: need at least 2 draws");
    KahanSum sum;
    KahanSum sum_sq;
    for (std::size_t i = 0; i < draws; ++i) {
        const CoefficientDraw cd = sample_coefficients(tp, rng);
        const double m = std::pow(std::abs(1.0 - cd.a - cd.b), s);
        sum.add(m);
        sum_sq.add(m * m);
    }
    const double n = static_cast<double>(draws);
    ContractionAudit audit;
    audit.estimate = sum.value() / n;
    const double var = std::max(0.0, (sum_sq.value() / n - audit.estimate * audit.estimate) *
                                         n / (n - 1.0));
    audit.std_error = std::sqrt(var / n);
    audit.passes = audit.estimate + 3.0 * audit.std_error < 1.0;
    return audit;
}

ContractionConstant contraction_constant_estimate(const TradeParams& tp, const FourierGrid& grid,
                                                  std::size_t draws, RngStream& rng) {
    tp.require_valid();
    if (grid.freqs.empty()) {
        throw std::invalid_argument("contraction_constant_estimate: empty grid");
    }
    if (draws < 2) throw std::invalid_argument("contraction_constant_estimate: need >= 2 draws");

    // Common coefficient draws across all grid points.
    std::vector<CoefficientDraw> coeffs(draws);
    for (auto& cd : coeffs) cd = sample_coefficients(tp, rng);

    ContractionConstant best;
    for (const auto& f : grid.freqs) {
        const double denom = f[0] * f[0] + f[1] * f[1];
        KahanSum sum;
        for (const auto& cd : coeffs) {
            const double xs = (1.0 - cd.a) * f[0] + cd.b * f[1];
            const double es = cd.a * f[0] + (1.0 - cd.b) * f[1];
            sum.add(std::pow((xs * xs + es * es) / denom, grid.s / 2.0));
        }
        const double avg = sum.value() / static_cast<double>(draws);
        if (avg > best.value) {
            best.value = avg;
            best.argmax = f;
        }
    }
    return best;
}

DissipationAudit dissipation_audit(const TradeParams& tp) {
    tp.require_valid();
    DissipationAudit audit;
    // Gap multiplier 1 - a - b = 1 - lambda - mu - mu_tilde when the exponents
    // sum to one; mu, mu_tilde independent zero-mean =>
    // E[(1 - a - b)^2] = (1 - lambda)^2 + 2 Var(mu).
    audit.factor = (1.0 - tp.lambda) * (1.0 - tp.lambda) + 2.0 * tp.noise.variance();
    audit.dissipative = audit.factor < 1.0;
    return audit;
}

double concentration_diagnostic(std::span<const AgentState> agents, double mean_x, double mean_y) {
    if (agents.empty()) throw std::invalid_argument("concentration_diagnostic: empty population");
    if (!(mean_x > 0.0) || !(mean_y > 0.0)) {
        throw std::invalid_argument("concentration_diagnostic: reference means must be positive");
    }
    KahanSum w_sq;
    KahanSum v_sq;
    for (const auto& a : agents) {
        const double v = mean_y * a.x + mean_x * a.y;
        const double w = mean_y * a.x - mean_x * a.y;
        w_sq.add(w * w);
        v_sq.add(v * v);
    }
    if (!(v_sq.value() > 0.0)) {
        throw std::invalid_argument("concentration_diagnostic: population has no wealth");
    }
    return w_sq.value() / v_sq.value();
}

namespace {

// Hill estimator over the k largest entries of an ascending-sorted sample.
double hill_on_sorted(std::span<const double> ascending, std::size_t k) {
    const std::size_t n = ascending.size();
    const double threshold = ascending[n - k - 1];
    KahanSum logs;
    for (std::size_t i = n - k; i < n; ++i) {
        logs.add(std::log(ascending[i] / threshold));
    }
    return static_cast<double>(k) / logs.value();
}

}  // namespace

TailReport tail_index(std::span<const double> sample, double fraction, std::size_t bootstrap,
                      std::uint64_t bootstrap_seed) {
    if (!(fraction > 0.0) || fraction > 0.2) {
        throw std::invalid_argument("tail_index: fraction must lie in (0, 0.2]");
    }
    std::vector<double> positive;
    positive.reserve(sample.size());
    for (double v : sample) {
        if (v > 0.0 && std::isfinite(v)) positive.push_back(v);
    }
    if (positive.size() < 1000) {
        throw std::invalid_argument("tail_index: need at least 1000 positive samples");
    }
    std::sort(positive.begin(), positive.end());
    const std::size_t n = positive.size();
    const auto tail_count = [n](double frac) {
        return std::max<std::size_t>(10, static_cast<std::size_t>(std::floor(frac * n)));
    };

    TailReport report;
    report.tail_fraction = fraction;
    report.tail_count = tail_count(fraction);
    report.hill_index = hill_on_sorted(positive, report.tail_count);

    // Bootstrap the tail exceedances: resample log-spacings over the threshold.
    if (bootstrap >= 2) {
        const std::size_t k = report.tail_count;
        const double threshold = positive[n - k - 1];
        std::vector<double> log_exc(k);
        for (std::size_t i = 0; i < k; ++i) {
            log_exc[i] = std::log(positive[n - k + i] / threshold);
        }
        RngStream rng(bootstrap_seed);
        KahanSum est;
        KahanSum est_sq;
        for (std::size_t b = 0; b < bootstrap; ++b) {
            KahanSum resum;
            for (std::size_t i = 0; i < k; ++i) {
                resum.add(log_exc[rng.next_u64() % k]);
            }
            const double h = static_cast<double>(k) / resum.value();
            est.add(h);
            est_sq.add(h * h);
        }
        const double bn = static_cast<double>(bootstrap);
        const double mean_h = est.value() / bn;
        report.hill_bootstrap_se =
            std::sqrt(std::max(0.0, (est_sq.value() / bn - mean_h * mean_h) * bn / (bn - 1.0)));
    }

    // Rank regression: slope of log(rank) against log(value) over the tail.
    {
        const std::size_t k = report.tail_count;
        std::vector<double> log_val(k);
        std::vector<double> log_rank(k);
        for (std::size_t i = 0; i < k; ++i) {
            log_val[i] = std::log(positive[n - k + i]);
            log_rank[i] = std::log(static_cast<double>(k - i));
        }
        report.rank_regression_index = -ols_fit(log_val, log_rank).slope;
    }

    report.hill_top1 = hill_on_sorted(positive, tail_count(0.01));
    report.hill_top10 = hill_on_sorted(positive, tail_count(0.10));
    report.thin_tailed = report.hill_top1 > 1.1 * report.hill_top10;
    return report;
}

std::vector<MomentRateRow> moment_rate_report(std::span<const double> taus,
                                              const std::vector<std::vector<double>>& moments,
                                              std::span<const double> orders, double lambda,
                                              double sigma2_sq) {
    if (taus.size() != moments.size() || taus.size() < 3) {
        throw std::invalid_argument("moment_rate_report: need >= 3 rows matching taus");
    }
    std::vector<MomentRateRow> rows;
    rows.reserve(orders.size());
    for (std::size_t j = 0; j < orders.size(); ++j) {
        std::vector<double> log_m;
        std::vector<double> ts;
        for (std::size_t i = 0; i < taus.size(); ++i) {
            if (moments[i].size() != orders.size()) {
                throw std::invalid_argument("moment_rate_report: ragged moment table");
            }
            if (moments[i][j] > 0.0) {
                log_m.push_back(std::log(moments[i][j]));
                ts.push_back(taus[i]);
            }
        }
        MomentRateRow row;
        row.order = orders[j];
        row.measured_rate = ols_fit(ts, log_m).slope;
        row.predicted_rate = power_moment_rate(orders[j], lambda, sigma2_sq);
        row.sign_consistent = (row.measured_rate > 0.0) == (row.predicted_rate > 0.0) ||
                              std::abs(row.predicted_rate) < 1e-12;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace kinex
