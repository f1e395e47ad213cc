#include "kinex/fokker_planck.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "kinex/numeric.hpp"

namespace kinex {

double FpParams::default_dtau() const {
    const double scale = std::max(lambda, sigma2_sq);
    return scale > 0.0 ? 0.01 / scale : 0.01;
}

std::vector<std::string> FpParams::validation_errors() const {
    std::vector<std::string> errors;
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        errors.push_back("lambda must be positive and finite");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0) || std::abs(alpha + beta - 1.0) > 1e-12) {
        errors.push_back("utility exponents must lie in (0,1) and sum to 1");
    }
    if (!(sigma1_sq >= 0.0) || !std::isfinite(sigma1_sq)) {
        errors.push_back("sigma1_sq must be non-negative and finite");
    }
    if (!(sigma2_sq >= 0.0) || !std::isfinite(sigma2_sq)) {
        errors.push_back("sigma2_sq must be non-negative and finite");
    }
    if (dtau < 0.0 || !std::isfinite(dtau)) {
        errors.push_back("time step must be non-negative and finite");
    }
    return errors;
}

void FpParams::require_valid() const {
    const auto errors = validation_errors();
    if (errors.empty()) return;
    std::string joined;
    for (const auto& e : errors) {
        if (!joined.empty()) joined += "; ";
        joined += e;
    }
    throw std::invalid_argument(joined);
}

VWParticle sde_step(const VWParticle& p, const FpParams& fp, double dtau, double xi1,
                    double xi2) {
    const double aw = std::abs(p.w);
    const double sq = std::sqrt(dtau);
    VWParticle out;
    out.v = p.v + fp.lambda * (fp.alpha - fp.beta) * p.w * dtau +
            std::sqrt(fp.sigma1_sq) * aw * sq * xi1;
    out.w = p.w - fp.lambda * p.w * dtau + std::sqrt(fp.sigma2_sq) * aw * sq * xi2;
    return out;
}

VWParticle sde_step(const VWParticle& p, const FpParams& fp, RngStream& rng) {
    const double xi1 = rng.normal();
    const double xi2 = rng.normal();
    return sde_step(p, fp, fp.step(), xi1, xi2);
}

double w_moment_oracle(double w0, double r, const FpParams& fp, double tau) {
    if (!(r > -1.0)) throw std::invalid_argument("moment exponent must exceed -1");
    const double p = 1.0 + r;
    return std::pow(std::abs(w0), p) * std::exp(power_moment_rate(p, fp.lambda, fp.sigma2_sq) * tau);
}

double w_path_oracle(double w0, const FpParams& fp, double tau, double brownian_increment) {
    return w0 * std::exp((-fp.lambda - fp.sigma2_sq / 2.0) * tau +
                         std::sqrt(fp.sigma2_sq) * brownian_increment);
}

double w_path_oracle_sample(double w0, const FpParams& fp, double tau, RngStream& rng) {
    return w_path_oracle(w0, fp, tau, std::sqrt(tau) * rng.normal());
}

double w_path_oracle_cdf(double w0, const FpParams& fp, double tau, double x) {
    if (w0 == 0.0) return x >= 0.0 ? 1.0 : 0.0;
    if (fp.sigma2_sq == 0.0) {
        const double point = w0 * std::exp(-fp.lambda * tau);
        return x >= point ? 1.0 : 0.0;
    }
    const double m = (-fp.lambda - fp.sigma2_sq / 2.0) * tau;
    const double sd = std::sqrt(fp.sigma2_sq * tau);
    if (w0 > 0.0) {
        if (x <= 0.0) return 0.0;
        return normal_cdf((std::log(x / w0) - m) / sd);
    }
    if (x >= 0.0) return 1.0;
    return 1.0 - normal_cdf((std::log(x / w0) - m) / sd);
}

namespace {

void require_particles(const std::vector<VWParticle>& particles) {
    if (particles.empty()) throw std::invalid_argument("particle set is empty");
    for (const auto& p : particles) {
        if (!std::isfinite(p.v) || !std::isfinite(p.w) || p.v < 0.0 || std::abs(p.w) > p.v) {
            throw std::invalid_argument("particles must satisfy v >= 0 and |w| <= v");
        }
    }
}

}  // namespace

FpRunResult run_fp(std::vector<VWParticle>& particles, const FpParams& fp, double tau_horizon,
                   double snapshot_interval, std::uint64_t master_seed,
                   const FpSnapshotCallback& on_snapshot, unsigned workers) {
    fp.require_valid();
    require_particles(particles);
    if (!(tau_horizon >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
    if (snapshot_interval < 0.0) throw std::invalid_argument("snapshot interval must be non-negative");
    if (workers == 0) workers = 1;

    const double dtau = fp.step();
    const auto total_steps = static_cast<std::uint64_t>(std::ceil(tau_horizon / dtau - 1e-9));
    const auto steps_per_snapshot =
        snapshot_interval > 0.0
            ? std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(snapshot_interval / dtau)))
            : (total_steps > 0 ? total_steps : 1);

    std::uint64_t projections = 0;
    auto emit = [&](double tau) {
        if (on_snapshot) on_snapshot(FpSnapshot{tau, particles, projections});
    };
    emit(0.0);

    const std::size_t n = particles.size();
    const unsigned used_workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, std::max<std::size_t>(1, n)));

    std::vector<RngStream> streams;
    streams.reserve(used_workers);
    for (unsigned k = 0; k < used_workers; ++k) {
        streams.push_back(RngStream::derive(master_seed, stream_tag::kWorkerBase + k));
    }

    auto advance_chunk = [&](std::size_t lo, std::size_t hi, RngStream& rng,
                             std::uint64_t steps) -> std::uint64_t {
        std::uint64_t local_projections = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            VWParticle p = particles[i];
            for (std::uint64_t s = 0; s < steps; ++s) {
                const double xi1 = rng.normal();
                const double xi2 = rng.normal();
                p = sde_step(p, fp, dtau, xi1, xi2);
                if (std::abs(p.w) > p.v) {
                    p.v = std::abs(p.w);
                    ++local_projections;
                }
            }
            particles[i] = p;
        }
        return local_projections;
    };

    std::uint64_t done = 0;
    while (done < total_steps) {
        const std::uint64_t batch = std::min<std::uint64_t>(steps_per_snapshot, total_steps - done);
        if (used_workers == 1) {
            projections += advance_chunk(0, n, streams[0], batch);
        } else {
            const std::size_t chunk = (n + used_workers - 1) / used_workers;
            std::vector<std::uint64_t> worker_projections(used_workers, 0);
            std::vector<std::thread> pool;
            pool.reserve(used_workers);
            for (unsigned k = 0; k < used_workers; ++k) {
                const std::size_t lo = std::min<std::size_t>(n, k * chunk);
                const std::size_t hi = std::min<std::size_t>(n, lo + chunk);
                pool.emplace_back([&, k, lo, hi, batch]() {
                    worker_projections[k] = advance_chunk(lo, hi, streams[k], batch);
                });
            }
            for (auto& t : pool) t.join();
            for (auto wp : worker_projections) projections += wp;
        }
        done += batch;
        emit(static_cast<double>(done) * dtau);
    }
    return FpRunResult{static_cast<double>(total_steps) * dtau, projections};
}

MomentTrajectory fp_moment_trajectory(std::vector<VWParticle>& particles, const FpParams& fp,
                                      double tau_horizon, double snapshot_interval,
                                      std::vector<double> orders, std::uint64_t master_seed,
                                      unsigned workers) {
    MomentTrajectory mt;
    mt.orders = std::move(orders);
    const auto n = static_cast<double>(particles.size());
    run_fp(
        particles, fp, tau_horizon, snapshot_interval, master_seed,
        [&](const FpSnapshot& snap) {
            mt.taus.push_back(snap.tau);
            std::vector<double> wrow, vrow;
            wrow.reserve(mt.orders.size());
            vrow.reserve(mt.orders.size());
            for (double order : mt.orders) {
                KahanSum ws, vs;
                for (const auto& p : snap.particles) {
                    ws.add(std::pow(std::abs(p.w), order));
                    vs.add(std::pow(p.v, order));
                }
                wrow.push_back(ws.value() / n);
                vrow.push_back(vs.value() / n);
            }
            mt.w_abs_moments.push_back(std::move(wrow));
            mt.v_moments.push_back(std::move(vrow));
        },
        workers);
    return mt;
}

}  // namespace kinex
