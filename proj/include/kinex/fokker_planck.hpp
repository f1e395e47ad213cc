#pragma once

// Diffusion-limit particle dynamics in the diagonalized coordinates
// (v, w) = (m_y x + m_x y, m_y x - m_x y):
//
//   dv = lambda (alpha - beta) w dtau + sqrt(sigma1_sq) |w| dW1
//   dw = -lambda w dtau            + sqrt(sigma2_sq) |w| dW2
//
// integrated with Euler-Maruyama (Ito reading, independent drivers). The
// w-equation is a closed multiplicative diffusion with an exact lognormal
// solution; both the pathwise sampler and the moment law are exposed as
// oracles so the integrator can be verified against them.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kinex/rng.hpp"

namespace kinex {

struct VWParticle {
    double v = 0.0;  // requires v >= 0 and |w| <= v
    double w = 0.0;
};

struct FpParams {
    double lambda = 0.5;
    double alpha = 0.5;
    double beta = 0.5;       // must equal 1 - alpha
    double sigma1_sq = 0.0;  // variance rate of the v-driver, <(mu - mu_tilde)^2>
    double sigma2_sq = 0.0;  // variance rate of the w-driver, <(mu + mu_tilde)^2>
    double dtau = 0.0;       // 0 = use default_dtau()

    // Conservative default keeping per-step relative changes ~1%.
    double default_dtau() const;
    double step() const { return dtau > 0.0 ? dtau : default_dtau(); }
    std::vector<std::string> validation_errors() const;  // all violated invariants
    void require_valid() const;

    // Moment threshold: E|w|^(1+r) grows iff r >= 2*lambda/sigma2_sq.
    double moment_threshold() const { return 2.0 * lambda / sigma2_sq; }
};

// One Euler-Maruyama step with explicit standard-normal draws; w = 0 is an
// exact fixed point of both equations.
VWParticle sde_step(const VWParticle& p, const FpParams& fp, double dtau, double xi1, double xi2);
VWParticle sde_step(const VWParticle& p, const FpParams& fp, RngStream& rng);

// Exact moment law: E|w(tau)|^(1+r) = |w0|^(1+r) exp[(1+r)(r sigma2_sq/2 - lambda) tau].
double w_moment_oracle(double w0, double r, const FpParams& fp, double tau);

// Exact pathwise solution of the w-equation (sign of w0 preserved):
// w(tau) = w0 exp[(-lambda - sigma2_sq/2) tau + sqrt(sigma2_sq) W_tau].
double w_path_oracle(double w0, const FpParams& fp, double tau, double brownian_increment);
double w_path_oracle_sample(double w0, const FpParams& fp, double tau, RngStream& rng);

// CDF of the w_path_oracle law started from w0 (one-sided; sign preserved).
double w_path_oracle_cdf(double w0, const FpParams& fp, double tau, double x);

struct FpSnapshot {
    double tau = 0.0;
    const std::vector<VWParticle>& particles;
    std::uint64_t support_projections = 0;  // times |w| > v forced v := |w|
};

using FpSnapshotCallback = std::function<void(const FpSnapshot&)>;

struct FpRunResult {
    double tau = 0.0;
    std::uint64_t support_projections = 0;
};

// Integrates all particles to tau_horizon; particles leaving |w| <= v are
// projected back (v := |w|) and counted. Snapshots fire at tau = 0, at every
// crossing of snapshot_interval, and at the horizon. `workers` > 1 splits the
// particle range across threads with per-worker derived streams (determinism
// contract: fixed seed AND fixed worker count).
FpRunResult run_fp(std::vector<VWParticle>& particles, const FpParams& fp, double tau_horizon,
                   double snapshot_interval, std::uint64_t master_seed,
                   const FpSnapshotCallback& on_snapshot, unsigned workers = 1);

// E|w|^order and E[v^order] trajectories sampled at every snapshot time.
struct MomentTrajectory {
    std::vector<double> taus;
    std::vector<double> orders;
    std::vector<std::vector<double>> w_abs_moments;  // [time][order]
    std::vector<std::vector<double>> v_moments;
};

MomentTrajectory fp_moment_trajectory(std::vector<VWParticle>& particles, const FpParams& fp,
                                      double tau_horizon, double snapshot_interval,
                                      std::vector<double> orders, std::uint64_t master_seed,
                                      unsigned workers = 1);

}  // namespace kinex
