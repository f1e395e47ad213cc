#pragma once

// Interacting-agent dynamics. Nonlinear mode draws random pairs and applies the
// goods-space trade (pair totals conserved by construction); linear mode updates
// one agent at a time against the frozen population means. Each pair trade
// advances time by 2/(N*rate), each single-agent update by 1/(N*rate), so unit
// time corresponds to one interaction per agent on average.

#include <cstdint>
#include <functional>
#include <vector>

#include "kinex/rng.hpp"
#include "kinex/trade.hpp"

namespace kinex {

struct Ensemble {
    std::vector<AgentState> agents;
    double total_x = 0.0;  // maintained conserved totals (never recomputed)
    double total_y = 0.0;
    double mean_x = 0.0;  // frozen at construction; linear mode trades against these
    double mean_y = 0.0;
    double time = 0.0;
    std::uint64_t skipped_trades = 0;  // degenerate-pool skips
    std::uint64_t clamped_trades = 0;  // share clamps in the proportional variant

    std::size_t size() const { return agents.size(); }

    static Ensemble from_agents(std::vector<AgentState> agents);

    // Fixed-order compensated re-summation for conservation audits.
    std::pair<double, double> recompute_totals() const;
};

Ensemble make_point_ensemble(std::size_t n, double x, double y);
// Alternating (x + dx, y - dy) / (x - dx, y + dy); n must be even.
Ensemble make_two_point_ensemble(std::size_t n, double x, double y, double dx, double dy);
Ensemble make_uniform_ensemble(std::size_t n, double x_lo, double x_hi, double y_lo, double y_hi,
                               RngStream& rng);
Ensemble make_exponential_ensemble(std::size_t n, double mean_x, double mean_y, RngStream& rng);

enum class InteractionMode { Nonlinear, Linear };
// `Uniform` draws interaction partners independently each step (the kinetic
// jump process); `Sweep` runs shuffled passes where every agent interacts
// exactly once per unit time (a random matching in nonlinear mode).
enum class SelectionScheme { Uniform, Sweep };

struct SimSettings {
    InteractionMode mode = InteractionMode::Nonlinear;
    SelectionScheme selection = SelectionScheme::Uniform;
    double rate = 1.0;               // interactions per unit time per agent
    double horizon = 1.0;            // stop once time >= horizon
    double snapshot_interval = 0.0;  // 0 = only initial and final snapshots
};

// One random pair trade; degenerate pools are skipped and counted, time
// advances either way.
void step_nonlinear(Ensemble& e, const TradeParams& tp, RngStream& rng, double rate = 1.0);

// One single-agent mean-field update against the frozen means.
void step_linear(Ensemble& e, const TradeParams& tp, RngStream& rng, double rate = 1.0);

using SnapshotCallback = std::function<void(const Ensemble&)>;

// Advances `e` to the horizon, invoking `on_snapshot` at t=0, at every crossing
// of the snapshot interval, and at the horizon. Deterministic for a fixed seed.
void run_simulation(Ensemble& e, const TradeParams& tp, const SimSettings& settings,
                    RngStream& rng, const SnapshotCallback& on_snapshot);

// Trade parameters under the quasi-invariant scaling: lambda -> eps*lambda,
// noise half-width -> sqrt(eps)*delta (variance eps*sigma^2), so sigma^2/lambda
// is fixed. Throws when the scaled noise breaks admissibility.
TradeParams quasi_invariant_scaling(const TradeParams& tp, double eps);

// Runs the scaled linear dynamics to macroscopic time tau_horizon = eps * t.
// Snapshot callbacks observe the ensemble with `time` in macroscopic units.
void quasi_invariant_run(Ensemble& e, const TradeParams& tp, double eps, double tau_horizon,
                         double snapshot_interval, RngStream& rng,
                         const SnapshotCallback& on_snapshot);

// Diagonalized per-agent coordinates v = m_y x + m_x y, w = m_y x - m_x y,
// taken against the ensemble's frozen means.
struct VWSample {
    std::vector<double> v;
    std::vector<double> w;
};
VWSample to_vw(const Ensemble& e);

}  // namespace kinex
