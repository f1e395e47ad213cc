#include "kinex/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kinex/numeric.hpp"

namespace kinex {

namespace {

void require_population(std::size_t n) {
    if (n < 2) throw std::invalid_argument("ensemble needs at least 2 agents");
}

// Trade between agents i and j, first agent's holdings from the share rule,
// partner by subtraction.
void apply_pair_trade(Ensemble& e, std::size_t i, std::size_t j, const TradeParams& tp,
                      RngStream& rng) {
    AgentState& a = e.agents[i];
    AgentState& b = e.agents[j];
    if (pool_degenerate(a, b)) {
        ++e.skipped_trades;
        return;
    }
    if (tp.variant == TradeVariant::EdgeworthProportional) {
        const UtilityParams u = sample_random_exponents(tp, rng);
        const double mu = tp.noise.draw(rng);
        const double mu_tilde = tp.noise.draw(rng);
        const VariantGoods post = trade_goods_variant(a, b, tp.lambda, u, mu, mu_tilde);
        if (post.clamped) ++e.clamped_trades;
        a = post.a;
        b = post.b;
    } else {
        const CoefficientDraw cd = sample_coefficients(tp, rng);
        auto [a_post, b_post] = trade_goods(a, b, cd);
        a = a_post;
        b = b_post;
    }
}

void apply_linear_update(Ensemble& e, std::size_t i, const TradeParams& tp, RngStream& rng) {
    const CoefficientDraw cd = sample_coefficients(tp, rng);
    AgentState& a = e.agents[i];
    const double x_star = a.x + cd.a * ((e.mean_x / e.mean_y) * a.y - a.x);
    const double y_star = a.y + cd.b * ((e.mean_y / e.mean_x) * a.x - a.y);
    a.x = x_star;
    a.y = y_star;
}

void require_linear_params(const Ensemble& e, const TradeParams& tp) {
    if (tp.variant != TradeVariant::EdgeworthDifference) {
        throw std::invalid_argument(
            "linear mode is defined for the difference trade rule only");
    }
    if (e.mean_x <= 0.0 || e.mean_y <= 0.0) {
        throw std::invalid_argument("linear mode needs positive population means");
    }
}

}  // namespace

Ensemble Ensemble::from_agents(std::vector<AgentState> agents) {
    require_population(agents.size());
    Ensemble e;
    e.agents = std::move(agents);
    KahanSum sx, sy;
    for (const auto& a : e.agents) {
        if (!std::isfinite(a.x) || !std::isfinite(a.y) || a.x < 0.0 || a.y < 0.0) {
            throw std::invalid_argument("agent holdings must be finite and non-negative");
        }
        sx.add(a.x);
        sy.add(a.y);
    }
    e.total_x = sx.value();
    e.total_y = sy.value();
    e.mean_x = e.total_x / static_cast<double>(e.agents.size());
    e.mean_y = e.total_y / static_cast<double>(e.agents.size());
    return e;
}

std::pair<double, double> Ensemble::recompute_totals() const {
    KahanSum sx, sy;
    for (const auto& a : agents) {
        sx.add(a.x);
        sy.add(a.y);
    }
    return {sx.value(), sy.value()};
}

Ensemble make_point_ensemble(std::size_t n, double x, double y) {
    require_population(n);
    return Ensemble::from_agents(std::vector<AgentState>(n, AgentState{x, y}));
}

Ensemble make_two_point_ensemble(std::size_t n, double x, double y, double dx, double dy) {
    require_population(n);
    if (n % 2 != 0) throw std::invalid_argument("two-point ensemble needs an even count");
    std::vector<AgentState> agents(n);
    for (std::size_t i = 0; i < n; ++i) {
        agents[i] = (i % 2 == 0) ? AgentState{x + dx, y - dy} : AgentState{x - dx, y + dy};
    }
    return Ensemble::from_agents(std::move(agents));
}

Ensemble make_uniform_ensemble(std::size_t n, double x_lo, double x_hi, double y_lo, double y_hi,
                               RngStream& rng) {
    require_population(n);
    if (!(x_lo >= 0.0) || !(x_lo <= x_hi) || !(y_lo >= 0.0) || !(y_lo <= y_hi)) {
        throw std::invalid_argument("uniform rectangle needs 0 <= lo <= hi per good");
    }
    std::vector<AgentState> agents(n);
    for (auto& a : agents) {
        a.x = rng.uniform(x_lo, x_hi);
        a.y = rng.uniform(y_lo, y_hi);
    }
    return Ensemble::from_agents(std::move(agents));
}

Ensemble make_exponential_ensemble(std::size_t n, double mean_x, double mean_y, RngStream& rng) {
    require_population(n);
    if (!(mean_x > 0.0) || !(mean_y > 0.0)) {
        throw std::invalid_argument("exponential means must be positive");
    }
    std::vector<AgentState> agents(n);
    for (auto& a : agents) {
        a.x = -mean_x * std::log1p(-rng.uniform01());
        a.y = -mean_y * std::log1p(-rng.uniform01());
    }
    return Ensemble::from_agents(std::move(agents));
}

void step_nonlinear(Ensemble& e, const TradeParams& tp, RngStream& rng, double rate) {
    const std::size_t n = e.size();
    require_population(n);
    const auto i = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
    auto j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n - 1));
    if (j >= i) ++j;
    apply_pair_trade(e, i, j, tp, rng);
    e.time += 2.0 / (static_cast<double>(n) * rate);
}

void step_linear(Ensemble& e, const TradeParams& tp, RngStream& rng, double rate) {
    const std::size_t n = e.size();
    require_population(n);
    require_linear_params(e, tp);
    const auto i = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
    apply_linear_update(e, i, tp, rng);
    e.time += 1.0 / (static_cast<double>(n) * rate);
}

namespace {

// Fisher-Yates shuffle driven by the simulation stream.
void shuffle_indices(std::vector<std::size_t>& idx, RngStream& rng) {
    for (std::size_t k = idx.size(); k > 1; --k) {
        const auto r = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(k));
        std::swap(idx[k - 1], idx[r]);
    }
}

}  // namespace

void run_simulation(Ensemble& e, const TradeParams& tp, const SimSettings& settings,
                    RngStream& rng, const SnapshotCallback& on_snapshot) {
    tp.require_valid();
    require_population(e.size());
    if (settings.mode == InteractionMode::Linear) require_linear_params(e, tp);
    if (!(settings.rate > 0.0)) throw std::invalid_argument("interaction rate must be positive");
    if (!(settings.horizon >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
    if (settings.snapshot_interval < 0.0) {
        throw std::invalid_argument("snapshot interval must be non-negative");
    }

    double next_snapshot = settings.snapshot_interval > 0.0
                               ? e.time + settings.snapshot_interval
                               : settings.horizon;
    if (on_snapshot) on_snapshot(e);
    if (settings.horizon <= e.time) return;

    const std::size_t n = e.size();
    std::vector<std::size_t> order;
    if (settings.selection == SelectionScheme::Sweep) {
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
    }

    auto emit_due = [&]() {
        while (on_snapshot && settings.snapshot_interval > 0.0 &&
               e.time >= next_snapshot - 1e-12 && next_snapshot < settings.horizon - 1e-12) {
            on_snapshot(e);
            next_snapshot += settings.snapshot_interval;
        }
    };

    if (settings.selection == SelectionScheme::Uniform) {
        while (e.time < settings.horizon - 1e-12) {
            if (settings.mode == InteractionMode::Nonlinear) {
                step_nonlinear(e, tp, rng, settings.rate);
            } else {
                step_linear(e, tp, rng, settings.rate);
            }
            emit_due();
        }
    } else {
        while (e.time < settings.horizon - 1e-12) {
            shuffle_indices(order, rng);
            if (settings.mode == InteractionMode::Nonlinear) {
                for (std::size_t k = 0; k + 1 < n; k += 2) {
                    apply_pair_trade(e, order[k], order[k + 1], tp, rng);
                    e.time += 2.0 / (static_cast<double>(n) * settings.rate);
                    emit_due();
                    if (e.time >= settings.horizon - 1e-12) break;
                }
            } else {
                for (std::size_t k = 0; k < n; ++k) {
                    apply_linear_update(e, order[k], tp, rng);
                    e.time += 1.0 / (static_cast<double>(n) * settings.rate);
                    emit_due();
                    if (e.time >= settings.horizon - 1e-12) break;
                }
            }
        }
    }
    if (on_snapshot) on_snapshot(e);
}

TradeParams quasi_invariant_scaling(const TradeParams& tp, double eps) {
    if (!(eps > 0.0) || !(eps <= 1.0)) {
        throw std::invalid_argument("scaling parameter must lie in (0,1]");
    }
    TradeParams scaled = tp;
    scaled.lambda = eps * tp.lambda;
    scaled.noise.delta = std::sqrt(eps) * tp.noise.delta;
    const auto errors = scaled.validation_errors();
    if (!errors.empty()) {
        throw std::invalid_argument("scaled trade parameters inadmissible: " + errors.front());
    }
    return scaled;
}

void quasi_invariant_run(Ensemble& e, const TradeParams& tp, double eps, double tau_horizon,
                         double snapshot_interval, RngStream& rng,
                         const SnapshotCallback& on_snapshot) {
    const TradeParams scaled = quasi_invariant_scaling(tp, eps);
    SimSettings settings;
    settings.mode = InteractionMode::Linear;
    settings.selection = SelectionScheme::Uniform;
    settings.horizon = tau_horizon / eps;
    settings.snapshot_interval = snapshot_interval > 0.0 ? snapshot_interval / eps : 0.0;

    SnapshotCallback rescaled;
    if (on_snapshot) {
        rescaled = [eps, &on_snapshot](const Ensemble& snap) {
            // Report macroscopic time tau = eps * t; the engine owns a non-const
            // ensemble, so restoring the kinetic clock afterwards is safe.
            auto& mut = const_cast<Ensemble&>(snap);
            const double kinetic_time = mut.time;
            mut.time = kinetic_time * eps;
            on_snapshot(mut);
            mut.time = kinetic_time;
        };
    }
    run_simulation(e, scaled, settings, rng, rescaled);
    e.time *= eps;
}

VWSample to_vw(const Ensemble& e) {
    VWSample s;
    s.v.reserve(e.size());
    s.w.reserve(e.size());
    for (const auto& a : e.agents) {
        s.v.push_back(e.mean_y * a.x + e.mean_x * a.y);
        s.w.push_back(e.mean_y * a.x - e.mean_x * a.y);
    }
    return s;
}

}  // namespace kinex
