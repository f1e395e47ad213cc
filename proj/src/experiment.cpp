#include "kinex/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "kinex/analysis.hpp"
#include "kinex/ensemble.hpp"
#include "kinex/fokker_planck.hpp"
#include "kinex/numeric.hpp"
#include "kinex/snapshot_io.hpp"
#include "kinex/version.hpp"

namespace kinex {

namespace {

struct RunContext {
    const ExperimentConfig& cfg;
    std::filesystem::path out;
    std::vector<std::filesystem::path> files;
    std::ostringstream report;

    std::string fmt(double v) const { return format_double(v, cfg.output_precision); }
    void note(std::filesystem::path p) { files.push_back(std::move(p)); }
};

void write_text_file(RunContext& ctx, const std::filesystem::path& file,
                     const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError(file.string() + ": cannot open for writing");
    out << content;
    if (!out) throw IoError(file.string() + ": write failed");
    ctx.note(file);
}

// Two-column whitespace-separated figure data.
void write_plot(RunContext& ctx, const std::string& name, const std::vector<double>& xs,
                const std::vector<double>& ys) {
    std::ostringstream body;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        body << ctx.fmt(xs[i]) << ' ' << ctx.fmt(ys[i]) << '\n';
    }
    write_text_file(ctx, ctx.out / "plots" / name, body.str());
}

std::string snapshot_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%06d.csv", index);
    return buf;
}

std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Ensemble build_initial_ensemble(const ExperimentConfig& cfg) {
    switch (cfg.initial) {
        case InitialKind::Point:
            return make_point_ensemble(cfg.agents, cfg.initial_x, cfg.initial_y);
        case InitialKind::TwoPoint:
            return make_two_point_ensemble(cfg.agents, cfg.initial_x, cfg.initial_y,
                                           cfg.initial_dx, cfg.initial_dy);
        case InitialKind::Uniform: {
            RngStream rng = RngStream::derive(cfg.seed, stream_tag::kInitialCondition);
            return make_uniform_ensemble(cfg.agents, cfg.initial_x - cfg.initial_dx,
                                         cfg.initial_x + cfg.initial_dx,
                                         cfg.initial_y - cfg.initial_dy,
                                         cfg.initial_y + cfg.initial_dy, rng);
        }
        case InitialKind::Exponential: {
            RngStream rng = RngStream::derive(cfg.seed, stream_tag::kInitialCondition);
            return make_exponential_ensemble(cfg.agents, cfg.initial_x, cfg.initial_y, rng);
        }
        case InitialKind::File:
            return Ensemble::from_agents(read_agent_snapshot(cfg.initial_snapshot).agents);
    }
    throw std::logic_error("unhandled initial kind");
}

std::vector<VWParticle> build_initial_particles(const ExperimentConfig& cfg) {
    if (cfg.initial == InitialKind::File) {
        return read_particle_snapshot(cfg.initial_snapshot).particles;
    }
    return std::vector<VWParticle>(cfg.agents, VWParticle{cfg.initial_v, cfg.initial_w});
}

std::vector<Point2> to_points(const std::vector<AgentState>& agents) {
    std::vector<Point2> pts;
    pts.reserve(agents.size());
    for (const auto& a : agents) pts.push_back({a.x, a.y});
    return pts;
}

double safe_concentration(const Ensemble& e) {
    if (!(e.mean_x > 0.0) || !(e.mean_y > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return concentration_diagnostic(e.agents, e.mean_x, e.mean_y);
}

void conservation_block(RunContext& ctx, const Ensemble& e, double init_mean_x,
                        double init_mean_y) {
    const auto [rx, ry] = e.recompute_totals();
    const double n = static_cast<double>(e.size());
    const double drift_x =
        init_mean_x > 0.0 ? std::abs(rx / n / init_mean_x - 1.0) : std::abs(rx / n);
    const double drift_y =
        init_mean_y > 0.0 ? std::abs(ry / n / init_mean_y - 1.0) : std::abs(ry / n);
    ctx.report << "[conservation]\n"
               << "total_x_maintained = " << ctx.fmt(e.total_x) << "\n"
               << "total_x_recomputed = " << ctx.fmt(rx) << "\n"
               << "total_y_maintained = " << ctx.fmt(e.total_y) << "\n"
               << "total_y_recomputed = " << ctx.fmt(ry) << "\n"
               << "mean_x_relative_drift = " << ctx.fmt(drift_x) << "\n"
               << "mean_y_relative_drift = " << ctx.fmt(drift_y) << "\n"
               << "skipped_trades = " << e.skipped_trades << "\n"
               << "clamped_trades = " << e.clamped_trades << "\n";
}

void run_population(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    Ensemble e = build_initial_ensemble(cfg);
    const double init_mean_x = e.mean_x;
    const double init_mean_y = e.mean_y;

    SimSettings settings;
    settings.mode = cfg.kind == ExperimentKind::Nonlinear ? InteractionMode::Nonlinear
                                                          : InteractionMode::Linear;
    settings.selection = cfg.selection;
    settings.horizon = cfg.horizon;
    settings.snapshot_interval = cfg.snapshot_interval;

    RngStream rng = RngStream::derive(cfg.seed, stream_tag::kSimulation);
    std::vector<std::vector<double>> rows;
    int index = 0;
    const double n = static_cast<double>(e.size());
    run_simulation(e, cfg.trade, settings, rng, [&](const Ensemble& snap) {
        const auto file = ctx.out / "snapshots" / snapshot_name(index++);
        write_agent_snapshot(file, snap.time, snap.agents, cfg.output_precision);
        ctx.note(file);
        // Means are recomputed (the drifting empirical diagnostic in mean-field
        // mode); totals are the maintained conserved quantities.
        const auto [rx, ry] = snap.recompute_totals();
        rows.push_back({snap.time, rx / n, ry / n, snap.total_x, snap.total_y,
                        safe_concentration(snap)});
    });

    const auto moments = ctx.out / "moments.csv";
    write_csv_table(moments, {"t", "mean_x", "mean_y", "total_x", "total_y", "concentration"},
                    rows, cfg.output_precision);
    ctx.note(moments);

    std::vector<double> ts, concs;
    for (const auto& r : rows) {
        ts.push_back(r[0]);
        concs.push_back(r[5]);
    }
    write_plot(ctx, "concentration.dat", ts, concs);

    conservation_block(ctx, e, init_mean_x, init_mean_y);
    ctx.report << "[dissipation]\n";
    const auto dis = dissipation_audit(cfg.trade);
    ctx.report << "gap_second_moment_factor = " << ctx.fmt(dis.factor) << "\n"
               << "dissipative = " << (dis.dissipative ? "true" : "false") << "\n"
               << "final_concentration = " << ctx.fmt(concs.back()) << "\n";
}

void run_particles(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    std::vector<VWParticle> particles = build_initial_particles(cfg);
    const auto& orders = cfg.moment_orders;

    std::vector<double> taus;
    std::vector<std::vector<double>> w_moments;
    std::vector<std::vector<double>> v_moments;
    int index = 0;

    const FpRunResult res = run_fp(
        particles, cfg.fp, cfg.horizon, cfg.snapshot_interval, cfg.seed,
        [&](const FpSnapshot& snap) {
            const auto file = ctx.out / "snapshots" / snapshot_name(index++);
            write_particle_snapshot(file, snap.tau, snap.particles, cfg.output_precision);
            ctx.note(file);
            const double n = static_cast<double>(snap.particles.size());
            std::vector<double> wrow, vrow;
            for (double p : orders) {
                KahanSum ws, vs;
                for (const auto& particle : snap.particles) {
                    ws.add(std::pow(std::abs(particle.w), p));
                    vs.add(std::pow(particle.v, p));
                }
                wrow.push_back(ws.value() / n);
                vrow.push_back(vs.value() / n);
            }
            taus.push_back(snap.tau);
            w_moments.push_back(std::move(wrow));
            v_moments.push_back(std::move(vrow));
        },
        cfg.workers);

    // moments.csv: tau, E|w|^p per order, E[v^p] per order.
    std::vector<std::string> header{"tau"};
    for (double p : orders) header.push_back("w_abs_moment_" + format_double(p));
    for (double p : orders) header.push_back("v_moment_" + format_double(p));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        std::vector<double> row{taus[i]};
        row.insert(row.end(), w_moments[i].begin(), w_moments[i].end());
        row.insert(row.end(), v_moments[i].begin(), v_moments[i].end());
        rows.push_back(std::move(row));
    }
    const auto moments = ctx.out / "moments.csv";
    write_csv_table(moments, header, rows, cfg.output_precision);
    ctx.note(moments);

    for (std::size_t j = 0; j < orders.size(); ++j) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < taus.size(); ++i) {
            if (w_moments[i][j] > 0.0) {
                xs.push_back(taus[i]);
                ys.push_back(std::log(w_moments[i][j]));
            }
        }
        write_plot(ctx, "log_moment_order_" + format_double(orders[j]) + ".dat", xs, ys);
    }

    ctx.report << "[diffusion]\n"
               << "final_tau = " << ctx.fmt(res.tau) << "\n"
               << "support_projections = " << res.support_projections << "\n";
    if (cfg.fp.sigma2_sq > 0.0) {
        ctx.report << "moment_threshold_r = " << ctx.fmt(cfg.fp.moment_threshold()) << "\n"
                   << "moment_threshold_order = " << ctx.fmt(1.0 + cfg.fp.moment_threshold())
                   << "\n";
    }
    if (taus.size() >= 3) {
        ctx.report << "[moment_rates]\n";
        const auto rates =
            moment_rate_report(taus, w_moments, orders, cfg.fp.lambda, cfg.fp.sigma2_sq);
        for (const auto& row : rates) {
            ctx.report << "order=" << format_double(row.order)
                       << " measured_rate=" << ctx.fmt(row.measured_rate)
                       << " predicted_rate=" << ctx.fmt(row.predicted_rate)
                       << " sign_consistent=" << (row.sign_consistent ? "true" : "false") << "\n";
        }
    } else {
        ctx.report << "moment_rates = skipped (need at least 3 snapshots)\n";
    }

    if (cfg.kind == ExperimentKind::TailStudy) {
        std::vector<double> v_final;
        v_final.reserve(particles.size());
        for (const auto& p : particles) v_final.push_back(p.v);
        const TailReport tail = tail_index(v_final, cfg.tail_fraction, 200, cfg.seed);
        ctx.report << "[tail]\n"
                   << "hill_index = " << ctx.fmt(tail.hill_index) << "\n"
                   << "hill_bootstrap_se = " << ctx.fmt(tail.hill_bootstrap_se) << "\n"
                   << "rank_regression_index = " << ctx.fmt(tail.rank_regression_index) << "\n"
                   << "tail_fraction = " << ctx.fmt(tail.tail_fraction) << "\n"
                   << "tail_count = " << tail.tail_count << "\n"
                   << "hill_top1 = " << ctx.fmt(tail.hill_top1) << "\n"
                   << "hill_top10 = " << ctx.fmt(tail.hill_top10) << "\n"
                   << "thin_tailed = " << (tail.thin_tailed ? "true" : "false") << "\n";

        // Log-log complementary rank plot over the analyzed tail.
        std::vector<double> positive;
        for (double v : v_final) {
            if (v > 0.0 && std::isfinite(v)) positive.push_back(v);
        }
        std::sort(positive.begin(), positive.end(), std::greater<>());
        const std::size_t k = tail.tail_count;
        std::vector<double> xs, ys;
        const double total = static_cast<double>(positive.size());
        for (std::size_t i = 0; i < k && i < positive.size(); ++i) {
            xs.push_back(std::log(positive[i]));
            ys.push_back(std::log(static_cast<double>(i + 1) / total));
        }
        write_plot(ctx, "tail_ccdf.dat", xs, ys);
    }
}

void run_sweep(RunContext& ctx) {
    const auto& cfg = ctx.cfg;

    // Diffusion-limit comparison law: the scaling keeps sigma^2 / lambda fixed,
    // with sigma^2 = Var(mu + mu_tilde) per unit macroscopic time.
    const double var_sum = 2.0 * cfg.trade.noise.variance();
    FpParams limit;
    limit.lambda = cfg.trade.lambda;
    limit.alpha = cfg.trade.utility.alpha;
    limit.beta = cfg.trade.utility.beta;
    limit.sigma1_sq = var_sum;
    limit.sigma2_sq = var_sum;

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
        const double eps = cfg.epsilons[i];
        Ensemble e = make_two_point_ensemble(cfg.agents, cfg.initial_x, cfg.initial_y,
                                             cfg.initial_dx, cfg.initial_dy);
        const VWSample init = to_vw(e);
        const double w0_hi = init.w[0];
        const double w0_lo = init.w[1];

        RngStream rng = RngStream::derive(cfg.seed, stream_tag::kSweepBase + i);
        quasi_invariant_run(e, cfg.trade, eps, cfg.horizon, 0.0, rng, nullptr);

        VWSample vw = to_vw(e);
        std::sort(vw.w.begin(), vw.w.end());
        const auto mixture_cdf = [&](double x) {
            return 0.5 * w_path_oracle_cdf(w0_hi, limit, cfg.horizon, x) +
                   0.5 * w_path_oracle_cdf(w0_lo, limit, cfg.horizon, x);
        };
        const double ks = ks_statistic(vw.w, mixture_cdf);

        KahanSum w_sq;
        for (double w : vw.w) w_sq.add(w * w);
        const double second_moment = w_sq.value() / static_cast<double>(vw.w.size());

        char name[48];
        std::snprintf(name, sizeof name, "sweep_%02zu_final.csv", i);
        const auto file = ctx.out / "snapshots" / name;
        write_agent_snapshot(file, e.time, e.agents, cfg.output_precision);
        ctx.note(file);

        rows.push_back({eps, ks, second_moment});
    }

    const auto distance_csv = ctx.out / "distance_vs_epsilon.csv";
    std::vector<std::vector<double>> distance_rows;
    for (const auto& r : rows) distance_rows.push_back({r[0], r[1]});
    write_csv_table(distance_csv, {"epsilon", "ks_distance"}, distance_rows,
                    cfg.output_precision);
    ctx.note(distance_csv);

    const auto moments = ctx.out / "moments.csv";
    write_csv_table(moments, {"epsilon", "ks_distance", "w_second_moment"}, rows,
                    cfg.output_precision);
    ctx.note(moments);

    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        xs.push_back(r[0]);
        ys.push_back(r[1]);
    }
    write_plot(ctx, "distance_vs_epsilon.dat", xs, ys);

    // Strict decrease of the distance as the scaling refines.
    auto sorted = rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a[0] > b[0]; });
    bool monotone = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (!(sorted[i][1] < sorted[i - 1][1])) monotone = false;
    }
    ctx.report << "[sweep]\n";
    for (const auto& r : sorted) {
        ctx.report << "epsilon=" << ctx.fmt(r[0]) << " ks_distance=" << ctx.fmt(r[1]) << "\n";
    }
    ctx.report << "monotone_decreasing = " << (monotone ? "true" : "false") << "\n";
}

void run_metric(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    Ensemble e = build_initial_ensemble(cfg);
    const double init_mean_x = e.mean_x;
    const double init_mean_y = e.mean_y;

    const double a = cfg.trade.lambda * cfg.trade.utility.beta;
    const double b = cfg.trade.lambda * cfg.trade.utility.alpha;
    const double grid_floor = cfg.resolved_grid_lo();
    const FourierGrid grid =
        FourierGrid::log_rays(grid_floor, cfg.grid_hi, cfg.grid_per_ray, cfg.metric_s);
    const FourierGrid eval = transformed_frequencies(grid, a, b);

    SimSettings settings;
    settings.mode = InteractionMode::Linear;
    settings.selection = cfg.selection;
    settings.horizon = cfg.horizon;
    settings.snapshot_interval = cfg.snapshot_interval;

    RngStream rng = RngStream::derive(cfg.seed, stream_tag::kSimulation);
    std::vector<double> times;
    std::vector<std::vector<std::complex<double>>> cfs;
    std::vector<double> concs;
    bool first = true;
    run_simulation(e, cfg.trade, settings, rng, [&](const Ensemble& snap) {
        if (first) {
            const auto file = ctx.out / "snapshots" / snapshot_name(0);
            write_agent_snapshot(file, snap.time, snap.agents, cfg.output_precision);
            ctx.note(file);
            first = false;
        }
        times.push_back(snap.time);
        cfs.push_back(empirical_cf(to_points(snap.agents), eval));
        concs.push_back(safe_concentration(snap));
    });

    // Late-time reference: keep evolving the same population.
    SimSettings ref_settings = settings;
    ref_settings.horizon = cfg.resolved_reference_horizon();
    ref_settings.snapshot_interval = 0.0;
    run_simulation(e, cfg.trade, ref_settings, rng, nullptr);
    const auto ref_cf = empirical_cf(to_points(e.agents), eval);
    {
        const auto file = ctx.out / "snapshots" / "snapshot_reference.csv";
        write_agent_snapshot(file, e.time, e.agents, cfg.output_precision);
        ctx.note(file);
    }

    // The CFs were evaluated at the transformed frequencies, whose own
    // magnitudes supply the weight.
    std::vector<double> ds;
    ds.reserve(cfs.size());
    for (const auto& cf : cfs) {
        ds.push_back(ds_distance(cf, ref_cf, eval).value);
    }

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < times.size(); ++i) {
        rows.push_back({times[i], ds[i], concs[i]});
    }
    const auto moments = ctx.out / "moments.csv";
    write_csv_table(moments, {"t", "ds_to_reference", "concentration"}, rows,
                    cfg.output_precision);
    ctx.note(moments);
    write_plot(ctx, "ds_vs_time.dat", times, ds);

    const OlsFit fit = ols_fit(times, ds);
    const double upper95 = fit.slope + kOneSided95 * fit.slope_se;

    RngStream audit_rng = RngStream::derive(cfg.seed, stream_tag::kAnalysis);
    const ContractionAudit audit = contraction_audit(cfg.trade, cfg.metric_s, 200000, audit_rng);

    ctx.report << "[metric]\n"
               << "transform_a = " << ctx.fmt(a) << "\n"
               << "transform_b = " << ctx.fmt(b) << "\n"
               << "grid_lo_resolved = " << ctx.fmt(grid_floor) << "\n"
               << "contraction_estimate = " << ctx.fmt(audit.estimate) << "\n"
               << "contraction_std_error = " << ctx.fmt(audit.std_error) << "\n"
               << "contraction_passes = " << (audit.passes ? "true" : "false") << "\n"
               << "ds_slope = " << ctx.fmt(fit.slope) << "\n"
               << "ds_slope_std_error = " << ctx.fmt(fit.slope_se) << "\n"
               << "ds_slope_upper95 = " << ctx.fmt(upper95) << "\n"
               << "non_increasing_95 = " << (upper95 <= 0.0 ? "true" : "false") << "\n"
               << "ds_initial = " << ctx.fmt(ds.front()) << "\n"
               << "ds_final = " << ctx.fmt(ds.back()) << "\n";
    conservation_block(ctx, e, init_mean_x, init_mean_y);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    RunContext ctx{cfg, cfg.output_dir, {}, {}};
    try {
        fs::create_directories(ctx.out / "snapshots");
        fs::create_directories(ctx.out / "plots");
    } catch (const fs::filesystem_error& err) {
        throw IoError(std::string("cannot create output directory: ") + err.what());
    }

    const std::string canonical = cfg.canonical_text();
    std::ostringstream manifest;
    manifest << "format_version = " << kOutputFormatVersion << "\n"
             << "tool_version = " << kVersion << "\n"
             << "kind = " << to_string(cfg.kind) << "\n"
             << "seed = " << cfg.seed << "\n"
             << "config_hash = " << hash_hex(fnv1a64(canonical)) << "\n"
             << "workers = " << cfg.workers << "\n"
             << "[config]\n"
             << canonical;
    write_text_file(ctx, ctx.out / "manifest", manifest.str());

    ctx.report << "experiment = " << to_string(cfg.kind) << "\n"
               << "agents = " << cfg.agents << "\n"
               << "seed = " << cfg.seed << "\n"
               << "config_hash = " << hash_hex(fnv1a64(canonical)) << "\n";

    switch (cfg.kind) {
        case ExperimentKind::Nonlinear:
        case ExperimentKind::Linear:
            run_population(ctx);
            break;
        case ExperimentKind::FokkerPlanck:
        case ExperimentKind::TailStudy:
            run_particles(ctx);
            break;
        case ExperimentKind::QuasiInvariantSweep:
            run_sweep(ctx);
            break;
        case ExperimentKind::MetricStudy:
            run_metric(ctx);
            break;
    }

    write_text_file(ctx, ctx.out / "report.txt", ctx.report.str());
    return ExperimentResult{ctx.out, std::move(ctx.files)};
}

}  // namespace kinex
