// Command-line front end for the spectrum sensing simulator.
//
// Subcommands: run, sweep-k, roc, rates, selftest-aliasing, oracle-check.
// Exit codes: 0 success, 1 a check subcommand failed its threshold,
// 2 configuration error, 3 fatal numerical error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "specsense/specsense.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> workers;
    std::string out_dir = "out";

    std::optional<double> total_bandwidth, subband_bandwidth;
    std::optional<int> pu_count;
    std::vector<int> nodes;
    std::optional<double> sigma_w, snr_db;
    std::optional<double> lambda_fixed, pilot_factor;
    std::optional<int> pilot_trials;
    std::optional<int> grid_points;
    std::optional<double> grid_lo, grid_hi;
    std::vector<double> grid_values;
    std::optional<double> level_low, level_high;
    std::optional<std::string> fading;
    std::optional<double> fading_scale;
    std::optional<std::string> measurement, aggregation;
    std::optional<int> max_iters;
    std::optional<double> kkt_tol, feas_tol, epsilon;
    std::optional<bool> fold_symmetry;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON experiment config");
    cmd->add_option("--seed", args.seed, "master seed override");
    cmd->add_option("--trials", args.trials, "trial count override");
    cmd->add_option("--workers", args.workers, "worker thread override");
    cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();

    cmd->add_option("--total-bandwidth", args.total_bandwidth, "monitored bandwidth W [Hz]");
    cmd->add_option("--subband-bandwidth", args.subband_bandwidth, "subband width B [Hz]");
    cmd->add_option("--pu-count", args.pu_count, "active transmitter pairs J");
    cmd->add_option("--nodes", args.nodes, "node counts K (ascending list)");
    cmd->add_option("--sigma", args.sigma_w, "noise standard deviation");
    cmd->add_option("--snr", args.snr_db, "per-measurement SNR [dB]");
    cmd->add_option("--lambda", args.lambda_fixed, "fixed decision threshold");
    cmd->add_option("--pilot-factor", args.pilot_factor, "threshold = factor * pilot median");
    cmd->add_option("--pilot-trials", args.pilot_trials, "pilot campaign size");
    cmd->add_option("--grid-points", args.grid_points, "threshold grid size");
    cmd->add_option("--grid-lo", args.grid_lo, "grid lower factor");
    cmd->add_option("--grid-hi", args.grid_hi, "grid upper factor");
    cmd->add_option("--grid-values", args.grid_values, "absolute threshold grid");
    cmd->add_option("--level-low", args.level_low, "lowest transmitter level");
    cmd->add_option("--level-high", args.level_high, "highest transmitter level");
    cmd->add_option("--fading", args.fading, "channel model: identity|rayleigh");
    cmd->add_option("--fading-scale", args.fading_scale, "rayleigh scale");
    cmd->add_option("--measurement", args.measurement, "reporting mode: linear|magnitude");
    cmd->add_option("--aggregation", args.aggregation, "metric mode: per_trial|pooled");
    cmd->add_option("--max-iters", args.max_iters, "solver iteration cap");
    cmd->add_option("--kkt-tol", args.kkt_tol, "solver stationarity tolerance");
    cmd->add_option("--feas-tol", args.feas_tol, "solver residual slack");
    cmd->add_option("--epsilon", args.epsilon, "residual bound override");
    cmd->add_option("--fold-symmetry", args.fold_symmetry, "solve the mirrored half problem");
}

specsense::ExperimentConfig resolve_config(const CommonArgs& args) {
    specsense::ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = specsense::load_config_file(args.config_path);
    if (args.seed) cfg.master_seed = *args.seed;
    if (args.trials) cfg.trials = *args.trials;
    if (args.workers) cfg.workers = *args.workers;
    if (args.total_bandwidth) cfg.total_bandwidth_hz = *args.total_bandwidth;
    if (args.subband_bandwidth) cfg.subband_bandwidth_hz = *args.subband_bandwidth;
    if (args.pu_count) cfg.pu_count = *args.pu_count;
    if (!args.nodes.empty()) cfg.node_counts = args.nodes;
    if (args.sigma_w) {
        cfg.noise.sigma_w = *args.sigma_w;
        cfg.noise.snr_db.reset();
    }
    if (args.snr_db) {
        cfg.noise.snr_db = *args.snr_db;
        cfg.noise.sigma_w.reset();
    }
    if (args.lambda_fixed) cfg.lambda.fixed = *args.lambda_fixed;
    if (args.pilot_factor) cfg.lambda.pilot_factor = *args.pilot_factor;
    if (args.pilot_trials) cfg.lambda.pilot_trials = *args.pilot_trials;
    if (args.grid_points) cfg.lambda_grid.points = *args.grid_points;
    if (args.grid_lo) cfg.lambda_grid.lo_factor = *args.grid_lo;
    if (args.grid_hi) cfg.lambda_grid.hi_factor = *args.grid_hi;
    if (!args.grid_values.empty()) cfg.lambda_grid.values = args.grid_values;
    if (args.level_low) cfg.levels.low = *args.level_low;
    if (args.level_high) cfg.levels.high = *args.level_high;
    if (args.fading) {
        if (*args.fading == "identity")
            cfg.fading = specsense::FadingModel::identity;
        else if (*args.fading == "rayleigh")
            cfg.fading = specsense::FadingModel::rayleigh_magnitude;
        else
            throw specsense::ConfigError("unknown fading mode '" + *args.fading + "'");
    }
    if (args.fading_scale) cfg.fading_scale = *args.fading_scale;
    if (args.measurement) {
        if (*args.measurement == "linear")
            cfg.measurement = specsense::MeasurementMode::linear;
        else if (*args.measurement == "magnitude")
            cfg.measurement = specsense::MeasurementMode::magnitude_averaged;
        else
            throw specsense::ConfigError("unknown measurement mode '" + *args.measurement + "'");
    }
    if (args.aggregation) {
        if (*args.aggregation == "per_trial")
            cfg.aggregation = specsense::MetricAggregation::per_trial;
        else if (*args.aggregation == "pooled")
            cfg.aggregation = specsense::MetricAggregation::pooled;
        else
            throw specsense::ConfigError("unknown aggregation '" + *args.aggregation + "'");
    }
    if (args.max_iters) cfg.solver.max_iters = *args.max_iters;
    if (args.kkt_tol) cfg.solver.kkt_tol = *args.kkt_tol;
    if (args.feas_tol) cfg.solver.feas_tol = *args.feas_tol;
    if (args.epsilon) cfg.solver.epsilon = *args.epsilon;
    if (args.fold_symmetry) cfg.solver.fold_symmetry = *args.fold_symmetry;
    cfg.validate();
    return cfg;
}

void print_aggregates(const specsense::CampaignReport& report) {
    std::printf("lambda = %s\n", specsense::detail::format_float(report.lambda_fixed).c_str());
    std::printf("%6s %12s %10s %10s\n", "K", "mean_mse", "Pd", "Pf");
    for (const auto& a : report.aggregates)
        std::printf("%6d %12s %10s %10s\n", a.node_count,
                    specsense::detail::format_float(a.mean_mse).c_str(),
                    specsense::detail::format_float(a.pd).c_str(),
                    specsense::detail::format_float(a.pf).c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed sub-Nyquist wideband spectrum sensing simulator"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, roc_args, rates_args;
    auto* cmd_run = app.add_subcommand("run", "run one campaign, write trials/aggregate CSVs");
    add_common(cmd_run, run_args);
    auto* cmd_sweep = app.add_subcommand("sweep-k", "sweep node counts, write trials/aggregate CSVs");
    add_common(cmd_sweep, sweep_args);
    auto* cmd_roc = app.add_subcommand("roc", "sweep thresholds per node count, write roc.csv too");
    add_common(cmd_roc, roc_args);
    auto* cmd_rates = app.add_subcommand("rates", "print the sampling-rate comparison table");
    add_common(cmd_rates, rates_args);

    int st_subbands = 15, st_oversample = 64, st_seeds = 100, st_pu = 2;
    std::uint64_t st_seed = 1;
    double st_limit = 1e-6;
    auto* cmd_selftest =
        app.add_subcommand("selftest-aliasing", "validate the sampler chain against the aliasing model");
    cmd_selftest->add_option("--subbands", st_subbands, "subband count L")->capture_default_str();
    cmd_selftest->add_option("--oversample", st_oversample, "simulation rate in subband widths")
        ->capture_default_str();
    cmd_selftest->add_option("--seeds", st_seeds, "number of random instances")->capture_default_str();
    cmd_selftest->add_option("--pu", st_pu, "occupied pairs per instance")->capture_default_str();
    cmd_selftest->add_option("--seed", st_seed, "base seed")->capture_default_str();
    cmd_selftest->add_option("--limit", st_limit, "pass threshold on max relative error")
        ->capture_default_str();

    int oc_subbands = 15, oc_instances = 100, oc_smax = -1;
    std::vector<int> oc_pu{1, 2};
    std::uint64_t oc_seed = 1;
    auto* cmd_oracle =
        app.add_subcommand("oracle-check", "compare bp_recover against brute-force enumeration");
    cmd_oracle->add_option("--subbands", oc_subbands, "subband count L")->capture_default_str();
    cmd_oracle->add_option("--pu", oc_pu, "occupied-pair counts to test")->capture_default_str();
    cmd_oracle->add_option("--instances", oc_instances, "instances per setting")->capture_default_str();
    cmd_oracle->add_option("--seed", oc_seed, "base seed")->capture_default_str();
    cmd_oracle->add_option("--smax", oc_smax, "oracle support bound (default 2J)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_run->parsed() || cmd_sweep->parsed()) {
            const auto& args = cmd_run->parsed() ? run_args : sweep_args;
            const auto cfg = resolve_config(args);
            const auto report = specsense::sweep_k(cfg, false);
            specsense::write_campaign_csvs(report, args.out_dir);
            print_aggregates(report);
            std::printf("wrote %s/trials.csv and %s/aggregate.csv\n", args.out_dir.c_str(),
                        args.out_dir.c_str());
        } else if (cmd_roc->parsed()) {
            const auto cfg = resolve_config(roc_args);
            const auto report = specsense::sweep_k(cfg, true);
            specsense::write_campaign_csvs(report, roc_args.out_dir);
            print_aggregates(report);
            std::printf("wrote %s/{trials,aggregate,roc}.csv\n", roc_args.out_dir.c_str());
        } else if (cmd_rates->parsed()) {
            const auto cfg = resolve_config(rates_args);
            specsense::write_rates_csv(std::cout, specsense::rate_table(cfg));
        } else if (cmd_selftest->parsed()) {
            const auto res = specsense::run_aliasing_selftest(st_subbands, st_oversample,
                                                              st_seeds, st_seed, st_pu);
            for (std::size_t i = 0; i < res.rel_errors.size(); ++i)
                std::printf("seed %3zu  rel_error %.3e\n", i, res.rel_errors[i]);
            std::printf("max rel_error %.3e over %d seeds (limit %.3e)\n", res.max_rel_error,
                        st_seeds, st_limit);
            if (!(res.max_rel_error <= st_limit)) {
                std::printf("FAIL\n");
                return 1;
            }
            std::printf("PASS\n");
        } else if (cmd_oracle->parsed()) {
            bool all_ok = true;
            for (int j : oc_pu) {
                const auto cfg = specsense::make_config(static_cast<double>(oc_subbands), 1.0);
                int support_matches = 0;
                double worst_value_gap = 0.0;
                for (int inst = 0; inst < oc_instances; ++inst) {
                    specsense::RngStream rng(specsense::derive_seed(
                        oc_seed, 0x6F7263ULL, static_cast<std::uint64_t>(j),
                        static_cast<std::uint64_t>(inst)));
                    const auto occ = specsense::draw_occupancy(cfg, j, rng);
                    const auto lev = specsense::draw_levels(occ, 0.5, 2.0, rng);
                    const auto chan = specsense::draw_channel(
                        cfg, specsense::FadingModel::identity, 1.0, rng);
                    const int K = 8 * j;
                    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(K),
                                                     rng.next_u64());
                    const auto mm = specsense::assemble_matrix(seeds, cfg, chan);
                    const Eigen::VectorXd xlev = Eigen::Map<const Eigen::VectorXd>(
                        lev.levels.data(), cfg.subband_count);
                    const Eigen::VectorXd y =
                        (mm.entries * xlev.cast<std::complex<double>>()).real();
                    specsense::SolverOptions opts;
                    opts.epsilon = 0.0;
                    const auto bp =
                        specsense::bp_recover(mm.entries, y, specsense::NoiseModel{0.0}, opts);
                    const int smax = oc_smax > 0 ? oc_smax : 2 * j;
                    const auto oracle = specsense::oracle_recover(mm.entries, y, smax);
                    bool same_support = true;
                    double gap = 0.0;
                    for (int i = 0; i < cfg.subband_count; ++i) {
                        const bool a = bp.x_hat[static_cast<std::size_t>(i)] > 1e-6;
                        const bool b = oracle.x_hat[static_cast<std::size_t>(i)] > 1e-6;
                        if (a != b) same_support = false;
                        gap = std::max(gap,
                                       std::abs(bp.x_hat[static_cast<std::size_t>(i)] -
                                                oracle.x_hat[static_cast<std::size_t>(i)]));
                    }
                    if (same_support) {
                        ++support_matches;
                        worst_value_gap = std::max(worst_value_gap, gap);
                    }
                }
                const double frac =
                    static_cast<double>(support_matches) / static_cast<double>(oc_instances);
                std::printf(
                    "J=%d K=%d: support agreement %d/%d, worst value gap %.3e on matches\n", j,
                    8 * j, support_matches, oc_instances, worst_value_gap);
                if (frac < 0.99 || worst_value_gap > 1e-6) all_ok = false;
            }
            if (!all_ok) {
                std::printf("FAIL\n");
                return 1;
            }
            std::printf("PASS\n");
        }
    } catch (const specsense::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
