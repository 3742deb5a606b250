#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "specsense/bpdn.hpp"
#include "specsense/decision.hpp"
#include "specsense/measurement.hpp"
#include "specsense/metrics.hpp"
#include "specsense/rng.hpp"
#include "specsense/sampler.hpp"
#include "specsense/spectrum.hpp"

namespace specsense {

/// Raised for invalid configuration files or CLI arguments; the CLI maps
/// it to exit code 2.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class MeasurementMode {
    linear,             ///< y = Re(sum c H X) + w
    magnitude_averaged  ///< y = |Re(sum c H X) + w| (nonnegative reporting)
};

struct NoiseSpec {
    std::optional<double> sigma_w;
    std::optional<double> snr_db;  ///< per-measurement SNR = ||AX||^2 / (K sigma^2)

    bool operator==(const NoiseSpec&) const = default;
};

struct LambdaRule {
    std::optional<double> fixed;  ///< explicit threshold; otherwise the pilot rule applies
    double pilot_factor = 0.5;    ///< lambda = factor * median busy level of a pilot run
    int pilot_trials = 32;

    bool operator==(const LambdaRule&) const = default;
};

struct LambdaGridSpec {
    int points = 64;
    double lo_factor = 1e-3;  ///< grid spans [lo, hi] * pilot scale, log-spaced
    double hi_factor = 10.0;
    std::vector<double> values;  ///< absolute grid; overrides the factors when non-empty

    bool operator==(const LambdaGridSpec&) const = default;
};

struct LevelRange {
    double low = 0.5;
    double high = 2.0;

    bool operator==(const LevelRange&) const = default;
};

struct ExperimentConfig {
    double total_bandwidth_hz = 6e9;
    double subband_bandwidth_hz = 30e6;
    int pu_count = 15;
    std::vector<int> node_counts{25, 30, 35, 40, 45, 50};
    NoiseSpec noise{.sigma_w = std::nullopt, .snr_db = 10.0};
    int trials = 10000;
    std::uint64_t master_seed = 1;
    LambdaRule lambda;
    LambdaGridSpec lambda_grid;
    SolverOptions solver;
    FadingModel fading = FadingModel::identity;
    double fading_scale = 1.0;
    MeasurementMode measurement = MeasurementMode::linear;
    LevelRange levels;
    MetricAggregation aggregation = MetricAggregation::per_trial;
    int workers = 1;

    bool operator==(const ExperimentConfig&) const = default;

    void validate() const {
        const SpectrumConfig spec = [&] {
            try {
                return make_config(total_bandwidth_hz, subband_bandwidth_hz);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }();
        if (pu_count < 0 || pu_count > spec.half_count)
            throw ConfigError("config: pu_count must satisfy 0 <= J <= L0 = " +
                              std::to_string(spec.half_count));
        if (node_counts.empty()) throw ConfigError("config: node_counts must be non-empty");
        for (std::size_t i = 0; i < node_counts.size(); ++i) {
            if (node_counts[i] < 1) throw ConfigError("config: node counts must be >= 1");
            if (i > 0 && node_counts[i] <= node_counts[i - 1])
                throw ConfigError("config: node_counts must be strictly ascending");
        }
        if (noise.sigma_w.has_value() == noise.snr_db.has_value())
            throw ConfigError("config: specify exactly one of noise.sigma_w / noise.snr_db");
        if (noise.sigma_w && *noise.sigma_w < 0.0)
            throw ConfigError("config: sigma_w must be nonnegative");
        if (trials < 1) throw ConfigError("config: trials must be >= 1");
        if (workers < 1) throw ConfigError("config: workers must be >= 1");
        if (lambda.fixed && *lambda.fixed < 0.0)
            throw ConfigError("config: lambda.fixed must be nonnegative");
        if (!(lambda.pilot_factor > 0.0))
            throw ConfigError("config: lambda.pilot_factor must be positive");
        if (lambda.pilot_trials < 1) throw ConfigError("config: pilot_trials must be >= 1");
        if (lambda_grid.values.empty()) {
            if (lambda_grid.points < 1) throw ConfigError("config: lambda_grid.points must be >= 1");
            if (!(lambda_grid.lo_factor > 0.0) ||
                !(lambda_grid.hi_factor >= lambda_grid.lo_factor))
                throw ConfigError("config: lambda_grid factors must satisfy 0 < lo <= hi");
        } else {
            for (std::size_t i = 0; i < lambda_grid.values.size(); ++i) {
                if (lambda_grid.values[i] < 0.0)
                    throw ConfigError("config: lambda_grid values must be nonnegative");
                if (i > 0 && lambda_grid.values[i] < lambda_grid.values[i - 1])
                    throw ConfigError("config: lambda_grid values must be ascending");
            }
        }
        if (solver.max_iters < 1) throw ConfigError("config: solver.max_iters must be >= 1");
        if (!(solver.kkt_tol > 0.0)) throw ConfigError("config: solver.kkt_tol must be positive");
        if (solver.feas_tol < 0.0) throw ConfigError("config: solver.feas_tol must be >= 0");
        if (solver.epsilon && *solver.epsilon < 0.0)
            throw ConfigError("config: solver.epsilon must be nonnegative");
        if (fading == FadingModel::rayleigh_magnitude && !(fading_scale > 0.0))
            throw ConfigError("config: fading_scale must be positive");
        if (!(levels.low > 0.0) || !(levels.high >= levels.low))
            throw ConfigError("config: levels must satisfy 0 < low <= high");
    }
};

// ---------------------------------------------------------------------------
// JSON mapping (single structured config file; every field CLI-overridable)

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{
        {"total_bandwidth_hz", c.total_bandwidth_hz},
        {"subband_bandwidth_hz", c.subband_bandwidth_hz},
        {"pu_count", c.pu_count},
        {"node_counts", c.node_counts},
        {"trials", c.trials},
        {"master_seed", c.master_seed},
        {"workers", c.workers},
    };
    nlohmann::json noise;
    if (c.noise.sigma_w) noise["sigma_w"] = *c.noise.sigma_w;
    if (c.noise.snr_db) noise["snr_db"] = *c.noise.snr_db;
    j["noise"] = noise;
    nlohmann::json lambda{{"pilot_factor", c.lambda.pilot_factor},
                          {"pilot_trials", c.lambda.pilot_trials}};
    if (c.lambda.fixed) lambda["fixed"] = *c.lambda.fixed;
    j["lambda"] = lambda;
    nlohmann::json grid{{"points", c.lambda_grid.points},
                        {"lo_factor", c.lambda_grid.lo_factor},
                        {"hi_factor", c.lambda_grid.hi_factor}};
    if (!c.lambda_grid.values.empty()) grid["values"] = c.lambda_grid.values;
    j["lambda_grid"] = grid;
    nlohmann::json solver{{"max_iters", c.solver.max_iters},
                          {"kkt_tol", c.solver.kkt_tol},
                          {"feas_tol", c.solver.feas_tol},
                          {"fold_symmetry", c.solver.fold_symmetry}};
    if (c.solver.epsilon) solver["epsilon"] = *c.solver.epsilon;
    j["solver"] = solver;
    j["fading"] = nlohmann::json{
        {"mode", c.fading == FadingModel::identity ? "identity" : "rayleigh"},
        {"scale", c.fading_scale}};
    j["measurement_mode"] =
        c.measurement == MeasurementMode::linear ? "linear" : "magnitude";
    j["levels"] = nlohmann::json{{"low", c.levels.low}, {"high", c.levels.high}};
    j["aggregation"] =
        c.aggregation == MetricAggregation::per_trial ? "per_trial" : "pooled";
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    c = ExperimentConfig{};
    c.total_bandwidth_hz = j.value("total_bandwidth_hz", c.total_bandwidth_hz);
    c.subband_bandwidth_hz = j.value("subband_bandwidth_hz", c.subband_bandwidth_hz);
    c.pu_count = j.value("pu_count", c.pu_count);
    if (j.contains("node_counts")) c.node_counts = j.at("node_counts").get<std::vector<int>>();
    c.trials = j.value("trials", c.trials);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.workers = j.value("workers", c.workers);
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        c.noise.sigma_w.reset();
        c.noise.snr_db.reset();
        if (n.contains("sigma_w")) c.noise.sigma_w = n.at("sigma_w").get<double>();
        if (n.contains("snr_db")) c.noise.snr_db = n.at("snr_db").get<double>();
    }
    if (j.contains("lambda")) {
        const auto& l = j.at("lambda");
        if (l.contains("fixed")) c.lambda.fixed = l.at("fixed").get<double>();
        c.lambda.pilot_factor = l.value("pilot_factor", c.lambda.pilot_factor);
        c.lambda.pilot_trials = l.value("pilot_trials", c.lambda.pilot_trials);
    }
    if (j.contains("lambda_grid")) {
        const auto& g = j.at("lambda_grid");
        c.lambda_grid.points = g.value("points", c.lambda_grid.points);
        c.lambda_grid.lo_factor = g.value("lo_factor", c.lambda_grid.lo_factor);
        c.lambda_grid.hi_factor = g.value("hi_factor", c.lambda_grid.hi_factor);
        if (g.contains("values"))
            c.lambda_grid.values = g.at("values").get<std::vector<double>>();
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        c.solver.max_iters = s.value("max_iters", c.solver.max_iters);
        c.solver.kkt_tol = s.value("kkt_tol", c.solver.kkt_tol);
        c.solver.feas_tol = s.value("feas_tol", c.solver.feas_tol);
        c.solver.fold_symmetry = s.value("fold_symmetry", c.solver.fold_symmetry);
        if (s.contains("epsilon")) c.solver.epsilon = s.at("epsilon").get<double>();
    }
    if (j.contains("fading")) {
        const auto& f = j.at("fading");
        const std::string mode = f.value("mode", std::string("identity"));
        if (mode == "identity")
            c.fading = FadingModel::identity;
        else if (mode == "rayleigh")
            c.fading = FadingModel::rayleigh_magnitude;
        else
            throw ConfigError("config: unknown fading mode '" + mode + "'");
        c.fading_scale = f.value("scale", c.fading_scale);
    }
    if (j.contains("measurement_mode")) {
        const std::string mode = j.at("measurement_mode").get<std::string>();
        if (mode == "linear")
            c.measurement = MeasurementMode::linear;
        else if (mode == "magnitude")
            c.measurement = MeasurementMode::magnitude_averaged;
        else
            throw ConfigError("config: unknown measurement_mode '" + mode + "'");
    }
    if (j.contains("levels")) {
        const auto& lv = j.at("levels");
        c.levels.low = lv.value("low", c.levels.low);
        c.levels.high = lv.value("high", c.levels.high);
    }
    if (j.contains("aggregation")) {
        const std::string mode = j.at("aggregation").get<std::string>();
        if (mode == "per_trial")
            c.aggregation = MetricAggregation::per_trial;
        else if (mode == "pooled")
            c.aggregation = MetricAggregation::pooled;
        else
            throw ConfigError("config: unknown aggregation '" + mode + "'");
    }
}

inline std::string emit_config(const ExperimentConfig& cfg) {
    nlohmann::json j = cfg;
    return j.dump(2) + "\n";
}

inline ExperimentConfig parse_config(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        return j.get<ExperimentConfig>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

// ---------------------------------------------------------------------------
// Trial execution

namespace seedtag {
inline constexpr std::uint64_t trial = 0x747269616CULL;
inline constexpr std::uint64_t pilot = 0x70696C6FULL;
inline constexpr std::uint64_t occupancy = 0x6F6363ULL;
inline constexpr std::uint64_t levels = 0x6C6576ULL;
inline constexpr std::uint64_t channel = 0x6368616EULL;
inline constexpr std::uint64_t mixing = 0x6D6978ULL;
inline constexpr std::uint64_t noise = 0x6E6F69ULL;
}  // namespace seedtag

struct TrialResult {
    std::uint64_t trial_seed = 0;
    int node_count = 0;
    std::vector<double> x_true;
    std::vector<std::uint8_t> d_true;
    std::vector<double> x_hat;
    TrialOutcome outcome;
    bool converged = false;
    bool feasible = false;
};

namespace detail {

/// Full sensing round for one trial seed: draw the environment, sample at
/// every node, reassemble the matrix at the fusion center from the node
/// seeds, recover, decide, score.
inline TrialResult run_trial_seeded(const ExperimentConfig& cfg, const SpectrumConfig& spec,
                                    int node_count, std::uint64_t trial_seed, double lambda) {
    RngStream occ_rng(derive_seed(trial_seed, seedtag::occupancy));
    RngStream lev_rng(derive_seed(trial_seed, seedtag::levels));
    RngStream chan_rng(derive_seed(trial_seed, seedtag::channel));
    const auto occ = draw_occupancy(spec, cfg.pu_count, occ_rng);
    const auto lev = draw_levels(occ, cfg.levels.low, cfg.levels.high, lev_rng);
    const auto chan = draw_channel(spec, cfg.fading, cfg.fading_scale, chan_rng);

    const std::uint64_t mix_seed = derive_seed(trial_seed, seedtag::mixing);
    const int K = node_count;

    Eigen::VectorXd clean(K);
    for (int k = 1; k <= K; ++k) {
        const auto seq = draw_mixing(k, spec.subband_count, mix_seed);
        const auto row = fourier_coeffs(seq);
        clean(k - 1) = measurement_value(row, chan, lev);
    }

    double sigma = 0.0;
    if (cfg.noise.sigma_w) {
        sigma = *cfg.noise.sigma_w;
    } else {
        const double mean_power = clean.squaredNorm() / static_cast<double>(K);
        if (mean_power > 0.0)
            sigma = std::sqrt(mean_power / std::pow(10.0, *cfg.noise.snr_db / 10.0));
    }

    Eigen::VectorXd y(K);
    for (int k = 1; k <= K; ++k) {
        RngStream noise_rng(derive_seed(trial_seed, seedtag::noise,
                                        static_cast<std::uint64_t>(k)));
        double v = clean(k - 1) + sigma * noise_rng.normal();
        if (cfg.measurement == MeasurementMode::magnitude_averaged) v = std::abs(v);
        y(k - 1) = v;
    }

    const std::vector<std::uint64_t> node_seeds(static_cast<std::size_t>(K), mix_seed);
    const auto mm = assemble_matrix(node_seeds, spec, chan);
    const auto rec = bp_recover(mm.entries, y, NoiseModel{sigma}, cfg.solver);
    const auto dec = decide(rec, lambda);

    TrialResult tr;
    tr.trial_seed = trial_seed;
    tr.node_count = K;
    tr.x_true = lev.levels;
    tr.d_true = occ.flags;
    tr.x_hat = rec.x_hat;
    tr.outcome.counts = detection_counts(dec.d_hat, occ.flags);
    double truth_power = 0.0;
    for (double v : lev.levels) truth_power += v * v;
    tr.outcome.mse = truth_power > 0.0
                         ? mse(tr.x_hat, tr.x_true)
                         : std::numeric_limits<double>::quiet_NaN();
    tr.converged = rec.report.converged;
    tr.feasible = rec.report.feasible;
    return tr;
}

template <class Fn>
inline void parallel_for(int n, int workers, Fn&& fn) {
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    {
                        std::lock_guard<std::mutex> g(err_mutex);
                        if (!err) err = std::current_exception();
                    }
                    next.store(n);
                    break;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace detail

/// One deterministic Monte Carlo trial: identical (config, trial index)
/// always produces identical output, independent of execution order.
inline TrialResult run_trial(const ExperimentConfig& cfg, int node_count,
                             std::uint64_t trial_index, double lambda) {
    const SpectrumConfig spec = make_config(cfg.total_bandwidth_hz, cfg.subband_bandwidth_hz);
    return detail::run_trial_seeded(
        cfg, spec, node_count, derive_seed(cfg.master_seed, seedtag::trial, trial_index),
        lambda);
}

// ---------------------------------------------------------------------------
// Campaigns

struct ThresholdPlan {
    double lambda_fixed = 0.0;
    std::vector<double> grid;
    double pilot_scale = 1.0;  ///< median recovered busy level of the pilot
};

/// Median recovered busy level over a short pilot campaign at the given
/// node count; scales the threshold and the ROC grid when the config does
/// not pin them. Falls back to 1.0 when no busy subband exists (J = 0) or
/// when every recovered busy level is zero.
inline double pilot_busy_median(const ExperimentConfig& cfg, int node_count) {
    const SpectrumConfig spec = make_config(cfg.total_bandwidth_hz, cfg.subband_bandwidth_hz);
    std::vector<double> busy;
    std::vector<std::vector<double>> collected(
        static_cast<std::size_t>(cfg.lambda.pilot_trials));
    detail::parallel_for(cfg.lambda.pilot_trials, cfg.workers, [&](int i) {
        const auto tr = detail::run_trial_seeded(
            cfg, spec, node_count,
            derive_seed(cfg.master_seed, seedtag::pilot, static_cast<std::uint64_t>(i)), 0.0);
        auto& vals = collected[static_cast<std::size_t>(i)];
        for (std::size_t s = 0; s < tr.d_true.size(); ++s)
            if (tr.d_true[s]) vals.push_back(tr.x_hat[s]);
    });
    for (const auto& vals : collected) busy.insert(busy.end(), vals.begin(), vals.end());
    if (busy.empty()) return 1.0;
    std::sort(busy.begin(), busy.end());
    const std::size_t n = busy.size();
    const double med = n % 2 == 1 ? busy[n / 2] : 0.5 * (busy[n / 2 - 1] + busy[n / 2]);
    return med > 0.0 ? med : 1.0;
}

/// The pilot runs at the largest configured node count, where recovered
/// busy levels are informative; at the low end of a sweep the median can
/// collapse to zero.
inline ThresholdPlan plan_thresholds(const ExperimentConfig& cfg) {
    ThresholdPlan plan;
    const bool need_pilot = !cfg.lambda.fixed || cfg.lambda_grid.values.empty();
    if (need_pilot) plan.pilot_scale = pilot_busy_median(cfg, cfg.node_counts.back());
    plan.lambda_fixed =
        cfg.lambda.fixed ? *cfg.lambda.fixed : cfg.lambda.pilot_factor * plan.pilot_scale;
    if (!cfg.lambda_grid.values.empty()) {
        plan.grid = cfg.lambda_grid.values;
    } else {
        const double lo = cfg.lambda_grid.lo_factor * plan.pilot_scale;
        const double hi = cfg.lambda_grid.hi_factor * plan.pilot_scale;
        const int n = cfg.lambda_grid.points;
        plan.grid.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            plan.grid[static_cast<std::size_t>(i)] =
                n == 1 ? lo
                       : lo * std::pow(hi / lo,
                                       static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return plan;
}

struct TrialRow {
    std::uint64_t trial_seed = 0;
    int node_count = 0;
    double mse = std::numeric_limits<double>::quiet_NaN();
    long hits = 0, busy = 0, false_hits = 0, idle = 0;
    bool converged = false;
};

struct KAggregate {
    int node_count = 0;
    long trials = 0;
    double mean_mse = 0.0, pd = 0.0, pf = 0.0;
    double mse_stderr = 0.0, pd_stderr = 0.0, pf_stderr = 0.0;
};

struct RateTable {
    double nyquist_rate_hz = 0.0;      ///< W
    double existing_cs_rate_hz = 0.0;  ///< 4 x occupied bandwidth
    double per_node_rate_hz = 0.0;     ///< B
    std::vector<std::pair<int, double>> sum_rates_hz;  ///< K * B per configured K
};

inline RateTable rate_table(const ExperimentConfig& cfg) {
    RateTable t;
    t.nyquist_rate_hz = cfg.total_bandwidth_hz;
    t.per_node_rate_hz = cfg.subband_bandwidth_hz;
    t.existing_cs_rate_hz = 4.0 * (2.0 * cfg.pu_count) * cfg.subband_bandwidth_hz;
    for (int k : cfg.node_counts)
        t.sum_rates_hz.emplace_back(k, static_cast<double>(k) * cfg.subband_bandwidth_hz);
    return t;
}

struct CampaignReport {
    double lambda_fixed = 0.0;
    std::vector<double> lambda_grid;
    std::vector<TrialRow> rows;  ///< node-count-major, trial order within
    std::vector<KAggregate> aggregates;
    std::vector<std::pair<int, RocCurve>> roc_curves;  ///< filled when requested
    RateTable rates;
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

inline double stderr_of(const std::vector<double>& v, double mean) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
}

}  // namespace detail

/// Runs `trials` trials per configured node count and aggregates MSE, Pd
/// and Pf. Set `with_roc` to also sweep the threshold grid per K.
inline CampaignReport sweep_k(const ExperimentConfig& cfg, bool with_roc = false) {
    cfg.validate();
    const SpectrumConfig spec = make_config(cfg.total_bandwidth_hz, cfg.subband_bandwidth_hz);
    const ThresholdPlan plan = plan_thresholds(cfg);

    CampaignReport report;
    report.lambda_fixed = plan.lambda_fixed;
    report.lambda_grid = plan.grid;
    report.rates = rate_table(cfg);

    for (int K : cfg.node_counts) {
        std::vector<TrialResult> results(static_cast<std::size_t>(cfg.trials));
        detail::parallel_for(cfg.trials, cfg.workers, [&](int t) {
            results[static_cast<std::size_t>(t)] = detail::run_trial_seeded(
                cfg, spec, K,
                derive_seed(cfg.master_seed, seedtag::trial, static_cast<std::uint64_t>(t)),
                plan.lambda_fixed);
        });

        std::vector<double> mses, pds, pfs;
        long pooled_hits = 0, pooled_busy = 0, pooled_false = 0, pooled_idle = 0;
        mses.reserve(results.size());
        for (const auto& tr : results) {
            report.rows.push_back(TrialRow{tr.trial_seed, tr.node_count, tr.outcome.mse,
                                           tr.outcome.counts.detect_hits,
                                           tr.outcome.counts.busy_count,
                                           tr.outcome.counts.false_hits,
                                           tr.outcome.counts.idle_count, tr.converged});
            if (!std::isnan(tr.outcome.mse)) mses.push_back(tr.outcome.mse);
            if (const auto pd = tr.outcome.counts.pd()) pds.push_back(*pd);
            if (const auto pf = tr.outcome.counts.pf()) pfs.push_back(*pf);
            pooled_hits += tr.outcome.counts.detect_hits;
            pooled_busy += tr.outcome.counts.busy_count;
            pooled_false += tr.outcome.counts.false_hits;
            pooled_idle += tr.outcome.counts.idle_count;
        }

        KAggregate agg;
        agg.node_count = K;
        agg.trials = static_cast<long>(results.size());
        agg.mean_mse = detail::mean_of(mses);
        agg.mse_stderr = detail::stderr_of(mses, agg.mean_mse);
        if (cfg.aggregation == MetricAggregation::per_trial) {
            agg.pd = detail::mean_of(pds);
            agg.pf = detail::mean_of(pfs);
            agg.pd_stderr = detail::stderr_of(pds, agg.pd);
            agg.pf_stderr = detail::stderr_of(pfs, agg.pf);
        } else {
            agg.pd = pooled_busy > 0 ? static_cast<double>(pooled_hits) /
                                           static_cast<double>(pooled_busy)
                                     : 0.0;
            agg.pf = pooled_idle > 0 ? static_cast<double>(pooled_false) /
                                           static_cast<double>(pooled_idle)
                                     : 0.0;
            if (pooled_busy > 0)
                agg.pd_stderr = std::sqrt(agg.pd * (1.0 - agg.pd) /
                                          static_cast<double>(pooled_busy));
            if (pooled_idle > 0)
                agg.pf_stderr = std::sqrt(agg.pf * (1.0 - agg.pf) /
                                          static_cast<double>(pooled_idle));
        }
        report.aggregates.push_back(agg);

        if (with_roc) {
            std::vector<std::vector<double>> xs;
            std::vector<std::vector<std::uint8_t>> ds;
            xs.reserve(results.size());
            ds.reserve(results.size());
            for (auto& tr : results) {
                xs.push_back(std::move(tr.x_hat));
                ds.push_back(std::move(tr.d_true));
            }
            report.roc_curves.emplace_back(K, roc_sweep(xs, ds, plan.grid, cfg.aggregation));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// CSV emission (fixed headers, \n newlines, 9 significant digits)

namespace detail {

inline std::string format_float(double v) {
    if (std::isnan(v)) return "nan";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace detail

inline void write_trials_csv(std::ostream& os, const CampaignReport& report) {
    os << "trial_seed,K,mse,hits,busy,false,idle,converged\n";
    for (const auto& r : report.rows)
        os << r.trial_seed << ',' << r.node_count << ',' << detail::format_float(r.mse) << ','
           << r.hits << ',' << r.busy << ',' << r.false_hits << ',' << r.idle << ','
           << (r.converged ? 1 : 0) << '\n';
}

inline void write_aggregate_csv(std::ostream& os, const CampaignReport& report) {
    os << "K,mean_mse,Pd,Pf,mse_stderr,pd_stderr,pf_stderr\n";
    for (const auto& a : report.aggregates)
        os << a.node_count << ',' << detail::format_float(a.mean_mse) << ','
           << detail::format_float(a.pd) << ',' << detail::format_float(a.pf) << ','
           << detail::format_float(a.mse_stderr) << ',' << detail::format_float(a.pd_stderr)
           << ',' << detail::format_float(a.pf_stderr) << '\n';
}

inline void write_roc_csv(std::ostream& os, const CampaignReport& report) {
    os << "K,lambda,Pd,Pf\n";
    for (const auto& [k, curve] : report.roc_curves)
        for (const auto& pt : curve.points)
            os << k << ',' << detail::format_float(pt.lambda) << ','
               << detail::format_float(pt.pd) << ',' << detail::format_float(pt.pf) << '\n';
}

inline void write_rates_csv(std::ostream& os, const RateTable& rates) {
    os << "quantity,K,rate_hz\n";
    os << "nyquist,," << detail::format_float(rates.nyquist_rate_hz) << '\n';
    os << "existing_cs,," << detail::format_float(rates.existing_cs_rate_hz) << '\n';
    os << "per_node,," << detail::format_float(rates.per_node_rate_hz) << '\n';
    for (const auto& [k, rate] : rates.sum_rates_hz)
        os << "sum," << k << ',' << detail::format_float(rate) << '\n';
}

/// Writes trials.csv + aggregate.csv (+ roc.csv when curves are present)
/// into `dir`, creating it if needed.
inline void write_campaign_csvs(const CampaignReport& report,
                                const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "trials.csv", std::ios::binary);
        write_trials_csv(os, report);
    }
    {
        std::ofstream os(dir / "aggregate.csv", std::ios::binary);
        write_aggregate_csv(os, report);
    }
    if (!report.roc_curves.empty()) {
        std::ofstream os(dir / "roc.csv", std::ios::binary);
        write_roc_csv(os, report);
    }
}

}  // namespace specsense
