#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace specsense {

/// Fixed-order pairwise summation; used for every metric aggregate so
/// results do not depend on reduction order or worker count.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

/// Normalized recovery error for one trial: ||x_hat - x|| / ||x||.
inline double mse(std::span<const double> x_hat, std::span<const double> x_true) {
    if (x_hat.size() != x_true.size()) throw std::invalid_argument("mse: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x_true.size(); ++i) {
        const double d = x_hat[i] - x_true[i];
        num += d * d;
        den += x_true[i] * x_true[i];
    }
    if (den <= 0.0)
        throw std::invalid_argument("mse: ground truth is zero, normalization undefined");
    return std::sqrt(num / den);
}

/// Hit / false-alarm counts of one decision against the truth. The
/// per-trial ratios are undefined (absent) when a denominator is zero.
struct DetectionCounts {
    long detect_hits = 0;
    long busy_count = 0;
    long false_hits = 0;
    long idle_count = 0;

    std::optional<double> pd() const {
        if (busy_count == 0) return std::nullopt;
        return static_cast<double>(detect_hits) / static_cast<double>(busy_count);
    }
    std::optional<double> pf() const {
        if (idle_count == 0) return std::nullopt;
        return static_cast<double>(false_hits) / static_cast<double>(idle_count);
    }
};

/// Per-trial metric record: normalized error plus detection counts.
/// `error` is NaN when the trial had an empty spectrum.
struct TrialOutcome {
    double mse = std::numeric_limits<double>::quiet_NaN();
    DetectionCounts counts;
};

inline DetectionCounts detection_counts(std::span<const std::uint8_t> d_hat,
                                        std::span<const std::uint8_t> d_true) {
    if (d_hat.size() != d_true.size())
        throw std::invalid_argument("detection_counts: length mismatch");
    DetectionCounts c;
    for (std::size_t i = 0; i < d_true.size(); ++i) {
        if (d_true[i]) {
            ++c.busy_count;
            if (d_hat[i]) ++c.detect_hits;
        } else {
            ++c.idle_count;
            if (d_hat[i]) ++c.false_hits;
        }
    }
    return c;
}

struct RocPoint {
    double lambda = 0.0;
    double pf = 0.0;
    double pd = 0.0;
};

/// Operating curve swept over thresholds, ascending in lambda. Pd and Pf
/// are both non-increasing along the sweep.
struct RocCurve {
    std::vector<RocPoint> points;
};

enum class MetricAggregation {
    per_trial,  ///< average of per-trial ratios (default)
    pooled      ///< ratio of summed counts
};

/// Sweeps the decision threshold over many trials in one sorted pass per
/// trial. x_hat_trials[t] and d_true_trials[t] describe trial t.
inline RocCurve roc_sweep(const std::vector<std::vector<double>>& x_hat_trials,
                          const std::vector<std::vector<std::uint8_t>>& d_true_trials,
                          std::span<const double> lambda_grid,
                          MetricAggregation mode = MetricAggregation::per_trial) {
    if (x_hat_trials.empty() || x_hat_trials.size() != d_true_trials.size())
        throw std::invalid_argument("roc_sweep: empty or mismatched trial collections");
    if (lambda_grid.empty()) throw std::invalid_argument("roc_sweep: empty lambda grid");
    for (std::size_t g = 1; g < lambda_grid.size(); ++g)
        if (!(lambda_grid[g] >= lambda_grid[g - 1]))
            throw std::invalid_argument("roc_sweep: lambda grid must be ascending");

    const std::size_t n_lambda = lambda_grid.size();
    std::vector<std::vector<double>> pd_terms(n_lambda), pf_terms(n_lambda);
    std::vector<double> busy_sorted, idle_sorted;
    long total_busy = 0, total_idle = 0;
    std::vector<std::vector<double>> pooled_hits, pooled_false;
    if (mode == MetricAggregation::pooled) {
        pooled_hits.assign(n_lambda, {});
        pooled_false.assign(n_lambda, {});
    }

    for (std::size_t t = 0; t < x_hat_trials.size(); ++t) {
        const auto& xh = x_hat_trials[t];
        const auto& dt = d_true_trials[t];
        if (xh.size() != dt.size()) throw std::invalid_argument("roc_sweep: trial size mismatch");
        busy_sorted.clear();
        idle_sorted.clear();
        for (std::size_t i = 0; i < xh.size(); ++i)
            (dt[i] ? busy_sorted : idle_sorted).push_back(xh[i]);
        std::sort(busy_sorted.begin(), busy_sorted.end());
        std::sort(idle_sorted.begin(), idle_sorted.end());
        total_busy += static_cast<long>(busy_sorted.size());
        total_idle += static_cast<long>(idle_sorted.size());

        for (std::size_t g = 0; g < n_lambda; ++g) {
            const double lam = lambda_grid[g];
            const auto bh = busy_sorted.end() -
                            std::upper_bound(busy_sorted.begin(), busy_sorted.end(), lam);
            const auto fh = idle_sorted.end() -
                            std::upper_bound(idle_sorted.begin(), idle_sorted.end(), lam);
            if (mode == MetricAggregation::per_trial) {
                if (!busy_sorted.empty())
                    pd_terms[g].push_back(static_cast<double>(bh) /
                                          static_cast<double>(busy_sorted.size()));
                if (!idle_sorted.empty())
                    pf_terms[g].push_back(static_cast<double>(fh) /
                                          static_cast<double>(idle_sorted.size()));
            } else {
                pooled_hits[g].push_back(static_cast<double>(bh));
                pooled_false[g].push_back(static_cast<double>(fh));
            }
        }
    }

    RocCurve curve;
    curve.points.resize(n_lambda);
    for (std::size_t g = 0; g < n_lambda; ++g) {
        auto& pt = curve.points[g];
        pt.lambda = lambda_grid[g];
        if (mode == MetricAggregation::per_trial) {
            pt.pd = pd_terms[g].empty()
                        ? 0.0
                        : pairwise_sum(pd_terms[g]) / static_cast<double>(pd_terms[g].size());
            pt.pf = pf_terms[g].empty()
                        ? 0.0
                        : pairwise_sum(pf_terms[g]) / static_cast<double>(pf_terms[g].size());
        } else {
            pt.pd = total_busy == 0
                        ? 0.0
                        : pairwise_sum(pooled_hits[g]) / static_cast<double>(total_busy);
            pt.pf = total_idle == 0
                        ? 0.0
                        : pairwise_sum(pooled_false[g]) / static_cast<double>(total_idle);
        }
    }
    return curve;
}

}  // namespace specsense
