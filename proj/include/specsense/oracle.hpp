#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "specsense/bpdn.hpp"
#include "specsense/measurement.hpp"

namespace specsense {
namespace detail {

/// Lawson-Hanson active-set nonnegative least squares. Problem sizes in
/// the oracle are tiny, so plain QR solves per step are fine.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(a.cols());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (n == 0) return x;
    std::vector<char> passive(static_cast<std::size_t>(n), 0);
    const double tol =
        1e-12 * std::max(1.0, (a.transpose() * y).cwiseAbs().maxCoeff());

    const auto solve_passive = [&](std::vector<int>& idx) {
        idx.clear();
        for (int j = 0; j < n; ++j)
            if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
        Eigen::MatrixXd ap(a.rows(), static_cast<int>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) ap.col(static_cast<int>(i)) = a.col(idx[i]);
        return Eigen::VectorXd(ap.colPivHouseholderQr().solve(y));
    };

    std::vector<int> idx;
    for (int outer = 0; outer < 3 * n + 10; ++outer) {
        const Eigen::VectorXd grad = a.transpose() * (y - a * x);
        int j_best = -1;
        double best = tol;
        for (int j = 0; j < n; ++j)
            if (!passive[static_cast<std::size_t>(j)] && grad(j) > best) {
                best = grad(j);
                j_best = j;
            }
        if (j_best < 0) break;
        passive[static_cast<std::size_t>(j_best)] = 1;

        for (int inner = 0; inner < 3 * n + 10; ++inner) {
            Eigen::VectorXd z = solve_passive(idx);
            bool all_positive = true;
            for (int i = 0; i < z.size(); ++i)
                if (z(i) <= 0.0) {
                    all_positive = false;
                    break;
                }
            if (all_positive) {
                x.setZero();
                for (std::size_t i = 0; i < idx.size(); ++i) x(idx[i]) = z(static_cast<int>(i));
                break;
            }
            double alpha = 1.0;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                if (z(static_cast<int>(i)) <= 0.0) {
                    const double xi = x(idx[i]);
                    if (xi - z(static_cast<int>(i)) > 0.0)
                        alpha = std::min(alpha, xi / (xi - z(static_cast<int>(i))));
                }
            }
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const double nv = x(idx[i]) + alpha * (z(static_cast<int>(i)) - x(idx[i]));
                x(idx[i]) = nv;
                if (nv <= 1e-14) {
                    x(idx[i]) = 0.0;
                    passive[static_cast<std::size_t>(idx[i])] = 0;
                }
            }
        }
    }
    return x;
}

inline bool next_combination(std::vector<int>& comb, int n) {
    const int s = static_cast<int>(comb.size());
    int i = s - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - s + i) --i;
    if (i < 0) return false;
    ++comb[static_cast<std::size_t>(i)];
    for (int t = i + 1; t < s; ++t)
        comb[static_cast<std::size_t>(t)] = comb[static_cast<std::size_t>(t - 1)] + 1;
    return true;
}

}  // namespace detail

/// Brute-force recovery reference: enumerates every support of size up to
/// s_max, solves nonnegative least squares on each, and returns the
/// minimum-residual solution (ties: smaller l1 norm, then lexicographically
/// smaller support). Exists to certify bp_recover on small instances;
/// refuses instances with more than 10^6 candidate supports.
inline RecoveredLevels oracle_recover(const Eigen::MatrixXcd& A, const Eigen::VectorXd& y,
                                      int s_max) {
    const int L = static_cast<int>(A.cols());
    if (static_cast<int>(y.size()) != A.rows())
        throw std::invalid_argument("oracle_recover: measurement length mismatch");
    if (s_max < 0 || s_max > L)
        throw std::invalid_argument("oracle_recover: s_max out of range");

    double total = 0.0;
    {
        double c = 1.0;  // C(L, 0)
        total = 1.0;
        for (int s = 1; s <= s_max; ++s) {
            c *= static_cast<double>(L - s + 1) / static_cast<double>(s);
            total += c;
            if (total > 1e6)
                throw std::invalid_argument("oracle_recover: combinatorial guard exceeded");
        }
    }

    const Eigen::MatrixXd ar = realify(A);
    const Eigen::VectorXd yr = realify_measurements(y);
    const double res_tol = 1e-9 * std::max(1.0, yr.norm());

    Eigen::VectorXd best_x = Eigen::VectorXd::Zero(L);
    double best_res = yr.norm();
    double best_l1 = 0.0;
    std::vector<int> best_support;  // size-0 support is the initial incumbent
    long evaluated = 1;

    for (int s = 1; s <= s_max; ++s) {
        std::vector<int> comb(static_cast<std::size_t>(s));
        for (int i = 0; i < s; ++i) comb[static_cast<std::size_t>(i)] = i;
        do {
            ++evaluated;
            Eigen::MatrixXd cols(ar.rows(), s);
            for (int i = 0; i < s; ++i) cols.col(i) = ar.col(comb[static_cast<std::size_t>(i)]);
            const Eigen::VectorXd xs = detail::nnls(cols, yr);
            const double res = (yr - cols * xs).norm();
            const double l1 = xs.sum();
            bool take = false;
            if (res < best_res - res_tol) {
                take = true;
            } else if (res <= best_res + res_tol) {
                const double l1_tol = 1e-9 * (1.0 + best_l1);
                if (l1 < best_l1 - l1_tol)
                    take = true;
                else if (std::abs(l1 - best_l1) <= l1_tol &&
                         std::lexicographical_compare(comb.begin(), comb.end(),
                                                      best_support.begin(), best_support.end()))
                    take = true;
            }
            if (take) {
                best_res = res;
                best_l1 = l1;
                best_support = comb;
                best_x.setZero();
                for (int i = 0; i < s; ++i) best_x(comb[static_cast<std::size_t>(i)]) = xs(i);
            }
        } while (detail::next_combination(comb, L));
    }

    RecoveredLevels out;
    out.x_hat.assign(best_x.data(), best_x.data() + L);
    out.report.iterations = static_cast<int>(evaluated);
    out.report.residual_norm = best_res;
    out.report.l1_norm = best_l1;
    out.report.converged = true;
    out.report.feasible = true;
    return out;
}

inline RecoveredLevels oracle_recover(const MeasurementMatrix& mm, const Eigen::VectorXd& y,
                                      int s_max) {
    return oracle_recover(mm.entries, y, s_max);
}

}  // namespace specsense
