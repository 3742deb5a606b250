#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "specsense/measurement.hpp"
#include "specsense/spectrum.hpp"

namespace specsense {

struct SolverOptions {
    int max_iters = 20000;
    double kkt_tol = 1e-7;    ///< stationarity tolerance, relative to the initial correlation
    double feas_tol = 1e-6;   ///< accepted residual slack: ||Ax-y|| <= eps*(1+feas_tol)
    bool fold_symmetry = false;  ///< solve the half-size mirrored problem instead
    /// Residual bound. Defaults to sigma_w*sqrt(K), the expected noise norm
    /// of the realified system (noise enters the K real rows only).
    std::optional<double> epsilon;

    bool operator==(const SolverOptions&) const = default;
};

struct SolverReport {
    int iterations = 0;
    double residual_norm = 0.0;  ///< ||A x_hat - y||_2 (complex system = realified system)
    double l1_norm = 0.0;
    bool converged = false;  ///< path completed and KKT conditions verified
    bool feasible = false;   ///< residual bound met (false when eps is unreachable)
};

/// Recovered per-subband level vector plus solver diagnostics.
struct RecoveredLevels {
    std::vector<double> x_hat;
    SolverReport report;
};

namespace detail {

struct HomotopyResult {
    Eigen::VectorXd x;
    int iterations = 0;
    bool converged = false;
};

/// Weighted nonnegative basis-pursuit denoising by homotopy.
///
/// Solves   min_x  sum_i w_i x_i   s.t.  ||A x - y||_2 <= eps,  x >= 0
/// by tracing the regularized path  min 1/2||Ax-y||^2 + mu w'x, x >= 0
/// from mu = max_j (A'y)_j / w_j downward. On each segment the active-set
/// solution is affine in mu and the residual norm is monotone, so the
/// first mu where the residual hits eps yields the constrained optimum
/// (the KKT systems coincide with nu = 1/(2 mu)). eps = 0 is handled by
/// running the path to its least-squares end. Direct triangular solves on
/// an incrementally grown Cholesky factor keep the path accurate to
/// machine precision, which the noiseless recovery contracts rely on.
inline HomotopyResult nonneg_bpdn_homotopy(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                           double epsilon, const Eigen::VectorXd& weights,
                                           int max_iters, double kkt_tol) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    HomotopyResult res;
    res.x = Eigen::VectorXd::Zero(n);

    const double ynorm = y.norm();
    // eps = 0 runs the path to a numerical-zero residual, kept one order
    // tighter than the feasibility floor applied by the caller
    const double eps_eff = std::max(epsilon, 1e-13 * std::max(1.0, ynorm));
    if (ynorm <= eps_eff) {  // zero is feasible, hence optimal
        res.converged = true;
        return res;
    }

    const Eigen::VectorXd c0 = A.transpose() * y;
    double mu = 0.0;
    int j_first = -1;
    for (int j = 0; j < n; ++j) {
        const double cw = c0(j) / weights(j);
        if (cw > mu) {
            mu = cw;
            j_first = j;
        }
    }
    const double mu0 = mu;
    if (j_first < 0 || mu <= 0.0) {  // no descent direction in the cone: 0 is the floor
        res.converged = true;
        return res;
    }

    const int cap = std::min(m, n) + 1;
    std::vector<int> active;
    active.reserve(static_cast<std::size_t>(cap));
    std::vector<char> in_active(static_cast<std::size_t>(n), 0);
    Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(cap, cap);  // upper factor of Gram(active)

    const auto gram_solve = [&](const Eigen::VectorXd& rhs) {
        const int s = static_cast<int>(active.size());
        const auto r = chol.topLeftCorner(s, s);
        Eigen::VectorXd t = r.transpose().triangularView<Eigen::Lower>().solve(rhs);
        return Eigen::VectorXd(r.triangularView<Eigen::Upper>().solve(t));
    };

    const auto append_column = [&](int j) {
        const int s = static_cast<int>(active.size());
        if (s >= cap) return false;
        const double d = A.col(j).squaredNorm();
        if (d <= 0.0) return false;
        if (s == 0) {
            chol(0, 0) = std::sqrt(d);
        } else {
            Eigen::VectorXd g(s);
            for (int i = 0; i < s; ++i) g(i) = A.col(active[static_cast<std::size_t>(i)]).dot(A.col(j));
            Eigen::VectorXd u =
                chol.topLeftCorner(s, s).transpose().triangularView<Eigen::Lower>().solve(g);
            const double d2 = d - u.squaredNorm();
            if (d2 <= 1e-12 * d) return false;  // numerically dependent on the active set
            chol.block(0, s, s, 1) = u;
            chol.block(s, 0, 1, s).setZero();
            chol(s, s) = std::sqrt(d2);
        }
        active.push_back(j);
        in_active[static_cast<std::size_t>(j)] = 1;
        return true;
    };

    const auto rebuild_cholesky = [&]() {
        const int s = static_cast<int>(active.size());
        Eigen::MatrixXd gram(s, s);
        for (int i = 0; i < s; ++i)
            for (int j = i; j < s; ++j) {
                const double v = A.col(active[static_cast<std::size_t>(i)])
                                     .dot(A.col(active[static_cast<std::size_t>(j)]));
                gram(i, j) = v;
                gram(j, i) = v;
            }
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) return false;
        chol.topLeftCorner(s, s) = llt.matrixU();
        return true;
    };

    if (!append_column(j_first)) {
        res.converged = false;
        return res;
    }

    double mu_final = mu;
    Eigen::VectorXd x_active;
    bool path_done = false;
    int iter = 0;
    int last_removed = -1;
    int last_added = j_first;  // a just-added column sits at zero and may not leave at once
    std::vector<char> blocked(static_cast<std::size_t>(n), 0);

    while (true) {
        ++iter;
        const int s = static_cast<int>(active.size());
        Eigen::VectorXd aty(s), w_act(s);
        for (int i = 0; i < s; ++i) {
            aty(i) = c0(active[static_cast<std::size_t>(i)]);
            w_act(i) = weights(active[static_cast<std::size_t>(i)]);
        }
        const Eigen::VectorXd z = gram_solve(aty);    // least-squares point of the segment
        const Eigen::VectorXd h = gram_solve(w_act);  // shrink direction: x(mu) = z - mu h
        Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
        Eigen::VectorXd r_ls = y;
        for (int i = 0; i < s; ++i) {
            u += A.col(active[static_cast<std::size_t>(i)]) * h(i);
            r_ls -= A.col(active[static_cast<std::size_t>(i)]) * z(i);
        }
        const double rho0sq = r_ls.squaredNorm();
        const double q = u.squaredNorm();

        if (iter > max_iters) {
            mu_final = mu;
            x_active = z - mu * h;
            path_done = false;
            break;
        }

        // residual(mu)^2 = rho0sq + mu^2 q: first feasible mu on this segment
        double mu_stop = -1.0;
        if (eps_eff * eps_eff >= rho0sq)
            mu_stop = (q > 0.0) ? std::min(std::sqrt((eps_eff * eps_eff - rho0sq) / q), mu) : mu;

        const Eigen::VectorXd a_corr = A.transpose() * r_ls;
        const Eigen::VectorXd b_corr = A.transpose() * u;
        std::fill(blocked.begin(), blocked.end(), 0);
        // Tie window relative to the path scale. Mirrored subband columns
        // produce exactly tied events; a "first candidate beyond the
        // window wins" rule resolves such ties to the smallest column
        // index, so the traced path does not depend on the data scale.
        // The window is far below meaningful event separations but wide
        // enough to absorb the arithmetic noise of rescaled data.
        const double tie = 1e-9 * mu0;
        double x_scale = 0.0;
        for (int i = 0; i < s; ++i) x_scale = std::max(x_scale, std::abs(z(i)));

        bool handled = false;
        while (!handled) {
            double mu_join = -1.0;
            int j_join = -1;
            for (int j = 0; j < n; ++j) {
                if (in_active[static_cast<std::size_t>(j)] || blocked[static_cast<std::size_t>(j)])
                    continue;
                // c_j(mu)/w_j: above the bound means the coordinate is
                // already violated (a late leave rerouted the path); it
                // joins at mu to restore optimality, whatever its crossing
                // geometry. Otherwise the first crossing below mu applies.
                const double cnow = (a_corr(j) + mu * b_corr(j)) / weights(j);
                double cand;
                if (cnow > mu + tie) {
                    cand = cnow;
                } else {
                    const double den = weights(j) - b_corr(j);
                    if (den <= 1e-12 * (std::abs(weights(j)) + std::abs(b_corr(j)))) continue;
                    cand = a_corr(j) / den;
                    if (cand <= tie || cand > mu + tie) continue;
                }
                // the one-event rejoin bar only applies at mu itself
                if (j == last_removed && cand <= mu + tie) continue;
                if (cand > mu_join + tie) {
                    mu_join = cand;
                    j_join = j;
                }
            }
            double mu_leave = -1.0;
            int i_leave = -1;
            for (int i = 0; i < s; ++i) {
                if (active[static_cast<std::size_t>(i)] == last_added) continue;
                double cand;
                if (z(i) - mu * h(i) < -1e-9 * x_scale) {
                    // Genuinely negative here: the exact crossing landed on
                    // the wrong side of an earlier event. Leave now. The
                    // threshold sits above the solve noise of ill-conditioned
                    // mirror-twin segments, whose chatter must not trigger it.
                    cand = mu;
                } else if (h(i) < -1e-14 && z(i) < 0.0) {
                    // Crossings at mu itself are legitimate: after a tied or
                    // repair join, redistributed mass can head negative
                    // immediately.
                    cand = std::min(z(i) / h(i), mu);
                    if (cand <= 0.0) continue;
                } else {
                    continue;
                }
                const bool better = cand > mu_leave + tie;
                const bool tied_smaller = !better && cand > mu_leave - tie && i_leave >= 0 &&
                                          active[static_cast<std::size_t>(i)] <
                                              active[static_cast<std::size_t>(i_leave)];
                if (better || tied_smaller) {
                    if (better) mu_leave = cand;
                    i_leave = i;
                }
            }

            const double mu_event = std::max(mu_join, mu_leave);
            if (mu_stop >= 0.0 && mu_stop >= mu_event + tie) {
                mu_final = mu_stop;
                x_active = z - mu_stop * h;
                path_done = true;
                handled = true;
                break;
            }
            if (mu_event < 0.0) {  // path end: mu -> 0, x -> least squares on the cone
                mu_final = 0.0;
                x_active = z;
                path_done = true;
                handled = true;
                break;
            }
            if (mu_join > mu_leave) {
                if (append_column(j_join)) {
                    mu = std::min(mu_join, mu);
                    last_removed = -1;
                    last_added = j_join;
                    handled = true;
                } else {
                    blocked[static_cast<std::size_t>(j_join)] = 1;  // retry without it
                }
            } else {
                const int gone = active[static_cast<std::size_t>(i_leave)];
                in_active[static_cast<std::size_t>(gone)] = 0;
                active.erase(active.begin() + i_leave);
                if (!rebuild_cholesky()) {
                    active.insert(active.begin() + i_leave, gone);  // keep x_active aligned
                    in_active[static_cast<std::size_t>(gone)] = 1;
                    mu_final = mu;
                    x_active = z - mu * h;
                    path_done = false;
                    handled = true;
                    break;
                }
                mu = mu_leave;
                last_removed = gone;  // barred from rejoining for one event
                last_added = -1;
                handled = true;
            }
        }
        if (x_active.size() > 0) break;  // a terminal branch filled the solution
    }

    for (std::size_t i = 0; i < active.size(); ++i)
        res.x(active[i]) = std::max(0.0, x_active(static_cast<int>(i)));
    res.iterations = iter;

    // KKT audit at the final point: active coordinates sit on the bound,
    // inactive ones below it.
    const Eigen::VectorXd c_fin = A.transpose() * (y - A * res.x);
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        const double cw = c_fin(j) / weights(j);
        if (res.x(j) > 0.0)
            worst = std::max(worst, std::abs(cw - mu_final));
        else
            worst = std::max(worst, cw - mu_final);
    }
    res.converged = path_done && worst <= kkt_tol * std::max(mu0, 1e-300);
    return res;
}

}  // namespace detail

/// Recovers the nonnegative level vector from fused measurements by noisy
/// basis pursuit: min ||x||_1 subject to ||A x - y||_2 <= eps, x >= 0.
/// The complex system is realified (real and imaginary rows stacked)
/// before solving. eps defaults to sigma_w * sqrt(K) and may be
/// overridden through SolverOptions::epsilon.
inline RecoveredLevels bp_recover(const Eigen::MatrixXcd& A, const Eigen::VectorXd& y,
                                  const NoiseModel& noise, const SolverOptions& opts = {}) {
    const int K = static_cast<int>(A.rows());
    const int L = static_cast<int>(A.cols());
    if (static_cast<int>(y.size()) != K)
        throw std::invalid_argument("bp_recover: measurement length mismatch");
    if (noise.sigma_w < 0.0) throw std::invalid_argument("bp_recover: sigma_w negative");
    const double epsilon =
        opts.epsilon ? *opts.epsilon : noise.sigma_w * std::sqrt(static_cast<double>(K));
    if (epsilon < 0.0) throw std::invalid_argument("bp_recover: epsilon negative");

    const Eigen::MatrixXd ar = realify(A);
    const Eigen::VectorXd yr = realify_measurements(y);

    detail::HomotopyResult hr;
    Eigen::VectorXd x(L);
    if (opts.fold_symmetry) {
        if (L % 2 == 0)
            throw std::invalid_argument("bp_recover: fold_symmetry needs an odd column count");
        const int l0 = (L - 1) / 2;
        Eigen::MatrixXd folded(ar.rows(), l0 + 1);
        Eigen::VectorXd w(l0 + 1);
        folded.col(0) = ar.col(l0);
        w(0) = 1.0;
        for (int t = 1; t <= l0; ++t) {
            folded.col(t) = ar.col(l0 - t) + ar.col(l0 + t);
            w(t) = 2.0;
        }
        hr = detail::nonneg_bpdn_homotopy(folded, yr, epsilon, w, opts.max_iters, opts.kkt_tol);
        x(l0) = hr.x(0);
        for (int t = 1; t <= l0; ++t) {
            x(l0 - t) = hr.x(t);
            x(l0 + t) = hr.x(t);
        }
    } else {
        hr = detail::nonneg_bpdn_homotopy(ar, yr, epsilon, Eigen::VectorXd::Ones(L),
                                          opts.max_iters, opts.kkt_tol);
        x = hr.x;
    }

    RecoveredLevels out;
    out.x_hat.assign(x.data(), x.data() + L);
    out.report.iterations = hr.iterations;
    out.report.residual_norm = (ar * x - yr).norm();
    out.report.l1_norm = x.sum();
    out.report.converged = hr.converged;
    const double zero_floor = 1e-12 * std::max(1.0, yr.norm());
    out.report.feasible =
        out.report.residual_norm <= epsilon * (1.0 + opts.feas_tol) + zero_floor;
    return out;
}

inline RecoveredLevels bp_recover(const MeasurementMatrix& mm, const Eigen::VectorXd& y,
                                  const NoiseModel& noise, const SolverOptions& opts = {}) {
    return bp_recover(mm.entries, y, noise, opts);
}

}  // namespace specsense
