#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <complex>
#include <cstdint>
#include <iostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "specsense/sampler.hpp"
#include "specsense/spectrum.hpp"

namespace specsense {

/// The fused measurement vector: one real scalar per participating node,
/// stacked in node order.
using MeasurementVector = Eigen::VectorXd;

/// Fusion-center measurement matrix A (K x L complex) together with its
/// factors: A = S * F * D * H, where S holds the nodes' chip signs, F the
/// roots-of-unity mixing transform, D the diagonal of chip-hold
/// coefficients and H the diagonal of channel gains. `entries` is built
/// row-by-row from each node's Fourier coefficients; the factor product
/// must reproduce it to 1e-12 elementwise.
struct MeasurementMatrix {
    Eigen::MatrixXcd entries;         // K x L
    Eigen::MatrixXd sign_factor;      // S: K x L
    Eigen::MatrixXcd fourier_factor;  // F: L x L, F(m, i) = theta^{(L0 - i) m}
    Eigen::VectorXcd hold_factor;     // diagonal of D
    Eigen::VectorXd gain_factor;      // diagonal of H

    int node_count() const { return static_cast<int>(entries.rows()); }
    int subband_count() const { return static_cast<int>(entries.cols()); }

    Eigen::MatrixXcd factor_product() const {
        return sign_factor.cast<std::complex<double>>() * fourier_factor *
               hold_factor.asDiagonal() * gain_factor.cast<std::complex<double>>().asDiagonal();
    }
};

/// Rebuilds every node's mixing sequence from its seed and assembles the
/// measurement matrix. Seed agreement with the nodes is a protocol
/// assumption; a mismatch is not detectable here.
inline MeasurementMatrix assemble_matrix(std::span<const std::uint64_t> node_seeds,
                                         const SpectrumConfig& cfg,
                                         const ChannelProfile& channel) {
    const int K = static_cast<int>(node_seeds.size());
    const int L = cfg.subband_count;
    if (K < 1) throw std::invalid_argument("assemble_matrix: need at least one node");
    if (static_cast<int>(channel.gains.size()) != L)
        throw std::invalid_argument("assemble_matrix: channel length mismatch");
    if (K > L) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::cerr << "assemble_matrix: K = " << K << " exceeds L = " << L
                      << "; the system is not compressed\n";
    }

    MeasurementMatrix mm;
    mm.entries.resize(K, L);
    mm.sign_factor.resize(K, L);
    mm.fourier_factor.resize(L, L);
    mm.hold_factor.resize(L);
    mm.gain_factor.resize(L);

    std::vector<std::complex<double>> root(static_cast<std::size_t>(L));
    for (int p = 0; p < L; ++p)
        root[static_cast<std::size_t>(p)] =
            std::polar(1.0, -kTwoPi * static_cast<double>(p) / static_cast<double>(L));
    for (int m = 0; m < L; ++m)
        for (int i = 0; i < L; ++i) {
            const int l = cfg.subband_of(i);
            const auto e = static_cast<std::size_t>(
                ((static_cast<std::int64_t>(l) * m) % L + L) % L);
            mm.fourier_factor(m, i) = root[e];
        }
    for (int i = 0; i < L; ++i) {
        mm.hold_factor(i) = hold_coeff(cfg.subband_of(i), L);
        mm.gain_factor(i) = channel.gains[static_cast<std::size_t>(i)];
    }

    for (int k = 0; k < K; ++k) {
        const auto seq = draw_mixing(k + 1, L, node_seeds[static_cast<std::size_t>(k)]);
        const auto row = fourier_coeffs(seq);
        for (int i = 0; i < L; ++i) {
            mm.sign_factor(k, i) = static_cast<double>(seq.chips[static_cast<std::size_t>(i)]);
            mm.entries(k, i) = row.coeffs[static_cast<std::size_t>(i)] *
                               channel.gains[static_cast<std::size_t>(i)];
        }
    }
    return mm;
}

/// Stacks real and imaginary parts into a real 2K x L system. The
/// measured vector is real, so its imaginary half is zero; those rows
/// still constrain the solution (they pin the even symmetry).
inline Eigen::MatrixXd realify(const Eigen::MatrixXcd& a) {
    Eigen::MatrixXd out(2 * a.rows(), a.cols());
    out.topRows(a.rows()) = a.real();
    out.bottomRows(a.rows()) = a.imag();
    return out;
}

inline Eigen::VectorXd realify_measurements(const Eigen::VectorXd& y) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * y.size());
    out.head(y.size()) = y;
    return out;
}

}  // namespace specsense
