#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "specsense/rng.hpp"
#include "specsense/spectrum.hpp"

namespace specsense {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Per-node pseudorandom +/-1 chip sequence, one chip per subband slot of
/// the mixing period. Reproducible anywhere from (seed, node_id), which is
/// how the fusion center regenerates the aliasing pattern.
struct MixingSequence {
    int node_id = 0;
    std::uint64_t seed = 0;
    std::vector<std::int8_t> chips;  ///< each +1 or -1, length L
};

namespace detail {
inline constexpr std::uint64_t kMixingStreamTag = 0x6D697869ULL;  // "mixi"
}

inline MixingSequence draw_mixing(int node_id, int subband_count, std::uint64_t seed) {
    if (subband_count < 1 || subband_count % 2 == 0)
        throw std::invalid_argument("draw_mixing: subband count must be odd and positive");
    MixingSequence seq;
    seq.node_id = node_id;
    seq.seed = seed;
    seq.chips.resize(static_cast<std::size_t>(subband_count));
    RngStream rng(derive_seed(seed, detail::kMixingStreamTag,
                              static_cast<std::uint64_t>(node_id)));
    for (auto& chip : seq.chips) chip = static_cast<std::int8_t>(rng.sign_chip());
    return seq;
}

/// Fourier coefficient of one period-long chip hold:
/// 1/L at DC, (1 - theta^l) / (j 2 pi l) otherwise, theta = e^{-j 2 pi / L}.
inline std::complex<double> hold_coeff(int l, int subband_count) {
    if (l == 0) return {1.0 / static_cast<double>(subband_count), 0.0};
    const std::complex<double> theta_l =
        std::polar(1.0, -kTwoPi * static_cast<double>(l) / static_cast<double>(subband_count));
    return (1.0 - theta_l) / std::complex<double>(0.0, kTwoPi * static_cast<double>(l));
}

/// Fourier coefficients c_l of a node's mixing waveform, indexed like all
/// per-subband vectors (slot i <-> l = L0 - i). The negative half is the
/// exact conjugate of the positive half (real waveform), stored as such.
struct FourierCoeffRow {
    std::vector<std::complex<double>> coeffs;

    int half_count() const { return (static_cast<int>(coeffs.size()) - 1) / 2; }
};

inline FourierCoeffRow fourier_coeffs(const MixingSequence& seq) {
    const int L = static_cast<int>(seq.chips.size());
    if (L < 1 || L % 2 == 0)
        throw std::invalid_argument("fourier_coeffs: chip count must be odd and positive");
    const int l0 = (L - 1) / 2;

    // Roots-of-unity table: theta^p for p in [0, L)
    std::vector<std::complex<double>> root(static_cast<std::size_t>(L));
    for (int p = 0; p < L; ++p)
        root[static_cast<std::size_t>(p)] =
            std::polar(1.0, -kTwoPi * static_cast<double>(p) / static_cast<double>(L));

    FourierCoeffRow row;
    row.coeffs.assign(static_cast<std::size_t>(L), {0.0, 0.0});
    for (int l = 0; l <= l0; ++l) {
        std::complex<double> acc{0.0, 0.0};
        for (int m = 0; m < L; ++m) {
            const auto e = static_cast<std::size_t>((static_cast<std::int64_t>(l) * m) % L);
            if (seq.chips[static_cast<std::size_t>(m)] > 0)
                acc += root[e];
            else
                acc -= root[e];
        }
        const std::complex<double> c = hold_coeff(l, L) * acc;
        row.coeffs[static_cast<std::size_t>(l0 - l)] = c;
        row.coeffs[static_cast<std::size_t>(l0 + l)] = std::conj(c);
    }
    // DC coefficient is real by construction; scrub the signed zero.
    row.coeffs[static_cast<std::size_t>(l0)] =
        {row.coeffs[static_cast<std::size_t>(l0)].real(), 0.0};
    return row;
}

/// Noiseless value of one node's aliased sample: Re(sum_l c_l H_l X_l).
/// The sum is real because c is conjugate-symmetric and H.*X is an even
/// real sequence; a residual imaginary part beyond rounding is a bug.
inline double measurement_value(const FourierCoeffRow& coeffs, const ChannelProfile& channel,
                                const SubbandLevels& levels) {
    const std::size_t n = coeffs.coeffs.size();
    if (channel.gains.size() != n || levels.levels.size() != n)
        throw std::invalid_argument("measurement_value: dimension mismatch");
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
        acc += coeffs.coeffs[i] * (channel.gains[i] * levels.levels[i]);
    const double tol = 1e-9 * std::max(1.0, std::abs(acc));
    if (std::abs(acc.imag()) > tol)
        throw std::runtime_error("measurement_value: imaginary residue above tolerance");
    return acc.real();
}

/// One compressed sample y_k = Re(sum_l c_l H_l X_l) + w, w ~ N(0, sigma_w^2).
inline double node_measurement(const FourierCoeffRow& coeffs, const ChannelProfile& channel,
                               const SubbandLevels& levels, const NoiseModel& noise,
                               RngStream& rng) {
    if (noise.sigma_w < 0.0)
        throw std::invalid_argument("node_measurement: sigma_w must be nonnegative");
    return measurement_value(coeffs, channel, levels) + noise.sigma_w * rng.normal();
}

}  // namespace specsense
