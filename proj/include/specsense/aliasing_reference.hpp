#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "specsense/rng.hpp"
#include "specsense/sampler.hpp"
#include "specsense/spectrum.hpp"

namespace specsense {
namespace detail {

/// In-place DFT/IDFT. Radix-2 when the size is a power of two, direct
/// evaluation otherwise (reference-path sizes are small).
inline void fourier_transform(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0) return;
    const double sgn = inverse ? +1.0 : -1.0;
    if ((n & (n - 1)) == 0) {
        // iterative radix-2
        for (std::size_t i = 1, j = 0; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const double ang = sgn * kTwoPi / static_cast<double>(len);
            const std::complex<double> wlen = std::polar(1.0, ang);
            for (std::size_t i = 0; i < n; i += len) {
                std::complex<double> w{1.0, 0.0};
                for (std::size_t k = 0; k < len / 2; ++k) {
                    const std::complex<double> u = a[i + k];
                    const std::complex<double> v = a[i + k + len / 2] * w;
                    a[i + k] = u + v;
                    a[i + k + len / 2] = u - v;
                    w *= wlen;
                }
            }
        }
    } else {
        std::vector<std::complex<double>> out(n, {0.0, 0.0});
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t t = 0; t < n; ++t) {
                const double ang = sgn * kTwoPi * static_cast<double>((k * t) % n) /
                                   static_cast<double>(n);
                acc += a[t] * std::polar(1.0, ang);
            }
            out[k] = acc;
        }
        a = std::move(out);
    }
    if (inverse)
        for (auto& v : a) v /= static_cast<double>(n);
}

}  // namespace detail

/// Output of the discrete-time sampler reference. Spectra are baseband
/// Fourier coefficients on the observation grid, bins -P/2 ... P/2-1 in
/// ascending order (P = periods simulated, bin spacing B/P).
struct AliasingReference {
    std::vector<std::complex<double>> measured_spectrum;
    std::vector<std::complex<double>> model_spectrum;
    double rel_error = 0.0;
};

/// Simulates one node's sampler chain in discrete time and checks it
/// against the aliasing model.
///
/// A bandlimited test signal is synthesized as random tones commensurate
/// with the observation window (so the comparison is exact, not
/// leakage-limited), multiplied by the node's chip hold waveform, ideally
/// low-pass filtered at half the chip period rate, sampled down to one
/// sample per period, and Fourier transformed. The model side evaluates
/// the weighted subband folding sum with the chip waveform's own
/// coefficients. `oversample` is the simulation rate in units of the
/// subband width and must cover the monitored band (oversample >= L).
inline AliasingReference timedomain_reference(const SpectrumConfig& cfg,
                                              const OccupancyPattern& occ,
                                              const SubbandLevels& levels,
                                              const MixingSequence& seq, int oversample,
                                              RngStream& rng, int periods = 16,
                                              int tones_per_subband = 3) {
    const int L = cfg.subband_count;
    const int l0 = cfg.half_count;
    if (static_cast<int>(seq.chips.size()) != L ||
        static_cast<int>(occ.flags.size()) != L ||
        static_cast<int>(levels.levels.size()) != L)
        throw std::invalid_argument("timedomain_reference: dimension mismatch");
    if (oversample < L)
        throw std::invalid_argument(
            "timedomain_reference: simulation grid does not cover the band (oversample < L)");
    if (periods < 4 || periods % 2 != 0)
        throw std::invalid_argument("timedomain_reference: periods must be even and >= 4");
    if (tones_per_subband < 1 || tones_per_subband > periods - 1)
        throw std::invalid_argument("timedomain_reference: tones_per_subband out of range");

    const int O = oversample;          // samples per mixing period
    const int P = periods;             // mixing periods observed
    const std::size_t N = static_cast<std::size_t>(O) * static_cast<std::size_t>(P);

    // Tone set: each occupied pair carries random tones on the bin grid,
    // strictly inside the subband, conjugate-mirrored for a real signal.
    std::map<int, std::complex<double>> tone_amps;  // signed absolute bin -> amplitude
    for (int l = 1; l <= l0; ++l) {
        if (!occ.flags[static_cast<std::size_t>(cfg.index_of(l))]) continue;
        const double level = levels.levels[static_cast<std::size_t>(cfg.index_of(l))];
        const auto offsets = rng.sample_distinct(tones_per_subband, -(P / 2 - 1), P / 2 - 1);
        for (int j : offsets) {
            const double phase = rng.uniform(0.0, kTwoPi);
            const std::complex<double> amp =
                std::polar(level / static_cast<double>(tones_per_subband), phase);
            tone_amps[l * P + j] += amp;
            tone_amps[-(l * P + j)] += std::conj(amp);
        }
    }

    // Time-domain chain: synthesize, mix, filter, sample down.
    std::vector<std::complex<double>> signal(N, {0.0, 0.0});
    for (const auto& [bin, amp] : tone_amps) {
        const std::size_t k = static_cast<std::size_t>((bin % static_cast<int>(N) +
                                                        static_cast<int>(N)) %
                                                       static_cast<int>(N));
        // accumulate in frequency, then one inverse transform
        signal[k] += amp * static_cast<double>(N);
    }
    detail::fourier_transform(signal, true);  // x[n]

    for (std::size_t n = 0; n < N; ++n) {
        const int within = static_cast<int>(n % static_cast<std::size_t>(O));
        const int chip = static_cast<int>((static_cast<std::int64_t>(within) * L) / O);
        const double p = seq.chips[static_cast<std::size_t>(chip)] > 0 ? 1.0 : -1.0;
        signal[n] *= p;
    }

    detail::fourier_transform(signal, false);
    // Brick-wall low-pass at half the output rate: keep |bin| < P/2.
    for (std::size_t k = 0; k < N; ++k) {
        const int sk = (k <= N / 2) ? static_cast<int>(k) : static_cast<int>(k) - static_cast<int>(N);
        if (std::abs(sk) >= P / 2) signal[k] = {0.0, 0.0};
    }
    detail::fourier_transform(signal, true);

    std::vector<std::complex<double>> sampled(static_cast<std::size_t>(P));
    for (int i = 0; i < P; ++i)
        sampled[static_cast<std::size_t>(i)] = signal[static_cast<std::size_t>(i) *
                                                      static_cast<std::size_t>(O)];
    detail::fourier_transform(sampled, false);

    AliasingReference out;
    out.measured_spectrum.resize(static_cast<std::size_t>(P));
    for (int j = -P / 2; j < P / 2; ++j) {
        const std::size_t src = static_cast<std::size_t>((j + P) % P);
        out.measured_spectrum[static_cast<std::size_t>(j + P / 2)] =
            sampled[src] / static_cast<double>(P);
    }

    // Model side: folding sum with the chip waveform's coefficients,
    // computed directly from the chips (independent of the chain above).
    std::vector<std::complex<double>> chip_coeff(static_cast<std::size_t>(2 * l0 + 1));
    for (int l = 0; l <= l0; ++l) {
        std::complex<double> acc{0.0, 0.0};
        for (int n = 0; n < O; ++n) {
            const int chip = static_cast<int>((static_cast<std::int64_t>(n) * L) / O);
            const double p = seq.chips[static_cast<std::size_t>(chip)] > 0 ? 1.0 : -1.0;
            acc += p * std::polar(1.0, -kTwoPi * static_cast<double>(l) *
                                           static_cast<double>(n) / static_cast<double>(O));
        }
        acc /= static_cast<double>(O);
        chip_coeff[static_cast<std::size_t>(l0 + l)] = acc;
        chip_coeff[static_cast<std::size_t>(l0 - l)] = std::conj(acc);
    }

    out.model_spectrum.assign(static_cast<std::size_t>(P), {0.0, 0.0});
    for (int j = -P / 2; j < P / 2; ++j) {
        std::complex<double> acc{0.0, 0.0};
        for (int l = -l0; l <= l0; ++l) {
            const auto it = tone_amps.find(j - l * P);
            if (it != tone_amps.end())
                acc += chip_coeff[static_cast<std::size_t>(l0 + l)] * it->second;
        }
        out.model_spectrum[static_cast<std::size_t>(j + P / 2)] = acc;
    }

    double num = 0.0, den = 0.0, input_energy = 0.0;
    for (const auto& [bin, amp] : tone_amps) input_energy += std::norm(amp);
    for (int i = 0; i < P; ++i) {
        const auto d = out.measured_spectrum[static_cast<std::size_t>(i)] -
                       out.model_spectrum[static_cast<std::size_t>(i)];
        num += std::norm(d);
        den += std::norm(out.model_spectrum[static_cast<std::size_t>(i)]);
    }
    // Floor the normalization at the injected tone energy: when the model
    // is (numerically) zero the measured side must vanish at the same
    // scale, and an identically empty instance scores 0 by convention.
    const double den_eff = std::max(den, 1e-12 * input_energy);
    out.rel_error = den_eff == 0.0 ? (num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                   : std::sqrt(num / den_eff);
    return out;
}

/// Battery used by the `selftest-aliasing` subcommand and the acceptance
/// suite: fresh occupancy/levels/chips per seed, returns every error.
struct AliasingSelftestResult {
    std::vector<double> rel_errors;
    double max_rel_error = 0.0;
};

inline AliasingSelftestResult run_aliasing_selftest(int subband_count, int oversample,
                                                    int n_seeds, std::uint64_t base_seed,
                                                    int pu_count = 2, int periods = 16) {
    const SpectrumConfig cfg = make_config(static_cast<double>(subband_count), 1.0);
    AliasingSelftestResult res;
    res.rel_errors.reserve(static_cast<std::size_t>(n_seeds));
    for (int s = 0; s < n_seeds; ++s) {
        RngStream rng(derive_seed(base_seed, 0x616C6961ULL, static_cast<std::uint64_t>(s)));
        const auto occ = draw_occupancy(cfg, pu_count, rng);
        const auto lev = draw_levels(occ, 0.5, 2.0, rng);
        const auto seq = draw_mixing(1, cfg.subband_count,
                                     derive_seed(base_seed, 0x63686970ULL,
                                                 static_cast<std::uint64_t>(s)));
        const auto ref = timedomain_reference(cfg, occ, lev, seq, oversample, rng, periods);
        res.rel_errors.push_back(ref.rel_error);
        res.max_rel_error = std::max(res.max_rel_error, ref.rel_error);
    }
    return res;
}

}  // namespace specsense
