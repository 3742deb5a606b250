#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "specsense/rng.hpp"

namespace specsense {

/// Partition of a monitored band into L equal subbands centered on DC.
///
/// Subbands are indexed l = +L0 ... -L0 (descending, matching the storage
/// order of every per-subband vector in this library: slot i holds
/// subband l = L0 - i). L is always odd; the covered span L*B is the
/// smallest centered odd grid that contains the requested bandwidth, so
/// it can exceed `total_bandwidth_hz` by one subband when W/B is even.
struct SpectrumConfig {
    double total_bandwidth_hz = 0.0;    ///< requested W (nominal)
    double subband_bandwidth_hz = 0.0;  ///< B
    int subband_count = 0;              ///< L (odd)
    int half_count = 0;                 ///< L0 = (L-1)/2

    int index_of(int subband) const { return half_count - subband; }
    int subband_of(int index) const { return half_count - index; }
    double covered_bandwidth_hz() const { return subband_count * subband_bandwidth_hz; }
};

/// Builds the subband partition for total bandwidth W and subband width B.
/// W/B must be a positive integer; an even ratio is widened to the odd
/// count L = W/B + 1 so the grid stays centered on DC.
inline SpectrumConfig make_config(double total_bandwidth_hz, double subband_bandwidth_hz) {
    if (!(total_bandwidth_hz > 0.0) || !(subband_bandwidth_hz > 0.0))
        throw std::invalid_argument("make_config: bandwidths must be positive");
    const double ratio = total_bandwidth_hz / subband_bandwidth_hz;
    const auto n = static_cast<long long>(std::llround(ratio));
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * static_cast<double>(n))
        throw std::invalid_argument(
            "make_config: total bandwidth is not an integer number of subbands (W/B = " +
            std::to_string(ratio) + ")");
    SpectrumConfig cfg;
    cfg.total_bandwidth_hz = total_bandwidth_hz;
    cfg.subband_bandwidth_hz = subband_bandwidth_hz;
    cfg.half_count = static_cast<int>(n / 2);
    cfg.subband_count = 2 * cfg.half_count + 1;
    return cfg;
}

/// Ground-truth busy/idle flags per subband. Always mirror-symmetric
/// (real signals), DC never occupied, so exactly 2*pu_count slots are busy.
struct OccupancyPattern {
    std::vector<std::uint8_t> flags;  ///< slot i <-> subband L0 - i
    int pu_count = 0;                 ///< J

    int half_count() const { return (static_cast<int>(flags.size()) - 1) / 2; }
};

/// Draws J occupied subband pairs uniformly from the positive indices.
inline OccupancyPattern draw_occupancy(const SpectrumConfig& cfg, int pu_count,
                                       RngStream& rng) {
    if (pu_count < 0 || pu_count > cfg.half_count)
        throw std::invalid_argument("draw_occupancy: need 0 <= J <= L0");
    OccupancyPattern occ;
    occ.pu_count = pu_count;
    occ.flags.assign(static_cast<std::size_t>(cfg.subband_count), 0);
    if (pu_count > 0) {
        for (int l : rng.sample_distinct(pu_count, 1, cfg.half_count)) {
            occ.flags[static_cast<std::size_t>(cfg.index_of(+l))] = 1;
            occ.flags[static_cast<std::size_t>(cfg.index_of(-l))] = 1;
        }
    }
    return occ;
}

/// Average spectral level per subband; zero exactly where idle.
struct SubbandLevels {
    std::vector<double> levels;
};

/// Assigns each occupied pair one level drawn uniform on [low, high],
/// mirrored bit-for-bit across DC.
inline SubbandLevels draw_levels(const OccupancyPattern& occ, double low, double high,
                                 RngStream& rng) {
    if (!(low > 0.0) || !(high >= low))
        throw std::invalid_argument("draw_levels: need 0 < low <= high");
    const int l0 = occ.half_count();
    SubbandLevels out;
    out.levels.assign(occ.flags.size(), 0.0);
    for (int l = 1; l <= l0; ++l) {
        const auto pos = static_cast<std::size_t>(l0 - l);
        const auto neg = static_cast<std::size_t>(l0 + l);
        if (occ.flags[pos]) {
            const double v = rng.uniform(low, high);
            out.levels[pos] = v;
            out.levels[neg] = v;
        }
    }
    return out;
}

/// Flat per-subband magnitude gain, shared by all nodes of a cluster.
struct ChannelProfile {
    std::vector<double> gains;
};

enum class FadingModel { identity, rayleigh_magnitude };

/// identity -> all-ones gains; rayleigh_magnitude -> mirrored Rayleigh
/// draws (DC gain drawn once).
inline ChannelProfile draw_channel(const SpectrumConfig& cfg, FadingModel fading,
                                   double scale, RngStream& rng) {
    ChannelProfile ch;
    ch.gains.assign(static_cast<std::size_t>(cfg.subband_count), 1.0);
    if (fading == FadingModel::rayleigh_magnitude) {
        if (!(scale > 0.0))
            throw std::invalid_argument("draw_channel: rayleigh scale must be positive");
        ch.gains[static_cast<std::size_t>(cfg.half_count)] = rng.rayleigh(scale);
        for (int l = 1; l <= cfg.half_count; ++l) {
            const double g = rng.rayleigh(scale);
            ch.gains[static_cast<std::size_t>(cfg.index_of(+l))] = g;
            ch.gains[static_cast<std::size_t>(cfg.index_of(-l))] = g;
        }
    }
    return ch;
}

/// Additive measurement noise: standard deviation of the Gaussian term
/// added to each node's scalar sample.
struct NoiseModel {
    double sigma_w = 0.0;
};

}  // namespace specsense
