#include <catch2/catch_amalgamated.hpp>

#include "specsense/rng.hpp"
#include "specsense/spectrum.hpp"

using namespace specsense;

TEST_CASE("spectrum - make_config builds the centered odd partition") {
    const auto cfg = make_config(6e9, 30e6);
    REQUIRE(cfg.subband_count == 201);
    REQUIRE(cfg.half_count == 100);
    REQUIRE(cfg.total_bandwidth_hz == 6e9);
    REQUIRE(cfg.covered_bandwidth_hz() == Catch::Approx(6.03e9));

    const auto tiny = make_config(3.0, 1.0);
    REQUIRE(tiny.subband_count == 3);
    REQUIRE(tiny.half_count == 1);
    REQUIRE(tiny.covered_bandwidth_hz() == Catch::Approx(3.0));
}

TEST_CASE("spectrum - even ratios widen by one subband, non-integer ratios are rejected") {
    const auto cfg = make_config(6e9, 40e6);  // ratio 150
    REQUIRE(cfg.subband_count == 151);
    REQUIRE_THROWS_AS(make_config(6e9, 7e6), std::invalid_argument);
    REQUIRE_THROWS_AS(make_config(0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_config(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("spectrum - index mapping is an involution") {
    const auto cfg = make_config(9.0, 1.0);
    for (int l = -cfg.half_count; l <= cfg.half_count; ++l)
        REQUIRE(cfg.subband_of(cfg.index_of(l)) == l);
}

TEST_CASE("spectrum - occupancy has 2J mirrored flags with idle DC") {
    const auto cfg = make_config(201.0, 1.0);
    RngStream rng(1);
    const auto occ = draw_occupancy(cfg, 15, rng);
    long ones = 0;
    for (auto f : occ.flags) ones += f;
    REQUIRE(ones == 30);
    REQUIRE(occ.flags[static_cast<std::size_t>(cfg.index_of(0))] == 0);
    for (int l = 1; l <= cfg.half_count; ++l)
        REQUIRE(occ.flags[static_cast<std::size_t>(cfg.index_of(l))] ==
                occ.flags[static_cast<std::size_t>(cfg.index_of(-l))]);
}

TEST_CASE("spectrum - occupancy corner cases") {
    const auto cfg = make_config(201.0, 1.0);
    RngStream rng(2);
    const auto empty = draw_occupancy(cfg, 0, rng);
    for (auto f : empty.flags) REQUIRE(f == 0);

    const auto small = make_config(5.0, 1.0);
    const auto forced = draw_occupancy(small, 2, rng);
    REQUIRE(forced.flags == std::vector<std::uint8_t>{1, 1, 0, 1, 1});

    REQUIRE_THROWS_AS(draw_occupancy(small, 3, rng), std::invalid_argument);
}

TEST_CASE("spectrum - generated patterns are symmetric and 2J-sparse for every seed") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RngStream rng(derive_seed(99, seed));
        const int l0 = 3 + static_cast<int>(rng.below(30));
        const auto cfg = make_config(static_cast<double>(2 * l0 + 1), 1.0);
        const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(l0 + 1)));
        const auto occ = draw_occupancy(cfg, j, rng);
        const auto lev = draw_levels(occ, 0.5, 2.0, rng);
        const auto chan = draw_channel(cfg, FadingModel::rayleigh_magnitude, 1.0, rng);
        long ones = 0;
        for (auto f : occ.flags) ones += f;
        REQUIRE(ones == 2 * j);
        for (int l = 1; l <= l0; ++l) {
            const auto p = static_cast<std::size_t>(cfg.index_of(+l));
            const auto n = static_cast<std::size_t>(cfg.index_of(-l));
            REQUIRE(occ.flags[p] == occ.flags[n]);
            REQUIRE(lev.levels[p] == lev.levels[n]);  // bit-identical
            REQUIRE(chan.gains[p] == chan.gains[n]);
            REQUIRE((lev.levels[p] > 0.0) == (occ.flags[p] == 1));
        }
    }
}

TEST_CASE("spectrum - identical seeds reproduce identical draws") {
    const auto cfg = make_config(41.0, 1.0);
    RngStream r1(1234), r2(1234);
    const auto o1 = draw_occupancy(cfg, 5, r1);
    const auto o2 = draw_occupancy(cfg, 5, r2);
    REQUIRE(o1.flags == o2.flags);
    const auto l1 = draw_levels(o1, 0.5, 2.0, r1);
    const auto l2 = draw_levels(o2, 0.5, 2.0, r2);
    REQUIRE(l1.levels == l2.levels);
}

TEST_CASE("spectrum - levels cover the requested range and respect support") {
    OccupancyPattern occ;
    occ.flags = {1, 0, 0, 0, 1};  // l = +/-2 occupied
    occ.pu_count = 1;
    double lo_seen = 1e300, hi_seen = 0.0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        RngStream rng(derive_seed(5, seed));
        const auto lev = draw_levels(occ, 0.5, 2.0, rng);
        REQUIRE(lev.levels[0] == lev.levels[4]);
        REQUIRE(lev.levels[0] >= 0.5);
        REQUIRE(lev.levels[0] <= 2.0);
        REQUIRE(lev.levels[1] == 0.0);
        REQUIRE(lev.levels[2] == 0.0);
        REQUIRE(lev.levels[3] == 0.0);
        lo_seen = std::min(lo_seen, lev.levels[0]);
        hi_seen = std::max(hi_seen, lev.levels[0]);
    }
    REQUIRE(lo_seen < 0.52);
    REQUIRE(hi_seen > 1.98);

    RngStream rng(1);
    REQUIRE_THROWS_AS(draw_levels(occ, 0.0, 1.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(draw_levels(occ, 1.0, 0.5, rng), std::invalid_argument);
}

TEST_CASE("spectrum - degenerate level distribution reproduces the flags") {
    const auto cfg = make_config(21.0, 1.0);
    RngStream rng(7);
    const auto occ = draw_occupancy(cfg, 4, rng);
    const auto lev = draw_levels(occ, 1.0, 1.0, rng);
    for (std::size_t i = 0; i < occ.flags.size(); ++i)
        REQUIRE(lev.levels[i] == static_cast<double>(occ.flags[i]));
}

TEST_CASE("spectrum - identity channel is all ones") {
    const auto cfg = make_config(201.0, 1.0);
    RngStream rng(3);
    const auto chan = draw_channel(cfg, FadingModel::identity, 1.0, rng);
    REQUIRE(chan.gains.size() == 201);
    for (double g : chan.gains) REQUIRE(g == 1.0);
}

TEST_CASE("spectrum - rayleigh channel mean approaches scale*sqrt(pi/2)") {
    const auto cfg = make_config(201.0, 1.0);
    double sum = 0.0;
    long count = 0;
    for (std::uint64_t seed = 0; seed < 1000 && count < 100000; ++seed) {
        RngStream rng(derive_seed(17, seed));
        const auto chan = draw_channel(cfg, FadingModel::rayleigh_magnitude, 1.0, rng);
        for (int l = 0; l <= cfg.half_count; ++l) {  // one representative per mirrored pair
            sum += chan.gains[static_cast<std::size_t>(cfg.index_of(l))];
            ++count;
        }
    }
    const double expected = std::sqrt(3.14159265358979323846 / 2.0);
    REQUIRE(sum / static_cast<double>(count) == Catch::Approx(expected).epsilon(0.01));
}
