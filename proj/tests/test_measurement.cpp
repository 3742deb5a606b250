#include <catch2/catch_amalgamated.hpp>

#include "specsense/measurement.hpp"

using namespace specsense;

TEST_CASE("measurement - factors reproduce the direct assembly") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RngStream rng(derive_seed(31, seed));
        const int l0 = 1 + static_cast<int>(rng.below(31));  // L <= 63
        const int L = 2 * l0 + 1;
        const int K = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
        const auto cfg = make_config(static_cast<double>(L), 1.0);
        const auto chan = draw_channel(cfg, FadingModel::rayleigh_magnitude, 1.0, rng);
        std::vector<std::uint64_t> seeds(static_cast<std::size_t>(K));
        for (auto& s : seeds) s = rng.next_u64();

        const auto mm = assemble_matrix(seeds, cfg, chan);
        const Eigen::MatrixXcd product = mm.factor_product();
        REQUIRE((product - mm.entries).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("measurement - rows equal the per-node coefficient rows scaled by the channel") {
    const auto cfg = make_config(21.0, 1.0);
    RngStream rng(5);
    const auto chan = draw_channel(cfg, FadingModel::rayleigh_magnitude, 1.0, rng);
    const std::vector<std::uint64_t> seeds{11, 22, 33};
    const auto mm = assemble_matrix(seeds, cfg, chan);
    for (int k = 0; k < 3; ++k) {
        const auto row = fourier_coeffs(draw_mixing(k + 1, 21, seeds[static_cast<std::size_t>(k)]));
        for (int i = 0; i < 21; ++i)
            REQUIRE(mm.entries(k, i) == row.coeffs[static_cast<std::size_t>(i)] *
                                            chan.gains[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("measurement - zero channel gain kills the matching column") {
    const auto cfg = make_config(11.0, 1.0);
    ChannelProfile chan;
    chan.gains.assign(11, 1.0);
    chan.gains[3] = 0.0;
    chan.gains[7] = 0.0;  // keep the mirrored slot consistent
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4};
    const auto mm = assemble_matrix(seeds, cfg, chan);
    for (int k = 0; k < 4; ++k) {
        REQUIRE(mm.entries(k, 3) == std::complex<double>(0.0, 0.0));
        REQUIRE(mm.entries(k, 7) == std::complex<double>(0.0, 0.0));
    }
}

TEST_CASE("measurement - realification stacks real over imaginary") {
    Eigen::MatrixXcd a(1, 2);
    a(0, 0) = {1.0, 2.0};
    a(0, 1) = {-3.0, 0.5};
    const Eigen::MatrixXd ar = realify(a);
    REQUIRE(ar.rows() == 2);
    REQUIRE(ar(0, 0) == 1.0);
    REQUIRE(ar(0, 1) == -3.0);
    REQUIRE(ar(1, 0) == 2.0);
    REQUIRE(ar(1, 1) == 0.5);

    Eigen::VectorXd y(2);
    y << 4.0, -1.0;
    const Eigen::VectorXd yr = realify_measurements(y);
    REQUIRE(yr.size() == 4);
    REQUIRE(yr(0) == 4.0);
    REQUIRE(yr(1) == -1.0);
    REQUIRE(yr(2) == 0.0);
    REQUIRE(yr(3) == 0.0);
}

TEST_CASE("measurement - argument validation") {
    const auto cfg = make_config(5.0, 1.0);
    ChannelProfile chan;
    chan.gains.assign(5, 1.0);
    REQUIRE_THROWS_AS(assemble_matrix({}, cfg, chan), std::invalid_argument);
    ChannelProfile wrong;
    wrong.gains.assign(3, 1.0);
    const std::vector<std::uint64_t> seeds{1};
    REQUIRE_THROWS_AS(assemble_matrix(seeds, cfg, wrong), std::invalid_argument);
}
