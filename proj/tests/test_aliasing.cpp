#include <catch2/catch_amalgamated.hpp>
#include <complex>

#include "specsense/aliasing_reference.hpp"

using namespace specsense;

namespace {

MixingSequence all_ones_sequence(int L) {
    MixingSequence seq;
    seq.chips.assign(static_cast<std::size_t>(L), 1);
    return seq;
}

}  // namespace

TEST_CASE("aliasing - all-ones chips pass the signal through unaliased") {
    const auto cfg = make_config(15.0, 1.0);
    RngStream rng(1);
    const auto occ = draw_occupancy(cfg, 2, rng);
    const auto lev = draw_levels(occ, 0.5, 2.0, rng);
    const auto ref = timedomain_reference(cfg, occ, lev, all_ones_sequence(15), 64, rng);
    REQUIRE(ref.rel_error <= 1e-9);
}

TEST_CASE("aliasing - empty spectrum gives zero spectra and zero error") {
    const auto cfg = make_config(15.0, 1.0);
    RngStream rng(2);
    const auto occ = draw_occupancy(cfg, 0, rng);
    const auto lev = draw_levels(occ, 0.5, 2.0, rng);
    const auto seq = draw_mixing(1, 15, 5);
    const auto ref = timedomain_reference(cfg, occ, lev, seq, 64, rng);
    REQUIRE(ref.rel_error == 0.0);
    for (const auto& v : ref.measured_spectrum) REQUIRE(std::abs(v) <= 1e-12);
    for (const auto& v : ref.model_spectrum) REQUIRE(std::abs(v) == 0.0);
}

TEST_CASE("aliasing - random chips satisfy the folding identity") {
    const auto cfg = make_config(15.0, 1.0);
    RngStream rng(3);
    const auto occ = draw_occupancy(cfg, 2, rng);
    const auto lev = draw_levels(occ, 0.5, 2.0, rng);
    const auto seq = draw_mixing(1, 15, 17);
    const auto ref = timedomain_reference(cfg, occ, lev, seq, 64, rng);
    REQUIRE(ref.rel_error <= 1e-6);
    double model_energy = 0.0;
    for (const auto& v : ref.model_spectrum) model_energy += std::norm(v);
    REQUIRE(model_energy > 0.0);
}

TEST_CASE("aliasing - selftest battery stays within 1e-6 across seeds") {
    const auto res = run_aliasing_selftest(15, 64, 20, 7);
    REQUIRE(res.rel_errors.size() == 20);
    REQUIRE(res.max_rel_error <= 1e-6);
}

TEST_CASE("aliasing - non-covering or malformed grids are rejected") {
    const auto cfg = make_config(15.0, 1.0);
    RngStream rng(4);
    const auto occ = draw_occupancy(cfg, 2, rng);
    const auto lev = draw_levels(occ, 0.5, 2.0, rng);
    const auto seq = draw_mixing(1, 15, 5);
    REQUIRE_THROWS_AS(timedomain_reference(cfg, occ, lev, seq, 14, rng),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(timedomain_reference(cfg, occ, lev, seq, 64, rng, 15),
                      std::invalid_argument);
}

TEST_CASE("aliasing - sampled chip coefficients converge to the hold coefficients") {
    const int L = 15, l0 = 7;
    const auto seq = draw_mixing(1, L, 23);
    const auto row = fourier_coeffs(seq);

    const auto sampled_coeff = [&](int l, int O) {
        std::complex<double> acc{0.0, 0.0};
        for (int n = 0; n < O; ++n) {
            const int chip = static_cast<int>((static_cast<std::int64_t>(n) * L) / O);
            const double p = seq.chips[static_cast<std::size_t>(chip)] > 0 ? 1.0 : -1.0;
            acc += p * std::polar(1.0, -kTwoPi * static_cast<double>(l) *
                                           static_cast<double>(n) / static_cast<double>(O));
        }
        return acc / static_cast<double>(O);
    };

    double err_coarse = 0.0, err_fine = 0.0;
    for (int l = 1; l <= l0; ++l) {
        const auto exact = row.coeffs[static_cast<std::size_t>(l0 - l)];
        err_coarse = std::max(err_coarse, std::abs(sampled_coeff(l, 60) - exact));
        err_fine = std::max(err_fine, std::abs(sampled_coeff(l, 15360) - exact));
    }
    REQUIRE(err_fine < 1e-3);
    REQUIRE(err_fine * 8.0 < err_coarse);  // first-order shrink with the grid
}
