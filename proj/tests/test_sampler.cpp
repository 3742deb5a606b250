#include <catch2/catch_amalgamated.hpp>
#include <complex>

#include "specsense/rng.hpp"
#include "specsense/sampler.hpp"
#include "specsense/spectrum.hpp"

using namespace specsense;

namespace {

// Composite Simpson quadrature of the chip-hold integral
// (1/T) * int_0^{T/L} e^{-j 2 pi l t / T} dt with T = 1; independent route
// for certifying the closed form.
std::complex<double> hold_coeff_quadrature(int l, int L, int panels = 4096) {
    const double a = 0.0, b = 1.0 / static_cast<double>(L);
    const double h = (b - a) / static_cast<double>(2 * panels);
    const auto f = [&](double t) {
        return std::polar(1.0, -kTwoPi * static_cast<double>(l) * t);
    };
    std::complex<double> acc = f(a) + f(b);
    for (int i = 1; i < 2 * panels; ++i)
        acc += f(a + h * static_cast<double>(i)) * ((i % 2 == 1) ? 4.0 : 2.0);
    return acc * (h / 3.0);
}

MixingSequence all_ones_sequence(int L) {
    MixingSequence seq;
    seq.node_id = 0;
    seq.seed = 0;
    seq.chips.assign(static_cast<std::size_t>(L), 1);
    return seq;
}

}  // namespace

TEST_CASE("sampler - mixing sequences are reproducible and node-distinct") {
    const auto a = draw_mixing(1, 201, 42);
    const auto b = draw_mixing(1, 201, 42);
    REQUIRE(a.chips == b.chips);
    for (auto c : a.chips) REQUIRE((c == 1 || c == -1));

    const auto other_node = draw_mixing(2, 201, 42);
    REQUIRE(a.chips != other_node.chips);
    const auto other_seed = draw_mixing(1, 201, 43);
    REQUIRE(a.chips != other_seed.chips);

    REQUIRE_THROWS_AS(draw_mixing(1, 200, 42), std::invalid_argument);
}

TEST_CASE("sampler - chip mean vanishes over many draws") {
    long sum = 0, n = 0;
    for (int node = 1; node <= 500; ++node) {
        const auto seq = draw_mixing(node, 201, 7);
        for (auto c : seq.chips) {
            sum += c;
            ++n;
        }
    }
    REQUIRE(n >= 100000);
    REQUIRE(std::abs(static_cast<double>(sum) / static_cast<double>(n)) < 0.01);
}

TEST_CASE("sampler - hold coefficients match quadrature to 1e-12") {
    const int L = 201;
    REQUIRE(hold_coeff(0, L) == std::complex<double>(1.0 / 201.0, 0.0));
    for (int l = -100; l <= 100; ++l) {
        const auto closed = hold_coeff(l, L);
        const auto quad = hold_coeff_quadrature(l, L);
        REQUIRE(std::abs(closed - quad) < 1e-12);
        REQUIRE(std::abs(std::abs(closed) - std::abs(quad)) < 1e-12);
        REQUIRE(std::abs(hold_coeff(-l, L) - std::conj(hold_coeff(l, L))) < 1e-18);
    }
    // |d_l| has the closed magnitude sin(pi l / L) / (pi l)
    for (int l = 1; l <= 100; ++l) {
        const double expected = std::sin(3.14159265358979323846 * l / L) /
                                (3.14159265358979323846 * l);
        REQUIRE(std::abs(std::abs(hold_coeff(l, L)) - expected) < 1e-14);
    }
}

TEST_CASE("sampler - all-ones chips give the unit DC row") {
    const int L = 201;
    const auto row = fourier_coeffs(all_ones_sequence(L));
    const int l0 = (L - 1) / 2;
    for (int i = 0; i < L; ++i) {
        const std::complex<double> expected = (i == l0) ? 1.0 : 0.0;
        REQUIRE(std::abs(row.coeffs[static_cast<std::size_t>(i)] - expected) <= 1e-12);
    }
}

TEST_CASE("sampler - coefficient rows are conjugate-symmetric and bounded") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto seq = draw_mixing(3, 31, seed);
        const auto row = fourier_coeffs(seq);
        const int l0 = row.half_count();
        for (int l = 0; l <= l0; ++l) {
            const auto pos = row.coeffs[static_cast<std::size_t>(l0 - l)];
            const auto neg = row.coeffs[static_cast<std::size_t>(l0 + l)];
            REQUIRE(neg == std::conj(pos));  // exact by construction
            REQUIRE(std::abs(pos) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("sampler - Parseval check against trapezoid quadrature of the truncated series") {
    const int L = 31, l0 = 15;
    const auto seq = draw_mixing(1, L, 99);
    const auto row = fourier_coeffs(seq);
    double sum_sq = 0.0;
    for (const auto& c : row.coeffs) sum_sq += std::norm(c);

    // The truncated Fourier series p_l0(t) = sum c_l e^{+j 2 pi l t} has
    // mean square exactly sum |c_l|^2; integrate it with a uniform rule
    // that is exact for trigonometric polynomials of this degree.
    const int nq = 8 * l0 + 5;
    double quad = 0.0;
    for (int k = 0; k < nq; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(nq);
        std::complex<double> p{0.0, 0.0};
        for (int l = -l0; l <= l0; ++l)
            p += row.coeffs[static_cast<std::size_t>(l0 - l)] *
                 std::polar(1.0, kTwoPi * static_cast<double>(l) * t);
        quad += std::norm(p);
    }
    quad /= static_cast<double>(nq);
    REQUIRE(std::abs(quad - sum_sq) < 1e-10);
}

TEST_CASE("sampler - measurement examples") {
    const auto cfg = make_config(5.0, 1.0);
    RngStream rng(1);

    SubbandLevels zero;
    zero.levels.assign(5, 0.0);
    ChannelProfile identity;
    identity.gains.assign(5, 1.0);

    const auto seq = draw_mixing(1, 5, 11);
    const auto row = fourier_coeffs(seq);
    RngStream noiseless(0);
    REQUIRE(node_measurement(row, identity, zero, NoiseModel{0.0}, noiseless) == 0.0);

    // all-ones chips pick out only the (idle) DC subband
    const auto ones_row = fourier_coeffs(all_ones_sequence(5));
    SubbandLevels occupied;
    occupied.levels = {1.0, 0.0, 0.0, 0.0, 1.0};  // l = +/-2 busy, DC idle
    REQUIRE(std::abs(node_measurement(ones_row, identity, occupied, NoiseModel{0.0},
                                      noiseless)) <= 1e-12);

    // random chips: y = 2 Re(c_2), certified through the quadrature route
    const auto y = node_measurement(row, identity, occupied, NoiseModel{0.0}, noiseless);
    std::complex<double> chip_sum{0.0, 0.0};
    for (int m = 0; m < 5; ++m)
        chip_sum += static_cast<double>(seq.chips[static_cast<std::size_t>(m)]) *
                    std::polar(1.0, -kTwoPi * 2.0 * m / 5.0);
    const auto c2 = hold_coeff_quadrature(2, 5) * chip_sum;
    REQUIRE(y == Catch::Approx(2.0 * c2.real()).margin(1e-12));
}

TEST_CASE("sampler - measurement is linear in the levels when noiseless") {
    const auto cfg = make_config(21.0, 1.0);
    RngStream rng(5);
    const auto seq = draw_mixing(1, cfg.subband_count, 3);
    const auto row = fourier_coeffs(seq);
    const auto chan = draw_channel(cfg, FadingModel::rayleigh_magnitude, 1.0, rng);

    const auto occ1 = draw_occupancy(cfg, 3, rng);
    const auto occ2 = draw_occupancy(cfg, 4, rng);
    const auto x1 = draw_levels(occ1, 0.5, 2.0, rng);
    const auto x2 = draw_levels(occ2, 0.5, 2.0, rng);

    SubbandLevels combo;
    combo.levels.resize(x1.levels.size());
    const double a = 1.7, b = -0.4;
    for (std::size_t i = 0; i < combo.levels.size(); ++i)
        combo.levels[i] = a * x1.levels[i] + b * x2.levels[i];

    RngStream dummy(0);
    const double lhs = measurement_value(row, chan, combo);
    const double rhs = a * measurement_value(row, chan, x1) +
                       b * measurement_value(row, chan, x2);
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));

    SubbandLevels wrong;
    wrong.levels.assign(7, 1.0);
    REQUIRE_THROWS_AS(measurement_value(row, chan, wrong), std::invalid_argument);
}
