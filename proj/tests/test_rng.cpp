#include <catch2/catch_amalgamated.hpp>

#include "specsense/rng.hpp"

using specsense::derive_seed;
using specsense::RngStream;

TEST_CASE("rng - identical seeds give identical streams") {
    RngStream a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("rng - derived streams differ across labels") {
    RngStream a(derive_seed(7, 1)), b(derive_seed(7, 2)), c(derive_seed(8, 1));
    bool ab = false, ac = false;
    for (int i = 0; i < 16; ++i) {
        const auto va = a.next_u64();
        ab |= va != b.next_u64();
        ac |= va != c.next_u64();
    }
    REQUIRE(ab);
    REQUIRE(ac);
}

TEST_CASE("rng - uniform01 stays in [0,1)") {
    RngStream rng(3);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("rng - sign chips average to zero") {
    RngStream rng(11);
    long sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += rng.sign_chip();
    REQUIRE(std::abs(static_cast<double>(sum) / n) < 0.01);
}

TEST_CASE("rng - normal moments") {
    RngStream rng(5);
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        s += v;
        s2 += v * v;
    }
    REQUIRE(std::abs(s / n) < 0.02);
    REQUIRE(s2 / n == Catch::Approx(1.0).margin(0.03));
}

TEST_CASE("rng - rayleigh mean matches closed form") {
    RngStream rng(9);
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += rng.rayleigh(1.0);
    const double expected = std::sqrt(3.14159265358979323846 / 2.0);
    REQUIRE(s / n == Catch::Approx(expected).epsilon(0.01));
}

TEST_CASE("rng - below respects the bound") {
    RngStream rng(13);
    for (int i = 0; i < 10000; ++i) REQUIRE(rng.below(17) < 17);
    REQUIRE_THROWS_AS(rng.below(0), std::invalid_argument);
}

TEST_CASE("rng - sample_distinct draws sorted distinct values in range") {
    RngStream rng(21);
    for (int rep = 0; rep < 200; ++rep) {
        const auto v = rng.sample_distinct(5, 1, 20);
        REQUIRE(v.size() == 5);
        for (std::size_t i = 0; i < v.size(); ++i) {
            REQUIRE(v[i] >= 1);
            REQUIRE(v[i] <= 20);
            if (i > 0) REQUIRE(v[i] > v[i - 1]);
        }
    }
    REQUIRE_THROWS_AS(rng.sample_distinct(6, 1, 5), std::invalid_argument);
}
