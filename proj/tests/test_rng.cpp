#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "threshcal/report.hpp"
#include "threshcal/rng.hpp"

using namespace threshcal;

TEST_CASE("splitmix64 reference values, repeatable Rng stream") {
    // Published SplitMix64 outputs for state 0.
    Rng a(0), b(0);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(a() == b());
    }
    std::uint64_t sm = 0;
    CHECK(splitmix64(sm) == 0xE220A8397B1DCDAFULL);
    CHECK(splitmix64(sm) == 0x6E789E6AA1B965F4ULL);
}

TEST_CASE("uniform stays in [0, 1) and below() in range") {
    Rng rng(5);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        REQUIRE(rng.below(7) < 7);
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal() moments") {
    Rng rng(6);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
    }
    CHECK(std::abs(s1 / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("StableHash separates fields") {
    const auto h1 = StableHash().add(std::uint64_t{1}).add("ab").digest();
    const auto h2 = StableHash().add(std::uint64_t{1}).add("ab").digest();
    CHECK(h1 == h2);
    CHECK(StableHash().add("a").add("b").digest() != StableHash().add("ab").digest());
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        seen.insert(StableHash().add(i).digest());
    }
    CHECK(seen.size() == 1000);
}

TEST_CASE("mean_and_sem") {
    const std::vector<double> two{0.6, 0.8};
    const auto ms = mean_and_sem(two);
    CHECK(ms.mean == doctest::Approx(0.7));
    REQUIRE(ms.sem.has_value());
    CHECK(*ms.sem == doctest::Approx(0.1));

    const std::vector<double> one{0.3};
    CHECK_FALSE(mean_and_sem(one).sem.has_value());

    const std::vector<double> flat{0.7, 0.7, 0.7};
    CHECK(*mean_and_sem(flat).sem < 1e-15);
}
