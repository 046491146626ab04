#include <catch2/catch.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "homp/rng.hpp"

using namespace homp;

TEST_CASE("philox counter-based generator") {
    SECTION("pure function of (key, counter)") {
        const auto a = rng::philox2x64(3, 5, 17);
        const auto b = rng::philox2x64(3, 5, 17);
        REQUIRE(a == b);
        REQUIRE(rng::philox2x64(3, 6, 17) != a);
        REQUIRE(rng::philox2x64(4, 5, 17) != a);
        REQUIRE(rng::philox2x64(3, 5, 18) != a);
    }
    SECTION("unit uniforms stay in [0, 1)") {
        const std::uint64_t key = rng::make_key(1, 0);
        for (std::uint64_t i = 0; i < 2000; ++i) {
            const double u = rng::uniform(key, i, 0, 0.0, 1.0);
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
        }
    }
    SECTION("streams and seeds derive distinct keys") {
        REQUIRE(rng::make_key(7, 0) != rng::make_key(7, 1));
        REQUIRE(rng::make_key(7, 0) != rng::make_key(8, 0));
        REQUIRE(rng::make_key(0, 0) != rng::make_key(0, 1));
    }
}

TEST_CASE("normal draws have standard-normal moments") {
    const std::uint64_t key = rng::make_key(99, 0);
    const std::size_t n = 200000;
    double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng::normal(key, i, 0);
        sum += z;
        sum2 += z * z;
        sum3 += z * z * z;
        sum4 += z * z * z * z;
    }
    const double nn = static_cast<double>(n);
    const double mean = sum / nn;
    const double var = sum2 / nn - mean * mean;
    const double skew = sum3 / nn;
    const double kurt = sum4 / nn;
    // standard errors: mean 1/sqrt(n), var sqrt(2/n), skew sqrt(15/n), kurt sqrt(96/n)
    REQUIRE(std::abs(mean) <= 4.0 / std::sqrt(nn));
    REQUIRE(std::abs(var - 1.0) <= 4.0 * std::sqrt(2.0 / nn));
    REQUIRE(std::abs(skew) <= 4.0 * std::sqrt(15.0 / nn));
    REQUIRE(std::abs(kurt - 3.0) <= 4.0 * std::sqrt(96.0 / nn));
}

TEST_CASE("normal tail frequencies are sane") {
    const std::uint64_t key = rng::make_key(123, 1);
    const std::size_t n = 200000;
    std::size_t beyond2 = 0, beyond3 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = std::abs(rng::normal(key, i, 0));
        if (z > 2.0) ++beyond2;
        if (z > 3.0) ++beyond3;
    }
    const double f2 = static_cast<double>(beyond2) / static_cast<double>(n);
    const double f3 = static_cast<double>(beyond3) / static_cast<double>(n);
    REQUIRE(f2 == Approx(0.0455).margin(0.004));   // P(|Z| > 2)
    REQUIRE(f3 == Approx(0.0027).margin(0.0012));  // P(|Z| > 3)
}
