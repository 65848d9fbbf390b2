#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "opsim/rng.hpp"

using namespace opsim;

TEST_CASE("derive_seed is stable and label sensitive") {
    CHECK(derive_seed(1, "field", 0) == derive_seed(1, "field", 0));
    CHECK(derive_seed(1, "field", 0) != derive_seed(1, "field", 1));
    CHECK(derive_seed(1, "field", 0) != derive_seed(1, "mac", 0));
    CHECK(derive_seed(1, "field", 0) != derive_seed(2, "field", 0));

    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(7, "op-table-cell", i));
    CHECK(seen.size() == 10000);
}

TEST_CASE("streams replay") {
    auto a = RandomStream::derived(42, "fading");
    auto b = RandomStream::derived(42, "fading");
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform stays in [0,1) and exponential has unit mean") {
    RandomStream rng(5);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
    for (int i = 0; i < n; ++i) sum += rng.exponential();
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("bernoulli edge probabilities") {
    RandomStream rng(9);
    for (int i = 0; i < 1000; ++i) {
        CHECK_FALSE(rng.bernoulli(0.0));
        CHECK(rng.bernoulli(1.0));
    }
}

TEST_CASE("poisson mean") {
    RandomStream rng(11);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(12.5));
    // sd of the mean is sqrt(12.5 / n) ~ 0.011
    CHECK(std::abs(sum / n - 12.5) < 0.05);
    CHECK(rng.poisson(0.0) == 0);
}
