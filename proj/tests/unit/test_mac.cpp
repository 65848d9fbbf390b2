#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "opsim/error.hpp"
#include "opsim/mac.hpp"

using namespace opsim;

namespace {

MacPolicy policy(PolicyKind k) {
    MacPolicy p;
    p.kind = k;
    return p;
}

}  // namespace

TEST_CASE("access probability shapes") {
    CHECK(access_probability(0.8, policy(PolicyKind::random_linear)) == 0.8);
    const auto concave = policy(PolicyKind::random_concave);
    CHECK(access_probability(1.0, concave) == 1.0);
    CHECK(access_probability(0.0, concave) == 0.0);
    CHECK(access_probability(0.3, concave) == doctest::Approx(std::log(3.7) / std::log(10.0)).epsilon(1e-14));

    auto det = policy(PolicyKind::deterministic);
    det.deterministic_threshold = 0.5;
    CHECK(access_probability(0.5, det) == 1.0);
    CHECK(access_probability(0.49, det) == 0.0);
    det.deterministic_threshold = 0.0;
    CHECK(access_probability(0.0, det) == 1.0);
}

TEST_CASE("access probability rejects invalid OP") {
    for (auto k : {PolicyKind::random_linear, PolicyKind::random_concave, PolicyKind::deterministic}) {
        CHECK_THROWS_WITH_AS(access_probability(-0.01, policy(k)), "invalid probability", Error);
        CHECK_THROWS_WITH_AS(access_probability(1.01, policy(k)), "invalid probability", Error);
        CHECK_THROWS_AS(access_probability(std::nan(""), policy(k)), Error);
    }
}

TEST_CASE("shape properties") {
    auto det = policy(PolicyKind::deterministic);
    det.deterministic_threshold = 0.37;
    for (auto p : {policy(PolicyKind::random_linear), policy(PolicyKind::random_concave), det}) {
        double prev = -1.0;
        int changes = 0;
        double last = access_probability(0.0, p);
        for (int i = 0; i <= 1000; ++i) {
            const double op = i / 1000.0;
            const double v = access_probability(op, p);
            CHECK(v >= prev);
            CHECK((v >= 0.0 && v <= 1.0));
            if (v != last) ++changes;
            last = v;
            prev = v;
        }
        if (p.kind == PolicyKind::deterministic) CHECK(changes <= 1);
    }
    const auto concave = policy(PolicyKind::random_concave);
    for (int i = 1; i < 1000; ++i) {
        const double op = i / 1000.0;
        CHECK(access_probability(op, concave) > op);
    }
}

TEST_CASE("policy validation") {
    auto p = policy(PolicyKind::random_concave);
    p.concave_curvature = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = policy(PolicyKind::deterministic);
    p.deterministic_threshold = 1.5;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.beta = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.max_power = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("select_policy_shape") {
    CHECK(select_policy_shape(0.0, 0.7, 0.005) == ShapeChoice::concave);
    CHECK(select_policy_shape(0.01, 0.5, 0.004) == ShapeChoice::linear);
    CHECK(select_policy_shape(0.01, 0.5, 0.005) == ShapeChoice::linear);
    CHECK(select_policy_shape(0.01, 0.4, 0.005) == ShapeChoice::concave);
}

TEST_CASE("transmit decisions") {
    RandomStream rng(1);
    auto p = policy(PolicyKind::random_linear);
    p.max_power = 2.0;
    for (double op : {0.0, 0.3, 1.0}) CHECK(transmit_decision(op, AccessMode::max_power, p, rng) == TxDecision{true, 2.0});
    p.max_power = 1.0;
    const auto r = transmit_decision(0.8, AccessMode::reduced_power, p, rng);
    CHECK(r.transmit);
    CHECK(r.power == doctest::Approx(0.8));
    CHECK(transmit_decision(0.0, AccessMode::reduced_power, p, rng) == TxDecision{false, 0.0});

    const int n = 100000;
    int on = 0;
    for (int i = 0; i < n; ++i) {
        const auto d = transmit_decision(0.5, AccessMode::random_access, p, rng);
        if (d.transmit) {
            ++on;
            CHECK(d.power == 1.0);
        } else {
            CHECK(d.power == 0.0);
        }
    }
    const double rate = static_cast<double>(on) / n;
    CHECK(std::abs(rate - 0.5) < 0.005);
    CHECK(std::abs(rate - 0.5) < 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("independent thinning of three nodes") {
    const std::array<double, 3> ops{0.2, 0.5, 0.9};
    auto p = policy(PolicyKind::random_linear);
    RandomStream rng(31);
    std::array<int, 8> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        int idx = 0;
        for (int k = 0; k < 3; ++k)
            if (transmit_decision(ops[k], AccessMode::random_access, p, rng).transmit) idx |= 1 << k;
        ++counts[idx];
    }
    double chi2 = 0.0;
    for (int idx = 0; idx < 8; ++idx) {
        double e = n;
        for (int k = 0; k < 3; ++k) e *= (idx >> k & 1) ? ops[k] : 1.0 - ops[k];
        chi2 += (counts[idx] - e) * (counts[idx] - e) / e;
    }
    // 7 degrees of freedom, 0.1% upper tail
    CHECK(chi2 < 24.32);
}

TEST_CASE("expected energy") {
    auto p = policy(PolicyKind::random_linear);
    CHECK(expected_energy(0.3, AccessMode::max_power, p, 1e-3) == doctest::Approx(1e-3));
    CHECK(expected_energy(0.0, AccessMode::reduced_power, p, 1e-3) == 0.0);
    CHECK(expected_energy(0.0, AccessMode::random_access, p, 1e-3) == 0.0);
    for (int i = 0; i <= 100; ++i) {
        const double op = i / 100.0;
        const double reduced = expected_energy(op, AccessMode::reduced_power, p, 1e-3);
        CHECK(reduced == expected_energy(op, AccessMode::random_access, p, 1e-3));
        CHECK(reduced <= expected_energy(op, AccessMode::max_power, p, 1e-3));
    }
}

TEST_CASE("names round trip") {
    for (auto k : {PolicyKind::random_linear, PolicyKind::random_concave, PolicyKind::deterministic, PolicyKind::automatic})
        CHECK(parse_policy_kind(to_string(k)) == k);
    for (auto m : {AccessMode::max_power, AccessMode::reduced_power, AccessMode::random_access})
        CHECK(parse_access_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_policy_kind("csma"), Error);
}
