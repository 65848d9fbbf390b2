#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "opsim/error.hpp"
#include "opsim/op_engine.hpp"

using namespace opsim;

namespace {

FieldModel field_1e4() {
    FieldModel f;
    f.density = 1e-4;
    f.region_radius = 500.0;
    return f;
}

ChannelModel rayleigh() {
    ChannelModel c;
    c.noise_power = 0.0;
    return c;
}

// alpha = 4: Gamma(1.5) Gamma(0.5) = pi / 2.
double coverage_alpha4(double lambda, double r, double theta) {
    return std::exp(-lambda * std::numbers::pi * r * r * std::sqrt(theta) * std::numbers::pi / 2.0);
}

OpTable hand_table() {
    OpTable t;
    t.interference_grid = {1e-8, 1e-6, 1e-4};
    t.distance_grid = {0.0, 100.0};
    t.values = {0.8, 0.9, 0.4, 0.5, 0.6, 0.7};
    t.ci_halfwidths.assign(6, 0.01);
    t.meta.field = field_1e4();
    t.meta.channel = rayleigh();
    return t;
}

}  // namespace

TEST_CASE("coverage oracle closed form") {
    const auto f = field_1e4();
    const auto c = rayleigh();
    const double v = unconditional_coverage(1.0, f, c, 10.0);
    CHECK(v == doctest::Approx(coverage_alpha4(1e-4, 10.0, 1.0)).epsilon(1e-12));
    CHECK(v == doctest::Approx(0.9519).epsilon(1e-4));

    auto empty = f;
    empty.density = 0.0;
    for (double th : {0.01, 1.0, 100.0}) CHECK(unconditional_coverage(th, empty, c, 10.0) == 1.0);

    CHECK(unconditional_coverage(2.0, f, c, 10.0) == doctest::Approx(std::pow(v, std::sqrt(2.0))).epsilon(1e-12));

    auto a3 = c;
    a3.pathloss_exponent = 3.0;
    const double d = 2.0 / 3.0;
    const double expect = std::exp(-1e-4 * std::numbers::pi * 100.0 * std::pow(1.5, d) *
                                   (std::numbers::pi * d / std::sin(std::numbers::pi * d)));
    CHECK(unconditional_coverage(1.5, f, a3, 10.0) == doctest::Approx(expect).epsilon(1e-12));

    auto a2 = c;
    a2.pathloss_exponent = 2.0;
    CHECK_THROWS_WITH_AS(unconditional_coverage(1.0, f, a2, 10.0), "infinite mean interference", Error);
}

TEST_CASE("query and conditioning validation") {
    OpQuery q{1e-7, 10.0, 10.0, 1.0};
    CHECK_NOTHROW(q.validate());
    q.access_threshold = 0.0;
    CHECK_THROWS_AS(q.validate(), Error);
    q = {-1.0, 10.0, 10.0, 1.0};
    CHECK_THROWS_AS(q.validate(), Error);
    ConditioningConfig c;
    c.bin_relative_halfwidth = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.min_accepted_samples = 99;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("estimate_op requires rayleigh") {
    auto c = rayleigh();
    c.fading = Fading::none;
    RandomStream rng(1);
    CHECK_THROWS_AS(estimate_op({1e-7, 10.0, 10.0, 1.0}, field_1e4(), c, {}, rng), Error);
}

TEST_CASE("far sensor matches the uncorrelated oracle") {
    const auto f = field_1e4();
    const auto c = rayleigh();
    const auto grid = default_interference_grid(f, c, 3, 5, 5000);
    ConditioningConfig cond{0.1, 5000, 400000};
    RandomStream rng(17);
    // 10x the mean nearest-interferer spacing 1 / (2 sqrt(lambda)) = 50 m.
    const auto e = estimate_op({grid[1], 500.0, 10.0, 1.0}, f, c, cond, rng);
    const double oracle = coverage_alpha4(1e-4, 10.0, 1.0);
    CHECK(e.accepted_samples == 5000);
    CHECK(std::abs(e.value - oracle) < 0.02);
    CHECK(e.ci_halfwidth == doctest::Approx(1.96 * std::sqrt(e.value * (1 - e.value) / 5000.0)));
}

TEST_CASE("vanishing threshold gives certain success") {
    const auto f = field_1e4();
    const auto grid = default_interference_grid(f, rayleigh(), 3, 5, 5000);
    RandomStream rng(2);
    const auto e = estimate_op({grid[1], 0.0, 10.0, 1e-9}, f, rayleigh(), {}, rng);
    CHECK(e.value >= 1.0 - e.ci_halfwidth - 1e-12);
    CHECK(e.value > 0.995);
}

TEST_CASE("threshold monotonicity on common samples") {
    const auto f = field_1e4();
    const auto grid = default_interference_grid(f, rayleigh(), 5, 5, 5000);
    const auto s = draw_conditioned_samples({grid[3], 20.0, 10.0, 1.0}, f, rayleigh(), {}, 99);
    double prev = 1.0;
    for (double th = 1e-3; th < 1e3; th *= 1.5) {
        const double v = s.estimate(th).value;
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("rare conditioning reports the acceptance rate") {
    ConditioningConfig cond{0.01, 500, 2000};
    RandomStream rng(3);
    try {
        estimate_op({1e-20, 0.0, 10.0, 1.0}, field_1e4(), rayleigh(), cond, rng);
        FAIL("expected ConditioningTooRare");
    } catch (const ConditioningTooRare& e) {
        CHECK(e.code() == ErrorCode::conditioning_too_rare);
        CHECK(e.acceptance_rate() >= 0.0);
        CHECK(e.acceptance_rate() < 0.25);
        CHECK(std::string(e.what()).find("conditioning event too rare") != std::string::npos);
    }
}

TEST_CASE("ci half-width scales as 1/sqrt(n)") {
    const auto f = field_1e4();
    const auto grid = default_interference_grid(f, rayleigh(), 5, 5, 5000);
    OpQuery q{grid[2], 30.0, 10.0, 1.0};
    RandomStream a(4), b(4);
    const auto small = estimate_op(q, f, rayleigh(), {0.1, 500, 1000000}, a);
    const auto large = estimate_op(q, f, rayleigh(), {0.1, 8000, 1000000}, b);
    CHECK(small.ci_halfwidth / large.ci_halfwidth == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("estimates are deterministic and serial equals parallel") {
    const auto f = field_1e4();
    const auto grid = default_interference_grid(f, rayleigh(), 5, 5, 5000);
    OpQuery q{grid[2], 60.0, 10.0, 1.0};
    RandomStream a(8), b(8), c(8);
    const auto e1 = estimate_op(q, f, rayleigh(), {}, a, Execution::serial);
    const auto e2 = estimate_op(q, f, rayleigh(), {}, b, Execution::parallel);
    const auto e3 = estimate_op(q, f, rayleigh(), {}, c, Execution::parallel);
    CHECK(e1 == e2);
    CHECK(e2 == e3);

    const auto s1 = draw_conditioned_samples(q, f, rayleigh(), {0.1, 3000, 200000}, 5, Execution::serial);
    const auto s2 = draw_conditioned_samples(q, f, rayleigh(), {0.1, 3000, 200000}, 5, Execution::parallel);
    CHECK(s1.node_sir == s2.node_sir);
    CHECK(s1.drawn == s2.drawn);
}

TEST_CASE("estimate_op draws its seed from the caller's stream") {
    const auto f = field_1e4();
    const auto grid = default_interference_grid(f, rayleigh(), 5, 5, 5000);
    OpQuery q{grid[2], 60.0, 10.0, 1.0};
    RandomStream a(8), b(8);
    const auto e = estimate_op(q, f, rayleigh(), {}, a);
    const auto s = draw_conditioned_samples(q, f, rayleigh(), {}, b.next_u64());
    CHECK(e == s.estimate(1.0));
}

TEST_CASE("1x1 table is one conditioned estimate") {
    const auto f = field_1e4();
    const auto grid = default_interference_grid(f, rayleigh(), 5, 5, 5000);
    const double ig[] = {grid[2]};
    const double dg[] = {40.0};
    const auto t = build_op_table(ig, dg, f, rayleigh(), 1.0, 10.0, {}, 123);
    const auto s = draw_conditioned_samples({grid[2], 40.0, 10.0, 1.0}, f, rayleigh(), {},
                                            derive_seed(123, "op-table-cell", 0));
    const auto e = s.estimate(1.0);
    REQUIRE(t.at(0, 0).has_value());
    CHECK(*t.at(0, 0) == e.value);
    CHECK(t.ci_halfwidths[0] == e.ci_halfwidth);
    CHECK(lookup_op(t, grid[2], 40.0) == e.value);
}

TEST_CASE("table build: determinism, serial vs parallel, theta nesting, monotone in I") {
    const auto f = field_1e4();
    const auto ig = default_interference_grid(f, rayleigh(), 5, 9);
    const auto dg = default_distance_grid(f, 2);
    const double thetas[] = {0.5, 1.0, 2.0};
    ConditioningConfig cond{0.1, 400, 80000};
    const auto ser = build_op_tables(ig, dg, thetas, f, rayleigh(), 10.0, cond, 77, Execution::serial);
    const auto par = build_op_tables(ig, dg, thetas, f, rayleigh(), 10.0, cond, 77, Execution::parallel);
    REQUIRE(ser.size() == 3);
    CHECK(ser == par);
    CHECK(build_op_table(ig, dg, f, rayleigh(), 1.0, 10.0, cond, 77) == ser[1]);

    for (std::size_t c = 0; c < ser[0].values.size(); ++c) {
        if (!ser[0].values[c]) continue;
        CHECK(*ser[0].values[c] >= *ser[1].values[c]);
        CHECK(*ser[1].values[c] >= *ser[2].values[c]);
    }

    const auto& t = ser[1];
    int pairs = 0, violations = 0;
    for (std::size_t j = 0; j < dg.size(); ++j)
        for (std::size_t i = 0; i + 1 < ig.size(); ++i) {
            const auto a = t.at(i, j), b = t.at(i + 1, j);
            if (!a || !b) continue;
            ++pairs;
            if (*b - *a > t.ci_halfwidths[t.index(i, j)] + t.ci_halfwidths[t.index(i + 1, j)]) ++violations;
        }
    CHECK(pairs > 0);
    CHECK(violations <= pairs / 20);

    for (const auto& v : t.values)
        if (v) CHECK((*v >= 0.0 && *v <= 1.0));
}

TEST_CASE("too many absent cells is a grid mismatch") {
    const auto f = field_1e4();
    const double ig[] = {1e-20, 1e-19};
    const double dg[] = {0.0};
    CHECK_THROWS_AS(build_op_table(ig, dg, f, rayleigh(), 1.0, 10.0, {0.01, 100, 1000}, 1), Error);
    try {
        build_op_table(ig, dg, f, rayleigh(), 1.0, 10.0, {0.01, 100, 1000}, 1);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::grid_mismatch);
    }
}

TEST_CASE("lookup interpolation") {
    const auto t = hand_table();
    CHECK(lookup_op(t, 1e-8, 0.0) == 0.8);
    CHECK(lookup_op(t, 1e-6, 100.0) == 0.5);
    CHECK(lookup_op(t, 1e-4, 100.0) == 0.7);
    // midway in log I between 0.4 and 0.6 at d = 0
    CHECK(lookup_op(t, 1e-5, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lookup_op(t, 1e-8, 50.0) == doctest::Approx(0.85).epsilon(1e-12));

    RandomStream rng(6);
    for (int k = 0; k < 1000; ++k) {
        const double li = std::log(1e-8) + rng.uniform() * (std::log(1e-4) - std::log(1e-8));
        const double I = std::exp(li);
        const double d = 100.0 * rng.uniform();
        const double v = lookup_op(t, I, d);
        const std::size_t i = I < 1e-6 ? 0 : 1;
        double lo = 1.0, hi = 0.0;
        for (std::size_t a : {i, i + 1})
            for (std::size_t b : {0u, 1u}) {
                lo = std::min(lo, *t.at(a, b));
                hi = std::max(hi, *t.at(a, b));
            }
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
    }
}

TEST_CASE("lookup errors") {
    auto t = hand_table();
    CHECK_THROWS_WITH_AS(lookup_op(t, 1e-9, 10.0), "out of table range", Error);
    CHECK_THROWS_WITH_AS(lookup_op(t, 1e-6, 101.0), "out of table range", Error);
    CHECK_THROWS_WITH_AS(lookup_op(t, 1e-3, 10.0), "out of table range", Error);
    t.values[t.index(1, 1)] = std::nullopt;
    CHECK_THROWS_WITH_AS(lookup_op(t, 1e-5, 50.0), "missing cell", Error);
    // zero-weight corners may be absent
    CHECK(lookup_op(t, 1e-6, 0.0) == 0.4);
    CHECK(lookup_op(t, 1e-5, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("table file round trip") {
    auto t = hand_table();
    t.values[2] = std::nullopt;
    t.meta.access_threshold = 1.2589254117941673;
    t.meta.seed = 18446744073709551557ull;
    t.meta.field.center = {3.5, -1.25};
    const auto path = std::filesystem::temp_directory_path() / "opsim_test_table.json";
    save_op_table(t, path);
    const auto back = load_op_table(path);
    CHECK(back == t);
    CHECK(back.absent_cells().size() == 1);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_op_table("/nonexistent/table.json"), Error);
}

TEST_CASE("table validation and matching") {
    auto t = hand_table();
    CHECK_NOTHROW(t.validate());
    CHECK(t.matches(t.meta.field, t.meta.channel, t.meta.access_threshold, t.meta.desired_link_distance));
    auto moved = t.meta.field;
    moved.center = {100, 100};
    CHECK(t.matches(moved, t.meta.channel, t.meta.access_threshold, t.meta.desired_link_distance));
    CHECK_FALSE(t.matches(t.meta.field, t.meta.channel, 2.0, t.meta.desired_link_distance));
    t.values[0] = 1.5;
    CHECK_THROWS_AS(t.validate(), Error);
    t = hand_table();
    t.distance_grid = {100.0, 0.0};
    CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("default grids") {
    const auto f = field_1e4();
    const auto dg = default_distance_grid(f, 8);
    CHECK(dg.front() == 0.0);
    CHECK(dg.back() == doctest::Approx(400.0));
    const auto ig = default_interference_grid(f, rayleigh(), 16, 1);
    REQUIRE(ig.size() == 16);
    for (std::size_t k = 1; k < ig.size(); ++k) CHECK(ig[k] > ig[k - 1]);
    const double ratio = ig[1] / ig[0];
    CHECK(ig[8] / ig[7] == doctest::Approx(ratio).epsilon(1e-9));
}
