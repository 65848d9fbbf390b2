#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "opsim/simulator.hpp"

using namespace opsim;

namespace {

RateContext context(std::size_t pairs) {
    RateContext ctx;
    ctx.rate_model = RateModel::Kind::threshold;
    ctx.access_threshold = 1.0;
    ctx.primary_threshold = 1.0;
    ctx.bandwidth_hz = 1e6;
    ctx.overhead = {0.0, 0.0, 0.0};
    ctx.slot = 1e-3;
    for (std::size_t p = 0; p < pairs; ++p) {
        ctx.links.emplace_back(p, Direction::a_to_b);
        ctx.links.emplace_back(p, Direction::b_to_a);
    }
    ctx.transmitting_nodes = ctx.links.size();
    return ctx;
}

DirectionRecord dir(bool active, double sinr) {
    return {active, active ? 1.0 : 0.0, active ? sinr : 0.0, active && sinr > 1.0};
}

SlotRecord slot(std::uint64_t t, DirectionRecord ab, DirectionRecord ba, bool primary = false, double psinr = 0.0) {
    SlotRecord r;
    r.slot = t;
    PairRecord p;
    p.ab = ab;
    p.ba = ba;
    p.mode = ab.active && ba.active ? DuplexMode::FD : ab.active ? DuplexMode::HD_A : ba.active ? DuplexMode::HD_B : DuplexMode::Silence;
    p.energy = (ab.power + ba.power) * 1e-3;
    r.pairs = {p};
    r.primary_active = primary;
    r.primary_sinr = psinr;
    r.primary_success = primary && psinr > 1.0;
    return r;
}

}  // namespace

TEST_CASE("throughput accounting") {
    const auto ctx = context(1);
    std::vector<SlotRecord> log{
        slot(0, dir(true, 3.0), dir(false, 0), true, 5.0),
        slot(1, dir(true, 0.5), dir(true, 2.0), true, 0.5),
        slot(2, dir(false, 0), dir(false, 0)),
        slot(3, dir(true, 4.0), dir(true, 4.0)),
    };
    const auto m = aggregate_metrics(log, ctx);
    // 4 successes of log2(2) = 1 bit/Hz over 4 slots
    CHECK(m.secondary_throughput == doctest::Approx(4.0 / 4.0 * 1e6));
    CHECK(m.primary_throughput == doctest::Approx(1.0 / 4.0 * 1e6));
    CHECK(m.system_throughput == m.secondary_throughput + m.primary_throughput);
    CHECK(m.secondary_success_rate == doctest::Approx(4.0 / 5.0));
    CHECK(m.primary_success_rate == doctest::Approx(0.5));
    CHECK(m.fd_fraction == 0.5);
    CHECK(m.hd_fraction == 0.25);
    CHECK(m.silence_fraction == 0.25);
    CHECK(m.mean_energy_per_node == doctest::Approx(5e-3 / (2 * 4 * 1e-3)));
    // link rates 2 and 2 -> perfectly fair
    CHECK(m.jain_fairness == doctest::Approx(1.0));

    const auto t = throughput(log, ctx);
    CHECK(t.secondary == m.secondary_throughput);
    CHECK(t.system == m.system_throughput);

    auto doubled = log;
    doubled.insert(doubled.end(), log.begin(), log.end());
    CHECK(aggregate_metrics(doubled, ctx).system_throughput == doctest::Approx(m.system_throughput).epsilon(1e-15));
}

TEST_CASE("overhead scales throughput exactly") {
    auto ctx = context(1);
    std::vector<SlotRecord> log{slot(0, dir(true, 3.0), dir(true, 3.0))};
    const double ideal = aggregate_metrics(log, ctx).secondary_throughput;
    ctx.overhead = {0.2, 1.0 / 60.0, 0.0476};
    CHECK(ctx.overhead.usable() == doctest::Approx(0.7357).epsilon(1e-4));
    CHECK(aggregate_metrics(log, ctx).secondary_throughput == doctest::Approx(ideal * (1 - 0.2 - 1.0 / 60.0 - 0.0476)).epsilon(1e-15));
}

TEST_CASE("all failures give zero throughput") {
    const auto ctx = context(1);
    std::vector<SlotRecord> log{slot(0, dir(true, 0.2), dir(true, 0.3)), slot(1, dir(true, 0.9), dir(false, 0))};
    const auto m = aggregate_metrics(log, ctx);
    CHECK(m.secondary_throughput == 0.0);
    CHECK(m.secondary_success_rate == 0.0);
    CHECK(m.jain_fairness == 1.0);
}

TEST_CASE("jain fairness") {
    const auto ctx = context(1);
    std::vector<SlotRecord> log{slot(0, dir(true, 3.0), dir(false, 0)), slot(1, dir(true, 3.0), dir(false, 0))};
    // rates (x, 0): (x)^2 / (2 x^2) = 0.5
    CHECK(aggregate_metrics(log, ctx).jain_fairness == doctest::Approx(0.5));
}

TEST_CASE("shannon rate model") {
    auto ctx = context(1);
    ctx.rate_model = RateModel::Kind::shannon;
    ctx.bandwidth_hz = 1.0;
    std::vector<SlotRecord> log{slot(0, dir(true, 3.0), dir(true, 0.5)), slot(1, dir(false, 0), dir(true, 1.0))};
    const double expect = (2.0 + std::log2(1.5) + 1.0) / 2.0;
    CHECK(aggregate_metrics(log, ctx).secondary_throughput == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("link statistics") {
    const auto ctx = context(1);
    std::vector<SlotRecord> log{slot(0, dir(true, 3.0), dir(false, 0)), slot(1, dir(true, 0.5), dir(false, 0)),
                                slot(2, dir(false, 0), dir(true, 2.0)), slot(3, dir(false, 0), dir(false, 0))};
    const auto links = link_statistics(log, ctx);
    REQUIRE(links.size() == 2);
    CHECK(links[0].attempts == 2);
    CHECK(links[0].successes == 1);
    CHECK(links[0].mean_sinr_conditional == doctest::Approx(1.75));
    CHECK(links[0].mean_sinr_unconditional == doctest::Approx(3.5 / 4));
    CHECK(links[0].throughput == doctest::Approx(1e6 / 4));
    CHECK(links[1].attempts == 1);
}

TEST_CASE("batch-means confidence") {
    const auto ctx = context(1);
    std::vector<SlotRecord> constant;
    for (std::uint64_t t = 0; t < 320; ++t) constant.push_back(slot(t, dir(true, 3.0), dir(true, 3.0)));
    const auto flat = metric_confidence(constant, ctx);
    CHECK(flat.secondary_throughput == 0.0);

    std::vector<SlotRecord> alternating;
    for (std::uint64_t t = 0; t < 320; ++t)
        alternating.push_back(slot(t, dir(true, t < 160 ? 3.0 : 0.5), dir(false, 0)));
    const auto ci = metric_confidence(alternating, ctx);
    // 32 batch means, half 1e6 and half 0: sd = 1e6 * sqrt(32 / 31) / 2
    const double sd = 1e6 * std::sqrt(32.0 / 31.0) / 2.0;
    CHECK(ci.secondary_throughput == doctest::Approx(1.96 * sd / std::sqrt(32.0)).epsilon(1e-12));

    CHECK(metric_confidence(std::vector<SlotRecord>{}, ctx).system_throughput == 0.0);
}
