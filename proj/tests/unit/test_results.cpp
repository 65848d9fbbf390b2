#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "opsim/config_io.hpp"
#include "opsim/error.hpp"
#include "opsim/results.hpp"

using namespace opsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::size_t lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("opsim_results_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("run metrics csv") {
    auto c = fixtures::pinned_pair(0.8, 0.6);
    c.run.slots = 300;
    const auto r = run(c);
    const auto csv = run_metrics_csv(c, r);
    CHECK(lines(csv) == 2);
    const auto header = first_line(csv);
    CHECK(header.rfind("schema_version,policy,seed,system_throughput", 0) == 0);
    for (const auto& f : metric_fields()) {
        CHECK(header.find(std::string(",") + f.name + ",") != std::string::npos);
        CHECK(header.find(std::string(",") + f.name + "_ci95") != std::string::npos);
    }
    CHECK(csv.find(",300,0,true\n") != std::string::npos);
}

TEST_CASE("empty sweep is header only") {
    const auto c = fixtures::pinned_pair(0.8, 0.6);
    const std::vector<SweepPoint> none;
    const auto csv = sweep_metrics_csv(c, SweepAxis::access_threshold, none);
    CHECK(lines(csv) == 1);
    CHECK(first_line(csv).rfind("access_threshold_db,schema_version", 0) == 0);
    CHECK(throughput_plot_csv(c, SweepAxis::access_threshold, none) ==
          "access_threshold_db,system_tput,secondary_tput,primary_tput,policy\n");
}

TEST_CASE("bundles and determinism") {
    auto c = fixtures::pinned_pair(0.7, 0.5);
    c.run.slots = 500;
    const auto dir = scratch("run");
    write_run_bundle(dir, c, run(c), {"opsim run x", true});
    for (const char* f : {"metrics.csv", "links.csv", "slot_log.csv", "config.yaml", "manifest.yaml"})
        CHECK(fs::exists(dir / f));
    CHECK(lines(slurp(dir / "slot_log.csv")) == 501);
    const auto manifest = slurp(dir / "manifest.yaml");
    CHECK(manifest.find("seed: 1") != std::string::npos);
    CHECK(manifest.find("fixed_op_override: true") != std::string::npos);
    CHECK(manifest.find("latency_budget_s: 0.015") != std::string::npos);

    // replay from the snapshot
    const auto snap = parse_scenario(dir / "config.yaml");
    CHECK(snap == c);
    const auto again = scratch("run_again");
    write_run_bundle(again, snap, run(snap), {"opsim run y", false});
    CHECK(slurp(dir / "metrics.csv") == slurp(again / "metrics.csv"));
    CHECK_FALSE(fs::exists(again / "slot_log.csv"));
    fs::remove_all(dir);
    fs::remove_all(again);
}

TEST_CASE("unwritable directory") {
    const auto c = fixtures::pinned_pair(0.7, 0.5);
    RunResult r;
    CHECK_THROWS_AS(write_run_bundle("/proc/opsim/forbidden", c, r, {}), Error);
}

TEST_CASE("report joins sweeps") {
    auto c = fixtures::pinned_pair(0.7, 0.6);
    c.run.slots = 400;
    const double values[] = {-3.0, 0.0, 3.0};

    const auto d_random = scratch("random");
    const auto d_det = scratch("det");
    const auto d_other = scratch("other");
    const auto d_disjoint = scratch("disjoint");

    write_sweep_bundle(d_random, c, SweepAxis::access_threshold, sweep(c, SweepAxis::access_threshold, values), {});
    CHECK(fs::exists(d_random / "throughput_vs_access_threshold.csv"));
    const auto plot = slurp(d_random / "throughput_vs_access_threshold.csv");
    CHECK(first_line(plot) == "access_threshold_db,system_tput,secondary_tput,primary_tput,policy");
    CHECK(lines(plot) == 4);

    auto det = c;
    det.policy.kind = PolicyKind::deterministic;
    det.policy.deterministic_threshold = 0.5;
    write_sweep_bundle(d_det, det, SweepAxis::access_threshold, sweep(det, SweepAxis::access_threshold, values), {});

    const fs::path both[] = {d_random, d_det};
    const auto joined = report(both);
    CHECK(first_line(joined) ==
          "access_threshold_db,random_linear_system_tput,random_linear_secondary_tput,random_linear_primary_tput,"
          "deterministic_0.5_system_tput,deterministic_0.5_secondary_tput,deterministic_0.5_primary_tput");
    CHECK(lines(joined) == 4);

    const fs::path single[] = {d_random};
    CHECK(report(single) == slurp(d_random / "metrics.csv"));

    const double taus[] = {0.5, 0.7};
    write_sweep_bundle(d_other, c, SweepAxis::deterministic_tau, sweep(c, SweepAxis::deterministic_tau, taus), {});
    const fs::path mismatched[] = {d_random, d_other};
    try {
        report(mismatched);
        FAIL("expected axis mismatch");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("axis=access_threshold") != std::string::npos);
        CHECK(msg.find("axis=deterministic_tau") != std::string::npos);
    }

    const double far[] = {10.0, 12.0};
    write_sweep_bundle(d_disjoint, c, SweepAxis::access_threshold, sweep(c, SweepAxis::access_threshold, far), {});
    const fs::path disjoint[] = {d_random, d_disjoint};
    CHECK_THROWS_AS(report(disjoint), Error);

    for (const auto& d : {d_random, d_det, d_other, d_disjoint}) fs::remove_all(d);
}
