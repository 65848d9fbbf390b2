// Serial vs OpenMP timings for the Monte Carlo kernels.

#include <chrono>
#include <cstdio>
#include <functional>

#include <omp.h>

#include "opsim/op_engine.hpp"
#include "opsim/simulator.hpp"

using namespace opsim;

namespace {

double seconds(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool same) {
    std::printf("%-28s serial %8.3f s  parallel %8.3f s  speedup %5.2fx  identical=%s\n", name, serial, parallel,
                serial / parallel, same ? "yes" : "NO");
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());

    FieldModel field;
    field.density = 1e-4;
    field.region_radius = 500.0;
    ChannelModel channel;
    channel.noise_power = 0.0;

    {
        OpQuery q{2e-8, 400.0, 10.0, 1.0};
        ConditioningConfig cond{0.1, 20000, 2000000};
        ConditionedSamples a, b;
        const double ts = seconds([&] { a = draw_conditioned_samples(q, field, channel, cond, 7, Execution::serial); });
        const double tp = seconds([&] { b = draw_conditioned_samples(q, field, channel, cond, 7, Execution::parallel); });
        report("draw_conditioned_samples", ts, tp, a.node_sir == b.node_sir && a.drawn == b.drawn);
    }

    {
        const auto ig = default_interference_grid(field, channel, 8, 3);
        const auto dg = default_distance_grid(field, 4);
        const double thetas[] = {0.5, 1.0, 2.0};
        ConditioningConfig cond{0.1, 500, 100000};
        std::vector<OpTable> a, b;
        const double ts = seconds([&] { a = build_op_tables(ig, dg, thetas, field, channel, 10.0, cond, 11, Execution::serial); });
        const double tp = seconds([&] { b = build_op_tables(ig, dg, thetas, field, channel, 10.0, cond, 11, Execution::parallel); });
        report("build_op_tables 8x4x3", ts, tp, a == b);
    }

    {
        ScenarioConfig cfg;
        PairSpec p;
        p.pos_a = Point{0.0, 0.0};
        p.pos_b = Point{10.0, 0.0};
        cfg.pairs = {p};
        cfg.field = field;
        cfg.channel.noise_power = 0.0;
        cfg.run.slots = 20000;
        const double values[] = {-3, -1.5, 0, 1.5, 3, 4.5, 6, 7.5};
        std::vector<SweepPoint> a, b;
        const double ts = seconds([&] { a = sweep(cfg, SweepAxis::access_threshold, values, Execution::serial); });
        const double tp = seconds([&] { b = sweep(cfg, SweepAxis::access_threshold, values, Execution::parallel); });
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i)
            same = a[i].result.metrics.system_throughput == b[i].result.metrics.system_throughput;
        report("sweep 8 points", ts, tp, same);
    }
    return 0;
}
