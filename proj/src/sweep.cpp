#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <string>

#include "opsim/error.hpp"
#include "opsim/format.hpp"
#include "opsim/simulator.hpp"

namespace opsim {

const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::access_threshold: return "access_threshold";
        case SweepAxis::deterministic_tau: return "deterministic_tau";
        case SweepAxis::si_residual: return "si_residual";
        case SweepAxis::mutual_interference: return "mutual_interference";
    }
    return "?";
}

SweepAxis parse_sweep_axis(std::string_view name) {
    if (name == "access_threshold") return SweepAxis::access_threshold;
    if (name == "deterministic_tau") return SweepAxis::deterministic_tau;
    if (name == "si_residual") return SweepAxis::si_residual;
    if (name == "mutual_interference") return SweepAxis::mutual_interference;
    throw Error(ErrorCode::invalid_argument, "unknown sweep axis '" + std::string(name) + "'");
}

ScenarioConfig apply_axis(ScenarioConfig cfg, SweepAxis axis, double value, std::size_t index) {
    switch (axis) {
        case SweepAxis::access_threshold:
            cfg.link.access_threshold = std::pow(10.0, value / 10.0);
            break;
        case SweepAxis::deterministic_tau:
            cfg.policy.kind = PolicyKind::deterministic;
            cfg.policy.deterministic_threshold = value;
            break;
        case SweepAxis::si_residual:
            cfg.duplex.si_residual = value;
            break;
        case SweepAxis::mutual_interference:
            cfg.link.mutual_interference = value;
            break;
    }
    cfg.run.seed += index;
    return cfg;
}

namespace {

// Tables keyed by access threshold; built once and shared read-only by all runs.
std::map<double, std::shared_ptr<const OpTable>> sweep_tables(const ScenarioConfig& base,
                                                              const std::vector<ScenarioConfig>& runs,
                                                              SweepAxis axis) {
    std::map<double, std::shared_ptr<const OpTable>> out;
    if (base.op_source.kind != OpSourceKind::table || base.all_ops_fixed() || runs.empty()) return out;

    if (!base.op_source.table_path.empty()) {
        auto t = std::make_shared<const OpTable>(load_op_table(base.op_source.table_path));
        for (const auto& r : runs) out[r.link.access_threshold] = t;
        return out;
    }
    if (axis != SweepAxis::access_threshold) {
        out[base.link.access_threshold] = resolve_op_table(base);
        return out;
    }
    std::vector<double> thetas;
    for (const auto& r : runs) thetas.push_back(r.link.access_threshold);
    std::sort(thetas.begin(), thetas.end());
    thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());

    const std::uint64_t seed = derive_seed(base.run.seed, "op-table");
    const auto ig = default_interference_grid(base.field, base.channel, base.op_source.interference_points, seed);
    const auto dg = default_distance_grid(base.field, base.op_source.distance_points);
    auto tables = build_op_tables(ig, dg, thetas, base.field, base.channel,
                                  base.op_source.desired_link_distance, base.op_source.conditioning, seed);
    for (std::size_t k = 0; k < thetas.size(); ++k)
        out[thetas[k]] = std::make_shared<const OpTable>(std::move(tables[k]));
    return out;
}

}  // namespace

std::vector<SweepPoint> sweep(const ScenarioConfig& cfg, SweepAxis axis, std::span<const double> values,
                              Execution exec, bool keep_logs) {
    std::vector<SweepPoint> points(values.size());
    std::vector<ScenarioConfig> runs;
    for (std::size_t i = 0; i < values.size(); ++i) {
        points[i].value = values[i];
        try {
            runs.push_back(apply_axis(cfg, axis, values[i], i));
            runs.back().validate();
        } catch (const Error& e) {
            throw Error(e.code(), std::string(to_string(axis)) + "=" + format_double(values[i]) + ": " + e.what());
        }
        points[i].scenario = runs.back();
    }
    const auto tables = sweep_tables(cfg, runs, axis);

    std::vector<std::exception_ptr> failures(values.size());
    auto run_one = [&](std::size_t i) {
        try {
            const auto it = tables.find(runs[i].link.access_threshold);
            points[i].result = run(runs[i], it == tables.end() ? nullptr : it->second);
            if (!keep_logs) {
                points[i].result.log.clear();
                points[i].result.log.shrink_to_fit();
            }
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };

    if (exec == Execution::serial) {
        for (std::size_t i = 0; i < values.size(); ++i) run_one(i);
    } else {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(values.size()); ++i)
            run_one(static_cast<std::size_t>(i));
    }

    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!failures[i]) continue;
        const std::string where = std::string(to_string(axis)) + "=" + format_double(values[i]) + ": ";
        try {
            std::rethrow_exception(failures[i]);
        } catch (const Error& e) {
            throw Error(e.code(), where + e.what());
        } catch (const std::exception& e) {
            throw Error(ErrorCode::invalid_argument, where + e.what());
        }
    }
    return points;
}

}  // namespace opsim
