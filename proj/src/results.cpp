#include "opsim/results.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "opsim/config_io.hpp"
#include "opsim/error.hpp"
#include "opsim/format.hpp"

namespace opsim {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return format_double(v); }
const char* flag(bool b) { return b ? "true" : "false"; }

std::string axis_column(SweepAxis axis) {
    return axis == SweepAxis::access_threshold ? "access_threshold_db" : to_string(axis);
}

void metrics_header(std::ostream& o) {
    o << "schema_version,policy,seed";
    for (const auto& f : metric_fields()) o << "," << f.name;
    for (const auto& f : metric_fields()) o << "," << f.name << "_ci95";
    o << ",slots,op_fallback_events,fixed_op_override\n";
}

void metrics_row(std::ostream& o, const ScenarioConfig& cfg, const RunResult& r) {
    o << kCsvSchemaVersion << "," << policy_label(cfg) << "," << cfg.run.seed;
    for (const auto& f : metric_fields()) o << "," << num(r.metrics.*f.member);
    for (const auto& f : metric_fields()) o << "," << num(r.ci95.*f.member);
    o << "," << cfg.run.slots << "," << r.op_fallback_events << "," << flag(r.fixed_op_override) << "\n";
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw Error(ErrorCode::io, "cannot create output directory " + dir.string());
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string manifest(const ScenarioConfig& cfg, const BundleInfo& info, const std::string& kind,
                     const std::string& axis, std::span<const double> values, bool fixed, double truncation) {
    std::ostringstream o;
    o << "tool: opsim\n"
      << "tool_version: " << OPSIM_VERSION << "\n"
      << "schema_version: " << kCsvSchemaVersion << "\n"
      << "kind: " << kind << "\n"
      << "command: " << quoted(info.command) << "\n"
      << "seed: " << cfg.run.seed << "\n"
      << "policy: " << policy_label(cfg) << "\n"
      << "axis: " << (axis.empty() ? "null" : axis) << "\n"
      << "values: [";
    for (std::size_t i = 0; i < values.size(); ++i) o << (i ? ", " : "") << num(values[i]);
    o << "]\n"
      << "fixed_op_override: " << flag(fixed) << "\n"
      << "truncation_fraction: " << num(truncation) << "\n"
      << "latency_budget_s: " << num(latency_budget(cfg.timing)) << "\n";
    return o.str();
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct SweepTable {
    fs::path path;
    std::string axis;
    std::string label;
    std::map<double, std::vector<std::string>> rows;  // axis value -> system, secondary, primary
};

SweepTable load_sweep_bundle(const fs::path& dir) {
    SweepTable t;
    t.path = dir;
    YAML::Node m;
    try {
        m = YAML::LoadFile((dir / "manifest.yaml").string());
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::io, dir.string() + ": unreadable manifest: " + e.what());
    }
    if (m["axis"] && !m["axis"].IsNull()) t.axis = m["axis"].as<std::string>();
    if (m["policy"]) t.label = m["policy"].as<std::string>();

    std::istringstream csv(read_file(dir / "metrics.csv"));
    std::string line;
    std::getline(csv, line);
    const auto header = split(line);
    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(ErrorCode::io, dir.string() + ": metrics.csv lacks column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    if (t.axis.empty()) return t;
    const std::size_t key = column(axis_column(parse_sweep_axis(t.axis)));
    const std::size_t sys = column("system_throughput");
    const std::size_t sec = column("secondary_throughput");
    const std::size_t pri = column("primary_throughput");
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) throw Error(ErrorCode::io, dir.string() + ": malformed metrics row");
        t.rows[std::stod(cells[key])] = {cells[sys], cells[sec], cells[pri]};
    }
    return t;
}

}  // namespace

std::string run_metrics_csv(const ScenarioConfig& cfg, const RunResult& result) {
    std::ostringstream o;
    metrics_header(o);
    metrics_row(o, cfg, result);
    return o.str();
}

std::string sweep_metrics_csv(const ScenarioConfig& cfg, SweepAxis axis, std::span<const SweepPoint> points) {
    (void)cfg;
    std::ostringstream o;
    o << axis_column(axis) << ",";
    metrics_header(o);
    for (const auto& p : points) {
        o << num(p.value) << ",";
        metrics_row(o, p.scenario, p.result);
    }
    return o.str();
}

std::string links_csv(const RunResult& result) {
    std::ostringstream o;
    o << "pair,direction,attempts,successes,mean_sinr_conditional,mean_sinr_unconditional,throughput\n";
    for (const auto& l : result.links) {
        o << l.pair << "," << (l.direction == Direction::a_to_b ? "a_to_b" : "b_to_a") << "," << l.attempts << ","
          << l.successes << "," << num(l.mean_sinr_conditional) << "," << num(l.mean_sinr_unconditional) << ","
          << num(l.throughput) << "\n";
    }
    return o.str();
}

std::string slot_log_csv(std::span<const SlotRecord> log) {
    std::ostringstream o;
    o << "slot,pair,mode,op_a,op_b,ab_active,ab_power,ab_sinr,ab_success,ba_active,ba_power,ba_sinr,ba_success,"
         "energy,primary_active,primary_sinr,primary_success,op_measurement_slot\n";
    for (const auto& rec : log) {
        for (std::size_t k = 0; k < rec.pairs.size(); ++k) {
            const auto& p = rec.pairs[k];
            o << rec.slot << "," << k << "," << to_string(p.mode) << "," << num(p.op_a) << "," << num(p.op_b);
            for (const auto* d : {&p.ab, &p.ba})
                o << "," << flag(d->active) << "," << num(d->power) << "," << num(d->sinr) << "," << flag(d->success);
            o << "," << num(p.energy) << "," << flag(rec.primary_active) << "," << num(rec.primary_sinr) << ","
              << flag(rec.primary_success) << "," << rec.op_measurement_slot << "\n";
        }
    }
    return o.str();
}

std::string throughput_plot_csv(const ScenarioConfig& cfg, SweepAxis axis, std::span<const SweepPoint> points) {
    (void)cfg;
    std::ostringstream o;
    o << axis_column(axis) << ",system_tput,secondary_tput,primary_tput,policy\n";
    for (const auto& p : points) {
        const auto& m = p.result.metrics;
        o << num(p.value) << "," << num(m.system_throughput) << "," << num(m.secondary_throughput) << ","
          << num(m.primary_throughput) << "," << policy_label(p.scenario) << "\n";
    }
    return o.str();
}

void write_run_bundle(const fs::path& dir, const ScenarioConfig& cfg, const RunResult& result,
                      const BundleInfo& info) {
    prepare_dir(dir);
    write_file(dir / "metrics.csv", run_metrics_csv(cfg, result));
    write_file(dir / "links.csv", links_csv(result));
    if (info.slot_log) write_file(dir / "slot_log.csv", slot_log_csv(result.log));
    write_file(dir / "config.yaml", emit_scenario(cfg));
    write_file(dir / "manifest.yaml",
               manifest(cfg, info, "run", "", {}, result.fixed_op_override, result.truncation_fraction));
}

void write_sweep_bundle(const fs::path& dir, const ScenarioConfig& cfg, SweepAxis axis,
                        std::span<const SweepPoint> points, const BundleInfo& info) {
    prepare_dir(dir);
    write_file(dir / "metrics.csv", sweep_metrics_csv(cfg, axis, points));
    write_file(dir / ("throughput_vs_" + std::string(to_string(axis)) + ".csv"),
               throughput_plot_csv(cfg, axis, points));
    write_file(dir / "config.yaml", emit_scenario(cfg));
    std::vector<double> values;
    bool fixed = false;
    double truncation = 0.0;
    for (const auto& p : points) {
        values.push_back(p.value);
        fixed = fixed || p.result.fixed_op_override;
        truncation = std::max(truncation, p.result.truncation_fraction);
    }
    // The label in the manifest names the swept policy, not the base config.
    ScenarioConfig labelled = points.empty() ? cfg : points.front().scenario;
    labelled.run.seed = cfg.run.seed;
    write_file(dir / "manifest.yaml", manifest(labelled, info, "sweep", to_string(axis), values, fixed, truncation));
}

std::string report(std::span<const fs::path> bundles) {
    if (bundles.empty()) throw Error(ErrorCode::invalid_argument, "report needs at least one bundle");
    if (bundles.size() == 1) return read_file(bundles.front() / "metrics.csv");

    std::vector<SweepTable> tables;
    for (const auto& b : bundles) tables.push_back(load_sweep_bundle(b));

    std::set<std::string> axes;
    for (const auto& t : tables) axes.insert(t.axis.empty() ? "(none)" : t.axis);
    if (axes.size() != 1 || tables.front().axis.empty()) {
        std::string msg = "bundles do not share a sweep axis:";
        for (const auto& t : tables) msg += " " + t.path.string() + " axis=" + (t.axis.empty() ? "(none)" : t.axis) + ";";
        msg.pop_back();
        throw Error(ErrorCode::grid_mismatch, msg);
    }

    std::set<double> common;
    for (const auto& [v, _] : tables.front().rows) common.insert(v);
    for (const auto& t : tables) {
        std::set<double> keep;
        for (double v : common)
            if (t.rows.count(v)) keep.insert(v);
        common = std::move(keep);
    }
    if (common.empty()) throw Error(ErrorCode::grid_mismatch, "bundles share no axis values");

    std::map<std::string, int> seen;
    std::ostringstream o;
    o << axis_column(parse_sweep_axis(tables.front().axis));
    for (const auto& t : tables) {
        std::string label = t.label.empty() ? t.path.filename().string() : t.label;
        if (seen[label]++) label += "_" + std::to_string(seen[label]);
        o << "," << label << "_system_tput," << label << "_secondary_tput," << label << "_primary_tput";
    }
    o << "\n";
    for (double v : common) {
        o << num(v);
        for (const auto& t : tables)
            for (const auto& cell : t.rows.at(v)) o << "," << cell;
        o << "\n";
    }
    return o.str();
}

}  // namespace opsim
