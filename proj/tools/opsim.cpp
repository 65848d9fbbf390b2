// opsim command line: run, sweep, op-table, report.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opsim/config_io.hpp"
#include "opsim/error.hpp"
#include "opsim/results.hpp"
#include "opsim/simulator.hpp"

namespace fs = std::filesystem;
using namespace opsim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

fs::path output_dir(const std::string& flag, const std::string& fallback) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("OPSIM_OUTPUT_DIR"); env && *env) return fs::path(env) / fallback;
    return fs::path("results") / fallback;
}

std::string command_line(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += i == 0 ? std::string("opsim") : std::string(argv[i]);
    }
    return out;
}

double to_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw ConfigError("--values", "not a number: '" + s + "'");
    return v;
}

// "1,2,3" or "lo:hi:step" (inclusive of hi up to rounding).
std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw ConfigError("--values", "range must be lo:hi:step");
        const double lo = to_number(parts[0]), hi = to_number(parts[1]), step = to_number(parts[2]);
        if (!(step > 0.0) || hi < lo) throw ConfigError("--values", "range needs lo <= hi and step > 0");
        const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
        for (std::size_t k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
        return out;
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');)
        if (!p.empty()) out.push_back(to_number(p));
    return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k)
        v[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    return v;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    auto v = linspace(std::log(lo), std::log(hi), n);
    for (auto& x : v) x = std::exp(x);
    return v;
}

struct GridSpec {
    std::size_t i_points = 16;
    std::size_t d_points = 8;
    std::optional<std::pair<double, double>> i_range, d_range;
};

// "16x8" or "i=lo:hi:n,d=lo:hi:n"; interference bounds accept power units.
GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    if (text.empty()) return g;
    if (const auto x = text.find('x'); x != std::string::npos && text.find('=') == std::string::npos) {
        g.i_points = static_cast<std::size_t>(to_number(text.substr(0, x)));
        g.d_points = static_cast<std::size_t>(to_number(text.substr(x + 1)));
        return g;
    }
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) {
        const auto eq = part.find('=');
        std::vector<std::string> f;
        std::stringstream ps(eq == std::string::npos ? "" : part.substr(eq + 1));
        for (std::string s; std::getline(ps, s, ':');) f.push_back(s);
        if (f.size() != 3) throw ConfigError("--grid", "expected i=lo:hi:n,d=lo:hi:n");
        const std::string axis = part.substr(0, eq);
        const auto n = static_cast<std::size_t>(to_number(f[2]));
        if (axis == "i") {
            g.i_range = {{parse_quantity(f[0], Quantity::power), parse_quantity(f[1], Quantity::power)}};
            g.i_points = n;
        } else if (axis == "d") {
            g.d_range = {{to_number(f[0]), to_number(f[1])}};
            g.d_points = n;
        } else {
            throw ConfigError("--grid", "unknown grid axis '" + axis + "'");
        }
    }
    return g;
}

int cmd_run(const std::string& scenario, std::vector<std::string> sets, const std::optional<std::uint64_t>& seed,
            const std::string& out, bool slot_log, const std::string& cmdline) {
    if (seed) sets.push_back("run.seed=" + std::to_string(*seed));
    const auto cfg = parse_scenario(scenario, sets);
    const auto result = run(cfg, resolve_op_table(cfg));
    const auto dir = output_dir(out, "run");
    write_run_bundle(dir, cfg, result, {cmdline, slot_log});
    std::cout << run_metrics_csv(cfg, result);
    std::cerr << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_sweep(const std::string& scenario, std::vector<std::string> sets, const std::optional<std::uint64_t>& seed,
              const std::string& axis_name, const std::string& values_text, const std::string& out,
              const std::string& cmdline) {
    if (seed) sets.push_back("run.seed=" + std::to_string(*seed));
    const auto cfg = parse_scenario(scenario, sets);
    SweepAxis axis;
    try {
        axis = parse_sweep_axis(axis_name);
    } catch (const Error& e) {
        throw ConfigError("--axis", e.what());
    }
    const auto values = parse_values(values_text);
    const auto points = sweep(cfg, axis, values);
    const auto dir = output_dir(out, std::string("sweep_") + to_string(axis));
    write_sweep_bundle(dir, cfg, axis, points, {cmdline, false});
    std::cout << sweep_metrics_csv(cfg, axis, points);
    std::cerr << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_op_table(const std::string& scenario, std::vector<std::string> sets, const std::string& grid_text,
                 const std::string& out) {
    const auto cfg = parse_scenario(scenario, sets);
    if (cfg.channel.fading != Fading::rayleigh)
        throw ConfigError("channel.fading", "OP tables require rayleigh fading");
    if (!(cfg.field.density > 0.0)) throw ConfigError("field.density", "OP tables require a positive field density");
    const auto g = parse_grid(grid_text);
    const std::uint64_t seed = derive_seed(cfg.run.seed, "op-table");
    const auto ig = g.i_range ? logspace(g.i_range->first, g.i_range->second, g.i_points)
                              : default_interference_grid(cfg.field, cfg.channel, g.i_points, seed);
    const auto dg = g.d_range ? linspace(g.d_range->first, g.d_range->second, g.d_points)
                              : default_distance_grid(cfg.field, g.d_points);
    const auto table = build_op_table(ig, dg, cfg.field, cfg.channel, cfg.link.access_threshold,
                                      cfg.op_source.desired_link_distance, cfg.op_source.conditioning, seed);
    const fs::path path = out.empty() ? output_dir("", "op_table.json") : fs::path(out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    save_op_table(table, path);
    std::cerr << "wrote " << path.string() << " (" << table.absent_cells().size() << " absent cells)\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& bundles, const std::string& out) {
    std::vector<fs::path> paths(bundles.begin(), bundles.end());
    const auto text = report(paths);
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw Error(ErrorCode::io, "cannot write " + out);
        f << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Opportunity-probability spectrum sharing simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", OPSIM_VERSION);

    std::string scenario, out, axis, values, grid;
    std::vector<std::string> sets, bundles;
    std::optional<std::uint64_t> seed;
    bool slot_log = false;

    auto* run_cmd = app.add_subcommand("run", "Simulate one scenario");
    run_cmd->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", seed, "Root seed override");
    run_cmd->add_option("--out", out, "Output directory");
    run_cmd->add_option("--set", sets, "key.path=value override")->take_all();
    run_cmd->add_flag("--slot-log", slot_log, "Also write the per-slot log");

    auto* sweep_cmd = app.add_subcommand("sweep", "Run one scenario per axis value");
    sweep_cmd->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--axis", axis, "access_threshold | deterministic_tau | si_residual | mutual_interference")
        ->required();
    sweep_cmd->add_option("--values", values, "Comma list or lo:hi:step")->required();
    sweep_cmd->add_option("--seed", seed, "Root seed override");
    sweep_cmd->add_option("--out", out, "Output directory");
    sweep_cmd->add_option("--set", sets, "key.path=value override")->take_all();

    auto* table_cmd = app.add_subcommand("op-table", "Build and save an OP table");
    table_cmd->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    table_cmd->add_option("--grid", grid, "16x8 or i=lo:hi:n,d=lo:hi:n");
    table_cmd->add_option("--out", out, "Output file");
    table_cmd->add_option("--set", sets, "key.path=value override")->take_all();

    auto* report_cmd = app.add_subcommand("report", "Join sweep bundles on their axis");
    report_cmd->add_option("bundles", bundles, "Bundle directories")->required()->check(CLI::ExistingDirectory);
    report_cmd->add_option("--out", out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    const std::string cmdline = command_line(argc, argv);
    try {
        if (*run_cmd) return cmd_run(scenario, sets, seed, out, slot_log, cmdline);
        if (*sweep_cmd) return cmd_sweep(scenario, sets, seed, axis, values, out, cmdline);
        if (*table_cmd) return cmd_op_table(scenario, sets, grid, out);
        if (*report_cmd) return cmd_report(bundles, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
