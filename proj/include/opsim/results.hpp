#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "opsim/simulator.hpp"

namespace opsim {

inline constexpr int kCsvSchemaVersion = 1;

// CSV text for one run: header plus a single row.
std::string run_metrics_csv(const ScenarioConfig& cfg, const RunResult& result);

// Header plus one row per sweep point, keyed by the axis value.
std::string sweep_metrics_csv(const ScenarioConfig& cfg, SweepAxis axis, std::span<const SweepPoint> points);

std::string links_csv(const RunResult& result);
std::string slot_log_csv(std::span<const SlotRecord> log);

// Throughput against the sweep axis for external plotting.
std::string throughput_plot_csv(const ScenarioConfig& cfg, SweepAxis axis, std::span<const SweepPoint> points);

struct BundleInfo {
    std::string command;   // command line that produced the bundle
    bool slot_log = false;
};

// Writes metrics.csv, links.csv, config.yaml, manifest.yaml and optionally slot_log.csv.
void write_run_bundle(const std::filesystem::path& dir, const ScenarioConfig& cfg, const RunResult& result,
                      const BundleInfo& info);

// Writes metrics.csv, throughput_vs_<axis>.csv, config.yaml and manifest.yaml.
void write_sweep_bundle(const std::filesystem::path& dir, const ScenarioConfig& cfg, SweepAxis axis,
                        std::span<const SweepPoint> points, const BundleInfo& info);

// Joins sweep bundles on their shared axis, one throughput column group per
// bundle. A single bundle passes its metrics through unchanged.
std::string report(std::span<const std::filesystem::path> bundles);

}  // namespace opsim
