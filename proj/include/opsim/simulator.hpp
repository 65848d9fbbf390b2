#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "opsim/duplex.hpp"
#include "opsim/op_engine.hpp"
#include "opsim/rng.hpp"
#include "opsim/scenario.hpp"

namespace opsim {

struct DirectionRecord {
    bool active = false;
    double power = 0.0;
    double sinr = 0.0;  // meaningful only when active
    bool success = false;
};

struct PairRecord {
    DuplexMode mode = DuplexMode::Silence;
    DirectionRecord ab;
    DirectionRecord ba;
    double energy = 0.0;  // J spent by both nodes in the slot
    double op_a = 0.0;
    double op_b = 0.0;
};

struct SlotRecord {
    std::uint64_t slot = 0;
    std::vector<PairRecord> pairs;
    bool primary_active = false;
    double primary_sinr = 0.0;  // meaningful only when primary_active
    bool primary_success = false;
    // Slot of the sensor measurement behind the OP values in use; -1 before the
    // first delayed measurement arrives (prior OP in use) or when OPs are pinned.
    std::int64_t op_measurement_slot = -1;
};

struct RunMetrics {
    double system_throughput = 0.0;     // bits/s
    double secondary_throughput = 0.0;  // bits/s
    double primary_throughput = 0.0;    // bits/s
    double primary_success_rate = 0.0;
    double secondary_success_rate = 0.0;
    double mean_energy_per_node = 0.0;  // J/s
    double fd_fraction = 0.0;
    double hd_fraction = 0.0;
    double silence_fraction = 0.0;
    double jain_fairness = 0.0;
};

struct MetricField {
    const char* name;
    double RunMetrics::*member;
};

// Column order for every metrics table.
std::span<const MetricField> metric_fields();

struct LinkStats {
    std::size_t pair = 0;
    Direction direction = Direction::a_to_b;
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    double mean_sinr_conditional = 0.0;    // over slots where the link transmits
    double mean_sinr_unconditional = 0.0;  // silent slots count as zero
    double throughput = 0.0;               // bits/s
};

struct RateContext {
    RateModel::Kind rate_model = RateModel::Kind::threshold;
    double access_threshold = 1.0;
    double primary_threshold = 1.0;
    double bandwidth_hz = 1.0;
    OverheadConfig overhead;
    double slot = 1e-3;
    std::size_t transmitting_nodes = 0;  // nodes able to transmit; energy normalization
    std::vector<std::pair<std::size_t, Direction>> links;  // directions able to carry traffic

    static RateContext from(const ScenarioConfig& cfg);
};

struct Throughput {
    double system = 0.0;
    double secondary = 0.0;
    double primary = 0.0;
};

// Overhead-corrected bits/s per category averaged over the log's duration.
Throughput throughput(std::span<const SlotRecord> records, const RateContext& ctx);

RunMetrics aggregate_metrics(std::span<const SlotRecord> records, const RateContext& ctx);

// 95% half-widths by batch means over contiguous slot batches.
RunMetrics metric_confidence(std::span<const SlotRecord> records, const RateContext& ctx,
                             std::size_t batches = 32);

std::vector<LinkStats> link_statistics(std::span<const SlotRecord> records, const RateContext& ctx);

struct RunResult {
    RunMetrics metrics;
    RunMetrics ci95;
    std::vector<LinkStats> links;
    std::vector<SlotRecord> log;
    std::uint64_t op_fallback_events = 0;
    bool fixed_op_override = false;
    double truncation_fraction = 0.0;
};

// Slotted engine for one scenario. Owns all mutable state and random streams.
class Engine {
public:
    explicit Engine(const ScenarioConfig& cfg, std::shared_ptr<const OpTable> table = nullptr);

    SlotRecord step_slot();

    std::uint64_t current_slot() const { return slot_; }
    std::uint64_t op_fallback_events() const { return fallback_events_; }
    // Sensor readings taken at the given slot, if still buffered.
    const std::vector<double>* measurement_at(std::uint64_t slot) const;
    std::span<const double> current_ops() const { return ops_; }

private:
    struct Measurement {
        std::uint64_t slot;
        std::vector<double> values;
    };

    void redraw_field();
    void measure_sensors();
    void refresh_ops();
    double op_from_measurement(std::size_t node, double measured);
    double prior_op() const;
    double field_interference(Point at);

    ScenarioConfig cfg_;
    std::shared_ptr<const OpTable> table_;
    std::size_t nodes_;
    GainMatrix gains_;                  // secondary tx -> secondary rx, mutual scale applied
    std::vector<Point> positions_;
    std::vector<double> primary_to_node_;
    std::vector<double> node_to_primary_rx_;
    std::vector<double> primary_to_sensor_;
    double primary_desired_gain_ = 0.0;
    std::vector<std::size_t> nearest_sensor_;
    std::vector<double> sensor_distance_;
    bool has_positions_ = false;

    std::uint64_t sensing_slots_, op_read_slots_, redraw_slots_, decision_slots_, lag_slots_;

    RandomStream field_rng_, primary_rng_, sensing_rng_, mac_rng_, fading_rng_, live_rng_;
    std::vector<Point> interferers_;
    bool primary_on_ = false;
    std::deque<Measurement> history_;
    std::vector<double> ops_;
    std::int64_t op_measurement_slot_ = -1;
    MacPolicy effective_policy_;
    std::uint64_t fallback_events_ = 0;
    std::uint64_t slot_ = 0;
};

// Build or load the OP table the scenario needs; null when no table is used.
std::shared_ptr<const OpTable> resolve_op_table(const ScenarioConfig& cfg);

RunResult run(const ScenarioConfig& cfg, std::shared_ptr<const OpTable> table = nullptr);

enum class SweepAxis { access_threshold, deterministic_tau, si_residual, mutual_interference };

const char* to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view name);

// Scenario for one sweep point. access_threshold values are in dB.
ScenarioConfig apply_axis(ScenarioConfig cfg, SweepAxis axis, double value, std::size_t index);

struct SweepPoint {
    double value = 0.0;
    ScenarioConfig scenario;
    RunResult result;
};

// One independent run per value, seeded base + index. Slot logs are dropped
// unless keep_logs is set.
std::vector<SweepPoint> sweep(const ScenarioConfig& cfg, SweepAxis axis, std::span<const double> values,
                              Execution exec = Execution::parallel, bool keep_logs = false);

// Worst-case control-loop delay; the compute hop is never shorter than the
// sensing period.
double latency_budget(const TimingConfig& timing);

// Label for tables: the access mode, or the policy for random access.
std::string policy_label(const ScenarioConfig& cfg);

}  // namespace opsim
