#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opsim/duplex.hpp"
#include "opsim/geometry.hpp"
#include "opsim/mac.hpp"
#include "opsim/op_engine.hpp"

namespace opsim {

struct PairSpec {
    std::optional<Point> pos_a;
    std::optional<Point> pos_b;
    // Pinned OP values bypass the OP source for that node.
    std::optional<double> op_a;
    std::optional<double> op_b;
    // Constant extra interference at each node's receiver, W.
    double external_a = 0.0;
    double external_b = 0.0;

    bool operator==(const PairSpec&) const = default;
};

struct PrimarySpec {
    bool enabled = false;
    Point position{};
    Point rx_position{5.0, 0.0};
    double tx_power = 1.0;
    double transmit_probability = 0.4;
    double decision_period = 11.0;  // s
    double sinr_threshold = 1.0;    // linear

    bool operator==(const PrimarySpec&) const = default;
};

// Hop delays of the sensor -> server -> node control loop, s.
struct ControlDelays {
    double feedback = 0.005;
    double uplink = 0.0025;
    double compute = 0.001;
    double downlink = 0.0025;
    double apply = 0.004;

    double total() const { return feedback + uplink + compute + downlink + apply; }
    bool operator==(const ControlDelays&) const = default;
};

struct TimingConfig {
    double slot = 0.001;
    double sensing_period = 0.001;
    double feedback_period = 0.005;
    double op_read_period = 3.0;
    double field_redraw_period = 1.0;
    ControlDelays control_delays;

    bool operator==(const TimingConfig&) const = default;
};

enum class HdScheme { tdd, simplex };

struct DuplexConfig {
    bool enabled = true;
    double si_residual = 0.01;
    RateModel::Kind rate_model = RateModel::Kind::threshold;
    HdScheme hd_scheme = HdScheme::tdd;

    bool operator==(const DuplexConfig&) const = default;
};

enum class OpSourceKind { table, live, oracle_uncorrelated };

struct OpSourceConfig {
    OpSourceKind kind = OpSourceKind::oracle_uncorrelated;
    std::string table_path;  // empty: build the table in-process from the scenario seed
    double desired_link_distance = 10.0;
    ConditioningConfig conditioning;
    std::size_t interference_points = 16;
    std::size_t distance_points = 8;

    bool operator==(const OpSourceConfig&) const = default;
};

struct RunConfig {
    std::uint64_t slots = 10000;
    std::uint64_t seed = 1;

    bool operator==(const RunConfig&) const = default;
};

struct OverheadConfig {
    double cp_fraction = 0.2;            // 512 / (2048 + 512)
    double pss_fraction = 1.0 / 60.0;    // one symbol per 60-symbol half frame
    double rs_fraction = 0.0476;

    double usable() const { return 1.0 - cp_fraction - pss_fraction - rs_fraction; }
    bool operator==(const OverheadConfig&) const = default;
};

struct LinkConfig {
    double access_threshold = 1.0;  // linear SIR
    double bandwidth_hz = 20e6;
    double mutual_interference = 1.0;  // scale on gains between different pairs

    bool operator==(const LinkConfig&) const = default;
};

struct ScenarioConfig {
    LinkConfig link;
    ChannelModel channel;
    FieldModel field;
    std::vector<PairSpec> pairs;
    // Optional explicit gains over secondary nodes, ordered [p0.a, p0.b, p1.a, ...].
    std::optional<GainMatrix> gains;
    std::vector<Point> sensors;
    PrimarySpec primary;
    MacPolicy policy;
    AccessMode access_mode = AccessMode::random_access;
    DuplexConfig duplex;
    TimingConfig timing;
    OpSourceConfig op_source;
    RunConfig run;
    OverheadConfig overhead;

    std::size_t node_count() const { return 2 * pairs.size(); }
    bool all_ops_fixed() const;
    bool any_op_fixed() const;

    // Throws Error(config) naming the offending key.
    void validate() const;

    bool operator==(const ScenarioConfig&) const = default;
};

const char* to_string(OpSourceKind k);
const char* to_string(HdScheme s);
const char* to_string(RateModel::Kind k);
OpSourceKind parse_op_source_kind(std::string_view name);
HdScheme parse_hd_scheme(std::string_view name);
RateModel::Kind parse_rate_model(std::string_view name);

// Number of slots in a period that validate() has checked to be a slot multiple.
std::uint64_t slots_in(double period, double slot);

}  // namespace opsim
