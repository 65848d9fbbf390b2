#include "opsim/scenario.hpp"

#include <cmath>
#include <string>

#include "opsim/error.hpp"

namespace opsim {

const char* to_string(OpSourceKind k) {
    switch (k) {
        case OpSourceKind::table: return "table";
        case OpSourceKind::live: return "live";
        case OpSourceKind::oracle_uncorrelated: return "oracle_uncorrelated";
    }
    return "?";
}

const char* to_string(HdScheme s) { return s == HdScheme::tdd ? "tdd" : "simplex"; }

const char* to_string(RateModel::Kind k) {
    return k == RateModel::Kind::shannon ? "shannon" : "threshold";
}

OpSourceKind parse_op_source_kind(std::string_view name) {
    if (name == "table") return OpSourceKind::table;
    if (name == "live") return OpSourceKind::live;
    if (name == "oracle_uncorrelated") return OpSourceKind::oracle_uncorrelated;
    throw Error(ErrorCode::invalid_argument, "unknown op source '" + std::string(name) + "'");
}

HdScheme parse_hd_scheme(std::string_view name) {
    if (name == "tdd") return HdScheme::tdd;
    if (name == "simplex") return HdScheme::simplex;
    throw Error(ErrorCode::invalid_argument, "unknown hd scheme '" + std::string(name) + "'");
}

RateModel::Kind parse_rate_model(std::string_view name) {
    if (name == "shannon") return RateModel::Kind::shannon;
    if (name == "threshold") return RateModel::Kind::threshold;
    throw Error(ErrorCode::invalid_argument, "unknown rate model '" + std::string(name) + "'");
}

std::uint64_t slots_in(double period, double slot) {
    return static_cast<std::uint64_t>(std::llround(period / slot));
}

bool ScenarioConfig::all_ops_fixed() const {
    for (const auto& p : pairs)
        if (!p.op_a || !p.op_b) return false;
    return true;
}

bool ScenarioConfig::any_op_fixed() const {
    for (const auto& p : pairs)
        if (p.op_a || p.op_b) return true;
    return false;
}

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& msg) {
    throw ConfigError(key, key + ": " + msg);
}

void require(bool ok, const std::string& key, const std::string& msg) {
    if (!ok) fail(key, msg);
}

template <typename F>
void rethrow_as_config(const std::string& key, F&& check) {
    try {
        check();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(key, e.what());
    }
}

void check_period(double period, double slot, const std::string& key) {
    require(period > 0.0 && std::isfinite(period), key, "period must be positive");
    const double ratio = period / slot;
    require(ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio, key,
            "period must be an integer multiple of timing.slot");
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void ScenarioConfig::validate() const {
    require(link.access_threshold > 0.0, "link.access_threshold", "must be positive");
    require(link.bandwidth_hz > 0.0, "link.bandwidth_hz", "must be positive");
    require(link.mutual_interference > 0.0, "link.mutual_interference", "must be positive");

    require(channel.pathloss_exponent > 2.0, "channel.pathloss_exponent", "must exceed 2");
    require(channel.reference_gain > 0.0, "channel.reference_gain", "must be positive");
    require(channel.noise_power >= 0.0, "channel.noise_power", "must be non-negative");

    require(field.density >= 0.0, "field.density", "must be non-negative");
    require(field.tx_power >= 0.0, "field.tx_power", "must be non-negative");
    require(field.region_radius > 0.0, "field.region_radius", "must be positive");

    require(!pairs.empty(), "pairs", "at least one pair is required");
    const bool needs_positions = !gains || field.density > 0.0 || primary.enabled ||
                                 (!all_ops_fixed() && op_source.kind != OpSourceKind::oracle_uncorrelated);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        const std::string base = "pairs." + std::to_string(i);
        if (p.op_a) require(is_probability(*p.op_a), base + ".op_a", "must lie in [0, 1]");
        if (p.op_b) require(is_probability(*p.op_b), base + ".op_b", "must lie in [0, 1]");
        require(p.external_a >= 0.0, base + ".external_a", "must be non-negative");
        require(p.external_b >= 0.0, base + ".external_b", "must be non-negative");
        if (needs_positions) {
            require(p.pos_a.has_value(), base + ".a", "position is required by this scenario");
            require(p.pos_b.has_value(), base + ".b", "position is required by this scenario");
        }
    }

    if (gains) {
        const std::size_t n = node_count();
        require(gains->tx_count() == n && gains->rx_count() == n, "gains",
                "matrix must be " + std::to_string(n) + "x" + std::to_string(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j)
                    require((*gains)(i, j) > 0.0,
                            "gains." + std::to_string(i) + "." + std::to_string(j),
                            "off-diagonal gains must be positive");
    }

    if (!all_ops_fixed()) {
        require(channel.fading == Fading::rayleigh, "channel.fading",
                "OP sources assume Rayleigh fading; pin every OP to use other fading");
        if (op_source.kind != OpSourceKind::oracle_uncorrelated)
            require(!sensors.empty(), "sensors", "the OP source needs at least one sensor");
    }

    require(primary.tx_power > 0.0, "primary.tx_power", "must be positive");
    require(is_probability(primary.transmit_probability), "primary.transmit_probability",
            "must lie in [0, 1]");
    require(primary.sinr_threshold > 0.0, "primary.sinr_threshold", "must be positive");

    rethrow_as_config("policy", [&] { policy.validate(); });

    require(is_probability(duplex.si_residual), "duplex.si_residual", "must lie in [0, 1]");

    require(timing.slot > 0.0 && std::isfinite(timing.slot), "timing.slot", "must be positive");
    check_period(timing.sensing_period, timing.slot, "timing.sensing_period");
    check_period(timing.feedback_period, timing.slot, "timing.feedback_period");
    check_period(timing.op_read_period, timing.slot, "timing.op_read_period");
    check_period(timing.field_redraw_period, timing.slot, "timing.field_redraw_period");
    check_period(primary.decision_period, timing.slot, "primary.decision_period");
    const auto& cd = timing.control_delays;
    require(cd.feedback >= 0.0, "timing.control_delays.feedback", "must be non-negative");
    require(cd.uplink >= 0.0, "timing.control_delays.uplink", "must be non-negative");
    require(cd.compute >= 0.0, "timing.control_delays.compute", "must be non-negative");
    require(cd.downlink >= 0.0, "timing.control_delays.downlink", "must be non-negative");
    require(cd.apply >= 0.0, "timing.control_delays.apply", "must be non-negative");

    require(op_source.desired_link_distance > 0.0, "op_source.desired_link_distance", "must be positive");
    rethrow_as_config("op_source.conditioning", [&] { op_source.conditioning.validate(); });
    require(op_source.interference_points >= 1, "op_source.grid.interference_points", "must be >= 1");
    require(op_source.distance_points >= 1, "op_source.grid.distance_points", "must be >= 1");

    const auto frac_ok = [](double f) { return f >= 0.0 && f < 1.0; };
    require(frac_ok(overhead.cp_fraction), "overhead.cp_fraction", "must lie in [0, 1)");
    require(frac_ok(overhead.pss_fraction), "overhead.pss_fraction", "must lie in [0, 1)");
    require(frac_ok(overhead.rs_fraction), "overhead.rs_fraction", "must lie in [0, 1)");
    require(overhead.cp_fraction + overhead.pss_fraction + overhead.rs_fraction < 1.0, "overhead",
            "overhead.cp_fraction + overhead.pss_fraction + overhead.rs_fraction must sum to < 1");
}

}  // namespace opsim
