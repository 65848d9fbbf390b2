#include "opsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "opsim/error.hpp"
#include "opsim/format.hpp"

namespace opsim {

namespace {

std::size_t partner(std::size_t node) { return node ^ 1U; }

}  // namespace

Engine::Engine(const ScenarioConfig& cfg, std::shared_ptr<const OpTable> table)
    : cfg_(cfg),
      table_(std::move(table)),
      nodes_(cfg.node_count()),
      field_rng_(RandomStream::derived(cfg.run.seed, "field")),
      primary_rng_(RandomStream::derived(cfg.run.seed, "primary")),
      sensing_rng_(RandomStream::derived(cfg.run.seed, "sensing")),
      mac_rng_(RandomStream::derived(cfg.run.seed, "mac")),
      fading_rng_(RandomStream::derived(cfg.run.seed, "fading")),
      live_rng_(RandomStream::derived(cfg.run.seed, "op-live")),
      effective_policy_(cfg.policy) {
    cfg_.validate();

    has_positions_ = std::all_of(cfg_.pairs.begin(), cfg_.pairs.end(),
                                 [](const PairSpec& p) { return p.pos_a && p.pos_b; });
    if (has_positions_) {
        for (const auto& p : cfg_.pairs) {
            positions_.push_back(*p.pos_a);
            positions_.push_back(*p.pos_b);
        }
    }

    if (cfg_.gains) {
        gains_ = *cfg_.gains;
    } else {
        gains_ = GainMatrix(nodes_, nodes_);
        for (std::size_t i = 0; i < nodes_; ++i)
            for (std::size_t j = 0; j < nodes_; ++j)
                if (i != j) gains_(i, j) = clamped_path_gain(distance(positions_[i], positions_[j]), cfg_.channel);
    }
    for (std::size_t i = 0; i < nodes_; ++i) {
        for (std::size_t j = 0; j < nodes_; ++j) {
            if (i == j)
                gains_(i, j) = cfg_.duplex.enabled ? cfg_.duplex.si_residual : 0.0;
            else if (i / 2 != j / 2)
                gains_(i, j) *= cfg_.link.mutual_interference;
        }
    }

    if (cfg_.primary.enabled) {
        const auto& pr = cfg_.primary;
        for (std::size_t k = 0; k < nodes_; ++k) {
            primary_to_node_.push_back(clamped_path_gain(distance(pr.position, positions_[k]), cfg_.channel));
            node_to_primary_rx_.push_back(clamped_path_gain(distance(positions_[k], pr.rx_position), cfg_.channel));
        }
        for (const auto& s : cfg_.sensors)
            primary_to_sensor_.push_back(clamped_path_gain(distance(pr.position, s), cfg_.channel));
        primary_desired_gain_ = clamped_path_gain(distance(pr.position, pr.rx_position), cfg_.channel);
    }

    if (has_positions_ && !cfg_.sensors.empty()) {
        for (std::size_t k = 0; k < nodes_; ++k) {
            std::size_t best = 0;
            double best_d = distance(positions_[k], cfg_.sensors[0]);
            for (std::size_t s = 1; s < cfg_.sensors.size(); ++s) {
                const double d = distance(positions_[k], cfg_.sensors[s]);
                if (d < best_d) {
                    best = s;
                    best_d = d;
                }
            }
            nearest_sensor_.push_back(best);
            sensor_distance_.push_back(best_d);
        }
    }

    const auto& tm = cfg_.timing;
    sensing_slots_ = slots_in(tm.sensing_period, tm.slot);
    op_read_slots_ = slots_in(tm.op_read_period, tm.slot);
    redraw_slots_ = slots_in(tm.field_redraw_period, tm.slot);
    decision_slots_ = slots_in(cfg_.primary.decision_period, tm.slot);
    lag_slots_ = static_cast<std::uint64_t>(std::ceil(tm.control_delays.total() / tm.slot - 1e-9));

    if (cfg_.op_source.kind == OpSourceKind::table && !cfg_.all_ops_fixed()) {
        if (!table_) throw ConfigError("op_source.table", "op_source.table: no OP table was supplied");
        if (!table_->matches(cfg_.field, cfg_.channel, cfg_.link.access_threshold,
                             cfg_.op_source.desired_link_distance))
            throw ConfigError("op_source.table",
                              "op_source.table: table metadata does not match the scenario");
    }

    ops_.assign(nodes_, 0.0);
    for (std::size_t p = 0; p < cfg_.pairs.size(); ++p) {
        const auto& ps = cfg_.pairs[p];
        ops_[2 * p] = ps.op_a ? *ps.op_a : prior_op();
        ops_[2 * p + 1] = ps.op_b ? *ps.op_b : prior_op();
    }
    if (effective_policy_.kind == PolicyKind::automatic) effective_policy_.kind = PolicyKind::random_linear;
}

double Engine::prior_op() const {
    return unconditional_coverage(cfg_.link.access_threshold, cfg_.field, cfg_.channel,
                                  cfg_.op_source.desired_link_distance);
}

double Engine::field_interference(Point at) {
    return aggregate_interference(at, interferers_, cfg_.channel, cfg_.field, fading_rng_);
}

void Engine::redraw_field() { interferers_ = sample_ppp(cfg_.field, field_rng_); }

void Engine::measure_sensors() {
    Measurement m{slot_, {}};
    for (std::size_t s = 0; s < cfg_.sensors.size(); ++s) {
        double v = aggregate_interference(cfg_.sensors[s], interferers_, cfg_.channel, cfg_.field, sensing_rng_);
        if (primary_on_)
            v += cfg_.primary.tx_power * primary_to_sensor_[s] * sample_fading(cfg_.channel, sensing_rng_);
        m.values.push_back(v);
    }
    history_.push_back(std::move(m));
}

const std::vector<double>* Engine::measurement_at(std::uint64_t slot) const {
    for (const auto& m : history_)
        if (m.slot == slot) return &m.values;
    return nullptr;
}

double Engine::op_from_measurement(std::size_t node, double measured) {
    const double d = sensor_distance_[node];
    switch (cfg_.op_source.kind) {
        case OpSourceKind::table:
            try {
                return lookup_op(*table_, measured, d);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::out_of_range && e.code() != ErrorCode::missing_cell) throw;
                ++fallback_events_;
                return prior_op();
            }
        case OpSourceKind::live: {
            OpQuery q{measured, d, cfg_.op_source.desired_link_distance, cfg_.link.access_threshold};
            try {
                return estimate_op(q, cfg_.field, cfg_.channel, cfg_.op_source.conditioning, live_rng_,
                                   Execution::serial)
                    .value;
            } catch (const ConditioningTooRare&) {
                ++fallback_events_;
                return prior_op();
            }
        }
        case OpSourceKind::oracle_uncorrelated:
            return prior_op();
    }
    return prior_op();
}

void Engine::refresh_ops() {
    if (cfg_.all_ops_fixed()) return;

    const Measurement* m = nullptr;
    if (slot_ >= lag_slots_ && !history_.empty()) {
        const std::uint64_t src = slot_ - lag_slots_;
        while (history_.size() > 1 && history_[1].slot <= src) history_.pop_front();
        if (history_.front().slot <= src) m = &history_.front();
    }

    for (std::size_t p = 0; p < cfg_.pairs.size(); ++p) {
        const auto& ps = cfg_.pairs[p];
        for (std::size_t side = 0; side < 2; ++side) {
            const std::size_t node = 2 * p + side;
            const auto& fixed = side == 0 ? ps.op_a : ps.op_b;
            if (fixed)
                ops_[node] = *fixed;
            else if (m)
                ops_[node] = op_from_measurement(node, m->values[nearest_sensor_[node]]);
            else
                ops_[node] = prior_op();
        }
    }
    op_measurement_slot_ = m ? static_cast<std::int64_t>(m->slot) : -1;

    if (cfg_.policy.kind == PolicyKind::automatic) {
        const double area = std::numbers::pi * cfg_.field.region_radius * cfg_.field.region_radius;
        double mean_op = 0.0;
        for (double v : ops_) mean_op += v;
        mean_op /= static_cast<double>(ops_.size());
        effective_policy_.kind =
            select_policy_shape(static_cast<double>(nodes_) / area, mean_op, cfg_.policy.beta) ==
                    ShapeChoice::concave
                ? PolicyKind::random_concave
                : PolicyKind::random_linear;
    }
}

SlotRecord Engine::step_slot() {
    const std::uint64_t t = slot_;
    if (cfg_.field.density > 0.0 && t % redraw_slots_ == 0) redraw_field();
    if (cfg_.primary.enabled && t % decision_slots_ == 0)
        primary_on_ = primary_rng_.bernoulli(cfg_.primary.transmit_probability);
    if (!nearest_sensor_.empty() && t % sensing_slots_ == 0) measure_sensors();
    if (t % op_read_slots_ == 0) refresh_ops();

    SlotRecord rec;
    rec.slot = t;
    rec.op_measurement_slot = op_measurement_slot_;
    rec.pairs.resize(cfg_.pairs.size());

    // Transmit decisions. Index nodes_ is the primary transmitter.
    std::vector<double> power(nodes_ + 1, 0.0);
    auto decide = [&](std::size_t node) {
        const auto d = transmit_decision(ops_[node], cfg_.access_mode, effective_policy_, mac_rng_);
        power[node] = d.transmit ? d.power : 0.0;
    };
    for (std::size_t p = 0; p < cfg_.pairs.size(); ++p) {
        const std::size_t a = 2 * p;
        const std::size_t b = a + 1;
        if (cfg_.duplex.enabled) {
            decide(a);
            decide(b);
        } else if (cfg_.duplex.hd_scheme == HdScheme::simplex || t % 2 == 0) {
            decide(a);
        } else {
            decide(b);
        }
        auto& pr = rec.pairs[p];
        pr.op_a = ops_[a];
        pr.op_b = ops_[b];
        const bool ta = power[a] > 0.0;
        const bool tb = power[b] > 0.0;
        pr.mode = ta && tb ? DuplexMode::FD : ta ? DuplexMode::HD_A : tb ? DuplexMode::HD_B : DuplexMode::Silence;
        pr.energy = (power[a] + power[b]) * cfg_.timing.slot;
    }
    if (primary_on_) power[nodes_] = cfg_.primary.tx_power;

    // Faded gains toward each receiving secondary node; the diagonal carries
    // residual self-interference and is not faded.
    GainMatrix faded(nodes_ + 1, nodes_, 0.0);
    std::vector<double> external(nodes_, 0.0);
    for (std::size_t k = 0; k < nodes_; ++k) {
        if (!(power[partner(k)] > 0.0)) continue;
        for (std::size_t m = 0; m < nodes_; ++m)
            faded(m, k) = m == k ? gains_(k, k) : gains_(m, k) * sample_fading(cfg_.channel, fading_rng_);
        if (primary_on_) faded(nodes_, k) = primary_to_node_[k] * sample_fading(cfg_.channel, fading_rng_);
        const auto& ps = cfg_.pairs[k / 2];
        external[k] = (k % 2 == 0 ? ps.external_a : ps.external_b);
        if (!interferers_.empty()) external[k] += field_interference(positions_[k]);
    }

    for (std::size_t p = 0; p < cfg_.pairs.size(); ++p) {
        auto& pr = rec.pairs[p];
        for (std::size_t side = 0; side < 2; ++side) {
            const std::size_t tx = 2 * p + side;
            const std::size_t rx = partner(tx);
            if (!(power[tx] > 0.0)) continue;
            DirectionRecord& dr = side == 0 ? pr.ab : pr.ba;
            dr.active = true;
            dr.power = power[tx];
            dr.sinr = sinr(rx, tx, power, faded, external[rx], cfg_.channel);
            dr.success = dr.sinr > cfg_.link.access_threshold;
        }
    }

    if (primary_on_) {
        rec.primary_active = true;
        double interference = cfg_.channel.noise_power;
        for (std::size_t m = 0; m < nodes_; ++m)
            if (power[m] > 0.0)
                interference += power[m] * node_to_primary_rx_[m] * sample_fading(cfg_.channel, fading_rng_);
        if (!interferers_.empty()) interference += field_interference(cfg_.primary.rx_position);
        const double desired = cfg_.primary.tx_power * primary_desired_gain_ * sample_fading(cfg_.channel, fading_rng_);
        if (!(interference > 0.0))
            throw Error(ErrorCode::degenerate_network, "degenerate noiseless silent network");
        rec.primary_sinr = desired / interference;
        rec.primary_success = rec.primary_sinr > cfg_.primary.sinr_threshold;
    }

    ++slot_;
    return rec;
}

std::shared_ptr<const OpTable> resolve_op_table(const ScenarioConfig& cfg) {
    if (cfg.op_source.kind != OpSourceKind::table || cfg.all_ops_fixed()) return nullptr;
    if (!cfg.op_source.table_path.empty())
        return std::make_shared<const OpTable>(load_op_table(cfg.op_source.table_path));
    const std::uint64_t seed = derive_seed(cfg.run.seed, "op-table");
    const auto ig = default_interference_grid(cfg.field, cfg.channel, cfg.op_source.interference_points, seed);
    const auto dg = default_distance_grid(cfg.field, cfg.op_source.distance_points);
    return std::make_shared<const OpTable>(build_op_table(ig, dg, cfg.field, cfg.channel,
                                                          cfg.link.access_threshold,
                                                          cfg.op_source.desired_link_distance,
                                                          cfg.op_source.conditioning, seed));
}

RunResult run(const ScenarioConfig& cfg, std::shared_ptr<const OpTable> table) {
    cfg.validate();
    if (!table) table = resolve_op_table(cfg);
    Engine engine(cfg, table);
    RunResult out;
    out.log.reserve(cfg.run.slots);
    for (std::uint64_t s = 0; s < cfg.run.slots; ++s) out.log.push_back(engine.step_slot());

    const auto ctx = RateContext::from(cfg);
    out.metrics = aggregate_metrics(out.log, ctx);
    out.ci95 = metric_confidence(out.log, ctx);
    out.links = link_statistics(out.log, ctx);
    out.op_fallback_events = engine.op_fallback_events();
    out.fixed_op_override = cfg.any_op_fixed();
    out.truncation_fraction = truncation_fraction(cfg.field, cfg.channel);
    return out;
}

double latency_budget(const TimingConfig& timing) {
    const auto& d = timing.control_delays;
    // Summed in ms so the usual millisecond vectors land on exact values.
    const double ms = d.feedback * 1e3 + d.uplink * 1e3 + std::max(d.compute, timing.sensing_period) * 1e3 +
                      d.downlink * 1e3 + d.apply * 1e3;
    return ms / 1e3;
}

std::string policy_label(const ScenarioConfig& cfg) {
    if (cfg.access_mode != AccessMode::random_access) return to_string(cfg.access_mode);
    if (cfg.policy.kind == PolicyKind::deterministic)
        return "deterministic_" + format_double(cfg.policy.deterministic_threshold);
    return to_string(cfg.policy.kind);
}

}  // namespace opsim
