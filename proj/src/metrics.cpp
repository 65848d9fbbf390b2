#include <algorithm>
#include <cmath>

#include "opsim/simulator.hpp"

namespace opsim {

namespace {

constexpr MetricField kFields[] = {
    {"system_throughput", &RunMetrics::system_throughput},
    {"secondary_throughput", &RunMetrics::secondary_throughput},
    {"primary_throughput", &RunMetrics::primary_throughput},
    {"primary_success_rate", &RunMetrics::primary_success_rate},
    {"secondary_success_rate", &RunMetrics::secondary_success_rate},
    {"mean_energy_per_node", &RunMetrics::mean_energy_per_node},
    {"fd_fraction", &RunMetrics::fd_fraction},
    {"hd_fraction", &RunMetrics::hd_fraction},
    {"silence_fraction", &RunMetrics::silence_fraction},
    {"jain_fairness", &RunMetrics::jain_fairness},
};

const DirectionRecord& direction_of(const PairRecord& p, Direction d) {
    return d == Direction::a_to_b ? p.ab : p.ba;
}

// Raw sums over a span of slots.
struct Tally {
    std::uint64_t slots = 0;
    double secondary_rate = 0.0;  // spectral efficiency summed over slots
    double primary_rate = 0.0;
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    std::uint64_t primary_attempts = 0;
    std::uint64_t primary_successes = 0;
    double energy = 0.0;
    std::uint64_t pair_slots = 0;
    std::uint64_t fd = 0;
    std::uint64_t hd = 0;
    std::vector<double> link_rate;

    Tally(std::span<const SlotRecord> records, const RateContext& ctx) : link_rate(ctx.links.size(), 0.0) {
        const RateModel secondary{ctx.rate_model, ctx.access_threshold};
        const RateModel primary{ctx.rate_model, ctx.primary_threshold};
        slots = records.size();
        for (const auto& rec : records) {
            for (const auto& p : rec.pairs) {
                for (const auto* d : {&p.ab, &p.ba}) {
                    if (!d->active) continue;
                    ++attempts;
                    successes += d->success ? 1 : 0;
                    secondary_rate += secondary.rate(d->sinr);
                }
                energy += p.energy;
                ++pair_slots;
                if (p.mode == DuplexMode::FD) ++fd;
                if (p.mode == DuplexMode::HD_A || p.mode == DuplexMode::HD_B) ++hd;
            }
            for (std::size_t l = 0; l < ctx.links.size(); ++l) {
                const auto& d = direction_of(rec.pairs[ctx.links[l].first], ctx.links[l].second);
                if (d.active) link_rate[l] += secondary.rate(d.sinr);
            }
            if (rec.primary_active) {
                ++primary_attempts;
                primary_successes += rec.primary_success ? 1 : 0;
                primary_rate += primary.rate(rec.primary_sinr);
            }
        }
    }

    RunMetrics metrics(const RateContext& ctx) const {
        RunMetrics m;
        if (slots == 0) return m;
        const double n = static_cast<double>(slots);
        const double scale = ctx.bandwidth_hz * ctx.overhead.usable();
        m.secondary_throughput = secondary_rate / n * scale;
        m.primary_throughput = primary_rate / n * scale;
        m.system_throughput = m.primary_throughput + m.secondary_throughput;
        m.secondary_success_rate = attempts ? static_cast<double>(successes) / static_cast<double>(attempts) : 0.0;
        m.primary_success_rate =
            primary_attempts ? static_cast<double>(primary_successes) / static_cast<double>(primary_attempts) : 0.0;
        if (ctx.transmitting_nodes > 0)
            m.mean_energy_per_node = energy / (static_cast<double>(ctx.transmitting_nodes) * n * ctx.slot);
        if (pair_slots > 0) {
            const double ps = static_cast<double>(pair_slots);
            m.fd_fraction = static_cast<double>(fd) / ps;
            m.hd_fraction = static_cast<double>(hd) / ps;
            m.silence_fraction = 1.0 - (m.fd_fraction + m.hd_fraction);
        }
        double sum = 0.0;
        double sum_sq = 0.0;
        for (double x : link_rate) {
            sum += x;
            sum_sq += x * x;
        }
        m.jain_fairness = sum_sq > 0.0 ? sum * sum / (static_cast<double>(link_rate.size()) * sum_sq) : 1.0;
        return m;
    }
};

}  // namespace

std::span<const MetricField> metric_fields() { return kFields; }

RateContext RateContext::from(const ScenarioConfig& cfg) {
    RateContext ctx;
    ctx.rate_model = cfg.duplex.rate_model;
    ctx.access_threshold = cfg.link.access_threshold;
    ctx.primary_threshold = cfg.primary.sinr_threshold;
    ctx.bandwidth_hz = cfg.link.bandwidth_hz;
    ctx.overhead = cfg.overhead;
    ctx.slot = cfg.timing.slot;
    const bool simplex = !cfg.duplex.enabled && cfg.duplex.hd_scheme == HdScheme::simplex;
    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
        ctx.links.emplace_back(p, Direction::a_to_b);
        if (!simplex) ctx.links.emplace_back(p, Direction::b_to_a);
    }
    ctx.transmitting_nodes = ctx.links.size();
    return ctx;
}

Throughput throughput(std::span<const SlotRecord> records, const RateContext& ctx) {
    const auto m = Tally(records, ctx).metrics(ctx);
    return {m.system_throughput, m.secondary_throughput, m.primary_throughput};
}

RunMetrics aggregate_metrics(std::span<const SlotRecord> records, const RateContext& ctx) {
    return Tally(records, ctx).metrics(ctx);
}

RunMetrics metric_confidence(std::span<const SlotRecord> records, const RateContext& ctx,
                             std::size_t batches) {
    RunMetrics ci;
    const std::size_t n = records.size();
    const std::size_t b = std::min(batches, n);
    if (b < 2) return ci;

    std::vector<Tally> tallies;
    tallies.reserve(b);
    for (std::size_t k = 0; k < b; ++k) {
        const std::size_t lo = k * n / b;
        const std::size_t hi = (k + 1) * n / b;
        tallies.emplace_back(records.subspan(lo, hi - lo), ctx);
    }

    for (const auto& f : metric_fields()) {
        std::vector<double> xs;
        for (const auto& t : tallies) {
            // Rates are undefined in batches without attempts.
            if (f.member == &RunMetrics::secondary_success_rate && t.attempts == 0) continue;
            if (f.member == &RunMetrics::primary_success_rate && t.primary_attempts == 0) continue;
            xs.push_back(t.metrics(ctx).*f.member);
        }
        if (xs.size() < 2) continue;
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(xs.size() - 1);
        ci.*f.member = 1.96 * std::sqrt(var / static_cast<double>(xs.size()));
    }
    return ci;
}

std::vector<LinkStats> link_statistics(std::span<const SlotRecord> records, const RateContext& ctx) {
    const RateModel secondary{ctx.rate_model, ctx.access_threshold};
    const double scale = ctx.bandwidth_hz * ctx.overhead.usable();
    std::vector<LinkStats> out;
    for (const auto& [pair, dir] : ctx.links) {
        LinkStats s;
        s.pair = pair;
        s.direction = dir;
        double sinr_sum = 0.0;
        double rate_sum = 0.0;
        for (const auto& rec : records) {
            const auto& d = direction_of(rec.pairs[pair], dir);
            if (!d.active) continue;
            ++s.attempts;
            s.successes += d.success ? 1 : 0;
            sinr_sum += d.sinr;
            rate_sum += secondary.rate(d.sinr);
        }
        if (!records.empty()) {
            const double n = static_cast<double>(records.size());
            s.mean_sinr_unconditional = sinr_sum / n;
            s.throughput = rate_sum / n * scale;
        }
        if (s.attempts > 0) s.mean_sinr_conditional = sinr_sum / static_cast<double>(s.attempts);
        out.push_back(s);
    }
    return out;
}

}  // namespace opsim
