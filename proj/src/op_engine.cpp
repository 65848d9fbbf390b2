#include "opsim/op_engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>

#include <omp.h>

#include "opsim/error.hpp"

namespace opsim {

void OpQuery::validate() const {
    if (!(measured_interference >= 0.0))
        throw Error(ErrorCode::invalid_argument, "measured_interference must be non-negative");
    if (!(sensor_node_distance >= 0.0))
        throw Error(ErrorCode::invalid_argument, "sensor_node_distance must be non-negative");
    if (!(desired_link_distance > 0.0))
        throw Error(ErrorCode::invalid_argument, "desired_link_distance must be positive");
    if (!(access_threshold > 0.0))
        throw Error(ErrorCode::invalid_argument, "access_threshold must be positive");
}

void ConditioningConfig::validate() const {
    if (!(bin_relative_halfwidth > 0.0 && bin_relative_halfwidth < 1.0))
        throw Error(ErrorCode::invalid_argument, "conditioning epsilon must lie in (0, 1)");
    if (min_accepted_samples < 100)
        throw Error(ErrorCode::invalid_argument, "min_accepted_samples must be at least 100");
    if (max_total_samples < min_accepted_samples)
        throw Error(ErrorCode::invalid_argument, "max_total_samples must be >= min_accepted_samples");
}

OpEstimate ConditionedSamples::estimate(double access_threshold) const {
    OpEstimate e;
    e.accepted_samples = node_sir.size();
    e.requested_samples = drawn;
    if (node_sir.empty()) return e;
    const auto hits = std::count_if(node_sir.begin(), node_sir.end(),
                                    [access_threshold](double s) { return s > access_threshold; });
    const double n = static_cast<double>(node_sir.size());
    e.value = static_cast<double>(hits) / n;
    e.ci_halfwidth = 1.96 * std::sqrt(e.value * (1.0 - e.value) / n);
    return e;
}

namespace {

struct BatchResult {
    std::vector<std::pair<std::uint64_t, double>> accepted;  // (offset in batch, node SIR)
    std::uint64_t begin = 0;
    std::uint64_t end = 0;
};

BatchResult run_batch(const OpQuery& q, const FieldModel& field, const ChannelModel& channel,
                      const ConditioningConfig& cond, std::uint64_t seed, std::uint64_t batch) {
    BatchResult out;
    out.begin = batch * kRealizationBatch;
    out.end = std::min(out.begin + kRealizationBatch, cond.max_total_samples);

    RandomStream rng = RandomStream::derived(seed, "op-realization", batch);
    const double d = q.sensor_node_distance;
    const Point sensor{0.0, 0.0};
    const Point node{d, 0.0};
    // Cover region_radius around both observation points.
    FieldModel local = field;
    local.center = {d / 2.0, 0.0};
    local.region_radius = field.region_radius + d / 2.0;

    const double lo = q.measured_interference * (1.0 - cond.bin_relative_halfwidth);
    const double hi = q.measured_interference * (1.0 + cond.bin_relative_halfwidth);
    const double desired = field.tx_power * clamped_path_gain(q.desired_link_distance, channel);

    for (std::uint64_t k = 0; k < out.end - out.begin; ++k) {
        const auto pts = sample_ppp(local, rng);
        const double at_sensor = aggregate_interference(sensor, pts, channel, field, rng);
        if (at_sensor < lo || at_sensor > hi) continue;
        const double at_node = aggregate_interference(node, pts, channel, field, rng);
        const double h = rng.exponential();
        const double sir = at_node > 0.0 ? desired * h / at_node
                                         : std::numeric_limits<double>::infinity();
        out.accepted.emplace_back(k, sir);
    }
    return out;
}

// Appends a batch in realization order; returns true once min_accepted is reached.
bool merge_batch(const BatchResult& b, const ConditioningConfig& cond, ConditionedSamples& out) {
    for (const auto& [offset, sir] : b.accepted) {
        out.node_sir.push_back(sir);
        if (out.node_sir.size() == cond.min_accepted_samples) {
            out.drawn = b.begin + offset + 1;
            return true;
        }
    }
    out.drawn = b.end;
    return false;
}

}  // namespace

ConditionedSamples draw_conditioned_samples(const OpQuery& query, const FieldModel& field,
                                            const ChannelModel& channel,
                                            const ConditioningConfig& cond, std::uint64_t seed,
                                            Execution exec) {
    query.validate();
    field.validate();
    channel.validate();
    cond.validate();
    if (channel.fading != Fading::rayleigh)
        throw Error(ErrorCode::invalid_argument, "OP estimation requires Rayleigh fading");

    ConditionedSamples out;
    const std::uint64_t n_batches = (cond.max_total_samples + kRealizationBatch - 1) / kRealizationBatch;

    if (exec == Execution::serial) {
        for (std::uint64_t b = 0; b < n_batches; ++b)
            if (merge_batch(run_batch(query, field, channel, cond, seed, b), cond, out)) break;
        return out;
    }

    const std::uint64_t chunk = std::max<std::uint64_t>(4, 2 * static_cast<std::uint64_t>(omp_get_max_threads()));
    std::vector<BatchResult> results;
    for (std::uint64_t first = 0; first < n_batches; first += chunk) {
        const std::uint64_t count = std::min(chunk, n_batches - first);
        results.assign(count, {});
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i)
            results[i] = run_batch(query, field, channel, cond, seed, first + i);
        for (const auto& r : results)
            if (merge_batch(r, cond, out)) return out;
    }
    return out;
}

OpEstimate estimate_op(const OpQuery& query, const FieldModel& field, const ChannelModel& channel,
                       const ConditioningConfig& cond, RandomStream& rng, Execution exec) {
    const auto samples = draw_conditioned_samples(query, field, channel, cond, rng.next_u64(), exec);
    if (samples.node_sir.size() < cond.min_accepted_samples) {
        const double rate = samples.drawn ? static_cast<double>(samples.node_sir.size()) /
                                                static_cast<double>(samples.drawn)
                                          : 0.0;
        std::ostringstream msg;
        msg << "conditioning event too rare (acceptance rate " << rate << ")";
        throw ConditioningTooRare(rate, msg.str());
    }
    return samples.estimate(query.access_threshold);
}

double unconditional_coverage(double access_threshold, const FieldModel& field,
                              const ChannelModel& channel, double desired_link_distance) {
    const double a = channel.pathloss_exponent;
    if (!(a > 2.0)) throw Error(ErrorCode::infinite_mean_interference, "infinite mean interference");
    if (channel.fading != Fading::rayleigh)
        throw Error(ErrorCode::invalid_argument, "coverage oracle requires Rayleigh fading");
    const double delta = 2.0 / a;
    const double r = desired_link_distance;
    return std::exp(-field.density * std::numbers::pi * r * r * std::pow(access_threshold, delta) *
                    std::tgamma(1.0 + delta) * std::tgamma(1.0 - delta));
}

std::vector<std::pair<std::size_t, std::size_t>> OpTable::absent_cells() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < interference_grid.size(); ++i)
        for (std::size_t j = 0; j < distance_grid.size(); ++j)
            if (!at(i, j)) out.emplace_back(i, j);
    return out;
}

bool OpTable::matches(const FieldModel& field, const ChannelModel& channel, double access_threshold,
                      double desired_link_distance) const {
    return meta.field.density == field.density && meta.field.tx_power == field.tx_power &&
           meta.field.region_radius == field.region_radius && meta.channel == channel &&
           meta.access_threshold == access_threshold &&
           meta.desired_link_distance == desired_link_distance;
}

namespace {

void check_ascending(std::span<const double> grid, const char* name, double floor, bool strict_floor) {
    if (grid.empty()) throw Error(ErrorCode::invalid_argument, std::string(name) + " is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool bad_floor = strict_floor ? !(grid[i] > floor) : !(grid[i] >= floor);
        if (bad_floor || !std::isfinite(grid[i]))
            throw Error(ErrorCode::invalid_argument, std::string(name) + " has an invalid entry");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw Error(ErrorCode::invalid_argument, std::string(name) + " must be strictly ascending");
    }
}

}  // namespace

void OpTable::validate() const {
    check_ascending(interference_grid, "interference_grid", 0.0, true);
    check_ascending(distance_grid, "distance_grid", 0.0, false);
    const std::size_t n = interference_grid.size() * distance_grid.size();
    if (values.size() != n || ci_halfwidths.size() != n)
        throw Error(ErrorCode::invalid_argument, "table value matrix does not match grid dimensions");
    for (const auto& v : values)
        if (v && !(*v >= 0.0 && *v <= 1.0))
            throw Error(ErrorCode::invalid_argument, "table value outside [0, 1]");
}

std::vector<OpTable> build_op_tables(std::span<const double> interference_grid,
                                     std::span<const double> distance_grid,
                                     std::span<const double> access_thresholds,
                                     const FieldModel& field, const ChannelModel& channel,
                                     double desired_link_distance, const ConditioningConfig& cond,
                                     std::uint64_t seed, Execution exec) {
    check_ascending(interference_grid, "interference_grid", 0.0, true);
    check_ascending(distance_grid, "distance_grid", 0.0, false);
    if (access_thresholds.empty())
        throw Error(ErrorCode::invalid_argument, "at least one access threshold is required");
    for (double t : access_thresholds)
        if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "access_threshold must be positive");

    const std::size_t n_i = interference_grid.size();
    const std::size_t n_d = distance_grid.size();
    const std::size_t n_cells = n_i * n_d;
    const std::size_t n_t = access_thresholds.size();

    std::vector<OpTable> tables(n_t);
    for (std::size_t k = 0; k < n_t; ++k) {
        auto& t = tables[k];
        t.interference_grid.assign(interference_grid.begin(), interference_grid.end());
        t.distance_grid.assign(distance_grid.begin(), distance_grid.end());
        t.values.assign(n_cells, std::nullopt);
        t.ci_halfwidths.assign(n_cells, 0.0);
        t.meta = {field, channel, access_thresholds[k], desired_link_distance, cond, seed};
    }

    auto fill_cell = [&](std::size_t cell) {
        OpQuery q;
        q.measured_interference = interference_grid[cell / n_d];
        q.sensor_node_distance = distance_grid[cell % n_d];
        q.desired_link_distance = desired_link_distance;
        q.access_threshold = access_thresholds[0];
        const auto samples = draw_conditioned_samples(q, field, channel, cond,
                                                      derive_seed(seed, "op-table-cell", cell),
                                                      Execution::serial);
        if (samples.node_sir.size() < cond.min_accepted_samples) return;
        for (std::size_t k = 0; k < n_t; ++k) {
            const auto e = samples.estimate(access_thresholds[k]);
            tables[k].values[cell] = e.value;
            tables[k].ci_halfwidths[cell] = e.ci_halfwidth;
        }
    };

    if (exec == Execution::serial) {
        for (std::size_t c = 0; c < n_cells; ++c) fill_cell(c);
    } else {
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_cells); ++c) {
            try {
                fill_cell(static_cast<std::size_t>(c));
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }

    const std::size_t absent = tables[0].absent_cells().size();
    if (2 * absent > n_cells) {
        std::ostringstream msg;
        msg << "grid mismatched to field statistics (" << absent << " of " << n_cells
            << " cells absent)";
        throw Error(ErrorCode::grid_mismatch, msg.str());
    }
    return tables;
}

OpTable build_op_table(std::span<const double> interference_grid,
                       std::span<const double> distance_grid, const FieldModel& field,
                       const ChannelModel& channel, double access_threshold,
                       double desired_link_distance, const ConditioningConfig& cond,
                       std::uint64_t seed, Execution exec) {
    const double thetas[] = {access_threshold};
    return std::move(build_op_tables(interference_grid, distance_grid, thetas, field, channel,
                                     desired_link_distance, cond, seed, exec)
                         .front());
}

namespace {

// Locates x within the grid; returns the lower cell index and the fractional
// position toward the next one. `transform` maps to the interpolation axis.
template <typename F>
std::pair<std::size_t, double> bracket(const std::vector<double>& grid, double x, F transform) {
    if (grid.size() == 1) return {0, 0.0};
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    i = std::min(i, grid.size() - 2);
    const double lo = transform(grid[i]);
    const double hi = transform(grid[i + 1]);
    return {i, (transform(x) - lo) / (hi - lo)};
}

}  // namespace

double lookup_op(const OpTable& table, double measured_interference, double sensor_node_distance) {
    const auto& ig = table.interference_grid;
    const auto& dg = table.distance_grid;
    if (ig.empty() || dg.empty()) throw Error(ErrorCode::out_of_range, "out of table range");
    if (!(measured_interference >= ig.front() && measured_interference <= ig.back()) ||
        !(sensor_node_distance >= dg.front() && sensor_node_distance <= dg.back()))
        throw Error(ErrorCode::out_of_range, "out of table range");

    const auto [i, t] = bracket(ig, measured_interference, [](double v) { return std::log(v); });
    const auto [j, u] = bracket(dg, sensor_node_distance, [](double v) { return v; });

    const std::size_t i1 = std::min(i + 1, ig.size() - 1);
    const std::size_t j1 = std::min(j + 1, dg.size() - 1);
    const struct {
        std::size_t i, j;
        double w;
    } corners[] = {{i, j, (1 - t) * (1 - u)}, {i1, j, t * (1 - u)}, {i, j1, (1 - t) * u}, {i1, j1, t * u}};

    double acc = 0.0;
    for (const auto& c : corners) {
        if (c.w == 0.0) continue;
        const auto v = table.at(c.i, c.j);
        if (!v) throw Error(ErrorCode::missing_cell, "missing cell");
        acc += c.w * *v;
    }
    return std::clamp(acc, 0.0, 1.0);
}

std::vector<double> default_interference_grid(const FieldModel& field, const ChannelModel& channel,
                                              std::size_t points, std::uint64_t seed,
                                              std::size_t realizations) {
    if (points == 0) throw Error(ErrorCode::invalid_argument, "grid needs at least one point");
    if (!(field.density > 0.0))
        throw Error(ErrorCode::invalid_argument, "default grids need a positive field density");
    RandomStream rng = RandomStream::derived(seed, "op-grid");
    FieldModel local = field;
    local.center = {};
    std::vector<double> samples(realizations);
    for (auto& s : samples) {
        const auto pts = sample_ppp(local, rng);
        s = aggregate_interference({}, pts, channel, field, rng);
    }
    std::sort(samples.begin(), samples.end());
    const auto quantile = [&](double q) {
        return samples[static_cast<std::size_t>(q * static_cast<double>(samples.size() - 1))];
    };
    const double lo = quantile(0.01);
    const double hi = quantile(0.99);
    if (!(lo > 0.0) || !(hi > lo))
        throw Error(ErrorCode::grid_mismatch, "sensor interference distribution is degenerate");
    if (points == 1) return {std::sqrt(lo * hi)};
    std::vector<double> grid(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) grid[k] = lo * std::exp(step * static_cast<double>(k));
    grid.back() = hi;
    return grid;
}

std::vector<double> default_distance_grid(const FieldModel& field, std::size_t points) {
    if (points == 0) throw Error(ErrorCode::invalid_argument, "grid needs at least one point");
    if (!(field.density > 0.0))
        throw Error(ErrorCode::invalid_argument, "default grids need a positive field density");
    if (points == 1) return {0.0};
    const double span = 4.0 / std::sqrt(field.density);
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k)
        grid[k] = span * static_cast<double>(k) / static_cast<double>(points - 1);
    return grid;
}

}  // namespace opsim
