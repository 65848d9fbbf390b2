#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "opsim/geometry.hpp"

namespace opsim {

enum class Execution { serial, parallel };

struct OpQuery {
    double measured_interference = 0.0;  // I at the nearest sensor, W
    double sensor_node_distance = 0.0;   // d, m
    double desired_link_distance = 10.0; // r, m
    double access_threshold = 1.0;       // theta, linear SIR

    void validate() const;
};

struct OpEstimate {
    double value = 0.0;
    double ci_halfwidth = 0.0;
    std::uint64_t accepted_samples = 0;
    std::uint64_t requested_samples = 0;

    bool operator==(const OpEstimate&) const = default;
};

struct ConditioningConfig {
    double bin_relative_halfwidth = 0.1;  // epsilon
    std::uint64_t min_accepted_samples = 500;
    std::uint64_t max_total_samples = 200000;

    void validate() const;
    bool operator==(const ConditioningConfig&) const = default;
};

// Node SIR values from field realizations whose sensor interference fell in
// the conditioning bin. Evaluating several thresholds on one sample set gives
// common-random-number estimates.
struct ConditionedSamples {
    std::vector<double> node_sir;
    std::uint64_t drawn = 0;

    OpEstimate estimate(double access_threshold) const;
};

// Realizations are drawn in fixed-size batches, each on its own stream derived
// from `seed`, so serial and parallel execution produce identical samples.
inline constexpr std::uint64_t kRealizationBatch = 512;

ConditionedSamples draw_conditioned_samples(const OpQuery& query, const FieldModel& field,
                                            const ChannelModel& channel,
                                            const ConditioningConfig& cond, std::uint64_t seed,
                                            Execution exec = Execution::parallel);

OpEstimate estimate_op(const OpQuery& query, const FieldModel& field, const ChannelModel& channel,
                       const ConditioningConfig& cond, RandomStream& rng,
                       Execution exec = Execution::parallel);

// Poisson-field Rayleigh coverage: the d -> infinity limit of the conditional OP.
double unconditional_coverage(double access_threshold, const FieldModel& field,
                              const ChannelModel& channel, double desired_link_distance);

struct OpTableMeta {
    FieldModel field;
    ChannelModel channel;
    double access_threshold = 1.0;
    double desired_link_distance = 10.0;
    ConditioningConfig conditioning;
    std::uint64_t seed = 0;

    bool operator==(const OpTableMeta&) const = default;
};

struct OpTable {
    static constexpr int kFormatVersion = 1;

    std::vector<double> interference_grid;
    std::vector<double> distance_grid;
    // Row-major [interference index][distance index]; nullopt marks an absent cell.
    std::vector<std::optional<double>> values;
    std::vector<double> ci_halfwidths;
    OpTableMeta meta;

    std::size_t index(std::size_t i, std::size_t j) const { return i * distance_grid.size() + j; }
    std::optional<double> at(std::size_t i, std::size_t j) const { return values[index(i, j)]; }
    std::vector<std::pair<std::size_t, std::size_t>> absent_cells() const;

    // True when the table was built for the same field statistics, channel,
    // threshold and link distance (the field center is irrelevant).
    bool matches(const FieldModel& field, const ChannelModel& channel, double access_threshold,
                 double desired_link_distance) const;

    void validate() const;
    bool operator==(const OpTable&) const = default;
};

// One table per threshold, all sharing the same conditioned samples per cell.
std::vector<OpTable> build_op_tables(std::span<const double> interference_grid,
                                     std::span<const double> distance_grid,
                                     std::span<const double> access_thresholds,
                                     const FieldModel& field, const ChannelModel& channel,
                                     double desired_link_distance, const ConditioningConfig& cond,
                                     std::uint64_t seed, Execution exec = Execution::parallel);

OpTable build_op_table(std::span<const double> interference_grid,
                       std::span<const double> distance_grid, const FieldModel& field,
                       const ChannelModel& channel, double access_threshold,
                       double desired_link_distance, const ConditioningConfig& cond,
                       std::uint64_t seed, Execution exec = Execution::parallel);

double lookup_op(const OpTable& table, double measured_interference, double sensor_node_distance);

// Log-spaced grid over the 1st..99th percentile of unconditioned sensor interference.
std::vector<double> default_interference_grid(const FieldModel& field, const ChannelModel& channel,
                                              std::size_t points, std::uint64_t seed,
                                              std::size_t realizations = 20000);

// Linear grid on [0, 4 / sqrt(density)].
std::vector<double> default_distance_grid(const FieldModel& field, std::size_t points);

void save_op_table(const OpTable& table, const std::filesystem::path& path);
OpTable load_op_table(const std::filesystem::path& path);

}  // namespace opsim
