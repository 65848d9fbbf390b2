#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "opsim/rng.hpp"

namespace opsim {

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

enum class Fading { none, rayleigh };

const char* to_string(Fading f);
Fading parse_fading(std::string_view name);

// Links shorter than this are treated as this long before the path law is applied.
inline constexpr double kMinLinkDistance = 0.1;

struct ChannelModel {
    double pathloss_exponent = 4.0;
    double reference_gain = 1.0;
    Fading fading = Fading::rayleigh;
    double noise_power = 0.0;

    void validate() const;
    bool operator==(const ChannelModel&) const = default;
};

// Homogeneous Poisson interferer field on a disk.
struct FieldModel {
    double density = 0.0;  // interferers per m^2
    double tx_power = 1.0;
    double region_radius = 500.0;
    Point center{};

    void validate() const;
    bool operator==(const FieldModel&) const = default;
};

// Dense tx x rx matrix of linear power gains.
class GainMatrix {
public:
    GainMatrix() = default;
    GainMatrix(std::size_t n_tx, std::size_t n_rx, double fill = 1.0);

    std::size_t tx_count() const { return n_tx_; }
    std::size_t rx_count() const { return n_rx_; }

    double operator()(std::size_t tx, std::size_t rx) const { return g_[tx * n_rx_ + rx]; }
    double& operator()(std::size_t tx, std::size_t rx) { return g_[tx * n_rx_ + rx]; }

    // Throws unless every entry is strictly positive.
    void validate() const;

    bool operator==(const GainMatrix&) const = default;

private:
    std::size_t n_tx_ = 0;
    std::size_t n_rx_ = 0;
    std::vector<double> g_;
};

std::vector<Point> sample_ppp(const FieldModel& field, RandomStream& rng);

// reference_gain * distance^-alpha. Throws degenerate_colocation for distance <= 0.
double path_gain(double distance, const ChannelModel& channel);

// path_gain after applying the kMinLinkDistance clamp.
double clamped_path_gain(double distance, const ChannelModel& channel);

double sample_fading(const ChannelModel& channel, RandomStream& rng);

// Sum of tx_power * gain * fading over all interferers, one fading draw per link.
double aggregate_interference(Point location, std::span<const Point> interferers,
                              const ChannelModel& channel, const FieldModel& field,
                              RandomStream& rng);

// Desired over (other active transmitters + external + noise). A transmitter is
// active when its entry in tx_powers is positive.
double sinr(std::size_t rx, std::size_t desired_tx, std::span<const double> tx_powers,
            const GainMatrix& gains, double external_interference, const ChannelModel& channel);

// Expected interference beyond region_radius as a fraction of the total mean
// interference of the untruncated field (with the near-field clamp applied).
double truncation_fraction(const FieldModel& field, const ChannelModel& channel);

}  // namespace opsim
