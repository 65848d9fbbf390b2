#include "opsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "opsim/error.hpp"

namespace opsim {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

const char* to_string(Fading f) { return f == Fading::none ? "none" : "rayleigh"; }

Fading parse_fading(std::string_view name) {
    if (name == "none") return Fading::none;
    if (name == "rayleigh") return Fading::rayleigh;
    throw Error(ErrorCode::invalid_argument, "unknown fading kind '" + std::string(name) + "'");
}

void ChannelModel::validate() const {
    if (!(pathloss_exponent > 2.0))
        throw Error(ErrorCode::invalid_argument, "pathloss_exponent must exceed 2");
    if (!(reference_gain > 0.0))
        throw Error(ErrorCode::invalid_argument, "reference_gain must be positive");
    if (!(noise_power >= 0.0))
        throw Error(ErrorCode::invalid_argument, "noise_power must be non-negative");
}

void FieldModel::validate() const {
    if (!(density >= 0.0)) throw Error(ErrorCode::invalid_argument, "field density must be non-negative");
    if (!(region_radius > 0.0)) throw Error(ErrorCode::invalid_argument, "region_radius must be positive");
    if (!(tx_power >= 0.0)) throw Error(ErrorCode::invalid_argument, "field tx_power must be non-negative");
}

GainMatrix::GainMatrix(std::size_t n_tx, std::size_t n_rx, double fill)
    : n_tx_(n_tx), n_rx_(n_rx), g_(n_tx * n_rx, fill) {}

void GainMatrix::validate() const {
    for (double g : g_)
        if (!(g > 0.0)) throw Error(ErrorCode::invalid_argument, "gain matrix entries must be positive");
}

std::vector<Point> sample_ppp(const FieldModel& field, RandomStream& rng) {
    const double area = std::numbers::pi * field.region_radius * field.region_radius;
    const std::uint64_t n = rng.poisson(field.density * area);
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double r = field.region_radius * std::sqrt(rng.uniform());
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        pts.push_back({field.center.x + r * std::cos(phi), field.center.y + r * std::sin(phi)});
    }
    return pts;
}

double path_gain(double d, const ChannelModel& channel) {
    if (!(d > 0.0)) throw Error(ErrorCode::degenerate_colocation, "degenerate co-location");
    if (channel.pathloss_exponent == 4.0) {
        const double d2 = d * d;
        return channel.reference_gain / (d2 * d2);
    }
    return channel.reference_gain * std::pow(d, -channel.pathloss_exponent);
}

double clamped_path_gain(double d, const ChannelModel& channel) {
    return path_gain(d < kMinLinkDistance ? kMinLinkDistance : d, channel);
}

double sample_fading(const ChannelModel& channel, RandomStream& rng) {
    return channel.fading == Fading::none ? 1.0 : rng.exponential();
}

double aggregate_interference(Point location, std::span<const Point> interferers,
                              const ChannelModel& channel, const FieldModel& field,
                              RandomStream& rng) {
    double total = 0.0;
    for (const Point& p : interferers)
        total += field.tx_power * clamped_path_gain(distance(location, p), channel) *
                 sample_fading(channel, rng);
    return total;
}

double sinr(std::size_t rx, std::size_t desired_tx, std::span<const double> tx_powers,
            const GainMatrix& gains, double external_interference, const ChannelModel& channel) {
    if (desired_tx >= tx_powers.size() || !(tx_powers[desired_tx] > 0.0))
        throw Error(ErrorCode::invalid_argument, "desired transmitter is not active");
    double denom = external_interference + channel.noise_power;
    for (std::size_t j = 0; j < tx_powers.size(); ++j) {
        if (j == desired_tx || !(tx_powers[j] > 0.0)) continue;
        denom += tx_powers[j] * gains(j, rx);
    }
    if (!(denom > 0.0))
        throw Error(ErrorCode::degenerate_network, "degenerate noiseless silent network");
    return tx_powers[desired_tx] * gains(desired_tx, rx) / denom;
}

double truncation_fraction(const FieldModel& field, const ChannelModel& channel) {
    const double a = channel.pathloss_exponent;
    const double r0 = kMinLinkDistance;
    const double R = std::max(field.region_radius, r0);
    // Radial integrals of r * g(r) / reference_gain over [0, r0], [r0, R], [R, inf).
    const double inner = std::pow(r0, 2.0 - a) / 2.0;
    const double middle = (std::pow(r0, 2.0 - a) - std::pow(R, 2.0 - a)) / (a - 2.0);
    const double tail = std::pow(R, 2.0 - a) / (a - 2.0);
    return tail / (inner + middle + tail);
}

}  // namespace opsim
