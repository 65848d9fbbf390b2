#include "opsim/duplex.hpp"

#include <cmath>

#include "opsim/error.hpp"

namespace opsim {

const char* to_string(DuplexMode m) {
    switch (m) {
        case DuplexMode::FD: return "FD";
        case DuplexMode::HD_A: return "HD_A";
        case DuplexMode::HD_B: return "HD_B";
        case DuplexMode::Silence: return "Silence";
    }
    return "?";
}

void PairState::validate() const {
    if (!(op_a >= 0.0 && op_a <= 1.0) || !(op_b >= 0.0 && op_b <= 1.0))
        throw Error(ErrorCode::invalid_probability, "invalid probability");
    if (!(si_residual >= 0.0 && si_residual <= 1.0))
        throw Error(ErrorCode::invalid_argument, "si_residual must lie in [0, 1]");
    if (!(link_gain_ab > 0.0) || !(link_gain_ba > 0.0))
        throw Error(ErrorCode::invalid_argument, "pair link gains must be positive");
}

ModeDistribution mode_probabilities(const PairState& pair, const MacPolicy& policy) {
    pair.validate();
    const double pa = access_probability(pair.op_a, policy);
    const double pb = access_probability(pair.op_b, policy);
    ModeDistribution d{};
    d[static_cast<int>(DuplexMode::FD)] = pa * pb;
    d[static_cast<int>(DuplexMode::HD_A)] = pa * (1.0 - pb);
    d[static_cast<int>(DuplexMode::HD_B)] = (1.0 - pa) * pb;
    d[static_cast<int>(DuplexMode::Silence)] = (1.0 - pa) * (1.0 - pb);
    return d;
}

DuplexMode sample_mode(const PairState& pair, const MacPolicy& policy, RandomStream& rng) {
    pair.validate();
    const bool a = rng.bernoulli(access_probability(pair.op_a, policy));
    const bool b = rng.bernoulli(access_probability(pair.op_b, policy));
    if (a && b) return DuplexMode::FD;
    if (a) return DuplexMode::HD_A;
    if (b) return DuplexMode::HD_B;
    return DuplexMode::Silence;
}

double fd_sinr(const PairState& pair, Direction direction, double power_a, double power_b,
               double external_interference_at_rx, double noise) {
    const bool ab = direction == Direction::a_to_b;
    const double p_tx = ab ? power_a : power_b;
    const double p_rx = ab ? power_b : power_a;
    const double g = ab ? pair.link_gain_ab : pair.link_gain_ba;
    const double denom = pair.si_residual * p_rx + external_interference_at_rx + noise;
    if (!(denom > 0.0))
        throw Error(ErrorCode::degenerate_network, "degenerate noiseless silent network");
    return p_tx * g / denom;
}

double RateModel::rate(double sinr) const {
    if (kind == Kind::shannon) return std::log2(1.0 + sinr);
    return sinr > threshold ? std::log2(1.0 + threshold) : 0.0;
}

double fd_vs_hd_gain(const PairState& pair, double tx_power, double external_interference,
                     double noise, const RateModel& rate_model) {
    const double fd_sum =
        rate_model.rate(fd_sinr(pair, Direction::a_to_b, tx_power, tx_power, external_interference, noise)) +
        rate_model.rate(fd_sinr(pair, Direction::b_to_a, tx_power, tx_power, external_interference, noise));

    PairState hd = pair;
    hd.si_residual = 0.0;
    const double hd_rate =
        0.5 * rate_model.rate(fd_sinr(hd, Direction::a_to_b, tx_power, tx_power, external_interference, noise)) +
        0.5 * rate_model.rate(fd_sinr(hd, Direction::b_to_a, tx_power, tx_power, external_interference, noise));
    if (!(hd_rate > 0.0))
        throw Error(ErrorCode::degenerate_network, "half-duplex baseline rate is zero");
    return fd_sum / hd_rate;
}

}  // namespace opsim
