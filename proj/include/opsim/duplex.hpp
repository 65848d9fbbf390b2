#pragma once

#include <array>
#include <string_view>

#include "opsim/mac.hpp"
#include "opsim/rng.hpp"

namespace opsim {

enum class DuplexMode { FD = 0, HD_A = 1, HD_B = 2, Silence = 3 };
enum class Direction { a_to_b, b_to_a };

const char* to_string(DuplexMode m);

struct PairState {
    double op_a = 0.0;
    double op_b = 0.0;
    double si_residual = 0.01;  // chi: fraction of own power leaking into own receiver
    double link_gain_ab = 1.0;
    double link_gain_ba = 1.0;

    void validate() const;
};

// Indexed by DuplexMode.
using ModeDistribution = std::array<double, 4>;

ModeDistribution mode_probabilities(const PairState& pair, const MacPolicy& policy);

// Two independent Bernoulli flips, node A first.
DuplexMode sample_mode(const PairState& pair, const MacPolicy& policy, RandomStream& rng);

// SINR of one FD direction: the receiving node's own transmission leaks chi * P_rx.
double fd_sinr(const PairState& pair, Direction direction, double power_a, double power_b,
               double external_interference_at_rx, double noise);

struct RateModel {
    enum class Kind { shannon, threshold };
    Kind kind = Kind::threshold;
    double threshold = 1.0;  // linear SINR, threshold kind only

    // Spectral efficiency for one slot-direction at the given SINR.
    double rate(double sinr) const;
};

// FD sum rate over the rate of TDD-style HD with equal time shares.
double fd_vs_hd_gain(const PairState& pair, double tx_power, double external_interference,
                     double noise, const RateModel& rate_model);

}  // namespace opsim
