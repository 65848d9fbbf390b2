#pragma once

#include <string_view>

#include "opsim/rng.hpp"

namespace opsim {

enum class PolicyKind { random_linear, random_concave, deterministic, automatic };
enum class ShapeChoice { concave, linear };
enum class AccessMode { max_power, reduced_power, random_access };

const char* to_string(PolicyKind k);
const char* to_string(AccessMode m);
PolicyKind parse_policy_kind(std::string_view name);
AccessMode parse_access_mode(std::string_view name);

struct MacPolicy {
    PolicyKind kind = PolicyKind::random_linear;
    double concave_curvature = 9.0;     // c, random_concave only
    double deterministic_threshold = 0.5;  // tau, deterministic only
    double beta = 0.005;                // shape-selection threshold
    double max_power = 1.0;             // W

    void validate() const;
    bool operator==(const MacPolicy&) const = default;
};

struct TxDecision {
    bool transmit = false;
    double power = 0.0;

    bool operator==(const TxDecision&) const = default;
};

// Maps an OP value to a transmission probability. `automatic` is resolved by
// the caller through select_policy_shape and behaves as linear here.
double access_probability(double op_value, const MacPolicy& policy);

// Concave when node_density * mean_op < beta, linear otherwise.
ShapeChoice select_policy_shape(double node_density, double mean_op, double beta);

TxDecision transmit_decision(double op_value, AccessMode mode, const MacPolicy& policy,
                             RandomStream& rng);

double expected_energy(double op_value, AccessMode mode, const MacPolicy& policy,
                       double slot_duration);

}  // namespace opsim
