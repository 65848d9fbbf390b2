#include "opsim/mac.hpp"

#include <cmath>
#include <string>

#include "opsim/error.hpp"

namespace opsim {

const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::random_linear: return "random_linear";
        case PolicyKind::random_concave: return "random_concave";
        case PolicyKind::deterministic: return "deterministic";
        case PolicyKind::automatic: return "auto";
    }
    return "?";
}

const char* to_string(AccessMode m) {
    switch (m) {
        case AccessMode::max_power: return "max_power";
        case AccessMode::reduced_power: return "reduced_power";
        case AccessMode::random_access: return "random_access";
    }
    return "?";
}

PolicyKind parse_policy_kind(std::string_view name) {
    if (name == "random_linear" || name == "linear") return PolicyKind::random_linear;
    if (name == "random_concave" || name == "concave") return PolicyKind::random_concave;
    if (name == "deterministic") return PolicyKind::deterministic;
    if (name == "auto") return PolicyKind::automatic;
    throw Error(ErrorCode::invalid_argument, "unknown policy kind '" + std::string(name) + "'");
}

AccessMode parse_access_mode(std::string_view name) {
    if (name == "max_power") return AccessMode::max_power;
    if (name == "reduced_power") return AccessMode::reduced_power;
    if (name == "random_access") return AccessMode::random_access;
    throw Error(ErrorCode::invalid_argument, "unknown access mode '" + std::string(name) + "'");
}

void MacPolicy::validate() const {
    if (!(concave_curvature > 0.0))
        throw Error(ErrorCode::invalid_argument, "concave curvature must be positive");
    if (!(deterministic_threshold >= 0.0 && deterministic_threshold <= 1.0))
        throw Error(ErrorCode::invalid_argument, "deterministic threshold must lie in [0, 1]");
    if (!(beta > 0.0)) throw Error(ErrorCode::invalid_argument, "beta must be positive");
    if (!(max_power > 0.0)) throw Error(ErrorCode::invalid_argument, "max_power must be positive");
}

namespace {

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::invalid_probability, "invalid probability");
}

}  // namespace

double access_probability(double op_value, const MacPolicy& policy) {
    check_probability(op_value);
    switch (policy.kind) {
        case PolicyKind::random_concave: {
            const double c = policy.concave_curvature;
            return std::log1p(c * op_value) / std::log1p(c);
        }
        case PolicyKind::deterministic:
            return op_value >= policy.deterministic_threshold ? 1.0 : 0.0;
        case PolicyKind::random_linear:
        case PolicyKind::automatic:
            return op_value;
    }
    return op_value;
}

ShapeChoice select_policy_shape(double node_density, double mean_op, double beta) {
    return node_density * mean_op < beta ? ShapeChoice::concave : ShapeChoice::linear;
}

TxDecision transmit_decision(double op_value, AccessMode mode, const MacPolicy& policy,
                             RandomStream& rng) {
    check_probability(op_value);
    switch (mode) {
        case AccessMode::max_power:
            return {true, policy.max_power};
        case AccessMode::reduced_power:
            if (op_value == 0.0) return {};
            return {true, op_value * policy.max_power};
        case AccessMode::random_access:
            if (rng.bernoulli(access_probability(op_value, policy))) return {true, policy.max_power};
            return {};
    }
    return {};
}

double expected_energy(double op_value, AccessMode mode, const MacPolicy& policy,
                       double slot_duration) {
    check_probability(op_value);
    const double full = policy.max_power * slot_duration;
    switch (mode) {
        case AccessMode::max_power: return full;
        case AccessMode::reduced_power: return op_value * full;
        case AccessMode::random_access: return access_probability(op_value, policy) * full;
    }
    return 0.0;
}

}  // namespace opsim
