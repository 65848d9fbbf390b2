#pragma once

#include "opsim/scenario.hpp"

namespace fixtures {

// Two simplex links TX1->RX1, TX2->RX2 with the worked-example gains:
// direct 0.04, cross `cross`, external 0.0125 / 0.02, OPs 0.8 / 0.5.
inline opsim::ScenarioConfig two_pair(double cross, opsim::AccessMode mode) {
    using namespace opsim;
    ScenarioConfig c;
    c.channel.fading = Fading::none;
    c.channel.noise_power = 0.0;
    c.link.bandwidth_hz = 1.0;
    c.overhead = {0.0, 0.0, 0.0};
    c.duplex.enabled = false;
    c.duplex.hd_scheme = HdScheme::simplex;
    c.duplex.rate_model = RateModel::Kind::shannon;
    c.access_mode = mode;

    PairSpec p0, p1;
    p0.op_a = 0.8;
    p0.op_b = 0.0;
    p0.external_b = 0.0125;
    p1.op_a = 0.5;
    p1.op_b = 0.0;
    p1.external_b = 0.02;
    c.pairs = {p0, p1};

    // node order TX1, RX1, TX2, RX2
    GainMatrix g(4, 4, 1e-6);
    g(0, 1) = 0.04;
    g(2, 3) = 0.04;
    g(2, 1) = cross;
    g(0, 3) = cross;
    c.gains = g;
    return c;
}

// One pair at 10 m with pinned OPs and no field.
inline opsim::ScenarioConfig pinned_pair(double op_a, double op_b) {
    using namespace opsim;
    ScenarioConfig c;
    PairSpec p;
    p.pos_a = Point{0, 0};
    p.pos_b = Point{10, 0};
    p.op_a = op_a;
    p.op_b = op_b;
    c.pairs = {p};
    c.channel.noise_power = 1e-9;
    return c;
}

}  // namespace fixtures
