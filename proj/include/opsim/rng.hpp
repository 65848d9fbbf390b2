#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace opsim {

// Stable 64-bit seed derivation: root seed + module label + index.
// Adding a new label never shifts the streams of existing labels.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0);

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    static RandomStream derived(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
        return RandomStream(derive_seed(root, label, index));
    }

    // Uniform on [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Unit-mean exponential.
    double exponential();

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t poisson(double mean);

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace opsim
