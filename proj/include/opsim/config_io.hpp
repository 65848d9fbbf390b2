#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "opsim/scenario.hpp"

namespace opsim {

enum class Quantity { plain, ratio, power, time, frequency };

// Parses "3", "-3 dB", "30 dBm", "5 ms", "20 MHz" into linear SI units.
// Unit suffixes are accepted only for the matching quantity kind.
double parse_quantity(std::string_view text, Quantity kind);

// Reads a scenario file, applies "key.path=value" overrides, fills every
// default and validates. Errors are ConfigError with the key path and line.
ScenarioConfig parse_scenario(const std::filesystem::path& path,
                              std::span<const std::string> overrides = {});

ScenarioConfig parse_scenario_text(std::string_view text,
                                   std::span<const std::string> overrides = {},
                                   const std::string& source = "<scenario>");

// Fully materialized scenario in the same schema parse_scenario reads.
std::string emit_scenario(const ScenarioConfig& cfg);

}  // namespace opsim
