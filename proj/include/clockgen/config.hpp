#pragma once

#include "clockgen/freq_planner.hpp"
#include "clockgen/power_planner.hpp"
#include "clockgen/register_model.hpp"

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace clockgen {

inline constexpr std::uint16_t kDefaultTcpPort = 53380;
inline constexpr std::uint8_t kDefaultSynthAddress = 0x70;

struct BoardConfig {
    std::uint8_t synth_address = kDefaultSynthAddress;
    Rational f_in{BigInt(25000000)};
    PlannerConstraints constraints;
    std::vector<RailModel> rails;
    RegisterMap synth_map;
    RegisterMap pot_map;
    std::chrono::milliseconds read_timeout{1000};
    std::uint16_t tcp_port = kDefaultTcpPort;
};

// Compiled-in copies of the files under data/.
std::string_view default_synth_map_text();
std::string_view default_pot_map_text();
std::string_view default_config_text();

// Parses "key = value" lines ('#' comments). Unknown keys are errors.
// pot_map paths resolve against base_dir; without a pot_map key the built-in
// pot map is used. synth_map is left at the built-in map; callers replace it
// when a --map file is given. Throws ParseError with the line number.
BoardConfig parse_config(std::string_view text, const std::string& base_dir = ".");

BoardConfig load_config(const std::string& path);

// Built-in configuration and maps.
BoardConfig default_config();

// The simulated board's I2C devices: synthesizer plus one pot per distinct
// pot address named by the rails.
std::vector<std::uint8_t> pot_addresses(const BoardConfig& config);

} // namespace clockgen
