#pragma once

#include "clockgen/freq_planner.hpp"
#include "clockgen/rational.hpp"
#include "clockgen/register_model.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace clockgen::synth {

// Field names the synthesizer register map must define.
std::string divider_field(int channel, int p);   // "ms<k>_p<1..3>"
std::string feedback_field(int p);               // "fb_p<1..3>"
std::string phase_field(int channel);            // "ph<k>"
std::string enable_field(int channel);           // "oe<k>"
std::string powerdown_field(int channel);        // "pdn<k>"

std::vector<std::string> channel_fields(int channel);
std::vector<std::string> feedback_fields();

// Throws InvalidArgument if a required field is missing or too narrow.
void validate_layout(const RegisterMap& map);

// Register addresses holding channel-owned (or feedback) fields.
std::vector<std::uint8_t> channel_addresses(const RegisterMap& map, int channel);
std::vector<std::uint8_t> feedback_addresses(const RegisterMap& map);

struct ChannelOutput {
    int channel = 0;
    bool enabled = false;
    bool valid = false;                 // dividers decode and VCO is in window
    std::optional<Rational> f_out;      // set when enabled and valid
    std::optional<Rational> f_vco;      // set when valid
    std::int64_t phase_steps = 0;
    Rational phase_offset;              // phase_steps / f_vco, 0 when invalid
};

// Behavioral view of the synthesizer: what each output produces for a given
// register image.
std::vector<ChannelOutput> evaluate_outputs(const std::array<std::uint8_t, 256>& regs,
                                            const RegisterMap& map, const Rational& f_in,
                                            const PlannerConstraints& constraints);

} // namespace clockgen::synth
