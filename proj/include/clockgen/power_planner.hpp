#pragma once

#include "clockgen/register_model.hpp"

#include <cstdint>
#include <vector>

namespace clockgen {

inline constexpr int kRailCount = 5;
inline constexpr int kWiperSteps = 256;

// One supply rail: a digital pot channel acting as the upper feedback
// resistor of an adjustable regulator,
//   v_out = v_ref * (1 + R_wb / r_fixed),  R_wb = code / 256 * r_ab + r_wiper.
struct RailModel {
    int rail_id = 0;
    std::uint8_t pot_address = 0x2C;
    int pot_channel = 0;
    double v_ref = 1.25;
    double r_fixed = 10000.0;
    double r_ab = 20000.0;
    double r_wiper = 60.0;
    std::uint8_t default_code = 0x80;

    double voltage(int code) const;
    double half_lsb() const { return v_ref * (r_ab / kWiperSteps) / r_fixed / 2.0; }
};

// Throws InvalidArgument on non-positive resistances or a bad pot channel.
void check_rail(const RailModel& rail);

struct SupplySetting {
    int code = 0;
    double v_predicted = 0.0;
    double v_error = 0.0;   // v_predicted - v_target
};

// Nearest code to v_target; ties go to the lower code. Throws Infeasible when
// v_target lies more than half an LSB outside [v(0), v(255)].
SupplySetting plan_voltage(const RailModel& rail, double v_target);

// Name of the pot register-map field holding channel k's wiper code.
std::string wiper_field(int pot_channel);

// One write of setting.code to the rail's pot channel register.
void apply_supply(RegisterBus& bus, const RegisterMap& pot_map, const RailModel& rail,
                  const SupplySetting& setting);

} // namespace clockgen
