#include "clockgen/power_planner.hpp"

#include "clockgen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clockgen {

double RailModel::voltage(int code) const
{
    const double r_wb = static_cast<double>(code) / kWiperSteps * r_ab + r_wiper;
    return v_ref * (1.0 + r_wb / r_fixed);
}

void check_rail(const RailModel& rail)
{
    if (!(rail.v_ref > 0) || !(rail.r_fixed > 0) || !(rail.r_ab > 0) || !(rail.r_wiper > 0)) {
        throw Error(Errc::InvalidArgument, "rail " + std::to_string(rail.rail_id) +
                                               ": reference and resistances must be positive");
    }
    if (rail.pot_channel < 0 || rail.pot_channel > 3) {
        throw Error(Errc::InvalidArgument, "rail " + std::to_string(rail.rail_id) + ": pot channel not in 0..3");
    }
    if (rail.pot_address > 0x7F) {
        throw Error(Errc::InvalidArgument, "rail " + std::to_string(rail.rail_id) + ": pot address exceeds 7 bits");
    }
}

SupplySetting plan_voltage(const RailModel& rail, double v_target)
{
    check_rail(rail);
    if (!(v_target > 0) || !std::isfinite(v_target)) {
        throw Error(Errc::InvalidArgument, "target voltage must be positive");
    }
    const double lo = rail.voltage(0) - rail.half_lsb();
    const double hi = rail.voltage(kWiperSteps - 1) + rail.half_lsb();
    if (v_target < lo || v_target > hi) {
        std::ostringstream msg;
        msg << "rail " << rail.rail_id << ": " << v_target << " V outside [" << rail.voltage(0) << ", "
            << rail.voltage(kWiperSteps - 1) << "] V";
        throw Error(Errc::Infeasible, msg.str());
    }

    // Invert the divider formula, then settle among the neighbouring codes so
    // rounding in the inversion cannot pick a worse code.
    const double ideal = ((v_target / rail.v_ref - 1.0) * rail.r_fixed - rail.r_wiper) * kWiperSteps / rail.r_ab;
    const int centre = static_cast<int>(std::floor(ideal));
    int best = -1;
    double best_err = 0.0;
    for (int code = centre - 1; code <= centre + 2; ++code) {
        if (code < 0 || code >= kWiperSteps) continue;
        const double err = std::fabs(rail.voltage(code) - v_target);
        if (best < 0 || err < best_err) {
            best = code;
            best_err = err;
        }
    }
    if (best < 0) best = ideal < 0 ? 0 : kWiperSteps - 1;

    SupplySetting s;
    s.code = best;
    s.v_predicted = rail.voltage(best);
    s.v_error = s.v_predicted - v_target;
    return s;
}

std::string wiper_field(int pot_channel) { return "rdac" + std::to_string(pot_channel); }

void apply_supply(RegisterBus& bus, const RegisterMap& pot_map, const RailModel& rail,
                  const SupplySetting& setting)
{
    if (setting.code < 0 || setting.code >= kWiperSteps) {
        throw Error(Errc::InvalidArgument, "wiper code out of range");
    }
    FieldWriter w(pot_map, rail.pot_address);
    w.set(wiper_field(rail.pot_channel), static_cast<std::uint64_t>(setting.code));
    w.flush(bus);
}

} // namespace clockgen
