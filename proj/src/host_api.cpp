#include "clockgen/host_api.hpp"

#include "clockgen/errors.hpp"
#include "clockgen/wire_protocol.hpp"

#include <set>

namespace clockgen::host {

std::uint8_t Bridge::read(std::uint8_t device, std::uint8_t reg)
{
    const auto cmd = wire::encode_command(wire::BridgeCommand::read(device, reg));
    session_.write_bytes(cmd);
    const auto rsp = session_.read_bytes(wire::kResponseSize);
    return wire::decode_response(rsp).value;
}

void Bridge::write(std::uint8_t device, std::uint8_t reg, std::uint8_t value)
{
    const auto cmd = wire::encode_command(wire::BridgeCommand::write(device, reg, value));
    session_.write_bytes(cmd);
}

DeviceHandle::DeviceHandle(Bridge bridge, BoardConfig config)
    : bridge_(std::move(bridge)), config_(std::move(config))
{
    synth::validate_layout(config_.synth_map);
}

std::uint8_t DeviceHandle::bridge_read(std::uint8_t device, std::uint8_t reg)
{
    return bridge_.read(device, reg);
}

void DeviceHandle::bridge_write(std::uint8_t device, std::uint8_t reg, std::uint8_t value)
{
    bridge_.write(device, reg, value);
}

void DeviceHandle::check_channel(int channel) const
{
    if (channel < 0 || channel >= kChannelCount) {
        throw Error(Errc::InvalidArgument, "channel " + std::to_string(channel) + " not in 0..3");
    }
}

const RailModel& DeviceHandle::rail(int rail_id) const
{
    for (const auto& r : config_.rails) {
        if (r.rail_id == rail_id) return r;
    }
    throw Error(Errc::InvalidArgument, "rail " + std::to_string(rail_id) + " is not configured");
}

const std::optional<FrequencyPlan>& DeviceHandle::current_plan(int channel) const
{
    check_channel(channel);
    return plans_[static_cast<std::size_t>(channel)];
}

FrequencyPlan DeviceHandle::set_frequency(int channel, const Rational& f_target)
{
    check_channel(channel);
    FrequencyPlan plan = plan_frequency(config_.f_in, f_target, channel, config_.constraints);
    const PhasePlan zero = plan_phase(plan, PhaseRequest::seconds(Rational(0)), config_.constraints);
    apply_plan(bridge_, config_.synth_map, config_.synth_address, plan, zero, channel);
    enable_output(channel, true);
    plans_[static_cast<std::size_t>(channel)] = plan;
    return plan;
}

std::optional<FrequencyPlan> DeviceHandle::recover_plan(int channel)
{
    std::array<std::uint8_t, 256> regs{};
    std::vector<std::string> names = synth::feedback_fields();
    for (int p = 1; p <= 3; ++p) names.push_back(synth::divider_field(channel, p));
    std::set<std::uint8_t> addrs;
    for (const auto& n : names) {
        for (auto a : field_addresses(config_.synth_map.field(n))) addrs.insert(a);
    }
    for (auto a : addrs) regs[a] = bridge_.read(config_.synth_address, a);

    const auto read_div = [&](const std::string& p1, const std::string& p2, const std::string& p3) {
        return DividerFields{read_field(config_.synth_map.field(p1), regs),
                             read_field(config_.synth_map.field(p2), regs),
                             read_field(config_.synth_map.field(p3), regs)};
    };
    try {
        const auto& c = config_.constraints;
        const auto fb = decode_divider(read_div(synth::feedback_field(1), synth::feedback_field(2),
                                                synth::feedback_field(3)),
                                       c.feedback, c.denominator_max);
        const auto ms = decode_divider(read_div(synth::divider_field(channel, 1), synth::divider_field(channel, 2),
                                                synth::divider_field(channel, 3)),
                                       c.output, c.denominator_max);
        FrequencyPlan p;
        p.channel = channel;
        p.f_in = config_.f_in;
        p.feedback = fb;
        p.output = ms;
        p.f_vco = config_.f_in * fb.value();
        p.f_vco.canonicalize();
        if (p.f_vco < c.vco_min || p.f_vco > c.vco_max) return std::nullopt;
        p.f_achieved = p.f_vco / ms.value();
        p.f_achieved.canonicalize();
        p.f_target = p.f_achieved;
        p.rel_error = 0;
        p.kind = fb.is_integer() ? (ms.is_integer() ? PlanKind::IntegerExact : PlanKind::FractionalOutputExact)
                                 : PlanKind::FractionalFeedbackExact;
        return p;
    } catch (const Error&) {
        return std::nullopt;
    }
}

PhasePlan DeviceHandle::set_phase(int channel, const PhaseRequest& request)
{
    check_channel(channel);
    auto& slot = plans_[static_cast<std::size_t>(channel)];
    if (!slot) slot = recover_plan(channel);
    if (!slot) {
        throw Error(Errc::NoPlan, "channel " + std::to_string(channel) + " has no frequency plan");
    }
    const PhasePlan phase = plan_phase(*slot, request, config_.constraints);
    FieldWriter w(config_.synth_map, config_.synth_address);
    w.set(synth::phase_field(channel), static_cast<std::uint8_t>(static_cast<std::int8_t>(phase.steps)));
    w.flush(bridge_);
    return phase;
}

void DeviceHandle::enable_output(int channel, bool on)
{
    check_channel(channel);
    FieldWriter w(config_.synth_map, config_.synth_address);
    w.set(synth::enable_field(channel), on ? 1 : 0);
    w.flush(bridge_);
}

SupplySetting DeviceHandle::set_rail_voltage(int rail_id, double v_target)
{
    const RailModel& r = rail(rail_id);
    const SupplySetting s = plan_voltage(r, v_target);
    apply_supply(bridge_, config_.pot_map, r, s);
    return s;
}

BoardStatus DeviceHandle::read_status()
{
    std::array<std::uint8_t, 256> regs{};
    std::set<std::uint8_t> addrs;
    for (const auto& f : config_.synth_map.fields()) {
        for (auto a : field_addresses(f)) addrs.insert(a);
    }
    for (auto a : addrs) regs[a] = bridge_.read(config_.synth_address, a);

    BoardStatus st;
    st.channels = synth::evaluate_outputs(regs, config_.synth_map, config_.f_in, config_.constraints);
    for (const auto& r : config_.rails) {
        const auto& f = config_.pot_map.field(wiper_field(r.pot_channel));
        std::array<std::uint8_t, 256> pot{};
        for (auto a : field_addresses(f)) pot[a] = bridge_.read(r.pot_address, a);
        const int code = static_cast<int>(read_field(f, pot));
        st.rails.push_back({r.rail_id, code, r.voltage(code)});
    }
    return st;
}

DeviceHandle bridge_init(const InitOptions& options)
{
    BoardConfig cfg = options.config_path ? load_config(*options.config_path) : default_config();
    if (options.map_path) cfg.synth_map = load_register_map(*options.map_path);
    synth::validate_layout(cfg.synth_map);
    transport::Session s = transport::Session::open({options.endpoint, cfg.read_timeout});
    return DeviceHandle(Bridge(std::move(s)), std::move(cfg));
}

} // namespace clockgen::host
