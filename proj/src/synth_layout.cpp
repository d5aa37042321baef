#include "clockgen/synth_layout.hpp"

#include "clockgen/errors.hpp"

#include <algorithm>

namespace clockgen::synth {

std::string divider_field(int channel, int p)
{
    return "ms" + std::to_string(channel) + "_p" + std::to_string(p);
}

std::string feedback_field(int p) { return "fb_p" + std::to_string(p); }
std::string phase_field(int channel) { return "ph" + std::to_string(channel); }
std::string enable_field(int channel) { return "oe" + std::to_string(channel); }
std::string powerdown_field(int channel) { return "pdn" + std::to_string(channel); }

std::vector<std::string> channel_fields(int channel)
{
    return {divider_field(channel, 1), divider_field(channel, 2), divider_field(channel, 3),
            phase_field(channel), enable_field(channel), powerdown_field(channel)};
}

std::vector<std::string> feedback_fields()
{
    return {feedback_field(1), feedback_field(2), feedback_field(3)};
}

namespace {

void require(const RegisterMap& map, const std::string& name, unsigned min_width)
{
    const auto* f = map.find_field(name);
    if (f == nullptr) {
        throw Error(Errc::InvalidArgument, "register map lacks required field '" + name + "'");
    }
    if (f->width() < min_width) {
        throw Error(Errc::InvalidArgument, "field '" + name + "' is " + std::to_string(f->width()) +
                                               " bits, needs " + std::to_string(min_width));
    }
}

std::vector<std::uint8_t> addresses_of(const RegisterMap& map, const std::vector<std::string>& names)
{
    std::vector<std::uint8_t> out;
    for (const auto& n : names) {
        for (auto a : field_addresses(map.field(n))) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::optional<RationalDivider> try_decode(const DividerFields& f, const IntegerRange& range,
                                          std::int64_t den_max)
{
    try {
        return decode_divider(f, range, den_max);
    } catch (const Error&) {
        return std::nullopt;
    }
}

DividerFields read_divider(const std::array<std::uint8_t, 256>& regs, const RegisterMap& map,
                           const std::string& p1, const std::string& p2, const std::string& p3)
{
    return {read_field(map.field(p1), regs), read_field(map.field(p2), regs),
            read_field(map.field(p3), regs)};
}

} // namespace

void validate_layout(const RegisterMap& map)
{
    const unsigned widths[] = {kP1Bits, kP2Bits, kP3Bits};
    for (int p = 1; p <= 3; ++p) {
        require(map, feedback_field(p), widths[p - 1]);
        for (int ch = 0; ch < kChannelCount; ++ch) require(map, divider_field(ch, p), widths[p - 1]);
    }
    for (int ch = 0; ch < kChannelCount; ++ch) {
        require(map, phase_field(ch), 8);
        require(map, enable_field(ch), 1);
        require(map, powerdown_field(ch), 1);
    }
}

std::vector<std::uint8_t> channel_addresses(const RegisterMap& map, int channel)
{
    return addresses_of(map, channel_fields(channel));
}

std::vector<std::uint8_t> feedback_addresses(const RegisterMap& map)
{
    return addresses_of(map, feedback_fields());
}

std::vector<ChannelOutput> evaluate_outputs(const std::array<std::uint8_t, 256>& regs,
                                            const RegisterMap& map, const Rational& f_in,
                                            const PlannerConstraints& constraints)
{
    std::optional<Rational> f_vco;
    if (auto fb = try_decode(read_divider(regs, map, feedback_field(1), feedback_field(2), feedback_field(3)),
                             constraints.feedback, constraints.denominator_max)) {
        Rational v = f_in * fb->value();
        v.canonicalize();
        if (v >= constraints.vco_min && v <= constraints.vco_max) f_vco = v;
    }

    std::vector<ChannelOutput> out;
    for (int ch = 0; ch < kChannelCount; ++ch) {
        ChannelOutput o;
        o.channel = ch;
        o.enabled = read_field(map.field(enable_field(ch)), regs) != 0 &&
                    read_field(map.field(powerdown_field(ch)), regs) == 0;
        const auto raw_phase = static_cast<std::uint8_t>(read_field(map.field(phase_field(ch)), regs));
        o.phase_steps = static_cast<std::int8_t>(raw_phase);

        const auto ms = try_decode(read_divider(regs, map, divider_field(ch, 1), divider_field(ch, 2),
                                                divider_field(ch, 3)),
                                   constraints.output, constraints.denominator_max);
        if (f_vco && ms) {
            o.valid = true;
            o.f_vco = *f_vco;
            Rational f = *f_vco / ms->value();
            f.canonicalize();
            if (o.enabled) o.f_out = f;
            o.phase_offset = Rational(BigInt(static_cast<long>(o.phase_steps))) / *f_vco;
            o.phase_offset.canonicalize();
        }
        out.push_back(std::move(o));
    }
    return out;
}

} // namespace clockgen::synth
