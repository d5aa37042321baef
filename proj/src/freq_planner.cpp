#include "clockgen/freq_planner.hpp"

#include "clockgen/stern_brocot.hpp"
#include "clockgen/synth_layout.hpp"

#include <algorithm>
#include <cstddef>

namespace clockgen {

namespace {

Rational canonical(Rational r)
{
    r.canonicalize();
    return r;
}

Rational from_int(std::int64_t v) { return Rational(BigInt(static_cast<long>(v))); }

std::string hz(const Rational& f) { return to_string(f) + " Hz"; }

// Closed-open window on the feedback ratio F implied by the VCO window and
// both dividers' integer ranges: lo <= F <= hi_incl and F < hi_excl.
struct FeedbackWindow {
    Rational lo;
    Rational hi_incl;
    Rational hi_excl;

    bool admits(const Rational& f) const { return f >= lo && f <= hi_incl && f < hi_excl; }
};

FeedbackWindow feedback_window(const Rational& f_in, const Rational& ratio,
                               const PlannerConstraints& c)
{
    // ratio = f_in / f_target, so output divider M = ratio * F.
    FeedbackWindow w;
    w.lo = std::max({canonical(c.vco_min / f_in), from_int(c.feedback.min),
                     canonical(from_int(c.output.min) / ratio)});
    w.hi_incl = canonical(c.vco_max / f_in);
    w.hi_excl = std::min(from_int(c.feedback.max + 1), canonical(from_int(c.output.max + 1) / ratio));
    return w;
}

FrequencyPlan make_plan(int channel, const Rational& f_in, const Rational& f_target,
                        const Rational& feedback, const Rational& output, PlanKind kind)
{
    FrequencyPlan p;
    p.channel = channel;
    p.f_in = f_in;
    p.f_target = f_target;
    p.feedback = RationalDivider::from_value(feedback);
    p.output = RationalDivider::from_value(output);
    p.f_vco = canonical(f_in * feedback);
    p.f_achieved = canonical(p.f_vco / output);
    p.rel_error = canonical(abs(p.f_achieved - f_target) / f_target);
    p.kind = kind;
    return p;
}

} // namespace

Rational RationalDivider::value() const
{
    return canonical(from_int(a) + Rational(BigInt(static_cast<long>(b)), BigInt(static_cast<long>(c))));
}

RationalDivider RationalDivider::from_value(const Rational& v)
{
    const Rational r = canonical(v);
    if (r <= 0) throw Error(Errc::InvalidArgument, "divider must be positive");
    const BigInt whole = floor_of(r);
    const Rational frac = canonical(r - Rational(whole));
    return {to_int64(whole), to_int64(frac.get_num()), to_int64(frac.get_den())};
}

void check_divider(const RationalDivider& d, const IntegerRange& range, std::int64_t denominator_max)
{
    if (d.c < 1 || d.b < 0 || d.b >= d.c) {
        throw Error(Errc::OutOfRange, "divider fraction must satisfy 0 <= b < c");
    }
    if (d.c > denominator_max) {
        throw Error(Errc::OutOfRange, "divider denominator " + std::to_string(d.c) + " above cap");
    }
    if (d.b > 0 && BigInt(gcd(BigInt(static_cast<long>(d.b)), BigInt(static_cast<long>(d.c)))) != 1) {
        throw Error(Errc::OutOfRange, "divider fraction not reduced");
    }
    if (!range.contains(d.a)) {
        throw Error(Errc::OutOfRange, "divider integer part " + std::to_string(d.a) + " outside [" +
                                          std::to_string(range.min) + ", " + std::to_string(range.max) + "]");
    }
}

const char* to_string(PlanKind kind)
{
    switch (kind) {
    case PlanKind::IntegerExact: return "integer-exact";
    case PlanKind::FractionalOutputExact: return "fractional-output-exact";
    case PlanKind::FractionalFeedbackExact: return "fractional-feedback-exact";
    case PlanKind::Approximate: return "approximate";
    }
    return "unknown";
}

FrequencyPlan plan_frequency(const Rational& f_in_arg, const Rational& f_target_arg, int channel,
                             const PlannerConstraints& c)
{
    if (channel < 0 || channel >= kChannelCount) {
        throw Error(Errc::InvalidArgument, "channel " + std::to_string(channel) + " not in 0..3");
    }
    const Rational f_in = canonical(f_in_arg);
    const Rational f_target = canonical(f_target_arg);
    if (f_in < c.f_in_min || f_in > c.f_in_max) {
        throw Error(Errc::InvalidArgument, "reference " + hz(f_in) + " outside the input window");
    }
    if (f_target < c.band_min || f_target > c.band_max) {
        throw Error(Errc::Unsatisfiable, "target " + hz(f_target) + " outside the " + hz(c.band_min) +
                                             " .. " + hz(c.band_max) + " band");
    }

    const Rational ratio = canonical(f_in / f_target);
    const FeedbackWindow w = feedback_window(f_in, ratio, c);
    const BigInt den_max(static_cast<long>(c.denominator_max));

    // Integer feedback values in the window, lowest VCO first.
    std::vector<BigInt> integer_feedback;
    for (BigInt f = ceil_of(w.lo); w.admits(Rational(f)); ++f) integer_feedback.push_back(f);

    std::optional<BigInt> fractional_output;
    for (const auto& f : integer_feedback) {
        const Rational m = canonical(ratio * Rational(f));
        if (m.get_den() == 1) {
            return make_plan(channel, f_in, f_target, Rational(f), m, PlanKind::IntegerExact);
        }
        if (!fractional_output && m.get_den() <= den_max) fractional_output = f;
    }
    if (fractional_output) {
        const Rational f(*fractional_output);
        return make_plan(channel, f_in, f_target, f, canonical(ratio * f),
                         PlanKind::FractionalOutputExact);
    }

    // Fractional feedback F = k*u/c with u the reduced denominator of ratio:
    // then M = k*ratio_num/c, so both dividers have denominators dividing c.
    // The smallest such F >= lo is u times the smallest k/c >= lo/u.
    {
        const Rational u(ratio.get_den());
        const Rational kc = smallest_at_least(canonical(w.lo / u), den_max);
        const Rational f = canonical(kc * u);
        const Rational m = canonical(ratio * f);
        if (w.admits(f) && f.get_den() <= den_max && m.get_den() <= den_max) {
            return make_plan(channel, f_in, f_target, f, m, PlanKind::FractionalFeedbackExact);
        }
    }

    // Approximation: for each integer feedback the bracketing output dividers
    // of the exact ratio; keep the least relative error, lowest VCO on ties.
    std::optional<FrequencyPlan> best;
    for (const auto& fb : integer_feedback) {
        const Rational f(fb);
        const Rational exact_m = canonical(ratio * f);
        const FareyBracket br = farey_bracket(exact_m, den_max);
        for (const Rational* m : {&br.lower, &br.upper}) {
            if (*m < from_int(c.output.min) || *m >= from_int(c.output.max + 1)) continue;
            FrequencyPlan p = make_plan(channel, f_in, f_target, f, *m, PlanKind::Approximate);
            if (!best || p.rel_error < best->rel_error) best = std::move(p);
        }
    }
    if (best) return *best;

    throw Error(Errc::Unsatisfiable, "no divider pair keeps the VCO in its window for " + hz(f_target));
}

namespace {

BatchEntry plan_entry(const Rational& f_in, const Rational& target, int channel,
                      const PlannerConstraints& c)
{
    BatchEntry e;
    try {
        e.plan = plan_frequency(f_in, target, channel, c);
    } catch (const Error& err) {
        e.error = err.code();
        e.message = err.what();
    }
    return e;
}

} // namespace

std::vector<BatchEntry> plan_frequencies(const Rational& f_in, std::span<const Rational> targets,
                                         int channel, const PlannerConstraints& c)
{
    std::vector<BatchEntry> out(targets.size());
    const auto n = static_cast<std::ptrdiff_t>(targets.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = plan_entry(f_in, targets[static_cast<std::size_t>(i)], channel, c);
    }
    return out;
}

std::vector<BatchEntry> plan_frequencies_serial(const Rational& f_in,
                                                std::span<const Rational> targets, int channel,
                                                const PlannerConstraints& c)
{
    std::vector<BatchEntry> out;
    out.reserve(targets.size());
    for (const auto& t : targets) out.push_back(plan_entry(f_in, t, channel, c));
    return out;
}

PhasePlan plan_phase(const FrequencyPlan& plan, const PhaseRequest& request,
                     const PlannerConstraints& c)
{
    PhasePlan p;
    p.quantum = canonical(Rational(1) / plan.f_vco);
    p.offset_requested = request.unit == PhaseRequest::Unit::Seconds
                             ? canonical(request.value)
                             : canonical(request.value / 360 / plan.f_achieved);
    const BigInt steps = round_half_away(canonical(p.offset_requested * plan.f_vco));
    if (abs(steps) > c.phase_steps_max) {
        throw Error(Errc::OutOfRange, "phase offset needs " + steps.get_str() + " steps, limit is +/-" +
                                          std::to_string(c.phase_steps_max));
    }
    p.steps = to_int64(steps);
    p.offset_achieved = canonical(Rational(steps) * p.quantum);
    p.residual = canonical(p.offset_requested - p.offset_achieved);
    return p;
}

DividerFields encode_divider(const RationalDivider& d)
{
    if (d.c < 1 || d.b < 0 || d.b >= d.c || d.a < 0) {
        throw Error(Errc::InvalidArgument, "divider must satisfy a >= 0, 0 <= b < c");
    }
    // (a*c + b) * 128 stays below 2^63 for a < 2^21 and c < 2^31.
    if (d.a >= (std::int64_t{1} << 21) || d.c >= (std::int64_t{1} << 31)) {
        throw Error(Errc::FieldOverflow, "divider too large to encode");
    }
    const std::int64_t scaled = (d.a * d.c + d.b) * 128;
    const std::int64_t p1 = scaled / d.c - 512;
    const std::int64_t p2 = (d.b * 128) % d.c;
    const std::int64_t p3 = d.c;
    if (p1 < 0 || p1 >= (std::int64_t{1} << kP1Bits)) {
        throw Error(Errc::FieldOverflow, "P1 = " + std::to_string(p1) + " does not fit 18 bits");
    }
    if (p3 >= (std::int64_t{1} << kP3Bits)) {
        throw Error(Errc::FieldOverflow, "P3 = " + std::to_string(p3) + " does not fit 30 bits");
    }
    return {static_cast<std::uint64_t>(p1), static_cast<std::uint64_t>(p2), static_cast<std::uint64_t>(p3)};
}

RationalDivider decode_divider(const DividerFields& f, const IntegerRange& range,
                               std::int64_t denominator_max)
{
    if (f.p3 == 0) throw Error(Errc::InconsistentEncoding, "P3 is zero");
    if (f.p1 >= (std::uint64_t{1} << kP1Bits) || f.p2 >= (std::uint64_t{1} << kP2Bits) ||
        f.p3 >= (std::uint64_t{1} << kP3Bits)) {
        throw Error(Errc::InconsistentEncoding, "divider field exceeds its width");
    }
    if (f.p2 >= f.p3) throw Error(Errc::InconsistentEncoding, "P2 not below P3");

    // value = ((P1 + 512) * P3 + P2) / (128 * P3)
    const BigInt p3(static_cast<unsigned long>(f.p3));
    const BigInt num = (BigInt(static_cast<unsigned long>(f.p1)) + 512) * p3 +
                       BigInt(static_cast<unsigned long>(f.p2));
    const Rational v = canonical(Rational(num, p3 * 128));
    const RationalDivider d = RationalDivider::from_value(v);
    try {
        check_divider(d, range, denominator_max);
    } catch (const Error& e) {
        throw Error(Errc::InconsistentEncoding, e.what());
    }
    return d;
}

void apply_plan(RegisterBus& bus, const RegisterMap& map, std::uint8_t synth_address,
                const FrequencyPlan& plan, const PhasePlan& phase, int channel)
{
    if (channel < 0 || channel >= kChannelCount) {
        throw Error(Errc::InvalidArgument, "channel " + std::to_string(channel) + " not in 0..3");
    }
    const DividerFields fb = encode_divider(plan.feedback);
    const DividerFields ms = encode_divider(plan.output);
    FieldWriter w(map, synth_address);
    w.set(synth::feedback_field(1), fb.p1)
        .set(synth::feedback_field(2), fb.p2)
        .set(synth::feedback_field(3), fb.p3)
        .set(synth::divider_field(channel, 1), ms.p1)
        .set(synth::divider_field(channel, 2), ms.p2)
        .set(synth::divider_field(channel, 3), ms.p3)
        .set(synth::phase_field(channel), static_cast<std::uint8_t>(static_cast<std::int8_t>(phase.steps)));
    w.flush(bus);
}

} // namespace clockgen
