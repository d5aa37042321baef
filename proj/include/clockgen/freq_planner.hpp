#pragma once

#include "clockgen/errors.hpp"
#include "clockgen/rational.hpp"
#include "clockgen/register_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clockgen {

inline constexpr int kChannelCount = 4;

struct IntegerRange {
    std::int64_t min = 0;
    std::int64_t max = 0;
    bool contains(std::int64_t v) const { return v >= min && v <= max; }
};

// Synthesizer constraint set. Defaults model the evaluation board's part.
struct PlannerConstraints {
    Rational vco_min{BigInt(2200000000)};
    Rational vco_max{BigInt(2840000000)};
    IntegerRange feedback{8, 566};
    IntegerRange output{5, 2048};
    std::int64_t denominator_max = (std::int64_t{1} << 30) - 1;
    int phase_steps_max = 127;
    // Supported output band and reference input window.
    Rational band_min{BigInt(5000000)};
    Rational band_max{BigInt(200000000)};
    Rational f_in_min{BigInt(10000000)};
    Rational f_in_max{BigInt(50000000)};
};

// a + b/c with 0 <= b < c and b/c in lowest terms.
struct RationalDivider {
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::int64_t c = 1;

    Rational value() const;
    bool is_integer() const { return b == 0; }

    // Splits a positive rational into integer and reduced fractional part.
    static RationalDivider from_value(const Rational& v);

    friend bool operator==(const RationalDivider&, const RationalDivider&) = default;
};

// Throws OutOfRange unless the divider's integer part is in range, its
// fraction is reduced and c <= denominator_max.
void check_divider(const RationalDivider& d, const IntegerRange& range, std::int64_t denominator_max);

enum class PlanKind {
    IntegerExact,            // integer feedback, integer output divider
    FractionalOutputExact,   // integer feedback, fractional output divider
    FractionalFeedbackExact, // fractional feedback found by mediant descent
    Approximate,             // no exact plan in the searched family
};

const char* to_string(PlanKind kind);

struct FrequencyPlan {
    int channel = 0;
    Rational f_in;
    Rational f_target;
    RationalDivider feedback;
    RationalDivider output;
    Rational f_vco;
    Rational f_achieved;
    Rational rel_error;
    PlanKind kind = PlanKind::IntegerExact;
};

// Search order: integer/integer, integer/fractional, fractional feedback via
// mediant descent, then the minimum-error approximation over integer
// feedback values. Within a tier the lowest VCO frequency wins.
//
// Throws Unsatisfiable when the target is outside the band or no divider pair
// keeps the VCO in its window; InvalidArgument for a bad channel or f_in.
FrequencyPlan plan_frequency(const Rational& f_in, const Rational& f_target, int channel,
                             const PlannerConstraints& constraints = {});

// One planner outcome in a batch; exactly one of plan / error is set.
struct BatchEntry {
    std::optional<FrequencyPlan> plan;
    std::optional<Errc> error;
    std::string message;
};

// Plans every target independently on an OpenMP team.
std::vector<BatchEntry> plan_frequencies(const Rational& f_in, std::span<const Rational> targets,
                                         int channel, const PlannerConstraints& constraints = {});

// Single-threaded reference for plan_frequencies.
std::vector<BatchEntry> plan_frequencies_serial(const Rational& f_in,
                                                std::span<const Rational> targets, int channel,
                                                const PlannerConstraints& constraints = {});

struct PhaseRequest {
    enum class Unit { Seconds, Degrees };
    Rational value;
    Unit unit = Unit::Seconds;

    static PhaseRequest seconds(Rational s) { return {std::move(s), Unit::Seconds}; }
    static PhaseRequest degrees(Rational d) { return {std::move(d), Unit::Degrees}; }
};

struct PhasePlan {
    std::int64_t steps = 0;
    Rational quantum;           // one VCO period, seconds
    Rational offset_requested;  // seconds
    Rational offset_achieved;   // steps * quantum
    Rational residual;          // requested - achieved
};

// steps = round(offset / quantum), ties away from zero. Degrees are taken
// relative to the planned output period. Throws OutOfRange past
// +/- phase_steps_max.
PhasePlan plan_phase(const FrequencyPlan& plan, const PhaseRequest& request,
                     const PlannerConstraints& constraints = {});

struct DividerFields {
    std::uint64_t p1 = 0;
    std::uint64_t p2 = 0;
    std::uint64_t p3 = 0;
    friend bool operator==(const DividerFields&, const DividerFields&) = default;
};

inline constexpr unsigned kP1Bits = 18;
inline constexpr unsigned kP2Bits = 30;
inline constexpr unsigned kP3Bits = 30;

// P1 = floor((a*c + b) * 128 / c) - 512, P2 = (b * 128) mod c, P3 = c.
// Throws FieldOverflow if a field does not fit its width.
DividerFields encode_divider(const RationalDivider& d);

// Inverse of encode_divider. Throws InconsistentEncoding when no legal divider
// in range maps to the fields.
RationalDivider decode_divider(const DividerFields& fields, const IntegerRange& range,
                               std::int64_t denominator_max);

// Writes feedback and channel divider fields plus the channel's phase-step
// register to the synthesizer. Other channels' fields are left untouched.
void apply_plan(RegisterBus& bus, const RegisterMap& map, std::uint8_t synth_address,
                const FrequencyPlan& plan, const PhasePlan& phase, int channel);

} // namespace clockgen
