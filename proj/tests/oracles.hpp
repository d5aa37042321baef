#pragma once

// Independent reference implementations used only by tests. They share no
// code with the library beyond the Rational type.

#include "clockgen/rational.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using clockgen::BigInt;
using clockgen::Rational;

struct ExactIntegerPlan {
    std::int64_t feedback = 0;
    Rational output;
    Rational f_vco;
};

// Brute force over every integer feedback value: keep those whose VCO is in
// [vco_min, vco_max] and whose exact output divider f_vco / f_target has a
// denominator <= den_max and integer part in [out_min, out_max].
inline std::vector<ExactIntegerPlan> exact_integer_plans(const Rational& f_in, const Rational& f_target,
                                                         std::int64_t fb_min = 8, std::int64_t fb_max = 566,
                                                         std::int64_t out_min = 5, std::int64_t out_max = 2048,
                                                         std::int64_t den_max = (1 << 30) - 1,
                                                         Rational vco_min = Rational(BigInt(2200000000)),
                                                         Rational vco_max = Rational(BigInt(2840000000)))
{
    std::vector<ExactIntegerPlan> out;
    for (std::int64_t fb = fb_min; fb <= fb_max; ++fb) {
        Rational vco = f_in * Rational(BigInt(static_cast<long>(fb)));
        vco.canonicalize();
        if (vco < vco_min || vco > vco_max) continue;
        Rational m = vco / f_target;
        m.canonicalize();
        if (m.get_den() > den_max) continue;
        const BigInt whole = m.get_num() / m.get_den();
        if (whole < out_min || whole > out_max) continue;
        out.push_back({fb, m, vco});
    }
    return out;
}

// Smallest fraction >= x with denominator <= max_den, by trying every
// denominator.
inline Rational smallest_at_least(const Rational& x, long max_den)
{
    std::optional<Rational> best;
    for (long q = 1; q <= max_den; ++q) {
        BigInt p;
        const BigInt num = x.get_num() * q;
        mpz_cdiv_q(p.get_mpz_t(), num.get_mpz_t(), x.get_den_mpz_t());
        Rational r(p, BigInt(q));
        r.canonicalize();
        if (!best || r < *best) best = r;
    }
    return *best;
}

inline Rational largest_at_most(const Rational& x, long max_den)
{
    std::optional<Rational> best;
    for (long q = 1; q <= max_den; ++q) {
        BigInt p;
        const BigInt num = x.get_num() * q;
        mpz_fdiv_q(p.get_mpz_t(), num.get_mpz_t(), x.get_den_mpz_t());
        Rational r(p, BigInt(q));
        r.canonicalize();
        if (!best || r > *best) best = r;
    }
    return *best;
}

// Exhaustive phase quantizer: the step count in [-limit, limit] minimising
// |offset - steps * quantum|; on a tie the larger magnitude wins.
inline std::optional<long> best_phase_steps(const Rational& offset, const Rational& quantum, long limit = 127)
{
    std::optional<long> best;
    Rational best_err;
    for (long s = -limit; s <= limit; ++s) {
        Rational err = offset - Rational(BigInt(s)) * quantum;
        err = abs(err);
        if (!best || err < best_err || (err == best_err && std::labs(s) > std::labs(*best))) {
            best = s;
            best_err = err;
        }
    }
    // Out of range when a step just past the limit would do strictly better.
    for (long s : {-limit - 1, limit + 1}) {
        Rational err = abs(Rational(offset - Rational(BigInt(s)) * quantum));
        if (err <= best_err) return std::nullopt;
    }
    return best;
}

// Exhaustive 256-code scan of v = v_ref (1 + (code/256 r_ab + r_wiper) / r_fixed).
inline int best_wiper_code(double v_target, double v_ref = 1.25, double r_fixed = 10000, double r_ab = 20000,
                           double r_wiper = 60)
{
    int best = 0;
    double best_err = 0;
    for (int code = 0; code < 256; ++code) {
        const double v = v_ref * (1.0 + (static_cast<double>(code) / 256 * r_ab + r_wiper) / r_fixed);
        const double err = std::fabs(v - v_target);
        if (code == 0 || err < best_err) {
            best = code;
            best_err = err;
        }
    }
    return best;
}

// Seeded rational targets p/q in [lo_hz, hi_hz]: q uniform in [1, max_q],
// p uniform in [lo_hz q, hi_hz q].
inline std::vector<Rational> random_targets(std::uint64_t seed, std::size_t n, long lo_hz = 5000000,
                                            long hi_hz = 200000000, long max_q = 1000000)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> qd(1, max_q);
    std::vector<Rational> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long q = qd(rng);
        std::uniform_int_distribution<long> pd(lo_hz * q, hi_hz * q);
        Rational r(BigInt(pd(rng)), BigInt(q));
        r.canonicalize();
        out.push_back(r);
    }
    return out;
}

} // namespace oracle
