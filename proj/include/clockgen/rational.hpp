#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace clockgen {

// Exact rational number; all frequency, ratio and time arithmetic uses it.
using Rational = mpq_class;
using BigInt = mpz_class;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1)
{
    Rational r(BigInt(static_cast<long>(num)), BigInt(static_cast<long>(den)));
    r.canonicalize();
    return r;
}

BigInt floor_of(const Rational& x);
BigInt ceil_of(const Rational& x);

// Round to nearest integer, ties away from zero.
BigInt round_half_away(const Rational& x);

std::int64_t to_int64(const BigInt& x);

// Parses "123", "-4", "3/7", "1.25", "2.5e-9" and the unit-suffixed forms
// "100M", "12.5k", "1.25n" (suffixes: G M k m u n p). Decimal forms are
// converted exactly, never through binary floating point.
Rational parse_rational(std::string_view text);

// "p" for integers, "p/q" otherwise.
std::string to_string(const Rational& x);

double to_double(const Rational& x);

} // namespace clockgen
