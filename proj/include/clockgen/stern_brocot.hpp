#pragma once

#include "clockgen/rational.hpp"

namespace clockgen {

// The two fractions with denominator <= max_den that bracket x most tightly:
// lower <= x <= upper, and no fraction with denominator <= max_den lies
// strictly between them. Both equal x when x's own denominator fits.
struct FareyBracket {
    Rational lower;
    Rational upper;
};

// Mediant (Stern-Brocot) descent, taking each run of same-side steps in one
// jump so the cost is logarithmic in max_den. Requires max_den >= 1.
FareyBracket farey_bracket(const Rational& x, const BigInt& max_den);

inline Rational smallest_at_least(const Rational& x, const BigInt& max_den)
{
    return farey_bracket(x, max_den).upper;
}

inline Rational largest_at_most(const Rational& x, const BigInt& max_den)
{
    return farey_bracket(x, max_den).lower;
}

} // namespace clockgen
