#include "clockgen/stern_brocot.hpp"

#include "clockgen/errors.hpp"

namespace clockgen {

FareyBracket farey_bracket(const Rational& x, const BigInt& max_den)
{
    if (max_den < 1) throw Error(Errc::InvalidArgument, "denominator bound must be >= 1");
    if (x.get_den() <= max_den) return {x, x};

    // left = a/b < x < right = c/d, adjacent in the Stern-Brocot tree
    BigInt a = floor_of(x);
    BigInt b = 1;
    BigInt c = a + 1;
    BigInt d = 1;

    const BigInt& xn = x.get_num();
    const BigInt& xd = x.get_den();

    for (;;) {
        if (b + d > max_den) break;
        // sign of mediant - x, compared as (a+c)*xd vs xn*(b+d)
        const BigInt lhs = (a + c) * xd;
        const BigInt rhs = xn * (b + d);
        if (lhs < rhs) {
            // Mediant is below x: move the left end right k times,
            // k = largest with (a + k c)/(b + k d) < x, i.e.
            // k (c xd - xn d) < xn b - a xd.
            const BigInt num = xn * b - a * xd;
            const BigInt den = c * xd - xn * d;
            BigInt k;
            mpz_cdiv_q(k.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
            k -= 1;
            const BigInt k_cap = (max_den - b) / d;
            if (k > k_cap) k = k_cap;
            a += k * c;
            b += k * d;
        } else {
            // lhs > rhs; equality would mean x has denominator <= max_den.
            const BigInt num = c * xd - xn * d;
            const BigInt den = xn * b - a * xd;
            BigInt k;
            mpz_cdiv_q(k.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
            k -= 1;
            const BigInt k_cap = (max_den - d) / b;
            if (k > k_cap) k = k_cap;
            c += k * a;
            d += k * b;
        }
    }

    Rational lower(a, b);
    Rational upper(c, d);
    lower.canonicalize();
    upper.canonicalize();
    return {lower, upper};
}

} // namespace clockgen
