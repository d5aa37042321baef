#include "clockgen/rational.hpp"

#include "clockgen/errors.hpp"

#include <cctype>
#include <limits>

namespace clockgen {

BigInt floor_of(const Rational& x)
{
    BigInt q;
    mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return q;
}

BigInt ceil_of(const Rational& x)
{
    BigInt q;
    mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return q;
}

BigInt round_half_away(const Rational& x)
{
    const Rational half(1, 2);
    if (x >= 0) {
        return floor_of(x + half);
    }
    return -floor_of(-x + half);
}

std::int64_t to_int64(const BigInt& x)
{
    if (!x.fits_slong_p()) {
        throw Error(Errc::OutOfRange, "integer does not fit 64 bits: " + x.get_str());
    }
    return x.get_si();
}

namespace {

BigInt pow10(unsigned n)
{
    BigInt r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, n);
    return r;
}

Rational suffix_scale(char c)
{
    switch (c) {
    case 'G': return Rational(BigInt(1000000000));
    case 'M': return Rational(BigInt(1000000));
    case 'k': case 'K': return Rational(BigInt(1000));
    case 'm': return Rational(1, 1000);
    case 'u': return Rational(1, 1000000);
    case 'n': return Rational(1, 1000000000);
    case 'p': return Rational(BigInt(1), pow10(12));
    default: return Rational(0);
    }
}

[[noreturn]] void bad_number(std::string_view text)
{
    throw Error(Errc::InvalidArgument, "not a number: '" + std::string(text) + "'");
}

} // namespace

Rational parse_rational(std::string_view text)
{
    std::string_view s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.empty()) bad_number(text);

    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) bad_number(text);
        Rational r = num / den;
        r.canonicalize();
        return r;
    }

    Rational scale(1);
    if (Rational f = suffix_scale(s.back()); f != 0 && !(s.back() == 'e' || s.back() == 'E')) {
        scale = f;
        s.remove_suffix(1);
        if (s.empty()) bad_number(text);
    }

    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }

    BigInt mantissa = 0;
    unsigned frac_digits = 0;
    bool seen_digit = false;
    bool seen_point = false;
    std::size_t i = 0;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mantissa = mantissa * 10 + (c - '0');
            seen_digit = true;
            if (seen_point) ++frac_digits;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) bad_number(text);

    long exponent = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') bad_number(text);
        ++i;
        bool exp_negative = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            exp_negative = s[i] == '-';
            ++i;
        }
        if (i == s.size()) bad_number(text);
        for (; i < s.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) bad_number(text);
            exponent = exponent * 10 + (s[i] - '0');
            if (exponent > 4096) bad_number(text);
        }
        if (exp_negative) exponent = -exponent;
    }

    exponent -= static_cast<long>(frac_digits);
    Rational r(mantissa);
    if (exponent >= 0) {
        r *= Rational(pow10(static_cast<unsigned>(exponent)));
    } else {
        r /= Rational(pow10(static_cast<unsigned>(-exponent)));
    }
    r *= scale;
    if (negative) r = -r;
    r.canonicalize();
    return r;
}

std::string to_string(const Rational& x)
{
    if (x.get_den() == 1) return x.get_num().get_str();
    return x.get_num().get_str() + "/" + x.get_den().get_str();
}

double to_double(const Rational& x)
{
    return x.get_d();
}

} // namespace clockgen
