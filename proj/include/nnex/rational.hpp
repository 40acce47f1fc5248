#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <cctype>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nnex {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational number. All order-sensitive arithmetic in the library
/// (distance comparisons, simplex pivoting, witness checks) runs on this
/// type; doubles appear only in the floating-point QP kernel.
using Rational = boost::rational<BigInt>;

using Vec = std::vector<Rational>;

inline double to_double(const Rational& r) {
    return boost::rational_cast<double>(r);
}

inline Rational rat(long long num, long long den = 1) {
    return Rational(BigInt(num), BigInt(den));
}

/// Parses a decimal or fractional literal into an exact Rational by
/// scanning the text. No binary floating-point intermediate, so "0.1"
/// becomes exactly 1/10. Accepts: "-12", "3.25", ".5", "7/4", "1e-3".
inline Rational parse_rational(std::string_view text) {
    auto fail = [&]() -> Rational {
        throw std::invalid_argument("not a rational literal: '" + std::string(text) + "'");
    };

    size_t begin = 0, end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    std::string_view s = text.substr(begin, end - begin);
    if (s.empty()) fail();

    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == Rational(0)) fail();
        return num / den;
    }

    bool negative = false;
    size_t i = 0;
    if (s[i] == '+' || s[i] == '-') {
        negative = (s[i] == '-');
        ++i;
    }

    BigInt mantissa = 0;
    long long frac_digits = 0;
    long long exponent = 0;
    bool any_digit = false;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
        mantissa = mantissa * 10 + (s[i] - '0');
        any_digit = true;
    }
    if (i < s.size() && s[i] == '.') {
        ++i;
        for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
            mantissa = mantissa * 10 + (s[i] - '0');
            ++frac_digits;
            any_digit = true;
        }
    }
    if (!any_digit) fail();
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        bool exp_neg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            exp_neg = (s[i] == '-');
            ++i;
        }
        if (i == s.size()) fail();
        long long e = 0;
        for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i)
            e = e * 10 + (s[i] - '0');
        exponent = exp_neg ? -e : e;
    }
    if (i != s.size()) fail();

    long long shift = exponent - frac_digits;
    BigInt num = negative ? BigInt(-mantissa) : mantissa;
    BigInt den = 1;
    if (shift >= 0) {
        for (long long j = 0; j < shift; ++j) num *= 10;
    } else {
        for (long long j = 0; j < -shift; ++j) den *= 10;
    }
    return Rational(num, den);
}

/// Exact conversion of a finite double (binary fraction) to Rational.
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite double");
    if (x == 0.0) return Rational(0);
    int exp = 0;
    double m = std::frexp(x, &exp);  // x = m * 2^exp, 0.5 <= |m| < 1
    // 53 doublings make the mantissa integral.
    for (int i = 0; i < 53 && m != std::floor(m); ++i) {
        m *= 2;
        --exp;
    }
    BigInt num = BigInt(static_cast<long long>(m));
    BigInt den = 1;
    if (exp >= 0) {
        num <<= exp;
    } else {
        den <<= -exp;
    }
    return Rational(num, den);
}

inline std::string to_string(const Rational& r) {
    std::string s = r.numerator().str();
    if (r.denominator() != 1) s += "/" + r.denominator().str();
    return s;
}

inline std::string to_string(const Vec& v) {
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += to_string(v[i]);
    }
    return s + ")";
}

}  // namespace nnex
