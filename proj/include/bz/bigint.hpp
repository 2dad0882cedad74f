#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace bz {

// Exact integer/rational substrate for the coefficient engine. Counting
// sequences (Bell numbers, n^{n-1}, n!, ...) overflow machine words almost
// immediately, so every coefficient stays exact until the final conversion
// to double at an evaluation boundary.
using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

inline BigInt factorial(unsigned n) {
    BigInt r = 1;
    for (unsigned k = 2; k <= n; ++k) r *= k;
    return r;
}

inline BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt r = 1;
    for (unsigned i = 0; i < k; ++i) {
        r *= (n - i);
        r /= (i + 1); // always exact: r is C(n,i+1) * remaining partial product
    }
    return r;
}

inline double to_double(const BigInt& v) { return v.convert_to<double>(); }
inline double to_double(const BigRat& v) { return v.convert_to<double>(); }

// Exact rational value of a finite double (doubles are dyadic rationals).
inline BigRat rat_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("rat_from_double: non-finite");
    if (x == 0.0) return BigRat(0);
    int exp = 0;
    double m = std::frexp(x, &exp);       // x = m * 2^exp, 0.5 <= |m| < 1
    auto mant = static_cast<long long>(std::ldexp(m, 53)); // integral, |mant| < 2^53
    exp -= 53;
    BigRat r(mant);
    if (exp >= 0) r *= BigInt(1) << exp;
    else r /= BigInt(1) << (-exp);
    return r;
}

inline BigRat pow_rat(const BigRat& base, unsigned n) {
    BigRat acc = 1, b = base;
    while (n != 0) {
        if (n & 1u) acc *= b;
        b *= b;
        n >>= 1u;
    }
    return acc;
}

// log of a positive BigInt without overflowing double: peel off the top
// 53 bits, take the float log, and add back the shifted exponent.
inline double big_log(const BigInt& v) {
    if (v <= 0) throw std::domain_error("big_log: nonpositive");
    unsigned bits = boost::multiprecision::msb(v) + 1;
    if (bits <= 1000) return std::log(to_double(v));
    unsigned shift = bits - 53;
    double top = to_double(BigInt(v >> shift));
    return std::log(top) + static_cast<double>(shift) * 0.6931471805599453;
}

} // namespace bz
