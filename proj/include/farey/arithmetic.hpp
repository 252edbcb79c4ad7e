#pragma once

// Exact integer and rational helpers shared by every module.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace farey {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Error raised when a certified comparison cannot be decided within the
/// configured refinement depth.
struct Undecided : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Error raised on arguments outside an operation's domain.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

inline Integer abs(const Integer& x) { return x < 0 ? Integer(-x) : x; }
inline Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline Integer num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline Integer den(const Rational& r) { return boost::multiprecision::denominator(r); }

/// p/q with the sign moved to the numerator (q != 0).
inline Rational ratio(const Integer& p, const Integer& q) {
    if (q == 0) throw DomainError("zero denominator");
    return q < 0 ? Rational(Integer(-p), Integer(-q)) : Rational(p, q);
}

inline Integer gcd(const Integer& a, const Integer& b) {
    return boost::multiprecision::gcd(abs(a), abs(b));
}

inline Integer lcm(const Integer& a, const Integer& b) {
    if (a == 0 || b == 0) return 0;
    return abs(a / gcd(a, b) * b);
}

inline int sign(const Integer& x) { return x < 0 ? -1 : (x > 0 ? 1 : 0); }
inline int sign(const Rational& x) { return x < 0 ? -1 : (x > 0 ? 1 : 0); }

/// Floor division rounding toward negative infinity (b != 0).
inline Integer floor_div(const Integer& a, const Integer& b) {
    Integer q = a / b;
    Integer r = a - q * b;
    if (r != 0 && ((r < 0) != (b < 0))) q -= 1;
    return q;
}

inline Integer ceil_div(const Integer& a, const Integer& b) { return -floor_div(-a, b); }

inline Integer floor(const Rational& r) { return floor_div(num(r), den(r)); }
inline Integer ceil(const Rational& r) { return ceil_div(num(r), den(r)); }

/// Integer square root: largest s with s*s <= n.
inline Integer isqrt(const Integer& n) {
    if (n < 0) throw DomainError("isqrt of negative integer");
    return boost::multiprecision::sqrt(n);
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0.
struct ExtendedGcd {
    Integer g, x, y;
};

inline ExtendedGcd extended_gcd(Integer a, Integer b) {
    Integer x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        Integer q = floor_div(a, b);
        Integer t = a - q * b;
        a = b;
        b = t;
        t = x0 - q * x1; x0 = x1; x1 = t;
        t = y0 - q * y1; y0 = y1; y1 = t;
    }
    if (a < 0) { a = -a; x0 = -x0; y0 = -y0; }
    return {a, x0, y0};
}

inline Rational pow2(long e) {
    if (e >= 0) return Rational(Integer(1) << e);
    return Rational(Integer(1), Integer(1) << (-e));
}

/// Largest power-of-two exponent k with 2^k <= x, for x > 0.
inline long floor_log2(const Rational& x) {
    if (x <= 0) throw DomainError("floor_log2 of non-positive value");
    Integer n = num(x), d = den(x);
    long k = static_cast<long>(boost::multiprecision::msb(n)) -
             static_cast<long>(boost::multiprecision::msb(d));
    // adjust so that 2^k <= n/d < 2^(k+1)
    while (pow2(k) > x) --k;
    while (pow2(k + 1) <= x) ++k;
    return k;
}

/// Round down / up to a multiple of 2^-bits.
inline Rational round_down(const Rational& x, unsigned bits) {
    Integer scaled = floor_div(num(x) << bits, den(x));
    return Rational(scaled, Integer(1) << bits);
}

inline Rational round_up(const Rational& x, unsigned bits) {
    Integer scaled = ceil_div(num(x) << bits, den(x));
    return Rational(scaled, Integer(1) << bits);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Exact rational value of a finite double.
inline Rational from_double(double v) {
    if (!std::isfinite(v)) throw DomainError("non-finite double");
    int exp = 0;
    double mant = std::frexp(v, &exp);
    // 53 significant bits
    auto m = static_cast<std::int64_t>(std::ldexp(mant, 53));
    return Rational(m) * pow2(exp - 53);
}

inline std::string to_string(const Rational& r) {
    if (den(r) == 1) return num(r).str();
    return num(r).str() + "/" + den(r).str();
}

inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) {
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(Integer(s));
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(s.size() - dot - 1));
        return Rational(Integer(digits), scale);
    }
    return Rational(Integer(s.substr(0, slash)), Integer(s.substr(slash + 1)));
}

/// Fits-in-int64 check used by the fast integer paths.
inline bool fits_i64(const Integer& x) {
    static const Integer lo = std::numeric_limits<std::int64_t>::min() / 4;
    static const Integer hi = std::numeric_limits<std::int64_t>::max() / 4;
    return x >= lo && x <= hi;
}

using i128 = __int128;

inline i128 abs128(i128 x) { return x < 0 ? -x : x; }

inline Integer to_integer(i128 x) {
    bool neg = x < 0;
    unsigned __int128 m = neg ? static_cast<unsigned __int128>(-(x + 1)) + 1 : static_cast<unsigned __int128>(x);
    Integer r = Integer(static_cast<std::uint64_t>(m >> 64)) << 64;
    r += Integer(static_cast<std::uint64_t>(m));
    return neg ? Integer(-r) : r;
}

}  // namespace farey
