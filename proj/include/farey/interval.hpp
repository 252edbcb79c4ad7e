#pragma once

// Rational interval enclosures and lazily refinable certified reals.
//
// Every transcendental routine below returns an interval with dyadic
// endpoints that is guaranteed to contain the true value; the `bits`
// argument controls the width (roughly 2^-bits relative).

#include "farey/arithmetic.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <utility>

namespace farey {

struct Interval {
    Rational lo, hi;

    Interval() = default;
    explicit Interval(const Rational& x) : lo(x), hi(x) {}
    Interval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {}

    bool is_point() const { return lo == hi; }
    bool contains(const Rational& x) const { return lo <= x && x <= hi; }
    Rational width() const { return hi - lo; }
    Rational mid() const { return (lo + hi) / 2; }
    double approx() const { return to_double(mid()); }
};

inline Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator*(const Interval& a, const Interval& b) {
    if (a.lo >= 0 && b.lo >= 0) return {a.lo * b.lo, a.hi * b.hi};
    Rational p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

inline Interval operator/(const Interval& a, const Interval& b) {
    if (b.lo <= 0 && b.hi >= 0) throw DomainError("interval division by an interval containing zero");
    return a * Interval(1 / b.hi, 1 / b.lo);
}

inline Interval abs(const Interval& a) {
    if (a.lo >= 0) return a;
    if (a.hi <= 0) return -a;
    return {Rational(0), std::max(Rational(-a.lo), a.hi)};
}

inline Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

/// Outward rounding to a dyadic grid; keeps endpoint sizes bounded.
inline Interval round_out(const Interval& a, unsigned bits) {
    return {round_down(a.lo, bits), round_up(a.hi, bits)};
}

namespace detail {

// sum_{n>=0} t^(2n+1)/(2n+1) for 0 <= t <= 1/3, as an enclosure of atanh(t).
inline Interval atanh_small(const Rational& t, unsigned bits) {
    if (t == 0) return Interval(Rational(0));
    unsigned wb = bits + 16;
    Rational tl = round_down(t, wb), th = round_up(t, wb);
    Rational t2l = round_down(tl * tl, wb), t2h = round_up(th * th, wb);
    Rational pl = tl, ph = th;  // current odd powers
    Rational sl = 0, sh = 0;
    Rational eps = pow2(-static_cast<long>(bits) - 4);
    for (unsigned n = 0;; ++n) {
        Integer k = 2 * n + 1;
        sl += round_down(pl / Rational(k), wb);
        sh += round_up(ph / Rational(k), wb);
        pl = round_down(pl * t2l, wb);
        ph = round_up(ph * t2h, wb);
        // tail after this term: t^(2n+3)/((2n+3)(1-t^2))
        Rational tail = ph / (Rational(k + 2) * (1 - t2h));
        if (tail < eps) {
            sh += round_up(tail, wb);
            break;
        }
    }
    return {sl, sh};
}

inline const Interval& ln2_enclosure(unsigned bits) {
    // cached per precision level; bits only grows in practice
    thread_local unsigned cached_bits = 0;
    thread_local Interval cached;
    if (bits > cached_bits) {
        Interval a = atanh_small(Rational(1, 3), bits + 8);
        cached = Interval(2 * a.lo, 2 * a.hi);
        cached_bits = bits;
    }
    return cached;
}

inline Interval log_rational(const Rational& x, unsigned bits) {
    if (x <= 0) throw DomainError("log of non-positive value");
    if (x == 1) return Interval(Rational(0));
    long k = floor_log2(x);
    Rational y = x * pow2(-k);  // in [1, 2)
    Interval a = atanh_small((y - 1) / (y + 1), bits + 8);
    Interval r(2 * a.lo, 2 * a.hi);
    if (k != 0) {
        const Interval& l2 = ln2_enclosure(bits + 8 + static_cast<unsigned>(floor_log2(Rational(std::abs(k))) + 1));
        Rational kk(k);
        r = r + (k > 0 ? Interval(kk * l2.lo, kk * l2.hi) : Interval(kk * l2.hi, kk * l2.lo));
    }
    return round_out(r, bits + 4);
}

// exp on a rational of modulus <= 1/2 via Taylor with explicit remainder.
inline Interval exp_small(const Rational& r, unsigned bits) {
    unsigned wb = bits + 16;
    Rational rl = round_down(r, wb), rh = round_up(r, wb);
    // evaluate at both rounded endpoints, exp is monotone
    auto series = [&](const Rational& x, bool upper) {
        Rational sum = 1, term = 1;
        Rational ax = abs(x);
        Rational eps = pow2(-static_cast<long>(bits) - 4);
        for (unsigned n = 1;; ++n) {
            term = upper ? round_up(term * x / n, wb) : round_down(term * x / n, wb);
            sum += term;
            // |remainder| <= 2 |x|^(n+1)/(n+1)! <= 2 |term| |x| / (n+1)
            Rational rem = 2 * abs(term) * ax / (n + 1);
            if (rem < eps) return upper ? sum + round_up(rem, wb) : sum - round_up(rem, wb);
        }
    };
    return {series(rl, false), series(rh, true)};
}

inline Interval exp_rational(const Rational& x, unsigned bits) {
    if (x == 0) return Interval(Rational(1));
    if (x < 0) {
        Interval e = exp_rational(-x, bits + 2);
        return round_out(Interval(1 / e.hi, 1 / e.lo), bits + 4);
    }
    long m = 0;
    if (x > Rational(1, 2)) m = floor_log2(x) + 2;
    unsigned wb = bits + 16 + static_cast<unsigned>(m) + static_cast<unsigned>(std::max(0L, floor_log2(x + 1))) * 2;
    Interval e = exp_small(x * pow2(-m), wb);
    for (long i = 0; i < m; ++i) {
        e = Interval(round_down(e.lo * e.lo, wb), round_up(e.hi * e.hi, wb));
    }
    return e;
}

inline Rational sqrt_down(const Rational& x, unsigned bits) {
    if (x <= 0) return 0;
    Integer s = isqrt(floor(x * Rational(Integer(1) << (2 * bits))));
    return Rational(s, Integer(1) << bits);
}

inline Rational sqrt_up(const Rational& x, unsigned bits) {
    if (x <= 0) return 0;
    Integer n = ceil(x * Rational(Integer(1) << (2 * bits)));
    Integer s = isqrt(n);
    if (s * s != n) s += 1;
    return Rational(s, Integer(1) << bits);
}

}  // namespace detail

inline Interval sqrt(const Interval& a, unsigned bits) {
    if (a.hi < 0) throw DomainError("sqrt of negative interval");
    return {detail::sqrt_down(a.lo, bits), detail::sqrt_up(a.hi, bits)};
}

inline Interval log(const Interval& a, unsigned bits) {
    if (a.lo <= 0) throw DomainError("log of interval reaching zero");
    if (a.is_point()) return detail::log_rational(a.lo, bits);
    return {detail::log_rational(a.lo, bits).lo, detail::log_rational(a.hi, bits).hi};
}

inline Interval exp(const Interval& a, unsigned bits) {
    if (a.is_point()) return detail::exp_rational(a.lo, bits);
    return {detail::exp_rational(a.lo, bits).lo, detail::exp_rational(a.hi, bits).hi};
}

/// acosh(x) = log(x + sqrt(x^2 - 1)), x >= 1.
inline Interval acosh(const Interval& a, unsigned bits) {
    Interval lo(std::max(a.lo, Rational(1)), std::max(a.hi, Rational(1)));
    Interval s = sqrt(lo * lo - Interval(Rational(1)), bits + 8);
    return log(lo + s, bits);
}

/// atanh(u) = log((1+u)/(1-u))/2 for |u| < 1.
inline Interval atanh(const Interval& u, unsigned bits) {
    if (u.lo <= -1 || u.hi >= 1) throw DomainError("atanh outside (-1, 1)");
    Interval one(Rational(1));
    Interval l = log((one + u) / (one - u), bits + 1);
    return {l.lo / 2, l.hi / 2};
}

}  // namespace farey
