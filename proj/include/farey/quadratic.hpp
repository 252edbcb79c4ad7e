#pragma once

// Numbers a + b*sqrt(D) with rational a, b and squarefree D, plus their
// continued fractions. Mixing two distinct irrational fields throws
// MixedField; callers fall back to interval enclosures.

#include "farey/interval.hpp"

#include <map>
#include <ostream>
#include <sstream>
#include <vector>

namespace farey {

struct MixedField : std::logic_error {
    MixedField() : std::logic_error("arithmetic across distinct quadratic fields") {}
};

/// Squarefree part test by trial division; D is small in every use here.
inline bool is_squarefree(const Integer& D) {
    if (D < 2) return D >= 0;
    for (Integer p = 2; p * p <= D; ++p) {
        if (D % (p * p) == 0) return false;
    }
    return true;
}

class QuadNumber {
public:
    QuadNumber() = default;
    QuadNumber(const Rational& a) : a_(a) {}
    QuadNumber(long a) : a_(a) {}

    /// a + b*sqrt(D); D must be >= 0. Square factors of D are pulled into b.
    QuadNumber(const Rational& a, const Rational& b, const Integer& D) : a_(a), b_(b), D_(D) {
        if (D < 0) throw DomainError("negative radicand");
        normalize();
    }

    const Rational& rational_part() const { return a_; }
    const Rational& surd_part() const { return b_; }
    const Integer& radicand() const { return D_; }
    bool is_rational() const { return b_ == 0; }

    int sign() const {
        int sa = farey::sign(a_), sb = farey::sign(b_);
        if (sb == 0) return sa;
        if (sa == 0 || sa == sb) return sb;
        // opposite signs: compare a^2 with b^2 D
        Rational lhs = a_ * a_, rhs = b_ * b_ * Rational(D_);
        if (lhs == rhs) return 0;
        return lhs > rhs ? sa : sb;
    }

    QuadNumber conjugate() const { return raw(a_, -b_, D_); }

    /// Norm a^2 - D b^2 (rational).
    Rational norm() const { return a_ * a_ - b_ * b_ * Rational(D_); }

    friend QuadNumber operator+(const QuadNumber& x, const QuadNumber& y) {
        Integer D = common(x, y);
        return raw(x.a_ + y.a_, x.b_ + y.b_, D);
    }
    friend QuadNumber operator-(const QuadNumber& x, const QuadNumber& y) {
        Integer D = common(x, y);
        return raw(x.a_ - y.a_, x.b_ - y.b_, D);
    }
    friend QuadNumber operator-(const QuadNumber& x) { return raw(-x.a_, -x.b_, x.D_); }
    friend QuadNumber operator*(const QuadNumber& x, const QuadNumber& y) {
        Integer D = common(x, y);
        return raw(x.a_ * y.a_ + x.b_ * y.b_ * Rational(D), x.a_ * y.b_ + x.b_ * y.a_, D);
    }
    friend QuadNumber operator/(const QuadNumber& x, const QuadNumber& y) {
        Rational n = y.norm();
        if (n == 0) throw DomainError("division by zero");
        QuadNumber inv = raw(y.a_ / n, -y.b_ / n, y.D_);
        return x * inv;
    }

    friend bool operator==(const QuadNumber& x, const QuadNumber& y) {
        return x.a_ == y.a_ && x.b_ == y.b_ && (x.b_ == 0 || x.D_ == y.D_);
    }
    friend bool operator<(const QuadNumber& x, const QuadNumber& y) {
        if (!x.is_rational() && !y.is_rational() && x.D_ != y.D_) {
            throw MixedField();
        }
        return (x - y).sign() < 0;
    }

    /// Enclosure of the value with roughly 2^-bits absolute width.
    Interval enclosure(unsigned bits) const {
        if (b_ == 0) return Interval(a_);
        Interval s = sqrt(Interval(Rational(D_)), bits + 4 + static_cast<unsigned>(msb_of(b_)));
        Interval b(b_);
        return Interval(a_) + b * s;
    }

    double approx() const {
        return to_double(a_) + to_double(b_) * std::sqrt(D_.convert_to<double>());
    }

    /// Canonical (p, q, D, r): value (p + q sqrt(D)) / r, r > 0, content 1.
    struct Surd {
        Integer p, q, D, r;
    };
    Surd surd() const {
        Integer r = lcm(den(a_), den(b_));
        Integer p = num(a_ * Rational(r)), q = num(b_ * Rational(r));
        return {p, q, b_ == 0 ? Integer(0) : D_, r};
    }

    static QuadNumber from_surd(const Integer& p, const Integer& q, const Integer& D, const Integer& r) {
        if (r == 0) throw DomainError("zero denominator");
        return QuadNumber(ratio(p, r), ratio(q, r), D);
    }

private:
    static QuadNumber raw(const Rational& a, const Rational& b, const Integer& D) {
        QuadNumber x;
        x.a_ = a;
        x.b_ = b;
        x.D_ = b == 0 ? Integer(0) : D;
        return x;
    }

    static Integer common(const QuadNumber& x, const QuadNumber& y) {
        if (x.b_ == 0) return y.D_;
        if (y.b_ == 0) return x.D_;
        if (x.D_ != y.D_) throw MixedField();
        return x.D_;
    }

    static long msb_of(const Rational& r) {
        Integer n = abs(num(r));
        return n == 0 ? 0 : static_cast<long>(boost::multiprecision::msb(n)) + 1;
    }

    void normalize() {
        if (b_ == 0 || D_ == 0) {
            b_ = 0;
            D_ = 0;
            return;
        }
        // pull square factors out of D
        Integer f = 2;
        while (f * f <= D_) {
            while (D_ % (f * f) == 0) {
                D_ /= f * f;
                b_ *= Rational(f);
            }
            ++f;
        }
        if (D_ == 1) {
            a_ += b_;
            b_ = 0;
            D_ = 0;
        }
    }

    Rational a_ = 0, b_ = 0;
    Integer D_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const QuadNumber& x) {
    auto s = x.surd();
    if (s.q == 0) return os << to_string(x.rational_part());
    os << "(" << s.p << (s.q < 0 ? "-" : "+") << abs(s.q) << "*sqrt(" << s.D << "))";
    if (s.r != 1) os << "/" << s.r;
    return os;
}

/// Continued fraction [a0; a1, ..., a_k, (period)]. For rationals the
/// period is empty.
struct ContinuedFraction {
    std::vector<Integer> head;
    std::vector<Integer> period;

    bool is_finite() const { return period.empty(); }

    /// Partial quotient a_n, following the period cyclically.
    Integer at(std::size_t n) const {
        if (n < head.size()) return head[n];
        if (period.empty()) throw DomainError("index past a finite continued fraction");
        return period[(n - head.size()) % period.size()];
    }

    /// Largest a_n with n >= 1.
    Integer max_tail_quotient() const {
        Integer m = 0;
        for (std::size_t i = 1; i < head.size(); ++i) m = std::max(m, head[i]);
        for (const auto& a : period) m = std::max(m, a);
        return m;
    }
};

inline ContinuedFraction continued_fraction(const Rational& x) {
    ContinuedFraction cf;
    Integer n = num(x), d = den(x);
    while (d != 0) {
        Integer a = floor_div(n, d);
        cf.head.push_back(a);
        Integer r = n - a * d;
        n = d;
        d = r;
    }
    return cf;
}

inline ContinuedFraction continued_fraction(const QuadNumber& x) {
    if (x.is_rational()) return continued_fraction(x.rational_part());
    auto s = x.surd();
    Integer p = s.p, q = s.q, r = s.r;
    if (q < 0) {
        p = -p;
        q = -q;
        r = -r;
    }
    // x = (P + sqrt(Dp)) / Q with Q | Dp - P^2
    Integer ar = abs(r);
    Integer P = p * ar, Q = r * ar, Dp = q * q * s.D * r * r;
    Integer root = isqrt(Dp);
    std::map<std::pair<Integer, Integer>, std::size_t> seen;
    std::vector<Integer> terms;
    while (true) {
        auto key = std::make_pair(P, Q);
        auto it = seen.find(key);
        if (it != seen.end()) {
            ContinuedFraction cf;
            cf.head.assign(terms.begin(), terms.begin() + static_cast<long>(it->second));
            cf.period.assign(terms.begin() + static_cast<long>(it->second), terms.end());
            return cf;
        }
        seen.emplace(key, terms.size());
        Integer a = floor_div(P + root + (Q < 0 ? 1 : 0), Q);
        terms.push_back(a);
        P = a * Q - P;
        Q = (Dp - P * P) / Q;
    }
}

/// Convergents p_n/q_n of a continued fraction, up to count terms.
inline std::vector<std::pair<Integer, Integer>> convergents(const ContinuedFraction& cf, std::size_t count) {
    std::vector<std::pair<Integer, Integer>> out;
    Integer p0 = 1, q0 = 0, p1 = cf.at(0), q1 = 1;
    out.emplace_back(p1, q1);
    std::size_t limit = cf.is_finite() ? std::min(count, cf.head.size()) : count;
    for (std::size_t n = 1; n < limit; ++n) {
        Integer a = cf.at(n);
        Integer p2 = a * p1 + p0, q2 = a * q1 + q0;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        out.emplace_back(p1, q1);
    }
    return out;
}

}  // namespace farey
