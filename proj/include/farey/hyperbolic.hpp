#pragma once

// Upper half-plane geometry for SL2(Z): group elements, boundary points in
// Q or Q(sqrt D), Ford horoballs, projection distances, penetration depths
// and fundamental domain reduction. Basepoint is i, the horoball at
// infinity is {Im z > 1}, and the Ford horoball at p/q has diameter 1/q^2.

#include "farey/certified.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace farey {

class GroupElement {
public:
    GroupElement() : a_(1), b_(0), c_(0), d_(1) {}
    GroupElement(Integer a, Integer b, Integer c, Integer d)
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
        if (a_ * d_ - b_ * c_ != 1) throw DomainError("matrix does not have determinant 1");
        normalize_sign();
    }

    static GroupElement identity() { return {}; }
    static GroupElement T() { return {1, 1, 0, 1}; }
    static GroupElement S() { return {0, -1, 1, 0}; }

    const Integer& a() const { return a_; }
    const Integer& b() const { return b_; }
    const Integer& c() const { return c_; }
    const Integer& d() const { return d_; }

    GroupElement inverse() const { return {d_, -b_, -c_, a_}; }

    friend GroupElement operator*(const GroupElement& x, const GroupElement& y) {
        return {x.a_ * y.a_ + x.b_ * y.c_, x.a_ * y.b_ + x.b_ * y.d_,
                x.c_ * y.a_ + x.d_ * y.c_, x.c_ * y.b_ + x.d_ * y.d_};
    }

    friend bool operator==(const GroupElement& x, const GroupElement& y) {
        return x.a_ == y.a_ && x.b_ == y.b_ && x.c_ == y.c_ && x.d_ == y.d_;
    }
    friend bool operator!=(const GroupElement& x, const GroupElement& y) { return !(x == y); }
    friend bool operator<(const GroupElement& x, const GroupElement& y) {
        return std::tie(x.a_, x.b_, x.c_, x.d_) < std::tie(y.a_, y.b_, y.c_, y.d_);
    }

    Integer size() const { return a_ * a_ + b_ * b_ + c_ * c_ + d_ * d_; }

    std::string str() const {
        std::ostringstream os;
        os << "(" << a_ << "," << b_ << "," << c_ << "," << d_ << ")";
        return os.str();
    }

private:
    void normalize_sign() {
        const Integer* order[4] = {&a_, &c_, &b_, &d_};
        for (auto* e : order) {
            if (*e != 0) {
                if (*e < 0) {
                    a_ = -a_; b_ = -b_; c_ = -c_; d_ = -d_;
                }
                return;
            }
        }
    }

    Integer a_, b_, c_, d_;
};

struct GroupElementHash {
    std::size_t operator()(const GroupElement& g) const {
        std::size_t h = 1469598103934665603ull;
        for (const Integer* e : {&g.a(), &g.b(), &g.c(), &g.d()}) {
            h ^= std::hash<long long>()(e->convert_to<long long>());
            h *= 1099511628211ull;
        }
        return h;
    }
};

/// A point of the circle at infinity: infinity, a rational, or a quadratic surd.
class BoundaryPoint {
public:
    BoundaryPoint() = default;
    BoundaryPoint(const QuadNumber& x) : value_(x) {}
    BoundaryPoint(const Rational& x) : value_(x) {}
    BoundaryPoint(long x) : value_(Rational(x)) {}

    static BoundaryPoint infinity() {
        BoundaryPoint p;
        p.infinite_ = true;
        return p;
    }
    static BoundaryPoint rational(const Integer& p, const Integer& q) {
        if (q == 0) return infinity();
        return BoundaryPoint(ratio(p, q));
    }
    static BoundaryPoint phi() { return QuadNumber(Rational(1, 2), Rational(1, 2), 5); }
    static BoundaryPoint sqrt2() { return QuadNumber(0, 1, 2); }

    bool is_infinity() const { return infinite_; }
    bool is_rational() const { return !infinite_ && value_.is_rational(); }
    bool is_irrational() const { return !infinite_ && !value_.is_rational(); }
    const QuadNumber& value() const {
        if (infinite_) throw DomainError("infinity has no finite value");
        return value_;
    }
    Rational rational_value() const {
        if (!is_rational()) throw DomainError("not a rational boundary point");
        return value_.rational_part();
    }

    /// Homogeneous coordinates (x, 1) or (1, 0).
    std::pair<QuadNumber, QuadNumber> vec() const {
        if (infinite_) return {QuadNumber(1), QuadNumber(0)};
        return {value_, QuadNumber(1)};
    }

    double approx() const { return infinite_ ? std::numeric_limits<double>::infinity() : value_.approx(); }

    friend bool operator==(const BoundaryPoint& x, const BoundaryPoint& y) {
        if (x.infinite_ || y.infinite_) return x.infinite_ == y.infinite_;
        return x.value_ == y.value_;
    }
    friend bool operator!=(const BoundaryPoint& x, const BoundaryPoint& y) { return !(x == y); }

    std::string str() const {
        if (infinite_) return "inf";
        std::ostringstream os;
        os << value_;
        return os.str();
    }

private:
    QuadNumber value_;
    bool infinite_ = false;
};

/// Parses "inf", "p/q", "p", "phi", "sqrt2", "(p+q*sqrt(D))/r" and "(p-q*sqrt(D))".
inline BoundaryPoint parse_boundary_point(const std::string& s) {
    if (s == "inf" || s == "oo" || s == "infinity") return BoundaryPoint::infinity();
    if (s == "phi") return BoundaryPoint::phi();
    if (s == "sqrt2") return BoundaryPoint::sqrt2();
    static const std::regex surd(R"(\((-?\d+)([+-])(\d+)\*sqrt\((\d+)\)\)(?:/(\d+))?)");
    std::smatch m;
    if (std::regex_match(s, m, surd)) {
        Integer p(m[1].str()), q(m[3].str()), D(m[4].str());
        if (m[2].str() == "-") q = -q;
        Integer r = m[5].matched ? Integer(m[5].str()) : Integer(1);
        return QuadNumber::from_surd(p, q, D, r);
    }
    return BoundaryPoint(parse_rational(s));
}

/// Ford horoball tangent at p/q (q >= 0, gcd 1); q = 0 encodes infinity.
class Horoball {
public:
    Horoball() : p_(1), q_(0) {}
    Horoball(Integer p, Integer q) : p_(std::move(p)), q_(std::move(q)) {
        if (q_ < 0 || (q_ == 0 && p_ < 0)) {
            p_ = -p_;
            q_ = -q_;
        }
        Integer g = gcd(p_, q_);
        if (g == 0) throw DomainError("horoball at 0/0");
        p_ /= g;
        q_ /= g;
    }
    static Horoball infinity() { return {}; }
    static Horoball at(const Rational& x) { return {num(x), den(x)}; }

    const Integer& p() const { return p_; }
    const Integer& q() const { return q_; }
    bool is_infinity() const { return q_ == 0; }

    BoundaryPoint tangency() const { return BoundaryPoint::rational(p_, q_); }

    friend bool operator==(const Horoball& x, const Horoball& y) { return x.p_ == y.p_ && x.q_ == y.q_; }
    friend bool operator!=(const Horoball& x, const Horoball& y) { return !(x == y); }
    /// Orders by (q, p); infinity first.
    friend bool operator<(const Horoball& x, const Horoball& y) {
        return std::tie(x.q_, x.p_) < std::tie(y.q_, y.p_);
    }

    std::string str() const {
        if (q_ == 0) return "inf";
        return p_.str() + "/" + q_.str();
    }

private:
    Integer p_, q_;
};

inline std::optional<Horoball> as_horoball(const BoundaryPoint& x) {
    if (x.is_infinity()) return Horoball::infinity();
    if (x.is_rational()) return Horoball::at(x.rational_value());
    return std::nullopt;
}

inline Horoball parse_horoball(const std::string& s) {
    auto h = as_horoball(parse_boundary_point(s));
    if (!h) throw DomainError("horoball tangency must be rational or inf: " + s);
    return *h;
}

// ---------------------------------------------------------------- actions

inline BoundaryPoint mobius_apply(const GroupElement& g, const BoundaryPoint& x) {
    if (x.is_infinity()) {
        if (g.c() == 0) return BoundaryPoint::infinity();
        return BoundaryPoint::rational(g.a(), g.c());
    }
    const QuadNumber& z = x.value();
    QuadNumber den = QuadNumber(Rational(g.c())) * z + QuadNumber(Rational(g.d()));
    if (den.sign() == 0) return BoundaryPoint::infinity();
    QuadNumber numr = QuadNumber(Rational(g.a())) * z + QuadNumber(Rational(g.b()));
    return BoundaryPoint(numr / den);
}

inline Horoball mobius_apply(const GroupElement& g, const Horoball& Y) {
    // (p, q) -> (a p + b q, c p + d q); stays primitive since det = 1
    return {g.a() * Y.p() + g.b() * Y.q(), g.c() * Y.p() + g.d() * Y.q()};
}

/// M with M(tangency(Y)) = infinity: rows (a, b), (q, -p) with -a p - b q = 1,
/// a the least nonnegative solution.
inline GroupElement normalizer(const Horoball& Y) {
    if (Y.is_infinity()) return GroupElement::identity();
    const Integer& p = Y.p();
    const Integer& q = Y.q();
    // solve a*(-p) + b*(-q) = 1
    auto e = extended_gcd(-p, -q);
    Integer a = e.x, b = e.y;
    // general solution a + k q, b - k p  (check: (a+kq)(-p) + (b-kp)(-q) = 1)
    Integer k = floor_div(-a, q);
    if (a + k * q < 0) k += 1;
    a += k * q;
    b -= k * p;
    if (a - q >= 0) {
        Integer kk = floor_div(a, q);
        a -= kk * q;
        b += kk * p;
    }
    return {a, b, q, -p};
}

// ---------------------------------------------------- projection distances

namespace detail {

inline QuadNumber det2(const std::pair<QuadNumber, QuadNumber>& u, const std::pair<QuadNumber, QuadNumber>& v) {
    return u.first * v.second - u.second * v.first;
}

inline Interval enclose(const QuadNumber& x, unsigned bits) { return x.enclosure(bits); }

}  // namespace detail

/// d_Y(u, v) = |det(u, v)| / (|det(Y, u)| |det(Y, v)|) in homogeneous
/// coordinates, which equals |M_Y(u) - M_Y(v)|. Infinite when u or v is
/// the tangency point of Y.
inline CertifiedReal projection_distance(const Horoball& Y, const BoundaryPoint& u, const BoundaryPoint& v) {
    BoundaryPoint t = Y.tangency();
    if (u == t || v == t) return CertifiedReal::infinity();
    if (u == v) return CertifiedReal(Rational(0));
    std::pair<QuadNumber, QuadNumber> y{QuadNumber(Rational(Y.p())), QuadNumber(Rational(Y.q()))};
    auto U = u.vec(), V = v.vec();
    try {
        QuadNumber n = detail::det2(U, V), du = detail::det2(y, U), dv = detail::det2(y, V);
        QuadNumber d = n / (du * dv);
        if (d.sign() < 0) d = -d;
        return CertifiedReal(d);
    } catch (const MixedField&) {
        // u, v in different quadratic fields: enclose numerically
        return CertifiedReal::from_generator([y, U, V](unsigned bits) {
            auto enc = [bits](const QuadNumber& x) { return x.enclosure(bits + 16); };
            Interval u1 = enc(U.first), u2 = enc(U.second), v1 = enc(V.first), v2 = enc(V.second);
            Interval p = enc(y.first), q = enc(y.second);
            Interval n = abs(u1 * v2 - u2 * v1);
            Interval du = abs(p * u2 - q * u1), dv = abs(p * v2 - q * v1);
            return round_out(n / (du * dv), bits + 4);
        });
    }
}

inline CertifiedReal projection_distance(const Horoball& Y, const Horoball& X, const Horoball& Z) {
    if (X == Y || Z == Y) throw DomainError("projection distance onto a horoball from itself");
    return projection_distance(Y, X.tangency(), Z.tangency());
}

inline CertifiedReal projection_distance(const Horoball& Y, const Horoball& X, const BoundaryPoint& xi) {
    if (X == Y) throw DomainError("projection distance onto a horoball from itself");
    return projection_distance(Y, X.tangency(), xi);
}

/// Exact value for rational or infinite arguments; nullopt means Infinite.
inline std::optional<Rational> projection_distance_exact(const Horoball& Y, const BoundaryPoint& u,
                                                         const BoundaryPoint& v) {
    auto r = projection_distance(Y, u, v);
    if (r.is_infinite()) return std::nullopt;
    return r.exact();
}

/// Fast path on primitive integer vectors (x1, x2) meaning x1/x2.
/// Returns numerator/denominator of d_Y; denominator 0 means Infinite.
struct SmallVec {
    std::int64_t x, y;
};

inline std::pair<i128, i128> projection_distance_small(SmallVec Y, SmallVec u, SmallVec v) {
    i128 n = abs128(static_cast<i128>(u.x) * v.y - static_cast<i128>(u.y) * v.x);
    i128 du = abs128(static_cast<i128>(Y.x) * u.y - static_cast<i128>(Y.y) * u.x);
    i128 dv = abs128(static_cast<i128>(Y.x) * v.y - static_cast<i128>(Y.y) * v.x);
    return {n, du * dv};
}

inline SmallVec small_vec(const Horoball& Y) {
    return {Y.p().convert_to<std::int64_t>(), Y.q().convert_to<std::int64_t>()};
}

inline SmallVec small_vec(const BoundaryPoint& x) {
    if (x.is_infinity()) return {1, 0};
    Rational r = x.rational_value();
    return {num(r).convert_to<std::int64_t>(), den(r).convert_to<std::int64_t>()};
}

inline bool small_ok(const BoundaryPoint& x) {
    if (x.is_infinity()) return true;
    if (!x.is_rational()) return false;
    Rational r = x.rational_value();
    return fits_i64(num(r)) && fits_i64(den(r)) && abs(num(r)) < (Integer(1) << 40) && den(r) < (Integer(1) << 40);
}

/// log(d/2): positive iff the full geodesic (u, v) enters the open horoball.
inline CertifiedReal penetration_depth(const Horoball& Y, const BoundaryPoint& u, const BoundaryPoint& v) {
    if (u == v) throw DomainError("penetration depth of a degenerate geodesic");
    BoundaryPoint t = Y.tangency();
    if (u == t || v == t) throw DomainError("geodesic ends at the horoball's tangency point");
    CertifiedReal d = projection_distance(Y, u, v);
    if (d.is_exact()) return certified_log(CertifiedReal(d.exact() / 2));
    return d.map([](const Interval& e, unsigned bits) {
        return log(Interval(e.lo / 2, e.hi / 2), bits);
    });
}

// ------------------------------------------------------- interior points

/// Exact interior point x + i y (y > 0).
struct Point {
    Rational x, y;
    friend bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
};

/// g(i) = ((ac + bd) + i) / (c^2 + d^2).
inline Point orbit_point(const GroupElement& g) {
    Integer n = g.c() * g.c() + g.d() * g.d();
    return {Rational(g.a() * g.c() + g.b() * g.d(), n), Rational(Integer(1), n)};
}

inline Point mobius_apply(const GroupElement& g, const Point& z) {
    Rational cx = Rational(g.c()) * z.x + Rational(g.d());
    Rational cy = Rational(g.c()) * z.y;
    Rational n = cx * cx + cy * cy;
    Rational r2 = z.x * z.x + z.y * z.y;
    Rational re = Rational(g.a() * g.c()) * r2 + Rational(g.a() * g.d() + g.b() * g.c()) * z.x + Rational(g.b() * g.d());
    return {re / n, z.y / n};
}

/// cosh of the hyperbolic distance: 1 + |z - w|^2 / (2 Im z Im w).
inline Rational cosh_distance(const Point& z, const Point& w) {
    Rational dx = z.x - w.x, dy = z.y - w.y;
    return 1 + (dx * dx + dy * dy) / (2 * z.y * w.y);
}

inline CertifiedReal hyperbolic_distance(const Point& z, const Point& w) {
    Rational c = cosh_distance(z, w);
    if (c == 1) return CertifiedReal(Rational(0));
    return certified_acosh(CertifiedReal(c));
}

/// Interior point known through enclosures of both coordinates.
struct CertifiedPoint {
    std::function<std::pair<Interval, Interval>(unsigned)> gen;
    std::pair<Interval, Interval> enclosure(unsigned bits) const { return gen(bits); }
    std::pair<double, double> approx() const {
        auto e = gen(64);
        return {e.first.approx(), e.second.approx()};
    }
};

/// Point at arclength t along the unit speed ray from g(i) toward xi.
inline CertifiedPoint geodesic_point(const GroupElement& g, const BoundaryPoint& xi, const CertifiedReal& t) {
    if (t.compare(Rational(0)) == Cmp::less) throw DomainError("negative ray time");
    Point z0 = orbit_point(g);
    if (xi.is_infinity()) {
        return {[z0, t](unsigned bits) {
            Interval e = exp(t.enclosure(bits + 8), bits + 4);
            return std::make_pair(Interval(z0.x), Interval(z0.y) * e);
        }};
    }
    QuadNumber x = xi.value();
    if (x == QuadNumber(z0.x)) {
        return {[z0, t](unsigned bits) {
            Interval e = exp(-t.enclosure(bits + 8), bits + 4);
            return std::make_pair(Interval(z0.x), Interval(z0.y) * e);
        }};
    }
    // semicircle through z0 ending at xi; e2 is its other endpoint
    QuadNumber x0(z0.x), r2(z0.x * z0.x + z0.y * z0.y);
    QuadNumber c = (r2 - x * x) / (QuadNumber(2) * (x0 - x));
    QuadNumber e2 = QuadNumber(2) * c - x;
    // s = |z0 - xi| / |z0 - e2|
    QuadNumber num2 = (x0 - x) * (x0 - x) + QuadNumber(z0.y * z0.y);
    QuadNumber den2 = (x0 - e2) * (x0 - e2) + QuadNumber(z0.y * z0.y);
    QuadNumber s2 = num2 / den2;
    QuadNumber gap = x - e2;
    if (gap.sign() < 0) gap = -gap;
    return {[x, e2, s2, gap, t](unsigned bits) {
        unsigned wb = bits + 16;
        Interval s = sqrt(s2.enclosure(wb), wb);
        Interval h = s * exp(-t.enclosure(wb), wb);
        Interval h2 = h * h;
        Interval one(Rational(1));
        Interval den = one + h2;
        Interval re = (x.enclosure(wb) + h2 * e2.enclosure(wb)) / den;
        Interval im = h * gap.enclosure(wb) / den;
        return std::make_pair(round_out(re, bits + 4), round_out(im, bits + 4));
    }};
}

/// Hyperbolic length of (ray from g(i) toward xi) intersected with the open
/// horoball Y. Infinite when the ray ends at Y's tangency point.
inline CertifiedReal ray_penetration(const GroupElement& g, const BoundaryPoint& xi, const Horoball& Y) {
    if (xi == Y.tangency()) return CertifiedReal::infinity();
    GroupElement M = normalizer(Y);
    Point z0 = orbit_point(M * g);
    BoundaryPoint target = mobius_apply(M, xi);
    // Y is now {Im z > 1}
    const QuadNumber x = target.value();
    if (x == QuadNumber(z0.x)) {
        if (z0.y <= 1) return CertifiedReal(Rational(0));
        return certified_log(CertifiedReal(z0.y));
    }
    QuadNumber x0(z0.x), r2(z0.x * z0.x + z0.y * z0.y);
    QuadNumber c = (r2 - x * x) / (QuadNumber(2) * (x0 - x));
    QuadNumber R2 = (x - c) * (x - c);
    if ((R2 - QuadNumber(1)).sign() <= 0) return CertifiedReal(Rational(0));
    // part of the semicircle above height 1: |x' - c| < w = sqrt(R^2 - 1);
    // the ray sweeps x' from x0 to xi, and |xi - c| = R > w
    bool toward_right = (x - x0).sign() > 0;
    // start is inside iff y0 > 1; otherwise the ray must cross the arc ahead
    if (z0.y <= 1) {
        // the arc lies ahead iff c - w or c + w is between x0 and xi, i.e.
        // iff the ray moves toward the center side: (c - x0) has the ray's sign
        int ahead = (c - x0).sign();
        if (ahead == 0 || (ahead > 0) != toward_right) return CertifiedReal(Rational(0));
    }
    return CertifiedReal::from_generator([=](unsigned bits) {
        unsigned wb = bits + 24;
        Interval ci = c.enclosure(wb);
        Interval R = sqrt(R2.enclosure(wb), wb);
        Interval w = sqrt(R2.enclosure(wb) - Interval(Rational(1)), wb);
        Interval start(z0.x);
        Interval end = toward_right ? ci + w : ci - w;
        if (z0.y <= 1) start = toward_right ? ci - w : ci + w;
        Interval u1 = (start - ci) / R, u2 = (end - ci) / R;
        // |u| < 1 holds exactly; clip interval spill
        Rational lim = 1 - pow2(-static_cast<long>(wb) + 8);
        auto clip = [&](Interval u) {
            return Interval(std::max(u.lo, Rational(-lim)), std::min(u.hi, lim));
        };
        Interval len = atanh(clip(u2), wb) - atanh(clip(u1), wb);
        Interval out = abs(len);
        return round_out(out, bits + 4);
    });
}

// --------------------------------------------------- fundamental domain

namespace detail {

inline bool in_closed_domain(const Point& z) {
    return abs(z.x) <= Rational(1, 2) && z.x * z.x + z.y * z.y >= 1;
}

// elements k with k F meeting F (the closure), as words in S, T
inline const std::vector<GroupElement>& domain_neighbors() {
    static const std::vector<GroupElement> ks = [] {
        std::vector<GroupElement> out;
        GroupElement gens[3] = {GroupElement::S(), GroupElement::T(), GroupElement::T().inverse()};
        std::vector<GroupElement> frontier{GroupElement::identity()};
        out.push_back(GroupElement::identity());
        for (int len = 0; len < 4; ++len) {
            std::vector<GroupElement> next;
            for (const auto& w : frontier) {
                for (const auto& s : gens) {
                    GroupElement h = w * s;
                    if (std::find(out.begin(), out.end(), h) == out.end()) {
                        out.push_back(h);
                        next.push_back(h);
                    }
                }
            }
            frontier = std::move(next);
        }
        return out;
    }();
    return ks;
}

// smaller sum of squares first, then larger (a, b, c, d)
inline bool canonical_before(const GroupElement& x, const GroupElement& y) {
    Integer sx = x.size(), sy = y.size();
    if (sx != sy) return sx < sy;
    return y < x;
}

}  // namespace detail

/// g with g^{-1} z in the closed standard fundamental domain; among all such
/// g (z on the domain boundary) the canonical one is returned.
inline GroupElement locate(const Point& z) {
    if (z.y <= 0) throw DomainError("point not in the upper half-plane");
    GroupElement g;
    Point w = z;
    for (int guard = 0; guard < 100000; ++guard) {
        Integer n = floor(w.x + Rational(1, 2));
        if (n != 0) {
            w.x -= Rational(n);
            g = g * GroupElement(1, n, 0, 1);
        }
        Rational r2 = w.x * w.x + w.y * w.y;
        if (r2 < 1) {
            w = {-w.x / r2, w.y / r2};
            g = g * GroupElement::S();
            continue;
        }
        break;
    }
    GroupElement best = g;
    for (const auto& k : detail::domain_neighbors()) {
        GroupElement h = g * k;
        if (detail::canonical_before(h, best) && detail::in_closed_domain(mobius_apply(h.inverse(), z))) best = h;
    }
    return best;
}

inline GroupElement locate_orbit(const GroupElement& g) { return locate(orbit_point(g)); }

/// Reduction for a certified point; throws Undecided if a branch cannot be
/// resolved at max refinement.
inline GroupElement locate(const CertifiedPoint& z) {
    for (unsigned level = 0; level <= max_refine(); ++level) {
        unsigned bits = refine_bits(level);
        auto [xi, yi] = z.enclosure(bits);
        if (yi.lo <= 0) continue;
        GroupElement g;
        Interval x = xi, y = yi;
        bool ok = true;
        for (int guard = 0; guard < 10000 && ok; ++guard) {
            Interval s = x + Interval(Rational(1, 2));
            Integer nlo = floor(s.lo), nhi = floor(s.hi);
            if (nlo != nhi) { ok = false; break; }
            if (nlo != 0) {
                x = x - Interval(Rational(nlo));
                g = g * GroupElement(1, nlo, 0, 1);
            }
            Interval r2 = x * x + y * y;
            if (r2.hi < 1) {
                Interval nx = -x / r2, ny = y / r2;
                x = round_out(nx, bits + 8);
                y = round_out(ny, bits + 8);
                g = g * GroupElement::S();
                continue;
            }
            if (r2.lo < 1) ok = false;
            break;
        }
        if (!ok) continue;
        // strictly interior in both tests: the answer is unique
        Interval r2 = x * x + y * y;
        if (r2.lo > 1 && x.lo > Rational(-1, 2) && x.hi < Rational(1, 2)) return g;
    }
    throw Undecided("locate: point too close to the domain boundary");
}

/// Word length in S, T^{+-1} by breadth-first search up to a radius.
inline std::vector<GroupElement> word_ball(unsigned radius) {
    std::vector<GroupElement> out{GroupElement::identity()};
    std::vector<GroupElement> frontier = out;
    GroupElement gens[3] = {GroupElement::S(), GroupElement::T(), GroupElement::T().inverse()};
    std::set<GroupElement> seen(out.begin(), out.end());
    for (unsigned r = 0; r < radius; ++r) {
        std::vector<GroupElement> next;
        for (const auto& w : frontier) {
            for (const auto& s : gens) {
                GroupElement h = w * s;
                if (seen.insert(h).second) {
                    out.push_back(h);
                    next.push_back(h);
                }
            }
        }
        frontier = std::move(next);
    }
    return out;
}

}  // namespace farey
