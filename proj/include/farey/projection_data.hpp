#pragma once

// Projection data: the abstract family interface, the Farey instance,
// exact enumeration of large projections and the axiom checkers.

#include "farey/hyperbolic.hpp"
#include "farey/sampling.hpp"

#include <json.hpp>

#include <optional>
#include <variant>

namespace farey {

/// An argument of a projection distance: a member of the family or a
/// boundary point.
class Argument {
public:
    Argument(const Horoball& Y) : v_(Y) {}
    Argument(const BoundaryPoint& x) : v_(x) {}

    bool is_horoball() const { return std::holds_alternative<Horoball>(v_); }
    const Horoball& horoball() const { return std::get<Horoball>(v_); }
    const BoundaryPoint& point() const { return std::get<BoundaryPoint>(v_); }

    /// Boundary point standing in for the argument (tangency for horoballs).
    BoundaryPoint position() const { return is_horoball() ? horoball().tangency() : point(); }

    std::string str() const { return is_horoball() ? "H(" + horoball().str() + ")" : point().str(); }

    friend bool operator==(const Argument& a, const Argument& b) {
        if (a.is_horoball() != b.is_horoball()) return false;
        return a.is_horoball() ? a.horoball() == b.horoball() : a.point() == b.point();
    }

private:
    std::variant<Horoball, BoundaryPoint> v_;
};

inline Argument act(const GroupElement& g, const Argument& a) {
    if (a.is_horoball()) return Argument(mobius_apply(g, a.horoball()));
    return Argument(mobius_apply(g, a.point()));
}

/// Projection data over an index family of horoball-like objects.
class ProjectionFamily {
public:
    virtual ~ProjectionFamily() = default;
    virtual int colors() const = 0;
    virtual int color(const Horoball& Y) const = 0;
    /// Whether xi lies in the open set Delta(Y).
    virtual bool in_domain(const Horoball& Y, const BoundaryPoint& xi) const = 0;
    virtual CertifiedReal distance(const Horoball& Y, const Argument& x, const Argument& z) const = 0;
    virtual Horoball basepoint() const = 0;
    virtual Horoball act(const GroupElement& g, const Horoball& Y) const = 0;
};

/// Ford horoballs with one color, Delta(Y) = the whole circle.
class FareyFamily final : public ProjectionFamily {
public:
    int colors() const override { return 1; }
    int color(const Horoball&) const override { return 0; }
    bool in_domain(const Horoball&, const BoundaryPoint&) const override { return true; }
    CertifiedReal distance(const Horoball& Y, const Argument& x, const Argument& z) const override {
        if ((x.is_horoball() && x.horoball() == Y) || (z.is_horoball() && z.horoball() == Y))
            throw DomainError("projection distance onto " + Y.str() + " from itself");
        return projection_distance(Y, x.position(), z.position());
    }
    Horoball basepoint() const override { return Horoball::infinity(); }
    Horoball act(const GroupElement& g, const Horoball& Y) const override { return mobius_apply(g, Y); }
};

// ------------------------------------------------ large projection search

struct WindowRequired : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Optional truncation of the search: denominators and/or an interval of
/// tangency points.
struct SearchWindow {
    std::optional<Integer> max_denominator;
    std::optional<std::pair<Rational, Rational>> interval;

    bool empty() const { return !max_denominator && !interval; }
};

struct LargeProjection {
    Horoball Y;
    CertifiedReal value;
};

struct LargeProjections {
    std::vector<LargeProjection> entries;  // sorted by (q, p)
    bool complete = true;                  // false if the window cut the search
    std::size_t nodes_visited = 0;
};

namespace detail {

// Lower bound of |det(Y, U)| = |p - q u| (or q for u = infinity) over the
// tangency points p/q of a Stern-Brocot subtree, as c * q^e for q >= Qmin.
struct Monomial {
    Rational c;
    int e;
};

// Upper bound on [a_n; a_{n+1}, ...]: the value lies between the truncation
// at a_{n+depth} and the same truncation with that term raised by one.
inline Rational complete_quotient_upper(const ContinuedFraction& cf, std::size_t n, std::size_t depth = 24) {
    Rational a = Rational(cf.at(n + depth)), b = a + 1;
    for (std::size_t k = n + depth; k-- > n;) {
        a = Rational(cf.at(k)) + 1 / a;
        b = Rational(cf.at(k)) + 1 / b;
    }
    return std::max(a, b);
}

// Lower bounds for q |q x - p| over reduced p/q, x irrational with periodic
// expansion. Non-convergents give >= 1/2 (Legendre); the convergent p_n/q_n
// gives exactly 1/(alpha_{n+1} + q_{n-1}/q_n). Early convergents are listed
// with their denominators; past them the ratio q_{n-1}/q_n is at most
// 1/(a_n + 1/(a_{n-1} + 1)), which is periodic in n, so one period of that
// bound covers the rest.
struct ApproximationBounds {
    std::vector<std::pair<Integer, Rational>> early;  // (q_n, bound)
    Rational tail;

    explicit ApproximationBounds(const ContinuedFraction& cf) {
        std::size_t span = cf.head.size() + 2 * cf.period.size() + 3;
        auto conv = convergents(cf, span + 1);
        for (std::size_t n = 0; n < span; ++n) {
            Rational ratio = n == 0 ? Rational(0) : Rational(conv[n - 1].second, conv[n].second);
            early.emplace_back(conv[n].second, 1 / (complete_quotient_upper(cf, n + 1) + ratio));
        }
        tail = Rational(1, 2);
        std::size_t start = std::max<std::size_t>(2, cf.head.size() + 1);
        for (std::size_t n = start; n < start + cf.period.size(); ++n) {
            Rational ratio = 1 / (Rational(cf.at(n)) + 1 / (Rational(cf.at(n - 1)) + 1));
            tail = std::min(tail, 1 / (complete_quotient_upper(cf, n + 1) + ratio));
        }
    }

    /// Bound valid for all q >= Qmin.
    Rational at_least(const Integer& Qmin) const {
        Rational c = tail;
        for (const auto& [q, v] : early)
            if (q >= Qmin) c = std::min(c, v);
        return c;
    }

    Rational overall() const { return at_least(0); }
};

struct ArgBound {
    BoundaryPoint x;
    bool inf = false, rational = false;
    Rational value;        // rational value
    Integer den;           // denominator of the rational value
    Interval enclosure;    // irrational value
    std::optional<ApproximationBounds> approx;  // irrational only

    explicit ArgBound(const BoundaryPoint& p) : x(p) {
        if (p.is_infinity()) {
            inf = true;
        } else if (p.is_rational()) {
            rational = true;
            value = p.rational_value();
            den = farey::den(value);
        } else {
            enclosure = p.value().enclosure(160);
            approx.emplace(continued_fraction(p.value()));
        }
    }

    // distance from the value to the closed interval [lo, hi] (lo_inf: lo = -inf)
    // as a certified lower bound, zero if inside or touching
    Rational distance_lower(bool lo_inf, const Rational& lo, bool hi_inf, const Rational& hi) const {
        Rational xlo = rational ? value : enclosure.lo;
        Rational xhi = rational ? value : enclosure.hi;
        if (!lo_inf && xhi < lo) return lo - xhi;
        if (!hi_inf && xlo > hi) return xlo - hi;
        return 0;
    }

    std::vector<Monomial> bounds(bool lo_inf, const Rational& lo, bool hi_inf, const Rational& hi,
                                 const Integer& Qmin) const {
        std::vector<Monomial> out;
        if (inf) {
            out.push_back({Rational(1), 1});
            return out;
        }
        Rational dist = distance_lower(lo_inf, lo, hi_inf, hi);
        if (dist > 0) out.push_back({dist, 1});
        if (rational) out.push_back({Rational(Integer(1), den), 0});
        else out.push_back({approx->at_least(Qmin), -1});
        return out;
    }
};

inline Rational power(const Rational& x, int e) {
    Rational r = 1;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

}  // namespace detail

/// All Y = p/q with d_Y(u, v) > theta. Horoball arguments exclude their own
/// index; boundary point arguments at a tangency give an Infinite entry.
/// Without a window, irrational arguments whose approximation constant is
/// too small make the set infinite and WindowRequired is thrown.
inline LargeProjections enumerate_large_projections(const Argument& u, const Argument& v, const Rational& theta,
                                                    const SearchWindow& window = {},
                                                    std::size_t node_budget = 20000000) {
    if (theta <= 0) throw DomainError("theta must be positive");
    LargeProjections out;
    BoundaryPoint pu = u.position(), pv = v.position();
    if (pu == pv) return out;

    detail::ArgBound bu(pu), bv(pv);
    // numerator |det(U, V)|: |u - v| or 1 when one argument is infinity
    CertifiedReal numer = (pu.is_infinity() || pv.is_infinity())
                              ? CertifiedReal(Rational(1))
                              : projection_distance(Horoball::infinity(), pu, pv);
    // L = numerator / theta, as a lower/upper rational pair for pruning
    Interval numer_enc = numer.is_exact() ? Interval(numer.exact()) : numer.enclosure(160);
    Rational L_hi = numer_enc.hi / theta;

    // termination: near an irrational x the product stays about c_x * |x - y|
    // where c_x is the bound for large denominators
    auto check_terminates = [&](const detail::ArgBound& x, const detail::ArgBound& y) {
        if (x.inf || x.rational) return;
        bool ok;
        if (y.inf) {
            ok = x.approx->tail >= Rational(1) / theta;
        } else {
            Rational gap = y.rational ? Rational(abs(y.value - x.enclosure.mid()) - x.enclosure.width())
                                      : Rational(abs(y.enclosure.mid() - x.enclosure.mid()) - x.enclosure.width() - y.enclosure.width());
            ok = x.approx->tail * gap > numer_enc.hi / theta;
        }
        bool windowed = window.max_denominator.has_value();
        if (!ok && !windowed) {
            if (window.interval && !(window.interval->first < x.enclosure.hi && x.enclosure.lo < window.interval->second)) return;
            throw WindowRequired("window required: " + x.x.str() + " is approximated too well for theta = " + to_string(theta));
        }
    };
    check_terminates(bu, bv);
    check_terminates(bv, bu);

    auto excluded = [&](const Horoball& Y) {
        return (u.is_horoball() && u.horoball() == Y) || (v.is_horoball() && v.horoball() == Y);
    };
    auto in_window = [&](const Horoball& Y) {
        if (window.max_denominator && Y.q() > *window.max_denominator) return false;
        if (window.interval) {
            if (Y.is_infinity()) return false;
            Rational t(Y.p(), Y.q());
            if (t < window.interval->first || t > window.interval->second) return false;
        }
        return true;
    };
    // tangency points of boundary arguments are solutions (Infinite); they are
    // added here because the subtree bounds below skip them
    std::vector<Horoball> tangent;
    for (const Argument* a : {&u, &v}) {
        if (a->is_horoball()) continue;
        if (auto Y = as_horoball(a->point())) tangent.push_back(*Y);
    }
    for (const auto& Y : tangent)
        if (in_window(Y)) out.entries.push_back({Y, CertifiedReal::infinity()});
    auto consider = [&](const Horoball& Y) {
        if (excluded(Y) || !in_window(Y)) return;
        if (std::find(tangent.begin(), tangent.end(), Y) != tangent.end()) return;
        CertifiedReal d = projection_distance(Y, pu, pv);
        Cmp c = d.compare(theta);
        if (c == Cmp::undecided) throw Undecided("large projection test undecided at " + Y.str());
        if (c == Cmp::greater) out.entries.push_back({Y, d});
    };

    consider(Horoball::infinity());
    consider(Horoball(0, 1));

    // subtrees of the Stern-Brocot tree between adjacent a/b < c/d
    struct Node {
        Integer a, b, c, d;
    };
    std::vector<Node> stack{{-1, 0, 0, 1}, {0, 1, 1, 0}};
    while (!stack.empty()) {
        Node n = std::move(stack.back());
        stack.pop_back();
        if (++out.nodes_visited > node_budget) throw WindowRequired("search budget exhausted; supply a window");
        Integer Qmin = n.b + n.d;
        bool lo_inf = n.b == 0, hi_inf = n.d == 0;
        Rational lo = lo_inf ? Rational(0) : Rational(n.a, n.b);
        Rational hi = hi_inf ? Rational(0) : Rational(n.c, n.d);

        // lower bound of |det(Y,U)| |det(Y,V)| over the open subtree
        auto mu = bu.bounds(lo_inf, lo, hi_inf, hi, Qmin), mv = bv.bounds(lo_inf, lo, hi_inf, hi, Qmin);
        bool pruned = false;
        Rational Q(Qmin);
        for (const auto& a : mu) {
            for (const auto& b : mv) {
                int e = a.e + b.e;
                if (e < 0) continue;
                if (a.c * b.c * detail::power(Q, e) >= L_hi) pruned = true;
            }
        }
        if (pruned) continue;
        // past this point the subtree may hold solutions; a window cut makes
        // the answer partial
        if (window.max_denominator && Qmin > *window.max_denominator) {
            out.complete = false;
            continue;
        }
        if (window.interval) {
            const auto& [wlo, whi] = *window.interval;
            if ((!hi_inf && hi <= wlo) || (!lo_inf && lo >= whi)) {
                out.complete = false;
                continue;
            }
        }
        Integer p = n.a + n.c, q = Qmin;
        consider(Horoball(p, q));
        stack.push_back({n.a, n.b, p, q});
        stack.push_back({p, q, n.c, n.d});
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const LargeProjection& x, const LargeProjection& y) { return x.Y < y.Y; });
    return out;
}

/// Reference search: every Y with q <= qmax, p restricted to the range
/// outside of which both factors exceed sqrt(L). Rational/infinite arguments.
inline std::vector<Horoball> brute_force_large_projections(const Argument& u, const Argument& v, const Rational& theta,
                                                           std::int64_t qmax) {
    std::vector<Horoball> out;
    BoundaryPoint pu = u.position(), pv = v.position();
    if (pu == pv) return out;
    SmallVec U = small_vec(pu), V = small_vec(pv);
    // excluded indices as primitive vectors
    std::vector<SmallVec> skip;
    if (u.is_horoball()) skip.push_back(small_vec(u.horoball()));
    if (v.is_horoball()) skip.push_back(small_vec(v.horoball()));
    i128 thn = num(theta).convert_to<long long>(), thd = den(theta).convert_to<long long>();
    auto test = [&](std::int64_t p, std::int64_t q) {
        for (const auto& s : skip)
            if (s.x == p && s.y == q) return;
        auto [n, dd] = projection_distance_small({p, q}, U, V);
        // d = n / dd > theta  <=>  n * thd > thn * dd ; dd == 0 means Infinite
        if (dd == 0 || n * thd > thn * dd) out.emplace_back(p, q);
    };
    test(1, 0);
    i128 N = pu.is_infinity() || pv.is_infinity() ? 1 : abs128(static_cast<i128>(U.x) * V.y - static_cast<i128>(U.y) * V.x);
    // L = |det(U,V)| / (theta * |U.y| |V.y|) in terms of |p - q u| |p - q v|
    double L = static_cast<double>(N) / to_double(theta);
    for (std::int64_t q = 1; q <= qmax; ++q) {
        double lo, hi;
        if (pu.is_infinity() || pv.is_infinity()) {
            // q * |p - q w| < L / (denominator scaling) -> |p - q w| < L_scaled / q
            SmallVec W = pu.is_infinity() ? V : U;
            double w = static_cast<double>(W.x) / static_cast<double>(W.y);
            double r = L / (static_cast<double>(W.y) * q) + 2;
            lo = q * w - r;
            hi = q * w + r;
        } else {
            double a = static_cast<double>(U.x) / U.y, b = static_cast<double>(V.x) / V.y;
            double s = std::sqrt(L / (static_cast<double>(U.y) * V.y)) + 2;
            lo = q * std::min(a, b) - s;
            hi = q * std::max(a, b) + s;
        }
        for (auto p = static_cast<std::int64_t>(std::floor(lo)); p <= static_cast<std::int64_t>(std::ceil(hi)); ++p) {
            if (std::gcd(p, q) != 1) continue;
            test(p, q);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ------------------------------------------------------------- reports

struct AxiomReport {
    std::string axiom;
    std::size_t samples = 0;
    std::size_t violations = 0;
    std::size_t undecided = 0;
    std::optional<std::string> constant;  // exact rational text when available
    std::optional<double> constant_approx;
    std::vector<std::string> witnesses;

    bool passed() const { return violations == 0; }

    void witness(std::string w) {
        if (witnesses.size() < 8) witnesses.push_back(std::move(w));
    }
};

inline nlohmann::ordered_json to_json(const AxiomReport& r) {
    nlohmann::ordered_json j;
    j["axiom"] = r.axiom;
    j["samples"] = r.samples;
    j["violations"] = r.violations;
    j["undecided"] = r.undecided;
    j["constant"] = r.constant ? nlohmann::ordered_json(*r.constant) : nlohmann::ordered_json(nullptr);
    j["constant_approx"] = r.constant_approx ? nlohmann::ordered_json(*r.constant_approx) : nlohmann::ordered_json(nullptr);
    j["witnesses"] = r.witnesses;
    return j;
}

struct Triple {
    Horoball Y;
    Argument x, z;
};

struct Quad {
    Horoball Y;
    Argument x, z, xi;
};

/// (P1): d_Y(X, Z) = d_Y(Z, X).
inline AxiomReport check_symmetry(const ProjectionFamily& fam, const std::vector<Triple>& sample) {
    AxiomReport r{"P1 symmetry"};
    for (const auto& t : sample) {
        ++r.samples;
        CertifiedReal a = fam.distance(t.Y, t.x, t.z), b = fam.distance(t.Y, t.z, t.x);
        Cmp c = a.compare(b);
        if (c == Cmp::undecided) {
            ++r.undecided;
        } else if (c != Cmp::equal) {
            ++r.violations;
            r.witness(t.Y.str() + " " + t.x.str() + " " + t.z.str());
        }
    }
    return r;
}

/// (P2): d_Y(X, Z) + d_Y(Z, xi) >= d_Y(X, xi).
inline AxiomReport check_triangle(const ProjectionFamily& fam, const std::vector<Quad>& sample) {
    AxiomReport r{"P2 triangle"};
    for (const auto& t : sample) {
        ++r.samples;
        CertifiedReal lhs = certified_add(fam.distance(t.Y, t.x, t.z), fam.distance(t.Y, t.z, t.xi));
        CertifiedReal rhs = fam.distance(t.Y, t.x, t.xi);
        Cmp c = lhs.compare(rhs);
        if (c == Cmp::less) {
            ++r.violations;
            r.witness(t.Y.str() + " " + t.x.str() + " " + t.z.str() + " " + t.xi.str());
        } else if (c == Cmp::undecided) {
            // equality of non-exact sides is not decidable by refinement
            ++r.undecided;
        }
    }
    return r;
}

/// (P3): reports the max over the sample of min{d_Y(Y', xi), d_Y'(Y, xi)};
/// violations are samples where the min is not below theta.
inline AxiomReport check_behrstock(const ProjectionFamily& fam, const std::vector<Triple>& sample,
                                   const Rational& theta) {
    AxiomReport r{"P3 inequality on triples"};
    std::optional<CertifiedReal> worst;
    std::string worst_text;
    for (const auto& t : sample) {
        if (!t.x.is_horoball()) throw DomainError("behrstock sample needs (Y, Y', xi)");
        const Horoball& Y2 = t.x.horoball();
        if (Y2 == t.Y) continue;
        ++r.samples;
        CertifiedReal a = fam.distance(t.Y, Argument(Y2), t.z);
        CertifiedReal b = fam.distance(Y2, Argument(t.Y), t.z);
        Cmp ab = a.compare(b);
        if (ab == Cmp::undecided) {
            ++r.undecided;
            continue;
        }
        CertifiedReal m = (ab == Cmp::greater) ? b : a;
        if (m.is_infinite()) {
            ++r.violations;
            r.witness(t.Y.str() + " " + Y2.str() + " " + t.z.str() + " both infinite");
            continue;
        }
        Cmp mt = m.compare(theta);
        if (mt == Cmp::undecided) ++r.undecided;
        if (mt == Cmp::greater || mt == Cmp::equal) {
            ++r.violations;
            r.witness(t.Y.str() + " " + Y2.str() + " " + t.z.str());
        }
        if (!worst || m.compare(*worst) == Cmp::greater) {
            worst = m;
            worst_text = t.Y.str() + " " + Y2.str() + " " + t.z.str();
        }
    }
    if (worst) {
        if (worst->is_exact()) r.constant = to_string(worst->exact());
        r.constant_approx = worst->approx();
        r.witnesses.insert(r.witnesses.begin(), "max at " + worst_text);
    }
    return r;
}

/// (P4): windowed enumeration against the reference search on rational pairs.
inline AxiomReport check_finiteness(const std::vector<std::pair<Argument, Argument>>& sample, const Rational& theta,
                                    std::int64_t qmax) {
    AxiomReport r{"P4 finiteness"};
    for (const auto& [u, v] : sample) {
        ++r.samples;
        auto fast = enumerate_large_projections(u, v, theta);
        std::vector<Horoball> got;
        for (const auto& e : fast.entries)
            if (e.Y.q() <= qmax) got.push_back(e.Y);
        auto ref = brute_force_large_projections(u, v, theta, qmax);
        if (got != ref || !fast.complete) {
            ++r.violations;
            r.witness(u.str() + " " + v.str());
        }
    }
    return r;
}

/// Interval neighborhood of a boundary point: [lo, hi] around a finite
/// center, or {|x| >= 1/delta} plus infinity around infinity.
struct Neighborhood {
    BoundaryPoint center;
    Rational delta;
    Rational lo, hi;
    bool around_infinity = false;

    bool contains(const BoundaryPoint& x) const {
        if (around_infinity) return x.is_infinity() || (x.value() < QuadNumber(-1 / delta)) || (QuadNumber(1 / delta) < x.value());
        if (x.is_infinity()) return false;
        return !(x.value() < QuadNumber(lo)) && !(QuadNumber(hi) < x.value());
    }

    std::string str() const {
        if (around_infinity) return "|x| > " + to_string(1 / delta);
        return "[" + to_string(lo) + ", " + to_string(hi) + "]";
    }
};

/// Lower bound of d_Y(x, .) over a closed interval of finite boundary points.
/// nullopt when x is the tangency point of Y and U misses it (d is infinite on U).
inline std::optional<Rational> projection_lower_bound(const Horoball& Y, const BoundaryPoint& x, const Interval& U) {
    // |det(X, W)| / (|det(Y, X)| |det(Y, W)|) with W = (w, 1), w in U
    auto X = x.vec();
    Interval x1 = X.first.enclosure(128), x2 = X.second.enclosure(128);
    Interval p(Rational(Y.p())), q(Rational(Y.q()));
    Interval one(Rational(1));
    Interval n = abs(x1 * one - x2 * U);
    Interval dx = abs(p * x2 - q * x1);
    Interval dw = abs(p * one - q * U);
    if (dx.hi == 0) {
        if (n.lo > 0) return std::nullopt;
        return Rational(0);
    }
    Interval den = dx * dw;
    if (den.hi == 0) return Rational(0);
    return n.lo / den.hi;
}

/// Neighborhood U of xi with d_Y(x, xi') > bound for every xi' in U, or
/// nullopt if none is found with delta >= 2^-max_halvings.
inline std::optional<Neighborhood> certify_lower_bound(const Horoball& Y, const BoundaryPoint& x,
                                                       const BoundaryPoint& xi, const Rational& bound,
                                                       unsigned max_halvings = 64) {
    if (xi.is_infinity()) {
        // move infinity to 0 with S; the neighborhood is then S of [-delta, delta]
        GroupElement s = GroupElement::S();
        auto n = certify_lower_bound(mobius_apply(s, Y), mobius_apply(s, x), BoundaryPoint(0), bound, max_halvings);
        if (!n) return std::nullopt;
        Neighborhood out;
        out.center = xi;
        out.delta = n->delta;
        out.around_infinity = true;
        return out;
    }
    Interval c = xi.value().enclosure(128);
    Rational delta = 1;
    for (unsigned k = 0; k <= max_halvings; ++k, delta /= 2) {
        Interval U(c.lo - delta, c.hi + delta);
        auto lb = projection_lower_bound(Y, x, U);
        if (!lb || *lb > bound) {
            Neighborhood out;
            out.center = xi;
            out.delta = delta;
            out.lo = U.lo;
            out.hi = U.hi;
            return out;
        }
    }
    return std::nullopt;
}

/// (P5): for each (Y, X, xi) with d_Y(X, xi) >= Theta, certify a
/// neighborhood on which d_Y(X, .) > Theta - theta.
inline AxiomReport check_semicontinuity(const ProjectionFamily& fam, const std::vector<Triple>& sample,
                                        const Rational& Theta, const Rational& theta) {
    AxiomReport r{"P5 coarse semicontinuity"};
    for (const auto& t : sample) {
        if (t.z.is_horoball()) continue;
        CertifiedReal d = fam.distance(t.Y, t.x, t.z);
        Cmp c = d.compare(Theta);
        if (c == Cmp::undecided) {
            ++r.undecided;
            continue;
        }
        if (c == Cmp::less) continue;
        ++r.samples;
        if (Theta - theta < 0) continue;  // any neighborhood works
        auto n = certify_lower_bound(t.Y, t.x.position(), t.z.point(), Theta - theta);
        if (!n) {
            ++r.undecided;
            r.witness("uncertified " + t.Y.str() + " " + t.x.str() + " " + t.z.str());
        }
    }
    return r;
}

// ------------------------------------------------------------- sampling

inline std::vector<Triple> sample_triples(Rng& rng, std::size_t n, std::int64_t qmax, bool surds) {
    std::vector<Triple> out;
    out.reserve(n);
    while (out.size() < n) {
        Horoball Y = Horoball::at(random_rational(rng, qmax));
        if (rng.below(10) == 0) Y = Horoball::infinity();
        auto arg = [&]() -> Argument {
            std::uint64_t k = rng.below(3);
            if (k == 0) {
                Horoball X = rng.below(10) == 0 ? Horoball::infinity() : Horoball::at(random_rational(rng, qmax));
                return Argument(X);
            }
            if (surds && k == 1) return Argument(random_surd(rng, 3));
            return Argument(BoundaryPoint(random_rational(rng, qmax)));
        };
        Argument x = arg(), z = arg();
        if ((x.is_horoball() && x.horoball() == Y) || (z.is_horoball() && z.horoball() == Y)) continue;
        out.push_back({Y, x, z});
    }
    return out;
}

inline Argument translate(const GroupElement& g, const Argument& a) { return act(g, a); }

inline Triple translate(const GroupElement& g, const Triple& t) {
    return {mobius_apply(g, t.Y), act(g, t.x), act(g, t.z)};
}

/// Exhaustive Behrstock window modulo the group: Y = infinity, Y' = p/q in
/// [0, 1) with q <= qmax, xi any p/q in [lo, hi] with q <= qmax, or infinity,
/// as horoball or boundary point.
inline std::vector<Triple> behrstock_window(std::int64_t qmax, std::int64_t lo = -2, std::int64_t hi = 3) {
    std::vector<Rational> unit, span;
    for (std::int64_t q = 1; q <= qmax; ++q) {
        for (std::int64_t p = 0; p < q; ++p)
            if (std::gcd(p, q) == 1) unit.emplace_back(p, q);
        for (std::int64_t p = lo * q; p <= hi * q; ++p)
            if (std::gcd(p, q) == 1) span.emplace_back(p, q);
    }
    std::vector<Triple> out;
    for (const auto& y : unit) {
        Horoball Y2 = Horoball::at(y);
        out.push_back({Horoball::infinity(), Argument(Y2), Argument(BoundaryPoint::infinity())});
        for (const auto& x : span) {
            out.push_back({Horoball::infinity(), Argument(Y2), Argument(BoundaryPoint(x))});
            Horoball X = Horoball::at(x);
            if (X != Y2) out.push_back({Horoball::infinity(), Argument(Y2), Argument(X)});
        }
    }
    return out;
}

/// check_behrstock over behrstock_window(qmax, lo, hi) in 128-bit arithmetic.
/// A horoball argument has the same distances as its tangency point except
/// when it equals Y', where the triple is skipped, so each point is evaluated
/// once and counted twice.
inline AxiomReport behrstock_window_constant(std::int64_t qmax, const Rational& theta, std::int64_t lo = -2,
                                             std::int64_t hi = 3) {
    AxiomReport r{"P3 inequality on triples"};
    const i128 tn = num(theta).convert_to<long long>(), td = den(theta).convert_to<long long>();
    i128 bn = -1, bd = 1;  // best so far, -1 when empty
    std::string where;
    std::vector<SmallVec> span;
    for (std::int64_t q = 1; q <= qmax; ++q)
        for (std::int64_t p = lo * q; p <= hi * q; ++p)
            if (std::gcd(p, q) == 1) span.push_back({p, q});
    const SmallVec inf{1, 0};
    auto consider = [&](i128 n, i128 d, const SmallVec& y, const SmallVec& x, std::size_t weight = 1) {
        if (n * td >= tn * d) {
            r.violations += weight;
            r.witness(std::to_string(y.x) + "/" + std::to_string(y.y) + " " + std::to_string(x.x) + "/" +
                      std::to_string(x.y));
        }
        if (bn < 0 || n * bd > bn * d) {
            bn = n;
            bd = d;
            where = "inf " + std::to_string(y.x) + "/" + std::to_string(y.y) + " " +
                    (x.y == 0 ? std::string("inf") : std::to_string(x.x) + "/" + std::to_string(x.y));
        }
    };
    for (std::int64_t q = 1; q <= qmax; ++q) {
        for (std::int64_t p = 0; p < q; ++p) {
            if (std::gcd(p, q) != 1) continue;
            SmallVec y{p, q};
            // xi = infinity: d_inf(Y', inf) is infinite, d_Y'(inf, inf) = 0
            ++r.samples;
            consider(0, 1, y, inf);
            for (const auto& x : span) {
                bool at_y = x.x == y.x && x.y == y.y;
                r.samples += at_y ? 1 : 2;
                if (at_y) {
                    // d_Y'(inf, Y') is infinite; the min is d_inf(Y', Y') = 0
                    consider(0, 1, y, x);
                    continue;
                }
                auto [an, ad] = projection_distance_small(inf, y, x);
                auto [cn, cd] = projection_distance_small(y, inf, x);
                if (an * cd <= cn * ad) consider(an, ad, y, x, 2);
                else consider(cn, cd, y, x, 2);
            }
        }
    }
    if (bn >= 0) {
        Rational best(to_integer(bn), to_integer(bd));
        r.constant = to_string(best);
        r.constant_approx = to_double(best);
        r.witnesses.insert(r.witnesses.begin(), "max at " + where);
    }
    return r;
}

}  // namespace farey
