#pragma once

// The thin-part cover on the Farey instance. Base point X = the horoball at
// infinity; everything is computed at the identity and moved by g:
// Z(g, xi) = g Z(e, g^-1 xi), Y_i(g, xi) = g Y_i(e, g^-1 xi).
//
// Membership in the interior U(Y, i) is certified on an interval around
// g^-1 xi: if d_Z(X, .) > max(Theta_4, Theta_2 + theta_P + theta) there, then
// by (P2), (P3) every possible Z(e, zeta) either precedes Z with
// d_C(X, Z) > Theta_2 + theta_P or lies past Z with d_Z(X, C) > Theta_2 + theta_P,
// and in both cases the angle lemmas give Y_i(e, zeta) = Y_i(e, xi).

#include "farey/projection_complex.hpp"
#include "farey/sampling.hpp"

#include <array>
#include <unordered_map>

namespace farey {

struct LadderCheck {
    std::string name;
    bool ok;
};

struct ThetaLadder {
    Rational theta;    // Behrstock constant
    Rational theta_S;  // finite-part constant
    Rational theta_P;  // projection complex constant
    Rational K;        // complex edge parameter
    std::array<Rational, 6> Theta;

    /// Theta_i = 10 (i + 1) (theta + theta_S)
    static ThetaLadder standard(const Rational& theta, const Rational& theta_S, const Rational& theta_P,
                                const Rational& K) {
        ThetaLadder l{theta, theta_S, theta_P, K, {}};
        for (int i = 0; i < 6; ++i) l.Theta[static_cast<std::size_t>(i)] = 10 * (i + 1) * (theta + theta_S);
        return l;
    }

    const Rational& operator[](int i) const { return Theta[static_cast<std::size_t>(i)]; }

    /// Threshold the certificate needs on the interval.
    Rational certificate_bound() const { Rational b = Theta[2] + theta_P + theta;
        return std::max(Theta[4], b); }

    /// Every inequality the construction and its proofs rely on.
    std::vector<LadderCheck> audit() const {
        const auto& T = Theta;
        const Rational& t = theta;
        const Rational& s = theta_S;
        std::vector<LadderCheck> c;
        bool inc = true;
        for (int i = 0; i + 1 < 6; ++i) inc = inc && T[static_cast<std::size_t>(i)] < T[static_cast<std::size_t>(i + 1)];
        c.push_back({"strictly increasing", inc});
        c.push_back({"Theta_0 > theta_P", T[0] > theta_P});
        c.push_back({"Theta_0 - theta_S > theta_S", T[0] - s > s});
        c.push_back({"Theta_1 - theta_S > Theta_0", T[1] - s > T[0]});
        c.push_back({"Theta_2 - theta_S > Theta_1", T[2] - s > T[1]});
        c.push_back({"Theta_3 > theta_P", T[3] > theta_P});
        c.push_back({"Theta_4 - theta_S - theta > Theta_3 + theta_S", T[4] - s - t > T[3] + s});
        c.push_back({"Theta_5 - Theta_3 - theta_S > theta", T[5] - T[3] - s > t});
        c.push_back({"Theta_5 - theta_S - theta > Theta_4", T[5] - s - t > T[4]});
        // selection by a countable rule only guarantees > Theta_4 + theta
        c.push_back({"Theta_5 - theta_S - 2 theta > Theta_4", T[5] - s - 2 * t > T[4]});
        c.push_back({"Theta_4 - Theta_2 - theta_P > theta", T[4] - T[2] - theta_P > t});
        c.push_back({"Theta_0 - theta_P - theta > 0", T[0] - theta_P - t > 0});
        return c;
    }

    bool sufficient() const {
        for (const auto& c : audit())
            if (!c.ok) return false;
        return true;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["theta"] = to_string(theta);
        j["theta_S"] = to_string(theta_S);
        j["theta_P"] = to_string(theta_P);
        j["K"] = to_string(K);
        std::vector<std::string> T;
        for (const auto& x : Theta) T.push_back(to_string(x));
        j["Theta"] = T;
        return j;
    }
};

inline Horoball base_horoball() { return Horoball::infinity(); }

struct FinitePart {
    std::vector<GroupElement> elements;  // sorted, contains e, closed under inverse
    std::vector<Horoball> orbit;         // S . X, sorted

    static FinitePart from(std::vector<GroupElement> s) {
        s.push_back(GroupElement::identity());
        std::vector<GroupElement> inv;
        for (const auto& g : s) inv.push_back(g.inverse());
        s.insert(s.end(), inv.begin(), inv.end());
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        FinitePart f{std::move(s), {}};
        for (const auto& g : f.elements) f.orbit.push_back(mobius_apply(g, base_horoball()));
        std::sort(f.orbit.begin(), f.orbit.end());
        f.orbit.erase(std::unique(f.orbit.begin(), f.orbit.end()), f.orbit.end());
        return f;
    }

    static FinitePart ball(unsigned radius) { return from(word_ball(radius)); }
};

/// max over Y of d_Y(A, B), A != B horoballs.
inline Rational max_projection(const Horoball& a, const Horoball& b) {
    Rational t(1, 2);
    for (int k = 0; k < 64; ++k, t /= 2) {
        auto r = enumerate_large_projections(Argument(a), Argument(b), t);
        Rational m = 0;
        for (const auto& e : r.entries) m = std::max(m, e.value.exact());
        if (!r.entries.empty()) return m;
    }
    return 0;
}

/// sup of d_Y(X, X') over X, X' in S . X and Y.
inline Rational theta_S_raw(const FinitePart& S) {
    Rational m = 0;
    for (std::size_t i = 0; i < S.orbit.size(); ++i)
        for (std::size_t j = i + 1; j < S.orbit.size(); ++j) m = std::max(m, max_projection(S.orbit[i], S.orbit[j]));
    return m;
}

/// The raw value inflated by theta_P for the angle version of the lemma; a
/// single orbit point needs no constant.
inline Rational theta_S(const FinitePart& S, const Rational& theta_P) {
    if (S.orbit.size() <= 1) return 0;
    return theta_S_raw(S) + theta_P;
}

// ------------------------------------------------------------- selection

struct ZChoice {
    Horoball Y;
    CertifiedReal value;  // d_Y(X, xi)
    bool above5 = false;
    bool tie = false;     // another Y reaches the same maximum
};

/// Argmax of d_Y(X, xi) among Y with value > Theta_4, ties by smaller (q, p).
/// Throws WindowRequired when the search cannot be bounded.
inline std::optional<ZChoice> select_Z_identity(const BoundaryPoint& xi, const ThetaLadder& L) {
    auto r = enumerate_large_projections(Argument(base_horoball()), Argument(xi), L[4]);
    if (r.entries.empty()) return std::nullopt;
    // entries come sorted by (q, p); keep the first strict maximum
    const LargeProjection* best = &r.entries[0];
    bool tie = false;
    for (std::size_t k = 1; k < r.entries.size(); ++k) {
        Cmp c = r.entries[k].value.compare(best->value);
        if (c == Cmp::undecided) throw Undecided("argmax undecided at " + r.entries[k].Y.str());
        if (c == Cmp::greater) {
            best = &r.entries[k];
            tie = false;
        } else if (c == Cmp::equal) {
            tie = true;
        }
    }
    ZChoice z{best->Y, best->value, false, tie};
    Cmp c5 = best->value.compare(L[5]);
    if (c5 == Cmp::undecided) throw Undecided("Theta_5 comparison undecided");
    z.above5 = c5 == Cmp::greater;
    return z;
}

inline std::optional<ZChoice> select_Z(const GroupElement& g, const BoundaryPoint& xi, const ThetaLadder& L) {
    auto z = select_Z_identity(mobius_apply(g.inverse(), xi), L);
    if (z) z->Y = mobius_apply(g, z->Y);
    return z;
}

struct UniquenessFailure : std::logic_error {
    using std::logic_error::logic_error;
};

/// Window on the linear order from X to Z: X, Z and every W with
/// d_W(X, Z) > Theta_0 - theta_P - theta. Vertices below that bound have
/// dmax < Theta_0 and cannot be any Y_i or block one.
inline Window order_window(const Horoball& Z, const ThetaLadder& L) {
    std::vector<Horoball> v{base_horoball(), Z};
    auto r = enumerate_large_projections(Argument(base_horoball()), Argument(Z), L[0] - L.theta_P - L.theta);
    for (const auto& e : r.entries) v.push_back(e.Y);
    return explicit_window(std::move(v), L.K, "order from inf to " + Z.str());
}

/// Y_i(e, .) given Z = Z(e, .): the unique W with dmax_Y(X, W) < Theta_i for
/// all Y != X, W and W = Z or dmax_W(X, Z) >= Theta_i.
inline Horoball select_Yi_from(const ProjComplexGraph& g, const Horoball& Z, int i, const ThetaLadder& L) {
    int x = g.at(base_horoball()), z = g.at(Z);
    const Rational& T = L[i];
    std::vector<int> found;
    for (int w = 0; w < g.size(); ++w) {
        if (w == x) continue;
        if (w != z && g.dmax(x, z, w) < T) continue;
        bool first = true;
        for (int y = 0; y < g.size() && first; ++y) {
            if (y == x || y == w) continue;
            if (g.dmax(x, w, y) >= T) first = false;
        }
        if (first) found.push_back(w);
    }
    if (found.size() != 1)
        throw UniquenessFailure("Y_" + std::to_string(i) + " not unique (" + std::to_string(found.size()) +
                                " candidates) towards " + Z.str());
    return g.vertex(found[0]);
}

inline std::optional<Horoball> select_Yi(const GroupElement& h, const BoundaryPoint& xi, int i, const ThetaLadder& L) {
    BoundaryPoint e_xi = mobius_apply(h.inverse(), xi);
    auto z = select_Z_identity(e_xi, L);
    if (!z) return std::nullopt;
    ProjComplexGraph g(order_window(z->Y, L));
    return mobius_apply(h, select_Yi_from(g, z->Y, i, L));
}

// ------------------------------------------------------------- membership

enum class Verdict { yes, no, boundary_uncertain };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::yes: return "yes";
        case Verdict::no: return "no";
        default: return "boundary-uncertain";
    }
}

/// Everything about (e, xi) the cover needs, computed once.
struct Analysis {
    bool excluded = false;         // search window exhausted
    std::optional<ZChoice> Z;
    std::array<Horoball, 3> Y{};   // Y_0, Y_1, Y_2 when Z is defined
    std::optional<Neighborhood> certificate;
    std::string note;

    bool thin() const { return Z && Z->above5; }
};

inline Analysis analyze_identity(const BoundaryPoint& xi, const ThetaLadder& L) {
    Analysis a;
    try {
        a.Z = select_Z_identity(xi, L);
    } catch (const WindowRequired& e) {
        a.excluded = true;
        a.note = e.what();
        return a;
    }
    if (!a.Z) return a;
    ProjComplexGraph g(order_window(a.Z->Y, L));
    for (int i = 0; i < 3; ++i) a.Y[static_cast<std::size_t>(i)] = select_Yi_from(g, a.Z->Y, i, L);
    if (a.Z->tie) {
        a.note = "tie in the argmax rule";
        return a;
    }
    a.certificate = certify_lower_bound(a.Z->Y, base_horoball().tangency(), xi, L.certificate_bound());
    if (!a.certificate) a.note = "no certified neighborhood";
    return a;
}

struct Membership {
    Verdict verdict = Verdict::no;
    std::optional<Rational> delta;  // radius of the certified interval around g^-1 xi
};

/// Verdict for (Y', i) at the point analyzed in a, both in e-coordinates:
/// yes with a certified interval, no when outside U_+(Y', i),
/// boundary-uncertain otherwise.
inline Membership membership_from(const Analysis& a, const Horoball& Y, int i) {
    Membership m;
    if (a.excluded) {
        m.verdict = Verdict::boundary_uncertain;
        return m;
    }
    if (!a.Z || a.Y[static_cast<std::size_t>(i)] != Y) return m;
    if (!a.certificate) {
        m.verdict = Verdict::boundary_uncertain;
        return m;
    }
    m.verdict = Verdict::yes;
    m.delta = a.certificate->delta;
    return m;
}

/// Cover with a memo of per-point analyses; not thread safe.
class ThinCover {
public:
    ThinCover(ThetaLadder L, FinitePart S) : L_(std::move(L)), S_(std::move(S)) {
        for (const auto& c : L_.audit())
            if (!c.ok) throw std::invalid_argument("ladder fails: " + c.name);
    }

    const ThetaLadder& ladder() const { return L_; }
    const FinitePart& finite_part() const { return S_; }

    const Analysis& analyze(const BoundaryPoint& e_xi) const {
        std::string key = e_xi.str();
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        if (memo_.size() > 200000) memo_.clear();
        return memo_.emplace(key, analyze_identity(e_xi, L_)).first->second;
    }

    std::optional<Horoball> Z(const GroupElement& g, const BoundaryPoint& xi) const {
        const auto& a = analyze(mobius_apply(g.inverse(), xi));
        if (!a.Z) return std::nullopt;
        return mobius_apply(g, a.Z->Y);
    }

    std::optional<Horoball> Yi(const GroupElement& g, const BoundaryPoint& xi, int i) const {
        const auto& a = analyze(mobius_apply(g.inverse(), xi));
        if (!a.Z) return std::nullopt;
        return mobius_apply(g, a.Y[static_cast<std::size_t>(i)]);
    }

    /// (g, xi) in U(Y, i); see membership_from.
    Membership membership(const Horoball& Y, int i, const GroupElement& g, const BoundaryPoint& xi) const {
        return membership_from(analyze(mobius_apply(g.inverse(), xi)), mobius_apply(g.inverse(), Y), i);
    }

private:
    ThetaLadder L_;
    FinitePart S_;
    mutable std::unordered_map<std::string, Analysis> memo_;
};

// ------------------------------------------------------------- verification

struct ThinReport {
    std::size_t pairs_tested = 0;
    std::size_t thin_pairs = 0;
    std::size_t long_pairs = 0;
    std::size_t long_failures = 0;
    std::size_t disjointness_failures = 0;
    std::size_t boundary_uncertain = 0;
    std::size_t excluded = 0;
    std::size_t split_pairs = 0;  // Y_1 != Z
    std::size_t orbit_collisions = 0;  // long failures with some Y_i in gS . X
    int max_order = -1;           // max members through a point, minus one
    std::vector<std::string> witnesses;
    nlohmann::ordered_json ladder;

    bool passed() const { return long_failures == 0 && disjointness_failures == 0 && max_order <= 1; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["pairs_tested"] = pairs_tested;
        j["thin_pairs"] = thin_pairs;
        j["long_pairs"] = long_pairs;
        j["long_failures"] = long_failures;
        j["disjointness_failures"] = disjointness_failures;
        j["boundary_uncertain"] = boundary_uncertain;
        j["excluded"] = excluded;
        j["split_pairs"] = split_pairs;
        j["orbit_collisions"] = orbit_collisions;
        j["max_order"] = max_order;
        j["witnesses"] = witnesses;
        j["ladder"] = ladder;
        return j;
    }
};

using ThinSample = std::vector<std::pair<GroupElement, BoundaryPoint>>;

/// Elements (Y, i), i in {1, 2}, that certainly contain (g, xi). Only Z, gX
/// and the Y_i can qualify. Adds boundary-uncertain verdicts to *uncertain.
inline std::vector<std::pair<Horoball, int>> thin_members(const ThinCover& cover, const GroupElement& g,
                                                          const BoundaryPoint& xi, std::size_t* uncertain = nullptr) {
    std::vector<std::pair<Horoball, int>> out;
    const Analysis& a = cover.analyze(mobius_apply(g.inverse(), xi));
    if (a.excluded || !a.Z) return out;
    std::vector<Horoball> candidates{*cover.Z(g, xi), mobius_apply(g, base_horoball())};
    for (int i = 0; i < 3; ++i) candidates.push_back(*cover.Yi(g, xi, i));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (int i = 1; i <= 2; ++i)
        for (const auto& Y : candidates) {
            auto m = cover.membership(Y, i, g, xi);
            if (m.verdict == Verdict::yes) out.push_back({Y, i});
            if (m.verdict == Verdict::boundary_uncertain && uncertain) ++*uncertain;
        }
    return out;
}

/// An element U(Y_i(g, xi), i) holding all of gS x {xi}, if any.
inline std::optional<std::pair<Horoball, int>> thin_long_element(const ThinCover& cover, const GroupElement& g,
                                                                 const BoundaryPoint& xi) {
    const Analysis& a = cover.analyze(mobius_apply(g.inverse(), xi));
    if (!a.thin()) return std::nullopt;
    for (int i = 1; i <= 2; ++i) {
        Horoball Y = *cover.Yi(g, xi, i);
        bool all = true;
        for (const auto& s : cover.finite_part().elements) {
            if (cover.membership(Y, i, g * s, xi).verdict != Verdict::yes) {
                all = false;
                break;
            }
        }
        if (all) return std::make_pair(Y, i);
    }
    return std::nullopt;
}

inline ThinReport verify_thin_theorem(const ThinCover& cover, const ThinSample& sample) {
    ThinReport r;
    r.ladder = cover.ladder().to_json();
    auto witness = [&](std::string w) {
        if (r.witnesses.size() < 8) r.witnesses.push_back(std::move(w));
    };
    for (const auto& [g, xi] : sample) {
        ++r.pairs_tested;
        const Analysis& a = cover.analyze(mobius_apply(g.inverse(), xi));
        if (a.excluded) {
            ++r.excluded;
            continue;
        }
        // members through (g, xi): each family holds at most the one Y_i
        auto members = thin_members(cover, g, xi, &r.boundary_uncertain);
        for (int i = 1; i <= 2; ++i) {
            auto yes = std::count_if(members.begin(), members.end(), [i](const auto& m) { return m.second == i; });
            if (yes > 1) {
                ++r.disjointness_failures;
                witness("two members of family " + std::to_string(i) + " at " + g.str() + " " + xi.str());
            }
        }
        if (a.Z && a.Y[1] != a.Z->Y) ++r.split_pairs;
        r.max_order = std::max(r.max_order, static_cast<int>(members.size()) - 1);
        if (!a.thin()) continue;
        ++r.thin_pairs;
        bool long_ok = thin_long_element(cover, g, xi).has_value();
        if (long_ok) {
            ++r.long_pairs;
        } else {
            ++r.long_failures;
            // the base point gs X coincides with some Y_i, where d_{Y_i}(gs X, .) is undefined
            const auto& orbit = cover.finite_part().orbit;
            for (const auto& Y : a.Y) {
                if (std::find(orbit.begin(), orbit.end(), Y) != orbit.end()) {
                    ++r.orbit_collisions;
                    break;
                }
            }
            witness("not S-long at " + g.str() + " " + xi.str());
        }
    }
    return r;
}

// ------------------------------------------------------------- sampling

/// Rational [a0; a1, ..., ak] with one partial quotient replaced by a value
/// in [lo, hi]; puts a large angle on the order from infinity.
inline Rational planted_rational(Rng& rng, std::int64_t lo, std::int64_t hi) {
    std::size_t k = 1 + rng.below(3);
    std::vector<std::int64_t> a{rng.between(-2, 2)};
    for (std::size_t i = 0; i < k; ++i) a.push_back(rng.between(1, 4));
    a[1 + rng.below(k)] = rng.between(lo, hi);
    Rational x = a.back();
    for (std::size_t i = a.size() - 1; i-- > 0;) x = Rational(a[i]) + 1 / x;
    return x;
}

/// Pairs (g, xi): plain rationals, rationals with a planted large angle
/// relative to g, and surd negative controls. Rationals keep q <= qmax.
inline ThinSample sample_thin_pairs(Rng& rng, std::size_t n, unsigned word_length, std::int64_t qmax,
                                    const ThetaLadder& L) {
    ThinSample out;
    std::int64_t lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(to_double(L[0]) / 2));
    std::int64_t hi = static_cast<std::int64_t>(to_double(L[5]) * 1.2) + 2;
    while (out.size() < n) {
        GroupElement g = random_element(rng, static_cast<unsigned>(rng.below(word_length + 1)));
        std::uint64_t kind = rng.below(10);
        BoundaryPoint xi;
        if (kind < 5) {
            xi = BoundaryPoint(random_rational(rng, qmax));
        } else if (kind < 9) {
            xi = mobius_apply(g, BoundaryPoint(planted_rational(rng, lo, hi)));
        } else {
            xi = random_surd(rng, 3);
        }
        if (xi.is_rational() && den(xi.rational_value()) > qmax) continue;
        out.emplace_back(g, xi);
    }
    return out;
}

}  // namespace farey
