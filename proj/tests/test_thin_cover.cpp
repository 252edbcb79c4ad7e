#include "farey/thin_cover.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace farey;

namespace {

// theta_P pinned from the reference windows; theta'_S = 4 for the radius-3
// ball comes from max_gap_oracle below
const Rational kThetaP(19004, 861);
const Rational kThetaS3 = Rational(4) + kThetaP;

ThetaLadder ladder3() { return ThetaLadder::standard(2, kThetaS3, kThetaP, 20); }

const FinitePart& ball3() {
    static const FinitePart S = FinitePart::ball(3);
    return S;
}

oracle::Vec ov(const Horoball& Y) { return {Y.p().convert_to<std::int64_t>(), Y.q().convert_to<std::int64_t>()}; }

// max over Y = a/b (b <= 80) and infinity of the gap between two orbit points
Rational max_gap_oracle(const std::vector<Horoball>& orbit) {
    Rational best = 0;
    std::vector<oracle::Vec> ys{{1, 0}};
    for (std::int64_t b = 1; b <= 80; ++b)
        for (std::int64_t a = -6 * b; a <= 6 * b; ++a)
            if (std::gcd(a, b) == 1) ys.push_back({a, b});
    for (std::size_t i = 0; i < orbit.size(); ++i)
        for (std::size_t j = i + 1; j < orbit.size(); ++j) {
            auto u = ov(orbit[i]), v = ov(orbit[j]);
            for (const auto& y : ys) {
                if ((y.x == u.x && y.y == u.y) || (y.x == v.x && y.y == v.y)) continue;
                best = std::max(best, oracle::gap(y, u, v));
            }
        }
    return best;
}

// argmax of 1/(b |a - b x|) over b <= bmax in doubles
std::pair<std::int64_t, std::int64_t> argmax_double(double x, std::int64_t bmax) {
    double best = -1;
    std::pair<std::int64_t, std::int64_t> arg{0, 0};
    for (std::int64_t b = 1; b <= bmax; ++b) {
        auto a = static_cast<std::int64_t>(std::llround(static_cast<double>(b) * x));
        if (std::gcd(a, b) != 1) continue;
        double d = 1.0 / (static_cast<double>(b) * std::fabs(static_cast<double>(a) - static_cast<double>(b) * x));
        if (d > best) {
            best = d;
            arg = {a, b};
        }
    }
    return arg;
}

// Y_0..Y_2 towards a rational Z straight from the definition: window = infinity,
// Z and every a/b (b < den Z) with gap > 1 from the rounding of b Z
std::array<Horoball, 3> yi_oracle(const Rational& Z, const ThetaLadder& L) {
    std::int64_t zp = num(Z).convert_to<std::int64_t>(), zq = den(Z).convert_to<std::int64_t>();
    std::vector<oracle::Vec> v{{1, 0}, {zp, zq}};
    for (std::int64_t b = 1; b < zq; ++b) {
        // a = round(b Z) in exact integers
        std::int64_t a = (2 * b * zp + zq) / (2 * zq);
        if (2 * b * zp + zq < 0 && (2 * b * zp + zq) % (2 * zq) != 0) --a;
        if (std::gcd(a, b) != 1) continue;
        if (oracle::gap(oracle::Vec{a, b}, v[0], v[1]) > 1) v.push_back({a, b});
    }
    auto adj = oracle::adjacency(v, L.K);
    int n = static_cast<int>(v.size());
    std::array<Horoball, 3> out;
    for (int i = 0; i < 3; ++i) {
        std::vector<int> found;
        for (int w = 1; w < n; ++w) {
            if (w != 1 && oracle::dmax(v, adj, 0, 1, w) < L[i]) continue;
            bool ok = true;
            for (int y = 1; y < n && ok; ++y)
                if (y != w && oracle::dmax(v, adj, 0, w, y) >= L[i]) ok = false;
            if (ok) found.push_back(w);
        }
        if (found.size() != 1) throw std::logic_error("oracle: no unique Y_i");
        auto w = v[static_cast<std::size_t>(found[0])];
        out[static_cast<std::size_t>(i)] = Horoball(w.x, w.y);
    }
    return out;
}

Rational from_quotients(const std::vector<std::int64_t>& a) {
    Rational x = a.back();
    for (std::size_t i = a.size() - 1; i-- > 0;) x = Rational(a[i]) + 1 / x;
    return x;
}

BoundaryPoint one_over_k_plus_phi(long k) {
    return QuadNumber(1) / (QuadNumber(k) + BoundaryPoint::phi().value());
}

}  // namespace

TEST(ThetaS, WorkedExamples) {
    EXPECT_EQ(theta_S(FinitePart::from({}), kThetaP), 0);
    auto T = GroupElement::T();
    auto S = FinitePart::from({T, T.inverse()});
    EXPECT_EQ(S.orbit.size(), 1u);
    EXPECT_EQ(theta_S(S, kThetaP), 0);
    auto inv = FinitePart::from({GroupElement::S()});
    EXPECT_EQ(theta_S_raw(inv), max_gap_oracle(inv.orbit));
    EXPECT_EQ(theta_S_raw(inv), 1);
    EXPECT_EQ(theta_S(inv, kThetaP), 1 + kThetaP);
}

TEST(ThetaS, FinitePartIsSymmetric) {
    const auto& S = ball3();
    EXPECT_EQ(S.elements.size(), 20u);
    EXPECT_EQ(S.orbit.size(), 6u);
    for (const auto& g : S.elements)
        EXPECT_TRUE(std::binary_search(S.elements.begin(), S.elements.end(), g.inverse())) << g.str();
}

TEST(ThetaS, WordBallsMatchOracle) {
    for (unsigned r = 1; r <= 3; ++r) {
        auto S = FinitePart::ball(r);
        EXPECT_EQ(theta_S_raw(S), max_gap_oracle(S.orbit)) << "radius " << r;
    }
    EXPECT_EQ(theta_S(ball3(), kThetaP), kThetaS3);
}

TEST(ThetaS, MonotoneInS) {
    Rational prev = 0;
    for (unsigned r = 0; r <= 3; ++r) {
        Rational t = theta_S_raw(FinitePart::ball(r));
        EXPECT_GE(t, prev);
        prev = t;
    }
}

TEST(Ladder, StandardLadderPassesAudit) {
    auto L = ladder3();
    for (int i = 0; i < 6; ++i) EXPECT_EQ(L[i], 10 * (i + 1) * (2 + kThetaS3));
    for (const auto& c : L.audit()) EXPECT_TRUE(c.ok) << c.name;
    EXPECT_NO_THROW(ThinCover(L, ball3()));
}

TEST(Ladder, BrokenLaddersRejected) {
    auto L = ladder3();
    std::swap(L.Theta[4], L.Theta[5]);
    EXPECT_FALSE(L.sufficient());
    EXPECT_THROW(ThinCover(L, ball3()), std::invalid_argument);
    // theta_S = 0 makes Theta_0 = 20 < theta_P
    auto trivial = ThetaLadder::standard(2, 0, kThetaP, 20);
    EXPECT_FALSE(trivial.sufficient());
}

TEST(SelectZ, WorkedExamples) {
    auto L = ladder3();
    auto z = select_Z(GroupElement::identity(), BoundaryPoint(Rational(1, 7)), L);
    ASSERT_TRUE(z);
    EXPECT_EQ(z->Y, Horoball(1, 7));
    EXPECT_TRUE(z->value.is_infinite());
    EXPECT_FALSE(select_Z(GroupElement::identity(), BoundaryPoint::phi(), L));
    auto t = select_Z(GroupElement::T(), BoundaryPoint(Rational(8, 7)), L);
    ASSERT_TRUE(t);
    EXPECT_EQ(t->Y, Horoball(8, 7));
}

TEST(SelectZ, SurdAgainstDoubleArgmax) {
    auto L = ladder3();
    for (long k : {1450L, 1800L, 2500L}) {
        auto xi = one_over_k_plus_phi(k);
        auto z = select_Z(GroupElement::identity(), xi, L);
        ASSERT_TRUE(z) << k;
        auto [a, b] = argmax_double(xi.approx(), 100000);
        EXPECT_EQ(z->Y, Horoball(a, b)) << k;
        EXPECT_EQ(z->above5, Rational(k) + 1 > L[5]) << k;
    }
}

TEST(SelectZ, BelowTheta4GivesNone) {
    EXPECT_FALSE(select_Z(GroupElement::identity(), one_over_k_plus_phi(1000), ladder3()));
}

TEST(SelectZ, WindowExhaustedIsExcluded) {
    BoundaryPoint x(QuadNumber(0, 1, 1000001));  // [1000; 2000, 2000, ...]
    EXPECT_THROW(select_Z(GroupElement::identity(), x, ladder3()), WindowRequired);
    auto a = analyze_identity(x, ladder3());
    EXPECT_TRUE(a.excluded);
}

TEST(SelectZ, EquivariantAgainstDirectSearch) {
    auto L = ladder3();
    ThinCover cover(L, ball3());
    Rng rng(11);
    for (int k = 0; k < 40; ++k) {
        GroupElement g = random_element(rng, 4);
        BoundaryPoint xi = mobius_apply(g, one_over_k_plus_phi(static_cast<long>(rng.between(1500, 3000))));
        // search from g X directly, no translation back
        auto r = enumerate_large_projections(Argument(mobius_apply(g, base_horoball())), Argument(xi), L[4]);
        ASSERT_FALSE(r.entries.empty());
        auto best = r.entries[0];
        for (const auto& e : r.entries)
            if (e.value.compare(best.value) == Cmp::greater) best = e;
        auto z = cover.Z(g, xi);
        ASSERT_TRUE(z);
        EXPECT_EQ(*z, best.Y) << g.str() << " " << xi.str();
    }
}

TEST(SelectYi, NoIntermediateGivesZ) {
    auto L = ladder3();
    for (int i = 0; i < 3; ++i) {
        auto y = select_Yi(GroupElement::identity(), BoundaryPoint(Rational(1, 7)), i, L);
        ASSERT_TRUE(y);
        EXPECT_EQ(*y, Horoball(1, 7));
    }
}

TEST(SelectYi, TwoLargeAnglesSplitTheLadder) {
    auto L = ladder3();
    // [0; 600, 900, 2]: angle about 600 at 0/1 and 900 at 1/600
    Rational Z = from_quotients({0, 600, 900, 2});
    auto expected = yi_oracle(Z, L);
    EXPECT_EQ(expected[0], Horoball(0, 1));
    EXPECT_EQ(expected[1], Horoball(0, 1));
    EXPECT_EQ(expected[2], Horoball(1, 600));
    for (int i = 0; i < 3; ++i) EXPECT_EQ(*select_Yi(GroupElement::identity(), BoundaryPoint(Z), i, L), expected[static_cast<std::size_t>(i)]);
}

TEST(SelectYi, MatchesOracleAndOrdered) {
    auto L = ladder3();
    Rng rng(5);
    int checked = 0;
    while (checked < 25) {
        Rational Z = planted_rational(rng, 100, 2100);
        if (den(Z) > 5000) continue;
        ++checked;
        auto expected = yi_oracle(Z, L);
        ProjComplexGraph g(order_window(Horoball(num(Z), den(Z)), L));
        int x = g.at(base_horoball());
        int prev = 0;
        for (int i = 0; i < 3; ++i) {
            auto y = select_Yi_from(g, Horoball(num(Z), den(Z)), i, L);
            EXPECT_EQ(y, expected[static_cast<std::size_t>(i)]) << to_string(Z) << " i=" << i;
            int d = g.distance(x, g.at(y));
            EXPECT_GE(d, prev) << to_string(Z);
            prev = d;
        }
    }
}

TEST(SelectYi, TranslatesWithG) {
    auto L = ladder3();
    ThinCover cover(L, ball3());
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        GroupElement g = random_element(rng, 5);
        Rational z = planted_rational(rng, 200, 2000);
        BoundaryPoint xi = mobius_apply(g, BoundaryPoint(z));
        for (int i = 0; i < 3; ++i)
            EXPECT_EQ(*cover.Yi(g, xi, i), mobius_apply(g, *select_Yi(GroupElement::identity(), BoundaryPoint(z), i, L)));
    }
}

TEST(Membership, WorkedExamples) {
    ThinCover cover(ladder3(), ball3());
    auto e = GroupElement::identity();
    BoundaryPoint xi(Rational(1, 7));
    auto m = cover.membership(Horoball(1, 7), 1, e, xi);
    EXPECT_EQ(m.verdict, Verdict::yes);
    ASSERT_TRUE(m.delta);
    EXPECT_GT(*m.delta, 0);
    EXPECT_EQ(cover.membership(Horoball(5, 3), 1, e, xi).verdict, Verdict::no);
    EXPECT_EQ(cover.membership(Horoball(1, 7), 2, e, BoundaryPoint::phi()).verdict, Verdict::no);
}

TEST(Membership, TieIsBoundaryUncertain) {
    // no ties occur for Farey seen from infinity, so the tie is planted
    Analysis a = analyze_identity(BoundaryPoint(Rational(1, 7)), ladder3());
    a.Z->tie = true;
    a.certificate.reset();
    EXPECT_EQ(membership_from(a, Horoball(1, 7), 1).verdict, Verdict::boundary_uncertain);
    EXPECT_EQ(membership_from(a, Horoball(0, 1), 1).verdict, Verdict::no);
}

TEST(Membership, CertifiedBoundHoldsAtInterval) {
    // d_Z(inf, .) is monotone on each side of the tangency, so the endpoints decide
    auto L = ladder3();
    ThinCover cover(L, ball3());
    Rng rng(17);
    for (int k = 0; k < 30; ++k) {
        Rational z = planted_rational(rng, 150, 2000);
        const Analysis& a = cover.analyze(BoundaryPoint(z));
        ASSERT_TRUE(a.Z);
        ASSERT_TRUE(a.certificate) << to_string(z);
        Rational d = a.certificate->delta;
        for (Rational t : std::vector<Rational>{-d, d}) {
            Rational zeta = z + t;
            // 1 / (q |p - q zeta|) for Z = p/q
            Rational v = 1 / (Rational(den(z)) * abs(Rational(num(z)) - Rational(den(z)) * zeta));
            EXPECT_GT(v, L.certificate_bound()) << to_string(z);
        }
    }
}

TEST(Membership, CertifiedIntervalKeepsYi) {
    auto L = ladder3();
    ThinCover cover(L, ball3());
    for (std::int64_t q = 1; q <= 5; ++q)
        for (std::int64_t p = -2 * q; p <= 2 * q; ++p) {
            if (std::gcd(p, q) != 1) continue;
            Rational z(p, q);
            const Analysis& a = cover.analyze(BoundaryPoint(z));
            ASSERT_TRUE(a.certificate) << to_string(z);
            Rational d = a.certificate->delta;
            for (Rational t : std::vector<Rational>{-d, d / 3}) {
                Analysis b = analyze_identity(BoundaryPoint(z + t), L);
                ASSERT_TRUE(b.Z);
                EXPECT_EQ(b.Z->Y, Horoball(num(z + t), den(z + t)));
                for (int i = 1; i <= 2; ++i)
                    EXPECT_EQ(b.Y[static_cast<std::size_t>(i)], a.Y[static_cast<std::size_t>(i)]) << to_string(z + t);
            }
        }
}

TEST(ThinTheorem, DisjointAndOrderAtMostOne) {
    auto L = ladder3();
    ThinCover cover(L, ball3());
    Rng rng(23);
    auto sample = sample_thin_pairs(rng, 80, 3, 10000, L);
    auto r = verify_thin_theorem(cover, sample);
    EXPECT_EQ(r.pairs_tested, 80u);
    EXPECT_EQ(r.disjointness_failures, 0u);
    EXPECT_LE(r.max_order, 1);
    EXPECT_GT(r.thin_pairs, 40u);
    EXPECT_GT(r.split_pairs, 0u);
    // every longness failure has some Y_i in the orbit gS X
    EXPECT_EQ(r.long_failures, r.orbit_collisions);
}

TEST(ThinTheorem, OrbitCollisionBreaksLongness) {
    ThinCover cover(ladder3(), ball3());
    auto e = GroupElement::identity();
    BoundaryPoint xi(Rational(3, 3053));  // [0; 1017, 1, 2]
    EXPECT_EQ(*cover.Yi(e, xi, 1), Horoball(0, 1));
    EXPECT_EQ(*cover.Yi(e, xi, 2), Horoball(0, 1));
    // 0/1 = S infinity is the base point of (S, xi), so Y_i(S, xi) moves on to Z
    EXPECT_EQ(*cover.Yi(GroupElement::S(), xi, 1), Horoball(3, 3053));
    EXPECT_EQ(cover.membership(Horoball(0, 1), 1, GroupElement::S(), xi).verdict, Verdict::no);
    auto r = verify_thin_theorem(cover, {{e, xi}});
    EXPECT_EQ(r.long_failures, 1u);
    EXPECT_EQ(r.orbit_collisions, 1u);
}

TEST(ThinTheorem, LongAwayFromTheOrbit) {
    ThinCover cover(ladder3(), ball3());
    Rng rng(29);
    for (int k = 0; k < 15; ++k) {
        GroupElement g = random_element(rng, 3);
        // large angle at 1/3 then more: Y_i well away from S infinity
        Rational z = from_quotients({0, 3, rng.between(1800, 2400), rng.between(1, 5)});
        BoundaryPoint xi = mobius_apply(g, BoundaryPoint(z));
        auto r = verify_thin_theorem(cover, {{g, xi}});
        EXPECT_EQ(r.thin_pairs, 1u);
        EXPECT_EQ(r.long_pairs, 1u) << g.str() << " " << xi.str();
    }
}

TEST(ThinTheorem, ReportJson) {
    ThinCover cover(ladder3(), ball3());
    auto r = verify_thin_theorem(cover, {{GroupElement::identity(), BoundaryPoint(Rational(1, 7))}});
    auto j = r.to_json();
    for (const char* k : {"pairs_tested", "long_failures", "disjointness_failures", "boundary_uncertain", "ladder"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j["ladder"]["Theta"].size(), 6u);
}
