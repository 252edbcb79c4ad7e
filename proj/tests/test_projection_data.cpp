#include "farey/projection_data.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <array>

using namespace farey;

namespace {

using namespace oracle;

// Independent oracle for the large projection set on rational arguments:
// every p/q with q <= qmax in a window around the arguments, distance taken
// as the gap between normalized images M(u), M(v) in 128-bit arithmetic.
std::vector<Horoball> large_set(const Argument& u, const Argument& v, const Rational& theta, std::int64_t qmax) {
    std::vector<Horoball> out;
    BoundaryPoint pu = u.position(), pv = v.position();
    if (pu == pv) return out;
    SmallVec U = small_vec(pu), V = small_vec(pv);
    double lo = -1e9, hi = 1e9;
    std::vector<double> fin;
    if (!pu.is_infinity()) fin.push_back(pu.approx());
    if (!pv.is_infinity()) fin.push_back(pv.approx());
    lo = *std::min_element(fin.begin(), fin.end()) - 3;
    hi = *std::max_element(fin.begin(), fin.end()) + 3;
    i128 tn = num(theta).convert_to<long long>(), td = den(theta).convert_to<long long>();
    auto same = [](std::int64_t p, std::int64_t q, const SmallVec& x) {
        return (p == x.x && q == x.y) || (p == -x.x && q == -x.y);
    };
    auto check = [&](std::int64_t p, std::int64_t q) {
        if (q > 0 && std::gcd(p, q) != 1) return;
        if ((u.is_horoball() && same(p, q, U)) || (v.is_horoball() && same(p, q, V))) return;
        if (same(p, q, U) || same(p, q, V)) {
            out.emplace_back(p, q);
            return;
        }
        auto M = normalizer_small(p, q);
        Frac a = image(M, U), b = image(M, V);
        // |a.n/a.d - b.n/b.d| > theta
        i128 n = abs128(a.n * b.d - b.n * a.d), d = abs128(a.d * b.d);
        if (n * td > tn * d) out.emplace_back(p, q);
    };
    check(1, 0);
    for (std::int64_t q = 1; q <= qmax; ++q)
        for (auto p = static_cast<std::int64_t>(std::floor(lo * q)); p <= static_cast<std::int64_t>(std::ceil(hi * q)); ++p)
            check(p, q);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Horoball> keys(const LargeProjections& l) {
    std::vector<Horoball> out;
    for (const auto& e : l.entries) out.push_back(e.Y);
    return out;
}

}  // namespace

TEST(LargeProjections, ZeroInfinityHalfTheta) {
    auto r = enumerate_large_projections(Argument(Horoball(0, 1)), Argument(Horoball::infinity()), Rational(1, 2));
    ASSERT_EQ(r.entries.size(), 2u);
    EXPECT_EQ(r.entries[0].Y, Horoball(-1, 1));
    EXPECT_EQ(r.entries[1].Y, Horoball(1, 1));
    EXPECT_EQ(r.entries[0].value.exact(), 1);
    EXPECT_EQ(r.entries[1].value.exact(), 1);
    EXPECT_TRUE(r.complete);
    EXPECT_EQ(keys(r), large_set(Argument(Horoball(0, 1)), Argument(Horoball::infinity()), Rational(1, 2), 200));
}

TEST(LargeProjections, GoldenRatioSeenFromInfinity) {
    auto r = enumerate_large_projections(Argument(BoundaryPoint::infinity()), Argument(BoundaryPoint::phi()), Rational(3));
    // only the tangency at infinity itself (boundary argument) is infinite
    ASSERT_EQ(r.entries.size(), 1u);
    EXPECT_TRUE(r.entries[0].Y.is_infinity());
    EXPECT_TRUE(r.entries[0].value.is_infinite());
    // with horoball infinity the set is empty
    auto h = enumerate_large_projections(Argument(Horoball::infinity()), Argument(BoundaryPoint::phi()), Rational(3));
    EXPECT_TRUE(h.entries.empty());
}

// sup over p/q of 1/(q |q phi - p|) is phi^2 at p/q = 2/1; brute force over q <= 10^4
TEST(LargeProjections, GoldenRatioSupremumByBruteForce) {
    long double phi = (1 + std::sqrt(5.0L)) / 2, best = 0;
    long bp = 0, bq = 0;
    for (long q = 1; q <= 10000; ++q) {
        long p0 = std::lround(q * phi);
        for (long p = p0 - 1; p <= p0 + 1; ++p) {
            long double v = 1 / (q * std::fabs(q * phi - p));
            if (v > best) { best = v; bp = p; bq = q; }
        }
    }
    EXPECT_EQ(bp, 2);
    EXPECT_EQ(bq, 1);
    EXPECT_NEAR(static_cast<double>(best), static_cast<double>(phi * phi), 1e-12);
    auto d = projection_distance(Horoball(2, 1), BoundaryPoint::infinity(), BoundaryPoint::phi());
    auto s = d.algebraic().surd();
    EXPECT_EQ(d.compare(Rational(2618, 1000)), Cmp::greater);
    EXPECT_EQ(d.compare(Rational(2619, 1000)), Cmp::less);
    EXPECT_EQ(s.D, 5);
    // just below the supremum the enumeration finds exactly 2/1
    auto r = enumerate_large_projections(Argument(Horoball::infinity()), Argument(BoundaryPoint::phi()), Rational(26, 10));
    ASSERT_EQ(r.entries.size(), 1u);
    EXPECT_EQ(r.entries[0].Y, Horoball(2, 1));
}

TEST(LargeProjections, EqualArgumentsGiveNothing) {
    for (long t = 1; t < 10; ++t) {
        auto r = enumerate_large_projections(Argument(BoundaryPoint(0)), Argument(BoundaryPoint(0)), Rational(1, t));
        EXPECT_TRUE(r.entries.empty());
    }
}

TEST(LargeProjections, WindowRequiredForWellApproximableSurds) {
    // d_p/q(0, phi) comes back near sqrt5 along the convergents, so theta = 2
    // leaves infinitely many; theta = 4 is finite
    EXPECT_THROW(enumerate_large_projections(Argument(BoundaryPoint(0)), Argument(BoundaryPoint::phi()), Rational(2)),
                 WindowRequired);
    EXPECT_TRUE(enumerate_large_projections(Argument(BoundaryPoint(0)), Argument(BoundaryPoint::phi()), Rational(4)).complete);
    SearchWindow w;
    w.max_denominator = Integer(1000);
    auto r = enumerate_large_projections(Argument(BoundaryPoint(0)), Argument(BoundaryPoint::phi()), Rational(2), w);
    EXPECT_FALSE(r.complete);
    EXPECT_GT(r.entries.size(), 5u);
    for (const auto& e : r.entries) {
        EXPECT_LE(e.Y.q(), 1000);
        EXPECT_EQ(e.value.compare(Rational(2)), Cmp::greater);
    }
}

TEST(LargeProjections, MatchesOracleOnRandomRationalPairs) {
    Rng rng(7);
    for (int i = 0; i < 150; ++i) {
        auto arg = [&]() -> Argument {
            if (rng.below(8) == 0) return rng.coin() ? Argument(Horoball::infinity()) : Argument(BoundaryPoint::infinity());
            Rational x = random_rational(rng, 50);
            return rng.coin() ? Argument(Horoball::at(x)) : Argument(BoundaryPoint(x));
        };
        Argument u = arg(), v = arg();
        Rational theta(1 + static_cast<long>(rng.below(6)), 1 + static_cast<long>(rng.below(3)));
        if (theta < 1) theta = 1;
        auto r = enumerate_large_projections(u, v, theta);
        EXPECT_TRUE(r.complete);
        std::vector<Horoball> got;
        for (const auto& e : r.entries) {
            if (e.Y.q() <= 200) got.push_back(e.Y);
        }
        EXPECT_EQ(got, large_set(u, v, theta, 200)) << u.str() << " " << v.str() << " theta=" << to_string(theta);
        EXPECT_EQ(got, brute_force_large_projections(u, v, theta, 200));
    }
}

TEST(Axioms, SymmetryAndTriangleExhaustiveSmallWindow) {
    FareyFamily fam;
    std::vector<Rational> pts;
    for (long q = 1; q <= 4; ++q)
        for (long p = -2 * q; p <= 2 * q; ++p)
            if (std::gcd(p, q) == 1) pts.emplace_back(p, q);
    std::vector<Triple> tri;
    std::vector<Quad> quads;
    for (const auto& y : pts)
        for (const auto& x : pts)
            for (const auto& z : pts) {
                if (x == y || z == y) continue;
                tri.push_back({Horoball::at(y), Argument(Horoball::at(x)), Argument(Horoball::at(z))});
                quads.push_back({Horoball::at(y), Argument(Horoball::at(x)), Argument(Horoball::at(z)),
                                 Argument(BoundaryPoint::phi())});
            }
    auto s = check_symmetry(fam, tri);
    EXPECT_EQ(s.violations, 0u);
    EXPECT_EQ(s.undecided, 0u);
    auto t = check_triangle(fam, quads);
    EXPECT_EQ(t.violations, 0u);
    EXPECT_EQ(t.undecided, 0u);
}

TEST(Axioms, TriangleDetectsBrokenDistance) {
    // a family whose distances square the Farey ones violates (P2)
    struct Squared final : ProjectionFamily {
        FareyFamily f;
        int colors() const override { return 1; }
        int color(const Horoball&) const override { return 0; }
        bool in_domain(const Horoball&, const BoundaryPoint&) const override { return true; }
        CertifiedReal distance(const Horoball& Y, const Argument& x, const Argument& z) const override {
            auto d = f.distance(Y, x, z);
            if (d.is_infinite()) return d;
            return CertifiedReal(d.exact() * d.exact());
        }
        Horoball basepoint() const override { return Horoball::infinity(); }
        Horoball act(const GroupElement& g, const Horoball& Y) const override { return mobius_apply(g, Y); }
    } sq;
    std::vector<Quad> q{{Horoball::infinity(), Argument(BoundaryPoint(0)), Argument(BoundaryPoint(1)),
                         Argument(BoundaryPoint(2))}};
    EXPECT_EQ(check_triangle(sq, q).violations, 1u);
}

TEST(Axioms, BehrstockExamples) {
    FareyFamily fam;
    Horoball inf = Horoball::infinity(), zero(0, 1);
    EXPECT_EQ(fam.distance(inf, Argument(zero), Argument(Horoball(1, 1))).exact(), 1);
    EXPECT_EQ(fam.distance(zero, Argument(inf), Argument(Horoball(1, 1))).exact(), 1);
    auto r = check_behrstock(fam, {{inf, Argument(zero), Argument(Horoball(1, 1))}}, Rational(2));
    EXPECT_EQ(*r.constant, "1");
    auto h = check_behrstock(fam, {{inf, Argument(zero), Argument(BoundaryPoint(Rational(1, 2)))}}, Rational(2));
    EXPECT_LE(parse_rational(*h.constant), Rational(1, 2));
    // xi at the tangency of Y: that side is infinite and the other value wins
    auto d = check_behrstock(fam, {{inf, Argument(zero), Argument(BoundaryPoint::infinity())}}, Rational(2));
    EXPECT_EQ(*d.constant, "0");
    EXPECT_EQ(d.violations, 0u);
}

TEST(Axioms, BehrstockWindowMaximumIsOne) {
    FareyFamily fam;
    auto r = check_behrstock(fam, behrstock_window(12), Rational(2));
    EXPECT_EQ(*r.constant, "1");
    EXPECT_EQ(r.violations, 0u);
}

TEST(Axioms, FastWindowMatchesCertifiedCheck) {
    FareyFamily fam;
    for (Rational theta : {Rational(2), Rational(1, 2), Rational(1)}) {
        auto slow = check_behrstock(fam, behrstock_window(12), theta);
        auto fast = behrstock_window_constant(12, theta);
        EXPECT_EQ(fast.samples, behrstock_window(12).size());
        EXPECT_EQ(fast.samples, slow.samples + slow.undecided);
        EXPECT_EQ(fast.constant, slow.constant);
        EXPECT_EQ(fast.violations, slow.violations) << to_string(theta);
    }
}

TEST(Axioms, ReportsInvariantUnderTranslation) {
    FareyFamily fam;
    Rng rng(3);
    auto sample = sample_triples(rng, 300, 20, false);
    std::vector<Triple> beh;
    for (const auto& t : sample)
        if (t.x.is_horoball()) beh.push_back(t);
    auto base = check_behrstock(fam, beh, Rational(2));
    for (int k = 0; k < 10; ++k) {
        GroupElement g = random_element(rng, 6);
        std::vector<Triple> moved;
        for (const auto& t : beh) moved.push_back(translate(g, t));
        auto r = check_behrstock(fam, moved, Rational(2));
        EXPECT_EQ(r.constant, base.constant);
        EXPECT_EQ(r.violations, base.violations);
        EXPECT_EQ(check_symmetry(fam, moved).violations, 0u);
    }
}

TEST(Semicontinuity, Examples) {
    Horoball inf = Horoball::infinity();
    auto n = certify_lower_bound(inf, BoundaryPoint(0), BoundaryPoint(10), Rational(8));
    ASSERT_TRUE(n.has_value());
    EXPECT_TRUE(n->contains(BoundaryPoint(Rational(19, 2))));
    EXPECT_TRUE(n->contains(BoundaryPoint(Rational(21, 2))));
    // every point of the certified neighborhood really has d > 8
    EXPECT_GT(n->lo, 8);
    // xi at the tangency: d is infinite and a small neighborhood certifies
    auto m = certify_lower_bound(Horoball(1, 7), BoundaryPoint(0), BoundaryPoint(Rational(1, 7)), Rational(1000));
    ASSERT_TRUE(m.has_value());
    EXPECT_TRUE(m->contains(BoundaryPoint(Rational(1, 7))));
    // x at the tangency: d is infinite away from x
    auto t = certify_lower_bound(Horoball(2, 1), BoundaryPoint(2), BoundaryPoint(Rational(-34, 13)), Rational(1000));
    ASSERT_TRUE(t.has_value());
    EXPECT_FALSE(t->contains(BoundaryPoint(2)));
    // around infinity, via the inversion
    auto k = certify_lower_bound(inf, BoundaryPoint(0), BoundaryPoint::infinity(), Rational(50));
    ASSERT_TRUE(k.has_value());
    EXPECT_TRUE(k->around_infinity);
    EXPECT_TRUE(k->contains(BoundaryPoint(Rational(1000000))));
}

TEST(Semicontinuity, RandomSamplesCertify) {
    FareyFamily fam;
    Rng rng(11);
    auto sample = sample_triples(rng, 2000, 30, true);
    auto r = check_semicontinuity(fam, sample, Rational(3), Rational(2));
    EXPECT_GT(r.samples, 10u);
    EXPECT_EQ(r.undecided, 0u);
    EXPECT_EQ(r.violations, 0u);
}

TEST(Sampling, HoroballsBySternBrocotDepth) {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        Horoball Y = random_horoball(rng, 12);
        EXPECT_LE(Y.q(), 233);  // Fibonacci bound at depth 12
    }
}

TEST(Sampling, BoundedDrawsAreDeterministic) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.below(1000), b.below(1000));
}
