#pragma once

// Deterministic sampling of group elements, horoballs and boundary points.
// std::uniform_int_distribution is implementation-defined, so bounded draws
// are done by rejection on the raw 64-bit engine to keep runs byte-identical
// across standard libraries.

#include "farey/hyperbolic.hpp"

#include <random>

namespace farey {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw DomainError("empty range");
        std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool coin() { return below(2) == 1; }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

private:
    std::mt19937_64 engine_;
};

/// Reduced fraction p/q, 1 <= q <= qmax, |p/q| <= span.
inline Rational random_rational(Rng& rng, std::int64_t qmax, std::int64_t span = 3) {
    std::int64_t q = rng.between(1, qmax);
    std::int64_t p = rng.between(-span * q, span * q);
    return Rational(p, q);
}

/// Random reduced word in S, T, T^-1 of the given length.
inline GroupElement random_element(Rng& rng, unsigned length) {
    static const GroupElement gens[3] = {GroupElement::S(), GroupElement::T(), GroupElement::T().inverse()};
    GroupElement g;
    for (unsigned i = 0; i < length; ++i) g = g * gens[rng.below(3)];
    return g;
}

/// Stern-Brocot path of uniform depth in [0, max_depth] on either half line;
/// depth 0 on the negative side gives infinity, on the positive side 0.
inline Horoball random_horoball(Rng& rng, unsigned max_depth) {
    unsigned depth = static_cast<unsigned>(rng.below(max_depth + 1));
    bool negative = rng.coin();
    if (depth == 0) return negative ? Horoball::infinity() : Horoball(0, 1);
    // walk from the root 0/1 inside (-1/0, 1/0): left/right mediants
    std::int64_t a = negative ? -1 : 0, b = negative ? 0 : 1, c = negative ? 0 : 1, d = negative ? 1 : 0;
    // start at the root of the chosen half line
    std::int64_t p = a + c, q = b + d;
    for (unsigned i = 1; i < depth; ++i) {
        if (rng.coin()) {
            c = p; d = q;
        } else {
            a = p; b = q;
        }
        p = a + c;
        q = b + d;
    }
    return Horoball(p, q);
}

/// The fixed surd set: phi, sqrt2, 1 + sqrt3 and their conjugates.
inline std::vector<BoundaryPoint> base_surds() {
    return {
        BoundaryPoint::phi(),
        QuadNumber(Rational(1, 2), Rational(-1, 2), 5),
        BoundaryPoint::sqrt2(),
        QuadNumber(0, -1, 2),
        QuadNumber(1, 1, 3),
        QuadNumber(1, -1, 3),
    };
}

inline BoundaryPoint random_surd(Rng& rng, unsigned translate_length) {
    static const std::vector<BoundaryPoint> base = base_surds();
    BoundaryPoint x = rng.pick(base);
    if (translate_length == 0) return x;
    return mobius_apply(random_element(rng, static_cast<unsigned>(rng.below(translate_length + 1))), x);
}

/// Rational with q <= qmax (probability 3/4) or a surd translate.
inline BoundaryPoint random_boundary_point(Rng& rng, std::int64_t qmax, unsigned translate_length = 4) {
    if (rng.below(4) != 0) return BoundaryPoint(random_rational(rng, qmax));
    return random_surd(rng, translate_length);
}

}  // namespace farey
