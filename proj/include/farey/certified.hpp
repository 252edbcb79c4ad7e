#pragma once

// Certified reals: values known exactly in Q or Q(sqrt D), through a
// generator of shrinking enclosures, or the extended value +infinity.

#include "farey/quadratic.hpp"

#include <functional>
#include <memory>

namespace farey {

/// Three-way result of comparing a certified value, or "undecided".
enum class Cmp { less, equal, greater, undecided };

inline const char* to_string(Cmp c) {
    switch (c) {
        case Cmp::less: return "less";
        case Cmp::equal: return "equal";
        case Cmp::greater: return "greater";
        default: return "undecided";
    }
}

inline Cmp flip(Cmp c) {
    if (c == Cmp::less) return Cmp::greater;
    if (c == Cmp::greater) return Cmp::less;
    return c;
}

/// Refinement budget; each level adds 32 bits. Set from the CLI's --max-refine.
inline unsigned& max_refine() {
    static unsigned depth = 10;
    return depth;
}

inline unsigned refine_bits(unsigned level) { return 32 + 32 * level; }

class CertifiedReal {
public:
    using Generator = std::function<Interval(unsigned)>;

    CertifiedReal() : CertifiedReal(Rational(0)) {}
    CertifiedReal(const Rational& x) : exact_(std::make_shared<QuadNumber>(x)) {}
    CertifiedReal(const QuadNumber& x) : exact_(std::make_shared<QuadNumber>(x)) {}
    CertifiedReal(long x) : CertifiedReal(Rational(x)) {}

    static CertifiedReal from_generator(Generator g) {
        CertifiedReal r;
        r.exact_.reset();
        r.gen_ = std::make_shared<Generator>(std::move(g));
        return r;
    }

    static CertifiedReal infinity() {
        CertifiedReal r;
        r.exact_.reset();
        r.infinite_ = true;
        return r;
    }

    bool is_infinite() const { return infinite_; }
    /// Exact rational value available.
    bool is_exact() const { return exact_ && exact_->is_rational(); }
    /// Exact value in a quadratic field available.
    bool is_algebraic() const { return exact_ != nullptr; }

    Rational exact() const {
        if (!is_exact()) throw DomainError("value is not an exact rational");
        return exact_->rational_part();
    }
    const QuadNumber& algebraic() const {
        if (!exact_) throw DomainError("value has no exact algebraic form");
        return *exact_;
    }

    Interval enclosure(unsigned bits) const {
        if (infinite_) throw DomainError("enclosure of infinity");
        if (exact_) return exact_->enclosure(bits);
        return (*gen_)(bits);
    }

    double approx() const {
        if (infinite_) return std::numeric_limits<double>::infinity();
        if (exact_) return exact_->approx();
        return enclosure(64).approx();
    }

    Cmp compare(const Rational& x, unsigned depth = max_refine()) const {
        if (infinite_) return Cmp::greater;
        if (exact_) {
            int s = (*exact_ - QuadNumber(x)).sign();
            return s < 0 ? Cmp::less : (s > 0 ? Cmp::greater : Cmp::equal);
        }
        for (unsigned level = 0; level <= depth; ++level) {
            Interval e = (*gen_)(refine_bits(level));
            if (e.hi < x) return Cmp::less;
            if (e.lo > x) return Cmp::greater;
            if (e.is_point()) return Cmp::equal;
        }
        return Cmp::undecided;
    }

    /// Compare two certified values (infinity equals infinity).
    Cmp compare(const CertifiedReal& o, unsigned depth = max_refine()) const {
        if (infinite_ || o.infinite_) {
            if (infinite_ && o.infinite_) return Cmp::equal;
            return infinite_ ? Cmp::greater : Cmp::less;
        }
        if (exact_ && o.exact_) {
            try {
                int s = (*exact_ - *o.exact_).sign();
                return s < 0 ? Cmp::less : (s > 0 ? Cmp::greater : Cmp::equal);
            } catch (const MixedField&) {
                // distinct irrational fields never give equal values
            }
        }
        if (o.is_exact()) return compare(o.exact(), depth);
        if (is_exact()) return flip(o.compare(exact(), depth));
        for (unsigned level = 0; level <= depth; ++level) {
            Interval a = enclosure(refine_bits(level)), b = o.enclosure(refine_bits(level));
            if (a.hi < b.lo) return Cmp::less;
            if (a.lo > b.hi) return Cmp::greater;
        }
        return Cmp::undecided;
    }

    /// Strict comparisons that throw Undecided instead of guessing.
    bool greater_than(const Rational& x) const { return decide(compare(x)) == Cmp::greater; }
    bool less_than(const Rational& x) const { return decide(compare(x)) == Cmp::less; }

    template <class F>
    CertifiedReal map(F f, unsigned extra_bits = 8) const {
        if (infinite_) throw DomainError("map over infinity");
        CertifiedReal self = *this;
        return from_generator([self, f, extra_bits](unsigned bits) {
            return f(self.enclosure(bits + extra_bits), bits);
        });
    }

    std::string str() const {
        if (infinite_) return "inf";
        if (is_exact()) return to_string(exact());
        std::ostringstream os;
        os.precision(17);
        os << approx();
        return os.str();
    }

private:
    static Cmp decide(Cmp c) {
        if (c == Cmp::undecided) throw Undecided("comparison undecided at max refinement");
        return c;
    }

    std::shared_ptr<const QuadNumber> exact_;
    std::shared_ptr<const Generator> gen_;
    bool infinite_ = false;
};

inline CertifiedReal certified_add(const CertifiedReal& a, const CertifiedReal& b) {
    if (a.is_infinite() || b.is_infinite()) return CertifiedReal::infinity();
    if (a.is_algebraic() && b.is_algebraic()) {
        try {
            return CertifiedReal(a.algebraic() + b.algebraic());
        } catch (const MixedField&) {
        }
    }
    return CertifiedReal::from_generator([a, b](unsigned bits) {
        return round_out(a.enclosure(bits + 2) + b.enclosure(bits + 2), bits + 4);
    });
}

inline CertifiedReal certified_sub(const CertifiedReal& a, const CertifiedReal& b) {
    if (a.is_infinite() || b.is_infinite()) throw DomainError("difference involving infinity");
    if (a.is_algebraic() && b.is_algebraic()) {
        try {
            return CertifiedReal(a.algebraic() - b.algebraic());
        } catch (const MixedField&) {
        }
    }
    return CertifiedReal::from_generator([a, b](unsigned bits) {
        return round_out(a.enclosure(bits + 2) - b.enclosure(bits + 2), bits + 4);
    });
}

inline CertifiedReal certified_log(const CertifiedReal& x) {
    if (x.is_infinite()) return CertifiedReal::infinity();
    return x.map([](const Interval& e, unsigned bits) { return log(e, bits); });
}

inline CertifiedReal certified_acosh(const CertifiedReal& x) {
    if (x.is_infinite()) return CertifiedReal::infinity();
    return x.map([](const Interval& e, unsigned bits) { return acosh(e, bits); }, 16);
}

inline CertifiedReal certified_exp(const CertifiedReal& x) {
    if (x.is_infinite()) return CertifiedReal::infinity();
    return x.map([](const Interval& e, unsigned bits) { return exp(e, bits); }, 16);
}

}  // namespace farey
