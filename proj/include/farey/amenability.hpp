#pragma once

// Covers to almost equivariant maps: partitions of unity from margins, the
// l1 defect, the union of the thin and thick covers, and coinduction on
// finite toy groups.

#include "farey/flow_cover.hpp"
#include "farey/thin_cover.hpp"

#include <functional>

namespace farey {

// ------------------------------------------------------ nerve maps

struct UncoveredPoint : std::runtime_error {
    std::size_t index;
    UncoveredPoint(std::size_t i, const std::string& what) : std::runtime_error(what), index(i) {}
};

using Weights = std::map<std::string, Rational>;

/// Probability vectors over cover elements (keyed by name), one per sample.
struct NerveMap {
    std::vector<Weights> weights;
    long order = -1;  // of the underlying cover on the sample

    /// Entries >= 0, sum 1, support <= order + 1.
    bool valid() const {
        for (const auto& w : weights) {
            Rational sum = 0;
            for (const auto& [k, v] : w) {
                if (v < 0) return false;
                sum += v;
            }
            if (sum != 1 || static_cast<long>(w.size()) > order + 1) return false;
        }
        return true;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& w : weights) {
            nlohmann::ordered_json row;
            for (const auto& [k, v] : w) row[k] = to_string(v);
            j.push_back(row);
        }
        return j;
    }
};

inline Rational l1_distance(const Weights& a, const Weights& b) {
    Rational d = 0;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        d += abs(v - (it == b.end() ? Rational(0) : it->second));
    }
    for (const auto& [k, v] : b)
        if (!a.count(k)) d += v;
    return d;
}

/// Margin snapshot: floor(m 2^20) / 2^20.
inline Rational margin_snapshot(double m) { return Rational(Integer(static_cast<std::int64_t>(std::floor(m * 1048576))), Integer(1048576)); }

/// Weight of U at x proportional to the distance from x to the sampled
/// complement of U (cap when the complement is empty). members(x) lists the
/// elements certainly containing x; uncertain ones are left out.
template <class P>
NerveMap partition_of_unity(const std::vector<P>& sample,
                            const std::function<std::vector<std::string>(const P&)>& members,
                            const std::function<double(const P&, const P&)>& dist, double cap) {
    NerveMap out;
    std::vector<std::vector<std::string>> mem;
    for (const auto& x : sample) {
        auto m = members(x);
        std::sort(m.begin(), m.end());
        m.erase(std::unique(m.begin(), m.end()), m.end());
        mem.push_back(std::move(m));
    }
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (mem[i].empty()) throw UncoveredPoint(i, "sample point " + std::to_string(i) + " is in no cover element");
        out.order = std::max(out.order, static_cast<long>(mem[i].size()) - 1);
        Weights w;
        Rational total = 0;
        for (const auto& U : mem[i]) {
            double m = cap;
            for (std::size_t j = 0; j < sample.size(); ++j)
                if (!std::binary_search(mem[j].begin(), mem[j].end(), U)) m = std::min(m, dist(sample[i], sample[j]));
            Rational r = margin_snapshot(m);
            if (r > 0) {
                w[U] = r;
                total += r;
            }
        }
        if (total == 0) throw UncoveredPoint(i, "sample point " + std::to_string(i) + " has zero margin everywhere");
        for (auto& [k, v] : w) v /= total;
        out.weights.push_back(std::move(w));
    }
    return out;
}

// ------------------------------------------------------ defect

struct DefectEntry {
    std::string xi;
    std::string s;
    Rational value;
};

struct DefectReport {
    std::size_t S_size = 0;
    std::size_t samples = 0;
    Rational defect = 0;
    bool valid = true;  // probability vector invariants on every slice
    std::size_t skipped = 0;  // (gs, xi) at the base tangency
    std::vector<DefectEntry> worst;  // per sample point, the worst s

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["S_size"] = S_size;
        j["samples"] = samples;
        j["defect"] = to_string(defect);
        j["defect_approx"] = to_double(defect);
        j["valid"] = valid;
        j["skipped"] = skipped;
        nlohmann::ordered_json w = nlohmann::ordered_json::array();
        for (const auto& e : worst) w.push_back({{"xi", e.xi}, {"s", e.s}, {"value", to_string(e.value)}});
        j["per_point"] = w;
        return j;
    }
};

using Pair = std::pair<GroupElement, BoundaryPoint>;
using MemberFn = std::function<std::vector<std::string>(const Pair&)>;

/// Defect of f(xi) = F(g, xi) for F from the margin partition of unity on the
/// slice {g b : b in ball(radius)} x {xi}: max over s of |F(g, xi) - F(gs, xi)|_1,
/// which equals |f(s' xi) - s' f(xi)|_1 by equivariance of the cover.
inline DefectReport defect(const MemberFn& members, const std::vector<Pair>& points, const std::vector<GroupElement>& S,
                           unsigned radius) {
    DefectReport r;
    r.S_size = S.size();
    r.samples = points.size();
    const auto ball = word_ball(radius);
    std::function<double(const Pair&, const Pair&)> dist = [](const Pair& a, const Pair& b) {
        return ambient_distance(a, b);
    };
    // (h, h X) is outside the domain: d_Y(hX, .) is undefined at Y = hX
    auto degenerate = [](const GroupElement& h, const BoundaryPoint& xi) {
        return mobius_apply(h.inverse(), xi).is_infinity();
    };
    for (const auto& [g, xi] : points) {
        if (degenerate(g, xi)) throw DomainError("defect base point at the base tangency");
        std::vector<Pair> slice;
        for (const auto& b : ball)
            if (!degenerate(g * b, xi)) slice.push_back({g * b, xi});
        for (const auto& s : S)
            if (std::find(ball.begin(), ball.end(), s) == ball.end() && !degenerate(g * s, xi))
                slice.push_back({g * s, xi});
        NerveMap F = partition_of_unity<Pair>(slice, members, dist, radius + 2.0);
        r.valid = r.valid && F.valid();
        DefectEntry worst{xi.str(), "", Rational(-1)};
        for (const auto& s : S) {
            if (degenerate(g * s, xi)) {
                ++r.skipped;
                continue;
            }
            std::size_t k = 0;
            while (!(slice[k].first == g * s)) ++k;
            Rational d = l1_distance(F.weights[0], F.weights[k]);
            if (d > worst.value) worst = {xi.str(), s.str(), d};
        }
        r.defect = std::max(r.defect, worst.value);
        r.worst.push_back(worst);
    }
    return r;
}

inline MemberFn thin_member_fn(const ThinCover& cover) {
    return [&cover](const Pair& x) {
        std::vector<std::string> out;
        for (const auto& [Y, i] : thin_members(cover, x.first, x.second)) out.push_back(Y.str() + "#" + std::to_string(i));
        return out;
    };
}

// ------------------------------------------------------ combined cover

struct CombinedReport {
    std::size_t points = 0;
    std::size_t thin = 0, thick = 0, gap = 0, undecided = 0;
    std::size_t thin_long_failures = 0;
    std::size_t thick_long_failures = 0;
    std::size_t orbit_collisions = 0;  // thin failures with some Y_i in gS X
    long N_thin = 1, N_thick = 2;
    long order = -1;
    ThickReport thick_report;
    std::vector<std::string> witnesses;

    long bound() const { return N_thin + N_thick + 1; }
    bool passed() const {
        return thin_long_failures == 0 && thick_long_failures == 0 && order <= bound() && gap == 0;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["points"] = points;
        j["thin"] = thin;
        j["thick"] = thick;
        j["gap"] = gap;
        j["undecided"] = undecided;
        j["thin_long_failures"] = thin_long_failures;
        j["thick_long_failures"] = thick_long_failures;
        j["orbit_collisions"] = orbit_collisions;
        j["N_thin"] = N_thin;
        j["N_thick"] = N_thick;
        j["order"] = order;
        j["order_bound"] = bound();
        j["tau"] = thick_report.tau.tau;
        j["witnesses"] = witnesses;
        j["passed"] = passed();
        return j;
    }
};

/// Classify each point with Theta_5 (thick depth bound log(Theta_5 / 2)),
/// cover thin points by the thin cover and thick points by the pulled-back
/// flow cover extended to the joint sample; check S-longness and the order
/// of the union.
inline CombinedReport combine_covers(const ThinCover& thin, const std::vector<Pair>& points, double tau_max = 64) {
    CombinedReport r;
    r.points = points.size();
    const Rational Theta = thin.ladder()[5];
    const Rational D(detail::log_rational(Theta / 2, 64).lo);
    const auto& S = thin.finite_part().elements;
    std::vector<RayKind> kinds;
    std::vector<Pair> thick_pairs;
    auto witness = [&](std::string w) {
        if (r.witnesses.size() < 8) r.witnesses.push_back(std::move(w));
    };
    for (const auto& [g, xi] : points) {
        auto c = classify(g, xi, Theta, D);
        kinds.push_back(c.kind);
        switch (c.kind) {
            case RayKind::thin: ++r.thin; break;
            case RayKind::thick: ++r.thick; thick_pairs.push_back({g, xi}); break;
            case RayKind::gap:
                ++r.gap;
                witness("gap at " + g.str() + " " + xi.str() + ": " + c.note);
                break;
            case RayKind::undecided: ++r.undecided; break;
        }
    }
    // thick side
    ThickParams p = derive_params(D, S);
    std::vector<long> thick_count(points.size(), 0);
    if (!thick_pairs.empty()) {
        TauSearch t = choose_tau(thick_pairs, S, p, 1, tau_max);
        r.thick_report.tau = t;
        if (t.status != TauStatus::found) {
            r.thick_long_failures = thick_pairs.size();
            witness(std::string("tau search: ") + to_string(t.status));
        } else {
            p.tau = t.tau;
            ThickCover cover(thick_pairs, S, p);
            std::vector<Pair> P;
            std::map<CoverElement, std::vector<std::size_t>> sets;
            for (std::size_t i = 0; i < cover.nodes().size(); ++i) {
                P.push_back({cover.nodes()[i].h, cover.nodes()[i].xi});
                for (const auto& e : cover.members(i)) sets[e].push_back(i);
            }
            std::vector<std::vector<std::size_t>> U;
            for (auto& [e, v] : sets) U.push_back(v);
            ExtendedCover ext = extend_cover(P, U, points);
            for (const auto& set : ext.sets)
                for (std::size_t a : set) ++thick_count[a];
            for (const auto& [g, xi] : thick_pairs)
                if (!cover.long_element(g, xi)) {
                    ++r.thick_long_failures;
                    witness("thick pair not S-long at " + g.str() + " " + xi.str());
                }
        }
    }
    r.thick_report.params = p;
    // thin side and the union order
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& [g, xi] = points[k];
        long members = static_cast<long>(thin_members(thin, g, xi).size()) + thick_count[k];
        r.order = std::max(r.order, members - 1);
        if (kinds[k] != RayKind::thin) continue;
        if (thin_long_element(thin, g, xi)) continue;
        ++r.thin_long_failures;
        const Analysis& a = thin.analyze(mobius_apply(g.inverse(), xi));
        const auto& orbit = thin.finite_part().orbit;
        bool collision = false;
        for (const auto& Y : a.Y) collision = collision || std::find(orbit.begin(), orbit.end(), Y) != orbit.end();
        if (collision) ++r.orbit_collisions;
        witness("thin pair not S-long at " + g.str() + " " + xi.str());
    }
    return r;
}

// ------------------------------------------------------ coinduction toys

/// Finite group by multiplication table; element 0 is the identity.
struct FiniteGroup {
    std::vector<std::vector<int>> mul;

    int size() const { return static_cast<int>(mul.size()); }
    int op(int a, int b) const { return mul[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
    int inv(int a) const {
        for (int b = 0; b < size(); ++b)
            if (op(a, b) == 0) return b;
        throw DomainError("no inverse");
    }

    static FiniteGroup cyclic(int m) {
        FiniteGroup g;
        g.mul.assign(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(m)));
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) g.mul[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = (a + b) % m;
        return g;
    }
};

/// G_0 < G with reps t_i (G = G_0 t_1 u ... u G_0 t_n); a finite G_0-set
/// Delta_0 and G_0 acting on the vertices V_0 of a simplex; f_0 : Delta_0 ->
/// Prob(V_0). Actions are tables indexed by group elements of G (only G_0
/// rows are used).
struct CoinductionToy {
    FiniteGroup G;
    std::vector<int> G0;
    std::vector<int> reps;
    std::vector<std::vector<int>> act_delta;  // [g][x]
    std::vector<std::vector<int>> act_vert;   // [g][v]
    std::vector<std::vector<Rational>> f0;    // [x][v]

    bool in_G0(int g) const { return std::find(G0.begin(), G0.end(), g) != G0.end(); }
    int n_delta() const { return static_cast<int>(f0.size()); }
    int n_vert() const { return f0.empty() ? 0 : static_cast<int>(f0[0].size()); }

    /// (g p)(v) = p(g^-1 v)
    std::vector<Rational> push(int g, const std::vector<Rational>& p) const {
        std::vector<Rational> out(p.size());
        for (std::size_t v = 0; v < p.size(); ++v)
            out[static_cast<std::size_t>(act_vert[static_cast<std::size_t>(g)][v])] = p[v];
        return out;
    }

    /// Index i and g_0 with a = g_0 t_i.
    std::pair<std::size_t, int> split(int a) const {
        for (std::size_t i = 0; i < reps.size(); ++i) {
            int g0 = G.op(a, G.inv(reps[i]));
            if (in_G0(g0)) return {i, g0};
        }
        throw DomainError("element outside every coset");
    }
};

inline Rational l1(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    Rational d = 0;
    for (std::size_t k = 0; k < a.size(); ++k) d += abs(a[k] - b[k]);
    return d;
}

struct CoinductionResult {
    std::vector<int> S0;  // {t_i s t_j^-1} n G_0
    Rational eps0;        // defect of f_0 over S_0
    Rational eps;         // defect of f over S in d_E = max over a in G
    Rational eps_reps;    // same with the max over the reps only
    Rational eps_sum;     // with the sum over reps (product l1 proxy)
    std::size_t points = 0;

    bool transfer_holds() const { return eps <= eps0; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["S0"] = S0;
        j["eps0"] = to_string(eps0);
        j["eps"] = to_string(eps);
        j["eps_reps"] = to_string(eps_reps);
        j["eps_sum"] = to_string(eps_sum);
        j["points"] = points;
        j["transfer_holds"] = transfer_holds();
        return j;
    }
};

/// Exhaustive check of the coinduction defect transfer. xi in
/// map_{G_0}(G, Delta_0) is fixed by its values on the reps; (g xi)(a) = xi(a g);
/// f(xi)(t_i) = f_0(xi(t_i)) extended by f(xi)(g_0 t_i) = g_0 f_0(xi(t_i)).
inline CoinductionResult coinduct(const CoinductionToy& toy, const std::vector<int>& S) {
    const auto& G = toy.G;
    // transversal check
    std::vector<int> seen(static_cast<std::size_t>(G.size()), 0);
    for (int t : toy.reps)
        for (int g0 : toy.G0) ++seen[static_cast<std::size_t>(G.op(g0, t))];
    for (int c : seen)
        if (c != 1) throw DomainError("coset representatives are not a transversal");
    if (static_cast<std::size_t>(G.size()) != toy.G0.size() * toy.reps.size())
        throw DomainError("coset representatives are not a transversal");

    CoinductionResult r;
    for (int s : S)
        for (int ti : toy.reps)
            for (int tj : toy.reps) {
                int x = G.op(G.op(ti, s), G.inv(tj));
                if (toy.in_G0(x) && std::find(r.S0.begin(), r.S0.end(), x) == r.S0.end()) r.S0.push_back(x);
            }
    std::sort(r.S0.begin(), r.S0.end());
    for (int s0 : r.S0)
        for (int x = 0; x < toy.n_delta(); ++x) {
            auto a = toy.f0[static_cast<std::size_t>(toy.act_delta[static_cast<std::size_t>(s0)][static_cast<std::size_t>(x)])];
            auto b = toy.push(s0, toy.f0[static_cast<std::size_t>(x)]);
            r.eps0 = std::max(r.eps0, l1(a, b));
        }

    const std::size_t n = toy.reps.size();
    // xi(a) for xi given on the reps
    auto xi_at = [&](const std::vector<int>& xi, int a) {
        auto [i, g0] = toy.split(a);
        return toy.act_delta[static_cast<std::size_t>(g0)][static_cast<std::size_t>(xi[i])];
    };
    // f(xi) as a full function G -> Prob(V_0)
    auto f_of = [&](const std::vector<int>& xi) {
        std::vector<std::vector<Rational>> y(static_cast<std::size_t>(G.size()));
        for (int a = 0; a < G.size(); ++a) {
            auto [i, g0] = toy.split(a);
            y[static_cast<std::size_t>(a)] = toy.push(g0, toy.f0[static_cast<std::size_t>(xi[i])]);
        }
        return y;
    };
    std::vector<int> xi(n, 0);
    for (;;) {
        ++r.points;
        auto fx = f_of(xi);
        for (int s : S) {
            std::vector<int> sxi(n);
            for (std::size_t i = 0; i < n; ++i) sxi[i] = xi_at(xi, G.op(toy.reps[i], s));
            auto fsx = f_of(sxi);
            Rational dmax = 0, dreps = 0, dsum = 0;
            for (int a = 0; a < G.size(); ++a) {
                // (s f(xi))(a) = f(xi)(a s)
                Rational d = l1(fsx[static_cast<std::size_t>(a)], fx[static_cast<std::size_t>(G.op(a, s))]);
                dmax = std::max(dmax, d);
                if (std::find(toy.reps.begin(), toy.reps.end(), a) != toy.reps.end()) {
                    dreps = std::max(dreps, d);
                    dsum += d;
                }
            }
            r.eps = std::max(r.eps, dmax);
            r.eps_reps = std::max(r.eps_reps, dreps);
            r.eps_sum = std::max(r.eps_sum, dsum);
        }
        std::size_t k = 0;
        while (k < n && ++xi[k] == toy.n_delta()) xi[k++] = 0;
        if (k == n) break;
    }
    return r;
}

/// Z/4 > Z/2 = {0, 2}, reps {0, 1}; Delta_0 = Z/6 with 2 acting by x -> x + 3;
/// V_0 = {0, 1} swapped by 2. f_0 is equivariant up to the perturbation
/// `bump` at x = 0.
inline CoinductionToy z4_toy(const Rational& bump) {
    CoinductionToy t;
    t.G = FiniteGroup::cyclic(4);
    t.G0 = {0, 2};
    t.reps = {0, 1};
    t.act_delta.assign(4, std::vector<int>(6));
    t.act_vert.assign(4, std::vector<int>(2));
    for (int g = 0; g < 4; ++g) {
        for (int x = 0; x < 6; ++x) t.act_delta[static_cast<std::size_t>(g)][static_cast<std::size_t>(x)] = g == 2 ? (x + 3) % 6 : x;
        for (int v = 0; v < 2; ++v) t.act_vert[static_cast<std::size_t>(g)][static_cast<std::size_t>(v)] = g == 2 ? 1 - v : v;
    }
    // equivariant base: x and x + 3 get swapped weights
    for (int x = 0; x < 6; ++x) {
        Rational a = Rational(x % 3 + 1, 4);
        t.f0.push_back(x < 3 ? std::vector<Rational>{a, 1 - a} : std::vector<Rational>{1 - a, a});
    }
    t.f0[0] = {t.f0[0][0] + bump, t.f0[0][1] - bump};
    return t;
}

}  // namespace farey
