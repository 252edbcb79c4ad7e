#pragma once

// Finite windows of the projection complex on Ford horoballs: X ~ Z when no
// third window member Y has d_Y(X, Z) > K. Path metric, shortest-path DAGs,
// angles at interior vertices and the empirical constants of the local
// estimate and the attraction property.

#include "farey/projection_data.hpp"

#include <deque>
#include <map>
#include <sstream>

namespace farey {

struct UndefinedAngle : std::domain_error {
    UndefinedAngle() : std::domain_error("undefined: the angle vertex is an endpoint") {}
};

struct Window {
    std::vector<Horoball> vertices;  // sorted, distinct
    std::string provenance;
    Rational K;
};

inline Window explicit_window(std::vector<Horoball> v, const Rational& K, std::string provenance = "explicit") {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return {std::move(v), std::move(provenance), K};
}

/// infinity, 0 and every Stern-Brocot node of depth 1..depth on both half
/// lines. Closed under x -> -x.
inline Window stern_brocot_window(unsigned depth, const Rational& K) {
    std::vector<Horoball> v{Horoball::infinity(), Horoball(0, 1)};
    struct Node {
        std::int64_t a, b, c, d;
        unsigned level;
    };
    std::vector<Node> stack{{-1, 0, 0, 1, 1}, {0, 1, 1, 0, 1}};
    while (!stack.empty()) {
        Node n = stack.back();
        stack.pop_back();
        if (n.level > depth) continue;
        std::int64_t p = n.a + n.c, q = n.b + n.d;
        v.emplace_back(p, q);
        stack.push_back({n.a, n.b, p, q, n.level + 1});
        stack.push_back({p, q, n.c, n.d, n.level + 1});
    }
    return explicit_window(std::move(v), K, "stern-brocot depth " + std::to_string(depth));
}

/// Anchors plus every Y with d_Y(A, B) > theta/2 for members A, B, repeated
/// until no member pair adds a vertex. Closed under this large-projection step.
inline Window anchored_window(const std::vector<Horoball>& anchors, const Rational& theta, const Rational& K,
                              std::size_t max_vertices = 64) {
    std::vector<Horoball> v = anchors;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Horoball> snapshot = v;
        for (std::size_t i = 0; i < snapshot.size(); ++i) {
            for (std::size_t j = i + 1; j < snapshot.size(); ++j) {
                auto r = enumerate_large_projections(Argument(snapshot[i]), Argument(snapshot[j]), theta / 2);
                for (const auto& e : r.entries) {
                    if (std::find(v.begin(), v.end(), e.Y) == v.end()) {
                        v.push_back(e.Y);
                        grew = true;
                    }
                }
                if (v.size() > max_vertices) throw DomainError("anchored window exceeds the vertex cap");
            }
        }
        std::sort(v.begin(), v.end());
    }
    std::ostringstream prov;
    prov << "anchors";
    for (const auto& a : anchors) prov << " " << a.str();
    prov << ", theta/2 = " << to_string(theta / 2);
    return explicit_window(std::move(v), K, prov.str());
}

/// Small hand-built windows with geodesics of length 2 to 4: spokes at 0
/// (d_0(1/n, -1/n) = 2n) chained to spokes at 1/11.
inline std::vector<Window> reference_windows(const Rational& K) {
    auto H = [](long p, long q) { return Horoball(p, q); };
    return {
        explicit_window({H(0, 1), H(1, 11), H(-1, 11), H(-1, 23), H(-21, 232), H(1, 12), H(1, 10), H(2, 21)}, K,
                        "reference A"),
        explicit_window({H(0, 1), H(1, 1), H(1, 11), H(-1, 11), H(1, 40), H(-21, 232), H(1, 3), H(41, 452), H(1, 100)},
                        K, "reference B"),
        explicit_window({H(0, 1), H(1, 11), H(-1, 11), H(-1, 40), H(21, 232), H(-21, 232), H(1, 10), H(20, 221),
                         H(2, 21), H(41, 452), H(-1, 100)},
                        K, "reference C"),
    };
}

inline Window translate(const GroupElement& g, const Window& w) {
    std::vector<Horoball> v;
    for (const auto& Y : w.vertices) v.push_back(mobius_apply(g, Y));
    return explicit_window(std::move(v), w.K, w.provenance + " translated by " + g.str());
}

/// Shortest-path DAG from X to Z: layer[v] = d(X, v) for vertices on some
/// geodesic, -1 otherwise.
struct GeodesicDag {
    int from = -1, to = -1, length = -1;
    std::vector<int> layer;
    std::vector<std::vector<int>> by_layer;

    bool on(int v) const { return layer[static_cast<std::size_t>(v)] >= 0; }
    bool interior(int v) const { return on(v) && v != from && v != to; }
    /// every geodesic passes through v
    bool forced(int v) const { return on(v) && by_layer[static_cast<std::size_t>(layer[static_cast<std::size_t>(v)])].size() == 1; }
};

struct Angle {
    int pred, succ;
    Rational value;
};

struct AngleTable {
    int X, Y, Z;
    std::vector<Angle> pairs;
    Rational max = 0;
};

class ProjComplexGraph {
public:
    ProjComplexGraph(Window w) : window_(std::move(w)) {
        if (window_.vertices.empty()) throw DomainError("empty window");
        n_ = static_cast<int>(window_.vertices.size());
        for (int i = 0; i < n_; ++i) {
            const auto& Y = window_.vertices[static_cast<std::size_t>(i)];
            if (!fits_i64(Y.p()) || !fits_i64(Y.q()) || abs(Y.p()) > (Integer(1) << 30) || Y.q() > (Integer(1) << 30))
                throw DomainError("window vertex too large for the integer path: " + Y.str());
            vec_.push_back(small_vec(Y));
            index_[Y] = i;
        }
        Kn_ = to_i128(num(window_.K));
        Kd_ = to_i128(den(window_.K));
        adj_.assign(static_cast<std::size_t>(n_ * n_), 0);
        nbr_.assign(static_cast<std::size_t>(n_), {});
        for (int x = 0; x < n_; ++x) {
            for (int z = x + 1; z < n_; ++z) {
                bool ok = true;
                for (int y = 0; y < n_ && ok; ++y) {
                    if (y == x || y == z) continue;
                    if (exceeds(y, x, z)) ok = false;
                }
                if (ok) {
                    adj_[idx(x, z)] = adj_[idx(z, x)] = 1;
                    nbr_[static_cast<std::size_t>(x)].push_back(z);
                    nbr_[static_cast<std::size_t>(z)].push_back(x);
                    ++edges_;
                }
            }
        }
        dist_.assign(static_cast<std::size_t>(n_ * n_), -1);
        for (int s = 0; s < n_; ++s) bfs(s);
    }

    const Window& window() const { return window_; }
    int size() const { return n_; }
    std::size_t edge_count() const { return edges_; }
    const Horoball& vertex(int i) const { return window_.vertices[static_cast<std::size_t>(i)]; }
    const std::vector<int>& neighbors(int i) const { return nbr_[static_cast<std::size_t>(i)]; }
    bool adjacent(int x, int z) const { return adj_[idx(x, z)] != 0; }
    int distance(int x, int z) const { return dist_[idx(x, z)]; }

    std::optional<int> index(const Horoball& Y) const {
        auto it = index_.find(Y);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    int at(const Horoball& Y) const {
        auto i = index(Y);
        if (!i) throw DomainError("not a window vertex: " + Y.str());
        return *i;
    }

    bool connected() const {
        for (int z = 0; z < n_; ++z)
            if (distance(0, z) < 0) return false;
        return true;
    }

    /// d_Y(X, Z) between window vertices, exact.
    Rational proj(int y, int x, int z) const {
        auto [n, d] = projection_distance_small(vec_[static_cast<std::size_t>(y)], vec_[static_cast<std::size_t>(x)],
                                                vec_[static_cast<std::size_t>(z)]);
        if (d == 0) throw DomainError("projection onto an argument");
        return Rational(to_integer(n), to_integer(d));
    }

    GeodesicDag dag(int x, int z) const {
        GeodesicDag g;
        g.from = x;
        g.to = z;
        g.length = distance(x, z);
        g.layer.assign(static_cast<std::size_t>(n_), -1);
        if (g.length < 0) return g;
        g.by_layer.assign(static_cast<std::size_t>(g.length + 1), {});
        for (int v = 0; v < n_; ++v) {
            int a = distance(x, v), b = distance(v, z);
            if (a >= 0 && b >= 0 && a + b == g.length) {
                g.layer[static_cast<std::size_t>(v)] = a;
                g.by_layer[static_cast<std::size_t>(a)].push_back(v);
            }
        }
        return g;
    }

    /// DAG neighbors of v one layer before / after.
    std::vector<int> preds(const GeodesicDag& g, int v) const { return layer_nbrs(g, v, -1); }
    std::vector<int> succs(const GeodesicDag& g, int v) const { return layer_nbrs(g, v, +1); }

    /// All (pred, succ) pairs of Y on geodesics X -> Z with their angles.
    AngleTable angles(int x, int z, int y) const {
        if (y == x || y == z) throw UndefinedAngle();
        AngleTable t{x, y, z, {}, 0};
        GeodesicDag g = dag(x, z);
        if (!g.interior(y)) return t;
        for (int a : preds(g, y)) {
            for (int b : succs(g, y)) {
                Rational v = proj(y, a, b);
                t.max = std::max(t.max, v);
                t.pairs.push_back({a, b, v});
            }
        }
        return t;
    }

    Rational dmax(int x, int z, int y) const { return angles(x, z, y).max; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["provenance"] = window_.provenance;
        j["K"] = to_string(window_.K);
        std::vector<std::string> v;
        for (const auto& Y : window_.vertices) v.push_back(Y.str());
        j["vertices"] = v;
        std::vector<std::array<int, 2>> e;
        for (int x = 0; x < n_; ++x)
            for (int z : neighbors(x))
                if (x < z) e.push_back({x, z});
        j["edges"] = e;
        return j;
    }

    std::string to_dot() const {
        std::ostringstream os;
        os << "graph projection_complex {\n";
        for (int x = 0; x < n_; ++x) os << "  v" << x << " [label=\"" << vertex(x).str() << "\"];\n";
        for (int x = 0; x < n_; ++x)
            for (int z : neighbors(x))
                if (x < z) os << "  v" << x << " -- v" << z << ";\n";
        os << "}\n";
        return os.str();
    }

private:
    static i128 to_i128(const Integer& x) { return static_cast<i128>(x.convert_to<long long>()); }

    std::size_t idx(int a, int b) const { return static_cast<std::size_t>(a * n_ + b); }

    bool exceeds(int y, int x, int z) const {
        auto [n, d] = projection_distance_small(vec_[static_cast<std::size_t>(y)], vec_[static_cast<std::size_t>(x)],
                                                vec_[static_cast<std::size_t>(z)]);
        return n * Kd_ > Kn_ * d;
    }

    void bfs(int s) {
        std::deque<int> q{s};
        dist_[idx(s, s)] = 0;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int w : nbr_[static_cast<std::size_t>(v)]) {
                if (dist_[idx(s, w)] >= 0) continue;
                dist_[idx(s, w)] = dist_[idx(s, v)] + 1;
                q.push_back(w);
            }
        }
    }

    std::vector<int> layer_nbrs(const GeodesicDag& g, int v, int step) const {
        std::vector<int> out;
        int l = g.layer[static_cast<std::size_t>(v)] + step;
        if (g.layer[static_cast<std::size_t>(v)] < 0 || l < 0 || l > g.length) return out;
        for (int w : g.by_layer[static_cast<std::size_t>(l)])
            if (adjacent(v, w)) out.push_back(w);
        return out;
    }

    Window window_;
    int n_ = 0;
    std::vector<SmallVec> vec_;
    std::map<Horoball, int> index_;
    i128 Kn_ = 0, Kd_ = 1;
    std::vector<char> adj_;
    std::vector<std::vector<int>> nbr_;
    std::vector<int> dist_;
    std::size_t edges_ = 0;
};

// ------------------------------------------------------------- measurements

inline std::vector<std::pair<int, int>> all_pairs(const ProjComplexGraph& g) {
    std::vector<std::pair<int, int>> out;
    for (int x = 0; x < g.size(); ++x)
        for (int z = 0; z < g.size(); ++z)
            if (x != z) out.emplace_back(x, z);
    return out;
}

struct LocalEstimate {
    std::size_t samples = 0;
    Rational theta_local = 0;  // max |d_Y(X,Z) - d_Y(pred, succ)|
    std::string witness;
};

/// max over interior Y of geodesics X -> Z and neighbors pred, succ of Y on
/// them of |d_Y(X, Z) - d_Y(pred, succ)|.
inline LocalEstimate verify_local_estimate(const ProjComplexGraph& g, const std::vector<std::pair<int, int>>& pairs) {
    LocalEstimate r;
    for (auto [x, z] : pairs) {
        GeodesicDag d = g.dag(x, z);
        if (d.length < 2) continue;
        for (int y = 0; y < g.size(); ++y) {
            if (!d.interior(y)) continue;
            Rational full = g.proj(y, x, z);
            for (int a : g.preds(d, y)) {
                for (int b : g.succs(d, y)) {
                    ++r.samples;
                    Rational diff = abs(full - g.proj(y, a, b));
                    if (diff > r.theta_local) {
                        r.theta_local = diff;
                        r.witness = g.vertex(x).str() + " " + g.vertex(y).str() + " " + g.vertex(z).str();
                    }
                }
            }
        }
    }
    return r;
}

struct Attraction {
    std::size_t samples = 0;
    std::size_t violations = 0;      // d_Y(X,Z) > theta but some geodesic avoids Y
    Rational threshold = 0;          // smallest threshold with no violations
    std::string witness;
};

inline Attraction verify_attraction(const ProjComplexGraph& g, const std::vector<std::pair<int, int>>& pairs,
                                    const Rational& theta) {
    Attraction r;
    for (auto [x, z] : pairs) {
        GeodesicDag d = g.dag(x, z);
        if (d.length < 0) continue;
        for (int y = 0; y < g.size(); ++y) {
            if (y == x || y == z) continue;
            ++r.samples;
            if (d.forced(y)) continue;
            Rational v = g.proj(y, x, z);
            if (v > r.threshold) {
                r.threshold = v;
                r.witness = g.vertex(x).str() + " " + g.vertex(y).str() + " " + g.vertex(z).str();
            }
            if (v > theta) ++r.violations;
        }
    }
    return r;
}

struct ComplexConstants {
    Rational theta_local;  // local estimate
    Rational theta_P;      // max of the local estimate and the attraction threshold
    std::size_t samples = 0;
};

inline ComplexConstants measure_constants(const ProjComplexGraph& g) {
    auto pairs = all_pairs(g);
    auto le = verify_local_estimate(g, pairs);
    auto at = verify_attraction(g, pairs, le.theta_local);
    return {le.theta_local, std::max(le.theta_local, at.threshold), le.samples + at.samples};
}

/// |d_Y(X,Z) - dmax_Y(X,Z)| <= theta_P on all windowed triples.
inline AxiomReport check_angle_deviation(const ProjComplexGraph& g, const Rational& theta_P) {
    AxiomReport r{"angle deviation"};
    Rational worst = 0;
    for (auto [x, z] : all_pairs(g)) {
        for (int y = 0; y < g.size(); ++y) {
            if (y == x || y == z) continue;
            ++r.samples;
            Rational diff = abs(g.proj(y, x, z) - g.dmax(x, z, y));
            worst = std::max(worst, diff);
            if (diff > theta_P) {
                ++r.violations;
                r.witness(g.vertex(x).str() + " " + g.vertex(y).str() + " " + g.vertex(z).str());
            }
        }
    }
    r.constant = to_string(worst);
    r.constant_approx = to_double(worst);
    return r;
}

/// A geodesic X -> Z through Y0 and later Y with
/// max{d_Y0(X, Y), d_Y0(X, Z), angle at Y0} > theta_P must give
/// dmax_Y(X, Z) = dmax_Y(Y0, Z). Strict: theta_P is the measured attraction
/// threshold, which a finite window attains.
inline AxiomReport check_angle_transfer(const ProjComplexGraph& g, const Rational& theta_P,
                                        const std::vector<std::pair<int, int>>& pairs) {
    AxiomReport r{"angle transfer"};
    for (auto [x, z] : pairs) {
        GeodesicDag d = g.dag(x, z);
        if (d.length < 3) continue;
        for (int y0 = 0; y0 < g.size(); ++y0) {
            if (!d.interior(y0)) continue;
            int l0 = d.layer[static_cast<std::size_t>(y0)];
            auto preds = g.preds(d, y0), succs = g.succs(d, y0);
            for (int y = 0; y < g.size(); ++y) {
                if (!d.interior(y) || d.layer[static_cast<std::size_t>(y)] <= l0) continue;
                int ly = d.layer[static_cast<std::size_t>(y)];
                if (g.distance(y0, y) != ly - l0) continue;
                // largest angle at y0 along geodesics that continue to y
                Rational angle = 0;
                for (int b : succs) {
                    if (b != y && g.distance(b, y) != ly - l0 - 1) continue;
                    for (int a : preds) angle = std::max(angle, g.proj(y0, a, b));
                }
                Rational m = std::max({g.proj(y0, x, y), g.proj(y0, x, z), angle});
                if (m <= theta_P) continue;
                ++r.samples;
                if (g.dmax(x, z, y) != g.dmax(y0, z, y)) {
                    ++r.violations;
                    r.witness(g.vertex(x).str() + " " + g.vertex(y0).str() + " " + g.vertex(y).str() + " " +
                              g.vertex(z).str());
                }
            }
        }
    }
    return r;
}

/// Pairs of the smaller graph whose path distance changes in a larger window
/// containing it. Zero means the window passes the one-layer audit.
inline std::size_t audit_window(const ProjComplexGraph& g, const ProjComplexGraph& bigger) {
    std::size_t changed = 0;
    for (int x = 0; x < g.size(); ++x) {
        for (int z = x + 1; z < g.size(); ++z) {
            int bx = bigger.at(g.vertex(x)), bz = bigger.at(g.vertex(z));
            if (g.distance(x, z) != bigger.distance(bx, bz)) ++changed;
        }
    }
    return changed;
}

}  // namespace farey
