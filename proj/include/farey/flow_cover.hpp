#pragma once

// The thick-part cover on the Farey instance.
//
// A pair (g, xi) is thick when the ray from g(i) toward xi never goes deeper
// than D_max into a Ford horoball (depth = distance from the horocycle, so a
// full geodesic with projection distance d has depth log(d / 2)). Coarse flow lines are followed in a local
// frame: for a node (h, xi) at time tau, f is an element with f^-1 c(tau) in
// the standard fundamental domain, and all flow geometry (orbit points near
// c(tau), Busemann parameters, chart separation) is done in doubles on
// f^-1-translated data. Group elements and boundary points stay exact.

#include "farey/projection_data.hpp"
#include "farey/sampling.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <array>
#include <complex>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace farey {

// ------------------------------------------------------ double geometry

struct DPoint {
    double x, y;
};

inline DPoint to_dpoint(const Point& p) { return {to_double(p.x), to_double(p.y)}; }

/// 2 asinh(|z - w| / (2 sqrt(Im z Im w))), stable for close points.
inline double hdist(DPoint a, DPoint b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return 2 * std::asinh(std::sqrt(dx * dx + dy * dy) / (2 * std::sqrt(a.y * b.y)));
}

/// Busemann function for eta (or infinity), normalized so that it drops by t
/// along a ray toward eta: log(|z - eta|^2 / Im z), or -log Im z.
inline double busemann(DPoint z, double eta, bool eta_inf) {
    if (eta_inf) return -std::log(z.y);
    double u = z.x - eta;
    return std::log((u * u + z.y * z.y) / z.y);
}

/// Coordinates m(z) = -1/(z - eta) that send eta to infinity.
inline DPoint toward_infinity(DPoint z, double eta, bool eta_inf) {
    if (eta_inf) return z;
    double u = z.x - eta, n = u * u + z.y * z.y;
    return {-u / n, z.y / n};
}

inline double boundary_angle(const BoundaryPoint& x) {
    if (x.is_infinity()) return M_PI;
    return 2 * std::atan(x.value().enclosure(80).approx());
}

/// Chordal distance on the boundary circle via z -> (z - i)/(z + i).
inline double chordal(const BoundaryPoint& a, const BoundaryPoint& b) {
    return 2 * std::abs(std::sin((boundary_angle(a) - boundary_angle(b)) / 2));
}

// 2x2 integer matrices in int64 for the inner loops; PSL sign-normalized
struct M2 {
    std::int64_t a = 1, b = 0, c = 0, d = 1;

    static M2 from(const GroupElement& g) {
        if (!fits_i64(g.a()) || !fits_i64(g.b()) || !fits_i64(g.c()) || !fits_i64(g.d()))
            throw DomainError("group element too large for the int64 path");
        return {static_cast<std::int64_t>(g.a()), static_cast<std::int64_t>(g.b()), static_cast<std::int64_t>(g.c()),
                static_cast<std::int64_t>(g.d())};
    }
    GroupElement element() const { return GroupElement(a, b, c, d); }

    friend M2 operator*(const M2& x, const M2& y) {
        auto m = [](std::int64_t p, std::int64_t q, std::int64_t r, std::int64_t s) {
            i128 v = i128(p) * q + i128(r) * s;
            if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
                throw DomainError("int64 overflow in flow geometry");
            return static_cast<std::int64_t>(v);
        };
        return {m(x.a, y.a, x.b, y.c), m(x.a, y.b, x.b, y.d), m(x.c, y.a, x.d, y.c), m(x.c, y.b, x.d, y.d)};
    }
    // orbit point k(i) is determined by (ac + bd, c^2 + d^2)
    std::pair<std::int64_t, std::int64_t> orbit_key() const { return {a * c + b * d, c * c + d * d}; }
    DPoint orbit() const {
        double n = static_cast<double>(c * c + d * d);
        return {static_cast<double>(a * c + b * d) / n, 1 / n};
    }
};

struct PairHash {
    std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& p) const {
        return std::hash<std::int64_t>()(p.first) * 1000003u ^ std::hash<std::int64_t>()(p.second);
    }
};

/// Orbit points k(i) with d(w, k(i)) <= r, one k per point. Breadth-first over
/// the orbit graph (steps T, T^-1, ST, ST^-1) pruned at r + 2.
inline std::vector<std::pair<M2, DPoint>> orbit_points_near(DPoint w, double r) {
    static const M2 steps[4] = {{1, 1, 0, 1}, {1, -1, 0, 1}, {0, -1, 1, 1}, {0, -1, 1, -1}};
    std::vector<std::pair<M2, DPoint>> out;
    std::unordered_set<std::pair<std::int64_t, std::int64_t>, PairHash> seen;
    std::vector<M2> frontier;
    // w lies in the closed fundamental domain: i or i +- 1 is nearest
    for (const M2& k : {M2{}, steps[0], steps[1]}) {
        seen.insert(k.orbit_key());
        frontier.push_back(k);
    }
    const double prune = r + 2;
    while (!frontier.empty()) {
        std::vector<M2> next;
        for (const M2& k : frontier) {
            DPoint p = k.orbit();
            double d = hdist(w, p);
            if (d <= r + 1e-9) out.push_back({k, p});
            if (d > prune) continue;
            for (const M2& s : steps) {
                M2 n = k * s;
                if (seen.insert(n.orbit_key()).second) next.push_back(n);
            }
        }
        frontier = std::move(next);
    }
    return out;
}

// ------------------------------------------------------ classification

/// Other endpoint of the geodesic through g(i) that ends at xi.
inline BoundaryPoint backward_endpoint(const GroupElement& g, const BoundaryPoint& xi) {
    // through i toward x the other endpoint is -1/x
    return mobius_apply(g * GroupElement::S() * g.inverse(), xi);
}

/// Rational lower bound for 2 e^D: projection distance threshold matching
/// penetration depth D via depth = log(d / 2).
inline Rational depth_threshold(const Rational& D) { return 2 * detail::exp_rational(D, 64).lo; }

struct ThickCertificate {
    GroupElement g;
    BoundaryPoint xi;
    Rational D_max;
    std::vector<std::pair<Horoball, CertifiedReal>> candidates;  // ray depths
    Rational window_theta;  // every Y outside has geodesic depth <= D_max
    double max_depth = 0;
};

struct ThinWitness {
    Horoball Y;
    CertifiedReal value;
};

enum class RayKind { thick, thin, gap, undecided };

inline const char* to_string(RayKind k) {
    switch (k) {
        case RayKind::thick: return "thick";
        case RayKind::thin: return "thin";
        case RayKind::gap: return "gap";
        case RayKind::undecided: return "undecided";
    }
    return "?";
}

struct Classification {
    RayKind kind = RayKind::undecided;
    std::optional<ThickCertificate> thick;
    std::optional<ThinWitness> thin;
    std::string note;
};

/// Depth of the ray from g(i) toward xi in the horoball Y: the largest
/// distance from Y's horocycle reached by the ray (0 if it stays outside).
inline CertifiedReal ray_depth(const GroupElement& g, const BoundaryPoint& xi, const Horoball& Y) {
    if (xi == Y.tangency()) return CertifiedReal::infinity();
    GroupElement M = normalizer(Y);
    Point z0 = orbit_point(M * g);
    const QuadNumber x = mobius_apply(M, xi).value();
    // Y is {Im z > 1}; H2 = squared top height of the ray
    QuadNumber H2(z0.y * z0.y);
    if (!(x == QuadNumber(z0.x))) {
        QuadNumber x0(z0.x), r2(z0.x * z0.x + z0.y * z0.y);
        QuadNumber c = (r2 - x * x) / (QuadNumber(2) * (x0 - x));
        // the semicircle's top lies ahead iff the centre is between x0 and xi
        if ((c - x0).sign() * (x - c).sign() > 0) H2 = (x - c) * (x - c);
    }
    if ((H2 - QuadNumber(1)).sign() <= 0) return CertifiedReal(Rational(0));
    return CertifiedReal(H2).map([](const Interval& e, unsigned bits) {
        Interval l = log(e, bits);
        return Interval(l.lo / 2, l.hi / 2);
    });
}

/// Certificate that the ray from g(i) toward xi has depth <= D in every Ford
/// horoball, or nullopt. Ray depth is at most the depth log(d/2) of the whole
/// geodesic, so the window d_Y(backward end, xi) > 2e^D holds every candidate.
/// Throws WindowRequired / Undecided.
inline std::optional<ThickCertificate> certify_thick(const GroupElement& g, const BoundaryPoint& xi,
                                                     const Rational& D) {
    ThickCertificate c{g, xi, D, {}, depth_threshold(D), 0};
    BoundaryPoint back = backward_endpoint(g, xi);
    auto window = enumerate_large_projections(Argument(back), Argument(xi), c.window_theta);
    for (const auto& e : window.entries) {
        CertifiedReal depth = ray_depth(g, xi, e.Y);
        if (depth.is_infinite()) return std::nullopt;
        Cmp cmp = depth.compare(D);
        if (cmp == Cmp::undecided) throw Undecided("ray depth at the bound");
        if (cmp == Cmp::greater) return std::nullopt;
        c.max_depth = std::max(c.max_depth, depth.approx());
        c.candidates.push_back({e.Y, depth});
    }
    return c;
}

/// Thin if some Y has d_Y(gX, xi) > Theta (argmax, or the first along the
/// ray); else thick if all ray depths are <= D_max (default log(Theta/2));
/// else gap.
inline Classification classify(const GroupElement& g, const BoundaryPoint& xi, const Rational& Theta,
                               std::optional<Rational> D_max = std::nullopt, bool first_along_ray = false) {
    Classification out;
    try {
        BoundaryPoint e_xi = mobius_apply(g.inverse(), xi);
        auto large = enumerate_large_projections(Argument(Horoball::infinity()), Argument(e_xi), Theta);
        if (!large.entries.empty()) {
            // along the vertical ray from i, bigger Ford circles come first
            std::size_t best = 0;
            if (!first_along_ray) {
                for (std::size_t k = 1; k < large.entries.size(); ++k) {
                    Cmp c = large.entries[k].value.compare(large.entries[best].value);
                    if (c == Cmp::undecided) throw Undecided("tie in the thin argmax");
                    if (c == Cmp::greater) best = k;
                }
            }
            out.kind = RayKind::thin;
            out.thin = ThinWitness{mobius_apply(g, large.entries[best].Y), large.entries[best].value};
            return out;
        }
        Rational D = D_max ? *D_max : Rational(detail::log_rational(Theta / 2, 64).lo);
        out.thick = certify_thick(g, xi, D);
        out.kind = out.thick ? RayKind::thick : RayKind::gap;
        if (!out.thick)
            out.note = e_xi.is_infinity() ? "ray into its own base horoball gX (xi = g.inf)"
                                          : "no large projection but depth above " + to_string(D);
    } catch (const WindowRequired& e) {
        out.kind = RayKind::undecided;
        out.note = e.what();
    } catch (const Undecided& e) {
        out.kind = RayKind::undecided;
        out.note = e.what();
    }
    return out;
}

// ------------------------------------------------------ parameters

struct ThickParams {
    Rational D_max = 1;
    double rho = 0;
    double tau = 0;
    double beta = 1;
    double kappa = 1;  // chart separation tolerance

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["D_max"] = to_string(D_max);
        j["rho"] = rho;
        j["tau"] = tau;
        j["beta"] = beta;
        j["kappa"] = kappa;
        return j;
    }
};

/// d(i, K u S i) where K is the D-thick part of the fundamental domain: its
/// farthest point from i is the corner 1/2 + i e^D.
inline double rho_for(const Rational& D, const std::vector<GroupElement>& S) {
    double top = std::exp(to_double(D));
    double r = hdist({0, 1}, {0.5, top});
    for (const auto& s : S) r = std::max(r, hdist({0, 1}, to_dpoint(orbit_point(s))));
    return r;
}

inline ThickParams derive_params(const Rational& D, const std::vector<GroupElement>& S) {
    ThickParams p;
    p.D_max = D;
    p.rho = rho_for(D, S);
    // node parameter ranges have width <= 2 rho, so beta >= rho keeps them
    // inside one interval of length 4 beta; one unit of slack
    p.beta = p.rho + 1;
    return p;
}

// ------------------------------------------------------ flow nodes

struct FlowTriple {
    GroupElement v;
    double t;
};

/// A coarse flow line (x_-, xi_+) seen from its anchor time tau.
struct FlowNode {
    GroupElement h;  // x_- = h(i)
    BoundaryPoint xi;
    double tau = 0;
    GroupElement frame;  // frame^-1 c(tau) in the fundamental domain
    M2 frame64;
    DPoint w{0, 1};  // frame^-1 c(tau)
    double eta = 0;  // frame^-1 xi
    bool eta_inf = false;
    std::vector<std::pair<M2, double>> near;  // frame^-1 v and t(v)
    double t_lo = 0, t_hi = 0;

    bool empty() const { return near.empty(); }
    std::string key() const { return h.str() + "|" + xi.str(); }

    std::vector<FlowTriple> triples() const {
        std::vector<FlowTriple> out;
        for (const auto& [k, t] : near) out.push_back({frame * k.element(), t});
        std::sort(out.begin(), out.end(), [](const FlowTriple& a, const FlowTriple& b) { return a.v < b.v; });
        return out;
    }
};

/// Frame and flow data for the ray from h(i) toward xi at time tau, with all
/// orbit points within rho of c(tau).
inline FlowNode flow_node(const GroupElement& h, const BoundaryPoint& xi, double tau, double rho) {
    if (tau < 0) throw DomainError("negative flow time");
    FlowNode n{h, xi, tau, {}, {}, {0, 1}, 0, false, {}, 0, 0};
    CertifiedPoint c = geodesic_point(h, xi, CertifiedReal(from_double(tau)));
    // enough bits that the midpoint is accurate relative to Im c
    Point mid;
    for (unsigned bits = 64;; bits *= 2) {
        auto [ex, ey] = c.enclosure(bits);
        if (ey.lo > 0 && ex.width() < ey.lo * Rational(1, 1000000000000000LL) &&
            ey.width() < ey.lo * Rational(1, 1000000000000000LL)) {
            mid = {ex.mid(), ey.mid()};
            break;
        }
        if (bits > 8192) throw Undecided("flow point: enclosure does not shrink");
    }
    n.frame = locate(mid);
    n.frame64 = M2::from(n.frame);
    GroupElement fi = n.frame.inverse();
    n.w = to_dpoint(mobius_apply(fi, mid));
    BoundaryPoint eta = mobius_apply(fi, xi);
    n.eta_inf = eta.is_infinity();
    if (!n.eta_inf) n.eta = eta.value().enclosure(80).approx();
    double bw = busemann(n.w, n.eta, n.eta_inf);
    bool first = true;
    for (const auto& [k, p] : orbit_points_near(n.w, rho)) {
        double t = tau + bw - busemann(p, n.eta, n.eta_inf);
        n.near.push_back({k, t});
        n.t_lo = first ? t : std::min(n.t_lo, t);
        n.t_hi = first ? t : std::max(n.t_hi, t);
        first = false;
    }
    return n;
}

/// iota_tau(g, xi): orbit points within rho of c(tau) on the ray from g(i).
/// Only the canonical ray is used as witness.
inline std::vector<GroupElement> flow_point(const GroupElement& g, const BoundaryPoint& xi, double tau,
                                            const ThickParams& p) {
    std::vector<GroupElement> out;
    for (const auto& t : flow_node(g, xi, tau, p.rho).triples()) out.push_back(locate_orbit(t.v));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Separation of two flow lines toward the same xi at their anchors:
/// |X_a - X_b| / sqrt(Y_a Y_b) in coordinates sending xi to infinity.
/// Invariant under the group action.
inline double separation(const FlowNode& a, const FlowNode& b) {
    M2 rel = M2::from(a.frame.inverse() * b.frame);
    std::complex<double> z(b.w.x, b.w.y);
    std::complex<double> r = (double(rel.a) * z + double(rel.b)) / (double(rel.c) * z + double(rel.d));
    DPoint pa = toward_infinity(a.w, a.eta, a.eta_inf);
    DPoint pb = toward_infinity({r.real(), r.imag()}, a.eta, a.eta_inf);
    return std::abs(pa.x - pb.x) / std::sqrt(pa.y * pb.y);
}

// ------------------------------------------------------ interval families

/// Closed intervals [2 beta j, 2 beta j + 4 beta]: two staggered families.
struct StaggeredIntervals {
    double beta;

    std::pair<long, long> containing(double lo, double hi) const {
        long first = static_cast<long>(std::ceil(hi / (2 * beta) - 2));
        long last = static_cast<long>(std::floor(lo / (2 * beta)));
        return {first, last};
    }
    std::vector<long> containing_all(double lo, double hi) const {
        std::vector<long> out;
        auto [a, b] = containing(lo, hi);
        for (long j = a; j <= b; ++j) out.push_back(j);
        return out;
    }
};

struct CoverElement {
    std::size_t chart;
    long j;
    friend bool operator<(const CoverElement& x, const CoverElement& y) {
        return std::tie(x.chart, x.j) < std::tie(y.chart, y.j);
    }
    friend bool operator==(const CoverElement& x, const CoverElement& y) { return x.chart == y.chart && x.j == y.j; }
};

struct ChartAudit {
    std::size_t chart = 0;
    std::size_t points = 0;
    double mu = 1;  // max ratio over pairs with |dt| >= R0
    double A = 0;   // max | d - |dt| |
    std::size_t doubling = 0;
    bool accepted = true;
    std::string diagnostic;
};

/// Long thin cover of a set of charts, each a list of parameter values. Each
/// element is (chart, j) with parameters in [2 beta j, 2 beta j + 4 beta].
struct LongThinCover {
    double beta = 1;
    std::vector<std::vector<double>> charts;

    StaggeredIntervals intervals() const { return {beta}; }

    std::vector<CoverElement> members(std::size_t chart, double t) const {
        std::vector<CoverElement> out;
        for (long j : intervals().containing_all(t, t)) out.push_back({chart, j});
        return out;
    }

    /// Largest number of elements containing a sampled parameter, minus one.
    long order() const {
        long best = -1;
        for (std::size_t c = 0; c < charts.size(); ++c)
            for (double t : charts[c]) best = std::max(best, static_cast<long>(members(c, t).size()) - 1);
        return best;
    }

    /// Every parameter ball [t - beta, t + beta] inside one element; metric
    /// balls are inside these because Busemann parameters are 1-Lipschitz.
    std::size_t longness_failures() const {
        std::size_t bad = 0;
        for (const auto& ts : charts)
            for (double t : ts)
                if (intervals().containing_all(t - beta, t + beta).empty()) ++bad;
        return bad;
    }
};

// ------------------------------------------------------ coarse flow sample

struct FlowLineChart {
    GroupElement x_minus;
    std::optional<BoundaryPoint> x_minus_boundary;  // closure triples
    BoundaryPoint xi;
    std::vector<FlowTriple> members;  // sorted by t

    /// mu, A and doubling of v -> t(v); pairs with |dt| >= R0 for mu.
    ChartAudit audit(double R0, double mu_bound, std::size_t doubling_bound) const {
        ChartAudit a;
        a.points = members.size();
        std::vector<Point> pts;
        for (const auto& m : members) pts.push_back(orbit_point(m.v));
        auto d = [&](std::size_t i, std::size_t j) {
            return std::acosh(to_double(cosh_distance(pts[i], pts[j])));
        };
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                double dt = std::abs(members[i].t - members[j].t), dij = d(i, j);
                a.A = std::max(a.A, std::abs(dij - dt));
                if (dt >= R0 && dij > 0) a.mu = std::max(a.mu, std::max(dij / dt, dt / dij));
            }
        // R0-separated subsets of 2 R0 balls, greedily in t order
        for (std::size_t c = 0; c < pts.size(); ++c) {
            std::vector<std::size_t> chosen;
            for (std::size_t j = 0; j < pts.size(); ++j) {
                if (d(c, j) > 2 * R0) continue;
                bool sep = true;
                for (std::size_t k : chosen) sep = sep && d(j, k) >= R0;
                if (sep) chosen.push_back(j);
            }
            a.doubling = std::max(a.doubling, chosen.size());
        }
        if (a.mu > mu_bound) a.diagnostic = "quasi-isometry constant above bound";
        if (a.doubling > doubling_bound) a.diagnostic = "doubling failure";
        a.accepted = a.diagnostic.empty();
        return a;
    }
};

struct CoarseFlowSample {
    ThickParams params;
    std::vector<FlowLineChart> lines;
    bool closure_approximate = false;

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& l : lines) n += l.members.size();
        return n;
    }
};

/// Triples (g(i), v, xi) with v within rho of the ray from g(i) at integer
/// times 0..t_max, over g in the word ball and thick xi. With closure, the
/// backward half of the same line adds triples with x_- its backward endpoint.
inline CoarseFlowSample sample_coarse_flow(const ThickParams& p, unsigned radius,
                                           const std::vector<BoundaryPoint>& xi_set, unsigned t_max = 12,
                                           bool closure = false) {
    CoarseFlowSample out{p, {}, false};
    for (const auto& g : word_ball(radius)) {
        for (const auto& xi : xi_set) {
            std::optional<ThickCertificate> cert;
            try {
                cert = certify_thick(g, xi, p.D_max);
            } catch (const std::runtime_error&) {
                continue;
            }
            if (!cert) continue;
            auto collect = [&](const BoundaryPoint& target, double sign) {
                std::map<GroupElement, double> seen;
                for (unsigned k = 0; k <= t_max; ++k) {
                    FlowNode n = flow_node(g, target, k, p.rho);
                    for (const auto& tr : n.triples()) {
                        GroupElement v = locate_orbit(tr.v);
                        if (!seen.count(v)) seen[v] = sign * tr.t;
                    }
                }
                std::vector<FlowTriple> ms;
                for (const auto& [v, t] : seen) ms.push_back({v, t});
                std::sort(ms.begin(), ms.end(), [](const FlowTriple& a, const FlowTriple& b) { return a.t < b.t; });
                return ms;
            };
            out.lines.push_back({g, std::nullopt, xi, collect(xi, 1)});
            if (closure) {
                BoundaryPoint back = backward_endpoint(g, xi);
                out.lines.push_back({g, back, xi, collect(back, -1)});
                out.closure_approximate = true;
            }
        }
    }
    return out;
}

/// One chart per flow line; parameters are t(v).
inline LongThinCover build_long_thin_cover(const CoarseFlowSample& sample, double beta) {
    if (beta <= 0) throw DomainError("beta must be positive");
    if (sample.lines.empty()) throw DomainError("empty coarse flow sample");
    LongThinCover c{beta, {}};
    for (const auto& l : sample.lines) {
        std::vector<double> ts;
        for (const auto& m : l.members) ts.push_back(m.t);
        c.charts.push_back(std::move(ts));
    }
    return c;
}

// ------------------------------------------------------ thick pipeline

/// Nodes (gs, xi) for the S-thickened thick pairs, joined into charts when
/// Cayley-adjacent with separation below kappa.
class ThickCover {
public:
    ThickCover(const std::vector<std::pair<GroupElement, BoundaryPoint>>& thick_pairs,
               const std::vector<GroupElement>& S, const ThickParams& p)
        : params_(p), pairs_(thick_pairs), S_(S) {
        for (const auto& [g, xi] : pairs_)
            for (const auto& s : S_) add_node(g * s, xi);
        link();
    }

    const ThickParams& params() const { return params_; }
    const std::vector<FlowNode>& nodes() const { return nodes_; }
    const std::vector<std::pair<GroupElement, BoundaryPoint>>& pairs() const { return pairs_; }
    std::size_t chart(std::size_t node) const { return charts_[node]; }
    std::optional<std::size_t> find(const GroupElement& h, const BoundaryPoint& xi) const {
        auto it = index_.find(h.str() + "|" + xi.str());
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Pulled-back elements containing a node: its whole parameter range.
    std::vector<CoverElement> members(std::size_t node) const {
        std::vector<CoverElement> out;
        const FlowNode& n = nodes_[node];
        if (n.empty()) return out;
        for (long j : StaggeredIntervals{params_.beta}.containing_all(n.t_lo, n.t_hi))
            out.push_back({charts_[node], j});
        return out;
    }

    /// Source order: elements containing a single triple.
    long source_order() const {
        long best = -1;
        StaggeredIntervals iv{params_.beta};
        for (const auto& n : nodes_)
            for (const auto& [k, t] : n.near)
                best = std::max(best, static_cast<long>(iv.containing_all(t, t).size()) - 1);
        return best;
    }

    long pulled_order() const {
        long best = -1;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            best = std::max(best, static_cast<long>(members(i).size()) - 1);
        return best;
    }

    std::size_t empty_nodes() const {
        return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const FlowNode& n) {
            return n.empty();
        }));
    }

    /// Element containing every (gs, xi), if any.
    std::optional<CoverElement> long_element(const GroupElement& g, const BoundaryPoint& xi) const {
        double lo = 0, hi = 0;
        std::optional<std::size_t> chart;
        for (std::size_t k = 0; k < S_.size(); ++k) {
            auto i = find(g * S_[k], xi);
            if (!i || nodes_[*i].empty()) return std::nullopt;
            const FlowNode& n = nodes_[*i];
            if (!chart) {
                chart = charts_[*i];
                lo = n.t_lo;
                hi = n.t_hi;
            } else {
                if (charts_[*i] != *chart) return std::nullopt;
                lo = std::min(lo, n.t_lo);
                hi = std::max(hi, n.t_hi);
            }
        }
        auto js = StaggeredIntervals{params_.beta}.containing_all(lo, hi);
        if (js.empty()) return std::nullopt;
        return CoverElement{*chart, js.front()};
    }

    std::size_t longness_failures() const {
        std::size_t bad = 0;
        for (const auto& [g, xi] : pairs_)
            if (!long_element(g, xi)) ++bad;
        return bad;
    }

    /// gamma U meets U only for gamma fixing xi; counts violations over
    /// gamma in the given set.
    std::size_t fsubset_failures(const std::vector<GroupElement>& gammas) const {
        std::size_t bad = 0;
        for (const auto& gamma : gammas) {
            if (gamma == GroupElement::identity()) continue;
            for (std::size_t i = 0; i < nodes_.size(); ++i) {
                BoundaryPoint gx = mobius_apply(gamma, nodes_[i].xi);
                auto j = find(gamma * nodes_[i].h, gx);
                if (!j || gx == nodes_[i].xi || charts_[*j] != charts_[i]) continue;
                auto a = members(i), b = members(*j);
                for (const auto& e : a)
                    if (std::find(b.begin(), b.end(), e) != b.end()) ++bad;
            }
        }
        return bad;
    }

private:
    void add_node(const GroupElement& h, const BoundaryPoint& xi) {
        std::string key = h.str() + "|" + xi.str();
        if (index_.count(key)) return;
        index_[key] = nodes_.size();
        nodes_.push_back(flow_node(h, xi, params_.tau, params_.rho));
    }

    void link() {
        std::vector<std::size_t> parent(nodes_.size());
        std::iota(parent.begin(), parent.end(), 0);
        auto root = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        const GroupElement gens[3] = {GroupElement::S(), GroupElement::T(), GroupElement::T().inverse()};
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            for (const auto& s : gens) {
                auto j = find(nodes_[i].h * s, nodes_[i].xi);
                if (!j || nodes_[i].empty() || nodes_[*j].empty()) continue;
                if (separation(nodes_[i], nodes_[*j]) < params_.kappa) {
                    std::size_t a = root(i), b = root(*j);
                    if (a != b) parent[std::max(a, b)] = std::min(a, b);
                }
            }
        charts_.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) charts_[i] = root(i);
    }

    ThickParams params_;
    std::vector<std::pair<GroupElement, BoundaryPoint>> pairs_;
    std::vector<GroupElement> S_;
    std::vector<FlowNode> nodes_;
    std::vector<std::size_t> charts_;  // smallest node index of the chart
    std::unordered_map<std::string, std::size_t> index_;
};

// ------------------------------------------------------ ambient metric

namespace detail {

struct M2Hash {
    std::size_t operator()(const std::array<std::int64_t, 4>& m) const {
        std::size_t h = 0;
        for (auto v : m) h = h * 1000003u ^ std::hash<std::int64_t>()(v);
        return h;
    }
};

// PSL representative: first nonzero of (c, d) positive
inline std::array<std::int64_t, 4> psl_key(const M2& m) {
    bool flip = m.c < 0 || (m.c == 0 && m.d < 0);
    return flip ? std::array<std::int64_t, 4>{-m.a, -m.b, -m.c, -m.d} : std::array<std::int64_t, 4>{m.a, m.b, m.c, m.d};
}

}  // namespace detail

/// Word length in S, T^+-1, capped: min(|g|, cap + 1).
inline unsigned capped_word_length(const M2& g, unsigned cap = 10) {
    static std::map<unsigned, std::unordered_map<std::array<std::int64_t, 4>, unsigned, detail::M2Hash>> tables;
    auto& t = tables[cap];
    if (t.empty()) {
        std::vector<M2> frontier{M2{}};
        t[detail::psl_key(M2{})] = 0;
        const M2 gens[3] = {{0, -1, 1, 0}, {1, 1, 0, 1}, {1, -1, 0, 1}};
        for (unsigned r = 1; r <= cap; ++r) {
            std::vector<M2> next;
            for (const auto& w : frontier)
                for (const auto& s : gens) {
                    M2 h = w * s;
                    if (t.emplace(detail::psl_key(h), r).second) next.push_back(h);
                }
            frontier = std::move(next);
        }
    }
    auto it = t.find(detail::psl_key(g));
    return it == t.end() ? cap + 1 : it->second;
}

inline unsigned capped_word_length(const GroupElement& g, unsigned cap = 10) {
    for (const Integer* e : {&g.a(), &g.b(), &g.c(), &g.d()})
        if (abs(*e) > 1000000) return cap + 1;
    return capped_word_length(M2::from(g), cap);
}

/// A point (g, xi) of G x boundary prepared for the ambient metric.
struct AmbientPoint {
    M2 g_inv;
    double angle;  // of g^-1 xi on the boundary circle
    bool large = false;

    static AmbientPoint from(const GroupElement& g, const BoundaryPoint& xi) {
        AmbientPoint a{};
        a.angle = boundary_angle(mobius_apply(g.inverse(), xi));
        try {
            a.g_inv = M2::from(g.inverse());
        } catch (const DomainError&) {
            a.large = true;
        }
        return a;
    }
};

/// Invariant metric on G x boundary: capped word distance of g, g' plus the
/// chordal distance of g^-1 xi, g'^-1 xi'.
inline double ambient_distance(const AmbientPoint& x, const AmbientPoint& y, unsigned cap = 10) {
    double chord = 2 * std::abs(std::sin((x.angle - y.angle) / 2));
    if (x.large || y.large) return cap + 1 + chord;
    // g^-1 g' = x.g_inv * (y.g_inv)^-1
    M2 yi{y.g_inv.d, -y.g_inv.b, -y.g_inv.c, y.g_inv.a};
    unsigned w;
    try {
        w = capped_word_length(x.g_inv * yi, cap);
    } catch (const DomainError&) {
        w = cap + 1;
    }
    return w + chord;
}

inline double ambient_distance(const std::pair<GroupElement, BoundaryPoint>& x,
                               const std::pair<GroupElement, BoundaryPoint>& y) {
    return ambient_distance(AmbientPoint::from(x.first, x.second), AmbientPoint::from(y.first, y.second));
}

/// U' = {x : d(x, U) < d(x, P \ U)} for sets U given as index lists into P.
struct ExtendedCover {
    std::vector<std::vector<std::size_t>> sets;  // indices into the ambient list
    long order = -1;
    bool restricts = true;  // U' meets P exactly in U
};

inline ExtendedCover extend_cover(const std::vector<std::pair<GroupElement, BoundaryPoint>>& P,
                                  const std::vector<std::vector<std::size_t>>& U,
                                  const std::vector<std::pair<GroupElement, BoundaryPoint>>& ambient) {
    ExtendedCover out;
    // distances ambient x P, computed once
    std::vector<AmbientPoint> pa, pp;
    for (const auto& [g, xi] : ambient) pa.push_back(AmbientPoint::from(g, xi));
    for (const auto& [g, xi] : P) pp.push_back(AmbientPoint::from(g, xi));
    std::vector<std::vector<double>> dist(ambient.size(), std::vector<double>(P.size()));
    for (std::size_t a = 0; a < ambient.size(); ++a)
        for (std::size_t p = 0; p < P.size(); ++p) dist[a][p] = ambient_distance(pa[a], pp[p]);
    std::vector<std::size_t> count(ambient.size(), 0);
    for (const auto& u : U) {
        std::vector<char> in(P.size(), 0);
        for (std::size_t i : u) in[i] = 1;
        std::vector<std::size_t> ext;
        for (std::size_t a = 0; a < ambient.size(); ++a) {
            double du = std::numeric_limits<double>::infinity(), dc = du;
            for (std::size_t p = 0; p < P.size(); ++p) (in[p] ? du : dc) = std::min(in[p] ? du : dc, dist[a][p]);
            if (du < dc) {
                ext.push_back(a);
                ++count[a];
            }
        }
        out.sets.push_back(std::move(ext));
    }
    for (std::size_t c : count) out.order = std::max(out.order, static_cast<long>(c) - 1);
    // restriction: ambient points equal to sample points
    for (std::size_t k = 0; k < U.size(); ++k) {
        std::set<std::size_t> want(U[k].begin(), U[k].end());
        for (std::size_t a = 0; a < ambient.size(); ++a) {
            std::optional<std::size_t> same;
            for (std::size_t p = 0; p < P.size(); ++p)
                if (dist[a][p] == 0) same = p;
            if (!same) continue;
            bool in_ext = std::binary_search(out.sets[k].begin(), out.sets[k].end(), a);
            if (in_ext != (want.count(*same) > 0)) out.restricts = false;
        }
    }
    return out;
}

// ------------------------------------------------------ tau search + report

enum class TauStatus { found, not_found_within_budget, failed };

inline const char* to_string(TauStatus s) {
    switch (s) {
        case TauStatus::found: return "found";
        case TauStatus::not_found_within_budget: return "not_found_within_budget";
        case TauStatus::failed: return "failed";
    }
    return "?";
}

struct TauSearch {
    TauStatus status = TauStatus::not_found_within_budget;
    double tau = 0;
    std::vector<std::pair<double, std::size_t>> tried;  // tau, longness failures
    std::string note;
};

/// Doubling search tau = tau0, 2 tau0, ... <= tau_max until every thick pair
/// is S-long. An empty iota_tau at a node means rho is below d(K u S x0, x0):
/// reported as failed.
inline TauSearch choose_tau(const std::vector<std::pair<GroupElement, BoundaryPoint>>& thick_pairs,
                            const std::vector<GroupElement>& S, ThickParams p, double tau0 = 1,
                            double tau_max = 64) {
    TauSearch out;
    for (double tau = tau0; tau <= tau_max; tau *= 2) {
        p.tau = tau;
        ThickCover cover(thick_pairs, S, p);
        if (cover.empty_nodes() > 0) {
            out.status = TauStatus::failed;
            out.tau = tau;
            out.note = std::to_string(cover.empty_nodes()) + " nodes with empty flow image";
            return out;
        }
        std::size_t bad = cover.longness_failures();
        out.tried.push_back({tau, bad});
        if (bad == 0) {
            out.status = TauStatus::found;
            out.tau = tau;
            return out;
        }
    }
    return out;
}

struct ThickReport {
    ThickParams params;
    std::size_t candidates = 0;
    std::size_t thick_pairs = 0;
    std::size_t not_thick = 0;
    std::size_t sample_size = 0;  // nodes
    TauSearch tau;
    long source_order = -1;
    long pulled_order = -1;
    long extended_order = -1;
    long order_bound = 2;
    bool extension_restricts = true;
    std::size_t longness_failures = 0;
    std::size_t fsubset_failures = 0;
    std::size_t charts = 0;

    long order_measured() const { return std::max({source_order, pulled_order, extended_order}); }

    bool passed() const {
        return tau.status == TauStatus::found && longness_failures == 0 && fsubset_failures == 0 &&
               order_measured() <= order_bound && pulled_order <= source_order && extension_restricts;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["params"] = params.to_json();
        j["candidates"] = candidates;
        j["thick_pairs"] = thick_pairs;
        j["sample_size"] = sample_size;
        j["order_measured"] = order_measured();
        j["order_bound"] = order_bound;
        j["source_order"] = source_order;
        j["pulled_order"] = pulled_order;
        j["extended_order"] = extended_order;
        j["extension_restricts"] = extension_restricts;
        j["tau_status"] = to_string(tau.status);
        j["tau_chosen"] = tau.tau;
        nlohmann::ordered_json tried = nlohmann::ordered_json::array();
        for (const auto& [t, b] : tau.tried) tried.push_back({{"tau", t}, {"longness_failures", b}});
        j["tau_tried"] = tried;
        j["longness_failures"] = longness_failures;
        j["fsubset_failures"] = fsubset_failures;
        j["charts"] = charts;
        j["passed"] = passed();
        return j;
    }
};

/// End to end: keep the thick candidates, search tau, pull back, extend to
/// the ambient sample (candidates plus extra pairs) and audit.
inline ThickReport verify_thick_theorem(const std::vector<GroupElement>& S, ThickParams p,
                                        const std::vector<std::pair<GroupElement, BoundaryPoint>>& candidates,
                                        const std::vector<std::pair<GroupElement, BoundaryPoint>>& extra,
                                        long order_bound = 2, double tau_max = 64) {
    ThickReport r;
    r.candidates = candidates.size();
    r.order_bound = order_bound;
    std::vector<std::pair<GroupElement, BoundaryPoint>> thick;
    for (const auto& [g, xi] : candidates) {
        std::optional<ThickCertificate> c;
        try {
            c = certify_thick(g, xi, p.D_max);
        } catch (const std::runtime_error&) {
        }
        if (c) thick.push_back({g, xi});
    }
    r.thick_pairs = thick.size();
    r.not_thick = candidates.size() - thick.size();
    r.tau = choose_tau(thick, S, p, 1, tau_max);
    if (r.tau.status == TauStatus::found) p.tau = r.tau.tau;
    r.params = p;
    if (thick.empty() || r.tau.status != TauStatus::found) {
        r.longness_failures = thick.size();
        return r;
    }
    ThickCover cover(thick, S, p);
    r.sample_size = cover.nodes().size();
    r.source_order = cover.source_order();
    r.pulled_order = cover.pulled_order();
    r.longness_failures = cover.longness_failures();
    r.fsubset_failures = cover.fsubset_failures(word_ball(2));
    std::set<std::size_t> charts;
    for (std::size_t i = 0; i < cover.nodes().size(); ++i) charts.insert(cover.chart(i));
    r.charts = charts.size();

    // pulled-back sets over the nodes, then extension
    std::vector<std::pair<GroupElement, BoundaryPoint>> P;
    std::map<CoverElement, std::vector<std::size_t>> sets;
    for (std::size_t i = 0; i < cover.nodes().size(); ++i) {
        P.push_back({cover.nodes()[i].h, cover.nodes()[i].xi});
        for (const auto& e : cover.members(i)) sets[e].push_back(i);
    }
    std::vector<std::vector<std::size_t>> U;
    for (auto& [e, v] : sets) U.push_back(v);
    std::vector<std::pair<GroupElement, BoundaryPoint>> ambient = P;
    ambient.insert(ambient.end(), extra.begin(), extra.end());
    ExtendedCover ext = extend_cover(P, U, ambient);
    r.extended_order = ext.order;
    r.extension_restricts = ext.restricts;
    return r;
}

}  // namespace farey
