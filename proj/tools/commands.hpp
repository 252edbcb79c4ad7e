#pragma once

// Command layer of the farey CLI. Each command takes a RunConfig and returns
// an exit code plus a results object; main() wraps results into reports.
// Nothing here reads the clock, so reports depend on config and seed only.

#include "farey/amenability.hpp"
#include "farey/projection_complex.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace farey::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.3.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Every key a config may set. A config file overrides a subset; unknown
/// keys are rejected. Pins are produced by --calibrate.
inline json default_config() {
    return json{
        {"seed", 1},
        {"max_refine", 10},
        // projection axioms
        {"axiom_samples", 100000},
        {"axiom_qmax", 50},
        {"finiteness_pairs", 1000},
        {"finiteness_qmax", 200},
        {"semicontinuity_samples", 10000},
        {"semicontinuity_Theta", "4"},
        {"behrstock_qmax", 50},
        {"behrstock_samples", 20000},
        {"behrstock_sample_qmax", 200},
        {"safety_factor", "2"},
        {"theta_hat", "1"},
        {"theta", "2"},
        // projection complex
        {"K", "20"},
        {"theta_local_pins", {"1/21", "295/3704", "2/21"}},
        {"theta_P_pins", {"12", "19004/861", "22"}},
        {"theta_P", "19004/861"},
        {"theta_prime_S_pins", {"0", "1", "2", "4", "6"}},
        // thin cover
        {"thin_radius", 3},
        {"thin_samples", 1200},
        {"thin_word_length", 3},
        {"thin_qmax", 10000},
        {"thin_min_thin_pairs", 1000},
        {"ladder", json::array()},
        // thick cover
        {"thick_radius", 5},
        {"thick_base_radius", 1},
        {"D_max", "1"},
        {"thick_translates", 20},
        {"thick_translate_length", 3},
        {"thick_extra", 100},
        {"tau_max", 64},
        {"N_thick", 2},
        // amenability
        {"combined_radius", 1},
        {"combined_thin_samples", 300},
        {"combined_surds", 100},
        {"defect_points", 40},
        {"defect_slice_radius", 4},
        {"defect_S_radius", 1},
        {"defect_radii", {1, 3}},
        {"defect_pins", {"2", "2"}},
        {"coinduction_bump", "1/10"},
        // render
        {"render_qmax", 12},
        {"render_rays", 8},
    };
}

inline Rational parse_rational(const json& j) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (!j.is_string()) throw ConfigError("expected a rational string, got " + j.dump());
    std::string s = j.get<std::string>();
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        return Rational(Integer(s.substr(0, slash)), Integer(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw ConfigError("bad rational '" + s + "'");
    }
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct RunConfig {
    json doc = default_config();

    static RunConfig from(const json& overrides) {
        RunConfig c;
        if (!overrides.is_object()) throw ConfigError("config must be a flat JSON object");
        for (const auto& [k, v] : overrides.items()) {
            if (!c.doc.contains(k)) throw ConfigError("unknown config key '" + k + "'");
            c.doc[k] = v;
        }
        return c;
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read " + path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(path + ": " + e.what());
        }
        return from(j);
    }

    std::uint64_t seed() const { return doc["seed"].get<std::uint64_t>(); }
    long integer(const char* k) const { return doc.at(k).get<long>(); }
    Rational rational(const char* k) const { return parse_rational(doc.at(k)); }

    std::vector<Rational> rationals(const char* k) const {
        std::vector<Rational> out;
        for (const auto& x : doc.at(k)) out.push_back(parse_rational(x));
        return out;
    }

    /// Hash of the canonical (key-sorted) document.
    std::string hash() const {
        std::ostringstream o;
        o << std::hex << std::setw(16) << std::setfill('0') << fnv1a(nlohmann::json(doc).dump());
        return o.str();
    }
};

struct Outcome {
    int code = 0;
    json results;
};

inline json make_report(const std::string& command, const RunConfig& cfg, const json& results) {
    return json{{"command", command}, {"config_hash", cfg.hash()}, {"version", kVersion}, {"results", results}};
}

inline std::size_t count(const RunConfig& c, const char* k) { return static_cast<std::size_t>(c.integer(k)); }

// ------------------------------------------------------------- axioms

inline Outcome cmd_axioms(const RunConfig& cfg) {
    FareyFamily fam;
    Rng rng(cfg.seed());
    const std::int64_t qmax = cfg.integer("axiom_qmax");
    const Rational theta = cfg.rational("theta");
    json res;
    res["theta"] = to_string(theta);

    auto sym_sample = sample_triples(rng, count(cfg, "axiom_samples"), qmax, false);
    auto p1 = check_symmetry(fam, sym_sample);

    std::vector<Quad> quads;
    for (std::size_t i = 0; i < count(cfg, "axiom_samples"); ++i) {
        auto arg = [&] { return Argument(BoundaryPoint(random_rational(rng, qmax))); };
        Horoball Y = Horoball::at(random_rational(rng, qmax));
        quads.push_back({Y, arg(), arg(), arg()});
    }
    auto p2 = check_triangle(fam, quads);

    // Behrstock: sampled triples (Y, Y', xi) at larger denominators against
    // the pinned theta = safety * theta_hat
    std::vector<Triple> bt;
    const std::int64_t bq = cfg.integer("behrstock_sample_qmax");
    while (bt.size() < count(cfg, "behrstock_samples")) {
        Horoball Y = Horoball::at(random_rational(rng, bq)), Y2 = Horoball::at(random_rational(rng, bq));
        if (rng.below(10) == 0) Y = Horoball::infinity();
        if (Y == Y2) continue;
        Argument xi = rng.coin() ? Argument(BoundaryPoint(random_rational(rng, bq))) : Argument(random_surd(rng, 3));
        bt.push_back({Y, Argument(Y2), xi});
    }
    auto p3 = check_behrstock(fam, bt, theta);

    std::vector<std::pair<Argument, Argument>> fp;
    for (std::size_t i = 0; i < count(cfg, "finiteness_pairs"); ++i) {
        auto arg = [&]() -> Argument {
            Rational x = random_rational(rng, qmax);
            return rng.coin() ? Argument(Horoball::at(x)) : Argument(BoundaryPoint(x));
        };
        Argument u = arg(), v = arg();
        if (u == v) continue;
        fp.push_back({u, v});
    }
    auto p4 = check_finiteness(fp, theta, cfg.integer("finiteness_qmax"));

    auto semi = sample_triples(rng, count(cfg, "semicontinuity_samples"), qmax, true);
    auto p5 = check_semicontinuity(fam, semi, cfg.rational("semicontinuity_Theta"), theta);

    res["checks"] = json::array({to_json(p1), to_json(p2), to_json(p3), to_json(p4), to_json(p5)});
    bool ok = p1.passed() && p2.passed() && p3.passed() && p4.passed() && p5.passed() && p1.undecided == 0;
    res["passed"] = ok;
    return {ok ? 0 : 1, res};
}

/// Brute-force pins: theta_hat over the exhaustive window, the reference
/// window constants and theta'_S by word radius.
inline Outcome cmd_calibrate(const RunConfig& cfg) {
    json res;
    auto b = behrstock_window_constant(cfg.integer("behrstock_qmax"), Rational(1000000));
    if (!b.constant) throw DomainError("empty calibration window");
    Rational theta_hat = parse_rational(*b.constant);
    Rational theta = cfg.rational("safety_factor") * theta_hat;
    res["behrstock_window_size"] = b.samples;
    res["theta_hat_at"] = b.witnesses.front();
    res["theta_hat"] = to_string(theta_hat);
    res["theta"] = to_string(theta);

    Rational K = cfg.rational("K");
    json loc = json::array(), tp = json::array();
    Rational theta_P = 0;
    for (const auto& w : reference_windows(K)) {
        auto c = measure_constants(ProjComplexGraph(w));
        loc.push_back(to_string(c.theta_local));
        tp.push_back(to_string(c.theta_P));
        theta_P = std::max(theta_P, c.theta_P);
    }
    res["theta_local_pins"] = loc;
    res["theta_P_pins"] = tp;
    res["theta_P"] = to_string(theta_P);

    json ts = json::array();
    for (unsigned r = 0; r <= 4; ++r) ts.push_back(to_string(theta_S_raw(FinitePart::ball(r))));
    res["theta_prime_S_pins"] = ts;

    json pinned = cfg.doc;
    for (const char* k : {"theta_hat", "theta", "theta_local_pins", "theta_P_pins", "theta_P", "theta_prime_S_pins"})
        pinned[k] = res[k];
    res["config"] = pinned;
    return {0, res};
}

// ------------------------------------------------------------- complex

inline Outcome cmd_complex(const RunConfig& cfg) {
    Rational K = cfg.rational("K");
    auto loc_pins = cfg.rationals("theta_local_pins"), tp_pins = cfg.rationals("theta_P_pins");
    auto windows = reference_windows(K);
    if (loc_pins.size() != windows.size() || tp_pins.size() != windows.size())
        throw ConfigError("need one pin per reference window");
    json res, ws = json::array();
    bool ok = true;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        ProjComplexGraph g(windows[i]);
        auto c = measure_constants(g);
        auto dev = check_angle_deviation(g, c.theta_P);
        auto tr = check_angle_transfer(g, c.theta_P, all_pairs(g));
        bool pinned = c.theta_local == loc_pins[i] && c.theta_P == tp_pins[i];
        ok = ok && pinned && dev.passed() && tr.passed() && g.connected();
        json w = g.to_json();
        w["theta_local"] = to_string(c.theta_local);
        w["theta_P"] = to_string(c.theta_P);
        w["matches_pins"] = pinned;
        w["angle_deviation"] = to_json(dev);
        w["angle_transfer"] = to_json(tr);
        ws.push_back(w);
    }
    res["windows"] = ws;
    res["passed"] = ok;
    return {ok ? 0 : 1, res};
}

// ------------------------------------------------------------- thin

/// The configured ladder, or the standard one from theta, theta_S, theta_P.
inline ThetaLadder make_ladder(const RunConfig& cfg, const FinitePart& S) {
    Rational theta = cfg.rational("theta"), theta_P = cfg.rational("theta_P"), K = cfg.rational("K");
    ThetaLadder L = ThetaLadder::standard(theta, theta_S(S, theta_P), theta_P, K);
    auto explicit_T = cfg.rationals("ladder");
    if (!explicit_T.empty()) {
        if (explicit_T.size() != 6) throw ConfigError("ladder needs six values Theta_0..Theta_5");
        std::copy(explicit_T.begin(), explicit_T.end(), L.Theta.begin());
    }
    for (int i = 0; i + 1 < 6; ++i)
        if (!(L[i] < L[i + 1]))
            throw ConfigError("ladder is not increasing at Theta_" + std::to_string(i + 1) + " = " +
                              to_string(L[i + 1]));
    return L;
}

inline Outcome cmd_thin(const RunConfig& cfg) {
    FinitePart S = FinitePart::ball(static_cast<unsigned>(cfg.integer("thin_radius")));
    ThetaLadder L = make_ladder(cfg, S);
    Rng rng(cfg.seed());
    ThinCover cover(L, S);
    auto sample = sample_thin_pairs(rng, count(cfg, "thin_samples"), static_cast<unsigned>(cfg.integer("thin_word_length")),
                                    cfg.integer("thin_qmax"), L);
    auto r = verify_thin_theorem(cover, sample);
    json res = r.to_json();
    json audit = json::array();
    for (const auto& c : L.audit()) audit.push_back({{"inequality", c.name}, {"holds", c.ok}});
    res["ladder_audit"] = audit;
    res["S_size"] = S.elements.size();
    bool enough = r.thin_pairs >= std::min<std::size_t>(count(cfg, "thin_min_thin_pairs"), sample.size());
    res["enough_thin_pairs"] = enough;
    bool ok = sample.empty() || (r.passed() && enough);
    res["passed"] = ok;
    return {ok ? 0 : 1, res};
}

// ------------------------------------------------------------- thick

/// Base rays g in ball(base) toward phi, sqrt 2 and random translates.
inline std::vector<Pair> thick_candidates(const RunConfig& cfg, Rng& rng) {
    std::vector<BoundaryPoint> xis{BoundaryPoint::phi(), BoundaryPoint::sqrt2()};
    for (long k = 0; k < cfg.integer("thick_translates"); ++k) {
        GroupElement h = random_element(rng, static_cast<unsigned>(cfg.integer("thick_translate_length")));
        xis.push_back(mobius_apply(h, rng.coin() ? BoundaryPoint::phi() : BoundaryPoint::sqrt2()));
    }
    std::vector<Pair> out;
    for (const auto& g : word_ball(static_cast<unsigned>(cfg.integer("thick_base_radius"))))
        for (const auto& xi : xis) out.push_back({g, xi});
    return out;
}

inline Outcome cmd_thick(const RunConfig& cfg) {
    Rng rng(cfg.seed());
    Rational D = cfg.rational("D_max");
    auto S = word_ball(static_cast<unsigned>(cfg.integer("thick_radius")));
    auto candidates = thick_candidates(cfg, rng);
    std::vector<Pair> extra;
    for (long k = 0; k < cfg.integer("thick_extra"); ++k) extra.push_back({random_element(rng, 2), random_surd(rng, 2)});
    json res;
    if (candidates.empty()) {
        res["candidates"] = 0;
        res["passed"] = true;
        return {0, res};
    }
    ThickParams p = derive_params(D, S);
    auto r = verify_thick_theorem(S, p, candidates, extra, cfg.integer("N_thick"),
                                  static_cast<double>(cfg.integer("tau_max")));
    res = r.to_json();
    res["passed"] = r.passed();
    return {r.passed() ? 0 : 1, res};
}

// ------------------------------------------------------------- amenability

inline std::unique_ptr<ThinCover> thin_cover_at(const RunConfig& cfg, unsigned radius) {
    FinitePart S = FinitePart::ball(radius);
    return std::make_unique<ThinCover>(make_ladder(cfg, S), S);
}

/// Points at e: planted rationals (thin for the radius-3 ladder) mixed with
/// plain ones.
inline std::vector<Pair> defect_points(const RunConfig& cfg, const ThetaLadder& L) {
    Rng rng(cfg.seed());
    std::vector<Pair> pts;
    for (std::size_t k = 0; k < count(cfg, "defect_points"); ++k) {
        Rational x = rng.coin() ? planted_rational(rng, static_cast<std::int64_t>(to_double(L[0])) / 2,
                                                   static_cast<std::int64_t>(to_double(L[5]) * 1.2))
                                : random_rational(rng, 60);
        pts.push_back({GroupElement(), BoundaryPoint(x)});
    }
    return pts;
}

inline Outcome cmd_amenability(const RunConfig& cfg) {
    json res;
    bool ok = true;

    // combined cover
    {
        auto thin = thin_cover_at(cfg, static_cast<unsigned>(cfg.integer("combined_radius")));
        Rng rng(cfg.seed());
        auto pts = sample_thin_pairs(rng, count(cfg, "combined_thin_samples"), 2, 60, thin->ladder());
        for (std::size_t k = 0; k < count(cfg, "combined_surds"); ++k)
            pts.push_back({random_element(rng, 2), random_surd(rng, 2)});
        json c;
        if (pts.empty()) {
            c["points"] = 0;
            c["passed"] = true;
        } else {
            auto r = combine_covers(*thin, pts, static_cast<double>(cfg.integer("tau_max")));
            c = r.to_json();
            ok = ok && r.passed();
        }
        res["combined"] = c;
    }

    // defect at two longness radii on one pinned sample
    {
        auto radii = cfg.doc.at("defect_radii").get<std::vector<unsigned>>();
        auto pins = cfg.rationals("defect_pins");
        if (radii.size() != 2 || pins.size() != 2) throw ConfigError("defect_radii and defect_pins need two entries");
        auto big = thin_cover_at(cfg, radii[1]);
        auto pts = defect_points(cfg, big->ladder());
        auto S = word_ball(static_cast<unsigned>(cfg.integer("defect_S_radius")));
        json d = json::array();
        std::vector<Rational> values;
        for (std::size_t i = 0; i < 2; ++i) {
            auto cover = i == 1 ? std::move(big) : thin_cover_at(cfg, radii[i]);
            auto r = pts.empty() ? DefectReport{} : defect(thin_member_fn(*cover), pts, S,
                                                           static_cast<unsigned>(cfg.integer("defect_slice_radius")));
            json j = r.to_json();
            j["longness_radius"] = radii[i];
            // maximum over points whose F vectors still overlap
            Rational overlapping = 0;
            for (const auto& e : r.worst)
                if (e.value < 2) overlapping = std::max(overlapping, e.value);
            j["defect_overlapping"] = to_string(overlapping);
            j["matches_pin"] = r.defect == pins[i];
            values.push_back(r.defect);
            if (!pts.empty()) ok = ok && r.valid && r.defect == pins[i];
            d.push_back(j);
        }
        res["defect"] = d;
        res["defect_monotone"] = values[1] <= values[0];
        res["defect_strict"] = values[1] < values[0];
        if (!pts.empty()) ok = ok && values[1] < values[0];
    }

    // coinduction on Z/4 over Z/2, exhaustive
    {
        auto toy = z4_toy(cfg.rational("coinduction_bump"));
        auto r = coinduct(toy, {0, 1, 2, 3});
        res["coinduction"] = r.to_json();
        ok = ok && r.transfer_holds();
    }
    res["passed"] = ok;
    return {ok ? 0 : 1, res};
}

// ------------------------------------------------------------- render

struct Canvas {
    double x0, x1, y1;  // visible [x0, x1] x [0, y1]
    double W = 900, H;
    std::ostringstream body;

    Canvas(double a, double b, double top) : x0(a), x1(b), y1(top), H(900 * top / (b - a)) {}

    double px(double x) const { return (x - x0) / (x1 - x0) * W; }
    double py(double y) const { return H - y / y1 * H; }
    double scale() const { return W / (x1 - x0); }

    void circle(double cx, double cy, double r, const std::string& style) {
        body << "<circle cx=\"" << px(cx) << "\" cy=\"" << py(cy) << "\" r=\"" << r * scale() << "\" " << style
             << "/>\n";
    }
    void dot(double x, double y, double r_px, const std::string& style) {
        body << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << r_px << "\" " << style << "/>\n";
    }
    void rect_above(double y, const std::string& style) {
        body << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << py(y) << "\" " << style << "/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& style) {
        body << "<polyline points=\"";
        for (const auto& [x, y] : pts) body << px(x) << "," << py(y) << " ";
        body << "\" " << style << "/>\n";
    }
    void text(double x, double y, const std::string& s) {
        body << "<text x=\"" << px(x) << "\" y=\"" << py(y) << "\" font-size=\"11\">" << s << "</text>\n";
    }
    std::string svg() const {
        std::ostringstream o;
        o << std::setprecision(6);
        o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
          << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
          << body.str() << "<line x1=\"0\" y1=\"" << H << "\" x2=\"" << W << "\" y2=\"" << H
          << "\" stroke=\"black\"/>\n</svg>\n";
        return o.str();
    }
};

inline void draw_horoball(Canvas& c, const Horoball& Y, const std::string& style) {
    if (Y.is_infinity()) {
        c.rect_above(1, style);
        return;
    }
    double r = 1 / (2 * std::pow(Y.q().convert_to<double>(), 2));
    c.circle(to_double(Y.tangency().rational_value()), r, r, style);
}

inline void draw_ford(Canvas& c, long qmax) {
    for (long q = 1; q <= qmax; ++q)
        for (long p = static_cast<long>(std::floor(c.x0 * q)); p <= static_cast<long>(std::ceil(c.x1 * q)); ++p)
            if (std::gcd(p, q) == 1) draw_horoball(c, Horoball(p, q), "fill=\"none\" stroke=\"#bbb\" stroke-width=\"0.6\"");
    draw_horoball(c, Horoball::infinity(), "fill=\"none\" stroke=\"#bbb\"");
}

inline std::vector<std::pair<double, double>> ray_polyline(const GroupElement& g, const BoundaryPoint& xi, double t_max) {
    std::vector<std::pair<double, double>> pts;
    for (double t = 0; t <= t_max; t += 0.05) {
        auto [x, y] = geodesic_point(g, xi, CertifiedReal(from_double(t))).approx();
        pts.push_back({x, y});
        if (y < 1e-4) break;
    }
    return pts;
}

/// Scenes keyed by file name. The thin scene shows sampled rays with their
/// Z and Y_i; the thick scene shows flow points along thick rays.
inline std::vector<std::pair<std::string, std::string>> cmd_render(const RunConfig& cfg, const std::string& scene) {
    std::vector<std::pair<std::string, std::string>> out;
    const long qmax = cfg.integer("render_qmax");
    if (scene == "thin" || scene == "all") {
        Canvas c(-1.5, 2.5, 2.2);
        draw_ford(c, qmax);
        auto cover = thin_cover_at(cfg, 1);
        Rng rng(cfg.seed());
        auto pts = sample_thin_pairs(rng, 200, 1, 200, cover->ladder());
        std::size_t drawn = 0;
        for (const auto& [g, xi] : pts) {
            if (drawn >= count(cfg, "render_rays")) break;
            const auto& a = cover->analyze(mobius_apply(g.inverse(), xi));
            if (!a.thin()) continue;
            double x = xi.value().approx();
            if (x < c.x0 || x > c.x1) continue;
            ++drawn;
            for (const auto& Y : a.Y) {
                Horoball gY = mobius_apply(g, Y);
                draw_horoball(c, gY, "fill=\"#f4a\" fill-opacity=\"0.25\" stroke=\"#c27\"");
                // deep horoballs are invisible at this scale; mark the tangency
                if (!gY.is_infinity()) c.dot(to_double(gY.tangency().rational_value()), 0, 3, "fill=\"#c27\"");
            }
            c.polyline(ray_polyline(g, xi, 14), "fill=\"none\" stroke=\"#236\" stroke-width=\"1\"");
        }
        out.push_back({"thin.svg", c.svg()});
    }
    if (scene == "thick" || scene == "all") {
        Canvas c(-1.5, 2.5, 2.2);
        draw_ford(c, qmax);
        ThickParams p = derive_params(cfg.rational("D_max"), word_ball(3));
        for (const auto& xi : {BoundaryPoint::phi(), BoundaryPoint::sqrt2()}) {
            c.polyline(ray_polyline(GroupElement(), xi, 10), "fill=\"none\" stroke=\"#236\" stroke-width=\"1.2\"");
            for (double tau = 0; tau <= 8; tau += 1) {
                for (const auto& v : flow_point(GroupElement(), xi, tau, p)) {
                    auto [x, y] = to_dpoint(orbit_point(v));
                    if (x < c.x0 || x > c.x1 || y > c.y1) continue;
                    c.dot(x, y, 2.5, "fill=\"#2a6\"");
                }
            }
        }
        out.push_back({"thick.svg", c.svg()});
    }
    if (out.empty()) throw ConfigError("unknown scene '" + scene + "'");
    return out;
}

}  // namespace farey::cli
