#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "abx/errors.hpp"
#include "abx/io.hpp"
#include "abx/scenarios.hpp"

namespace abx {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw config_error("scenario: " + where + ": " + msg);
}

void check_keys(const json& o, const std::vector<std::string>& allowed, const std::string& where) {
    if (!o.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : o.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            fail(where, "unknown key \"" + k + "\"");
    }
}

const json& need(const json& o, const char* key, const std::string& where) {
    if (!o.contains(key)) fail(where, std::string("missing key \"") + key + "\"");
    return o.at(key);
}

double as_num(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

double need_num(const json& o, const char* key, const std::string& where) {
    return as_num(need(o, key, where), where + "." + key);
}

double opt_num(const json& o, const char* key, double dflt, const std::string& where) {
    return o.contains(key) ? as_num(o.at(key), where + "." + key) : dflt;
}

int need_int(const json& o, const char* key, const std::string& where) {
    const json& v = need(o, key, where);
    if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
    return v.get<int>();
}

int opt_int(const json& o, const char* key, int dflt, const std::string& where) {
    if (!o.contains(key)) return dflt;
    if (!o.at(key).is_number_integer()) fail(where + "." + key, "expected an integer");
    return o.at(key).get<int>();
}

bool opt_bool(const json& o, const char* key, bool dflt, const std::string& where) {
    if (!o.contains(key)) return dflt;
    if (!o.at(key).is_boolean()) fail(where + "." + key, "expected a boolean");
    return o.at(key).get<bool>();
}

std::string need_str(const json& o, const char* key, const std::string& where) {
    const json& v = need(o, key, where);
    if (!v.is_string()) fail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

std::string opt_str(const json& o, const char* key, const std::string& dflt,
                    const std::string& where) {
    if (!o.contains(key)) return dflt;
    if (!o.at(key).is_string()) fail(where + "." + key, "expected a string");
    return o.at(key).get<std::string>();
}

Vec2 as_vec2(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) fail(where, "expected [x, y]");
    return {as_num(v[0], where), as_num(v[1], where)};
}

Vec2 need_vec2(const json& o, const char* key, const std::string& where) {
    return as_vec2(need(o, key, where), where + "." + key);
}

GridSpec parse_grid(const json& o, const std::string& where) {
    check_keys(o, {"n", "lo", "hi"}, where);
    GridSpec gs;
    gs.n = need_int(o, "n", where);
    gs.lo = need_num(o, "lo", where);
    gs.hi = need_num(o, "hi", where);
    return gs;
}

FluxLineSpec parse_line(const json& o, const std::string& where) {
    check_keys(o, {"alpha", "center", "partner", "core_radius", "fade_start", "fade_end",
                   "mask_radius"},
               where);
    FluxLineSpec l;
    l.alpha = need_num(o, "alpha", where);
    l.center = need_vec2(o, "center", where);
    l.partner = need_vec2(o, "partner", where);
    l.core_radius = need_num(o, "core_radius", where);
    l.fade_start = need_num(o, "fade_start", where);
    l.fade_end = need_num(o, "fade_end", where);
    l.mask_radius = need_num(o, "mask_radius", where);
    return l;
}

std::vector<FluxLineSpec> parse_lines(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of flux lines");
    std::vector<FluxLineSpec> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(parse_line(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

MagneticAbConfig parse_magnetic(const json& o, const std::string& where) {
    check_keys(o, {"grid", "x0", "theta", "omega", "k", "delta1", "launch_distance", "steps",
                   "window_radius", "lines"},
               where);
    MagneticAbConfig c;
    c.grid = parse_grid(need(o, "grid", where), where + ".grid");
    c.x0 = need_vec2(o, "x0", where);
    c.theta = need_vec2(o, "theta", where);
    c.omega = need_vec2(o, "omega", where);
    c.k = need_num(o, "k", where);
    c.delta1 = need_num(o, "delta1", where);
    c.launch_distance = need_num(o, "launch_distance", where);
    c.steps = need_int(o, "steps", where);
    c.window_radius = need_num(o, "window_radius", where);
    c.lines = parse_lines(need(o, "lines", where), where + ".lines");
    return c;
}

ElectricAbConfig parse_electric(const json& o, const std::string& where) {
    check_keys(o, {"grid", "gate", "dt", "mix_time", "alpha", "alpha_reference", "ramp_steps",
                   "guard_steps", "inner", "ring", "thread"},
               where);
    ElectricAbConfig c;
    c.grid = parse_grid(need(o, "grid", where), where + ".grid");
    const json& g = need(o, "gate", where);
    std::string wg = where + ".gate";
    check_keys(g, {"center", "r_inner", "r_outer", "gate_angle", "open_halfwidth", "eps", "T"},
               wg);
    c.gate.center = need_vec2(g, "center", wg);
    c.gate.r_inner = need_num(g, "r_inner", wg);
    c.gate.r_outer = need_num(g, "r_outer", wg);
    c.gate.gate_angle = need_num(g, "gate_angle", wg);
    c.gate.open_halfwidth = need_num(g, "open_halfwidth", wg);
    c.gate.eps = need_num(g, "eps", wg);
    c.gate.T = need_num(g, "T", wg);
    c.dt = need_num(o, "dt", where);
    c.mix_time = need_num(o, "mix_time", where);
    c.alpha = need_num(o, "alpha", where);
    c.alpha_reference = need_num(o, "alpha_reference", where);
    c.ramp_steps = need_int(o, "ramp_steps", where);
    c.guard_steps = need_int(o, "guard_steps", where);
    const json& in = need(o, "inner", where);
    std::string wi = where + ".inner";
    check_keys(in, {"center", "sigma", "ring_radius", "weight"}, wi);
    c.inner_center = need_vec2(in, "center", wi);
    c.inner_sigma = need_num(in, "sigma", wi);
    c.inner_ring_radius = opt_num(in, "ring_radius", 0.0, wi);
    c.inner_weight = need_num(in, "weight", wi);
    const json& rg = need(o, "ring", where);
    std::string wr = where + ".ring";
    check_keys(rg, {"radius", "sigma"}, wr);
    c.ring_radius = need_num(rg, "radius", wr);
    c.ring_sigma = need_num(rg, "sigma", wr);
    if (o.contains("thread")) {
        const json& th = o.at("thread");
        std::string wt = where + ".thread";
        check_keys(th, {"flux", "core_radius", "mask_radius"}, wt);
        c.threaded_flux = need_num(th, "flux", wt);
        c.thread_core_radius = need_num(th, "core_radius", wt);
        c.thread_mask_radius = need_num(th, "mask_radius", wt);
    }
    return c;
}

CombinedAbConfig parse_combined(const json& o, const std::string& where) {
    check_keys(o, {"alpha1", "alpha1_pp", "alpha2", "alpha2_pp", "fringe", "gate",
                   "gamma_radius", "delta", "flux_tol", "dynamics", "expected"},
               where);
    CombinedAbConfig c;
    c.alpha1 = need_num(o, "alpha1", where);
    c.alpha1_pp = need_num(o, "alpha1_pp", where);
    c.alpha2 = need_num(o, "alpha2", where);
    c.alpha2_pp = need_num(o, "alpha2_pp", where);
    c.fringe = parse_magnetic(need(o, "fringe", where), where + ".fringe");
    c.gate = parse_electric(need(o, "gate", where), where + ".gate");
    c.gamma_radius = need_num(o, "gamma_radius", where);
    const json& d = need(o, "delta", where);
    std::string wd = where + ".delta";
    check_keys(d, {"inner", "outer"}, wd);
    c.delta_x_inner = need_num(d, "inner", wd);
    c.delta_x_outer = need_num(d, "outer", wd);
    c.flux_tol = opt_num(o, "flux_tol", 1e-6, where);
    c.dynamics = opt_bool(o, "dynamics", true, where);
    c.expected = opt_str(o, "expected", "", where);
    return c;
}

FluxRecoveryConfig parse_recovery(const json& o, const std::string& where) {
    FluxRecoveryConfig c;
    c.mode = need_str(o, "mode", where);
    if (c.mode == "analytic") {
        check_keys(o, {"mode", "box", "obstacles", "rays", "tol"}, where);
        const json& b = need(o, "box", where);
        std::string wb = where + ".box";
        check_keys(b, {"lo", "hi"}, wb);
        c.box_lo = need_vec2(b, "lo", wb);
        c.box_hi = need_vec2(b, "hi", wb);
        const json& obs = need(o, "obstacles", where);
        if (!obs.is_array()) fail(where + ".obstacles", "expected an array");
        for (std::size_t i = 0; i < obs.size(); ++i) {
            std::string wo = where + ".obstacles[" + std::to_string(i) + "]";
            check_keys(obs[i], {"alpha", "center", "radius", "core_radius"}, wo);
            RecoveryObstacleSpec s;
            s.alpha = need_num(obs[i], "alpha", wo);
            s.center = need_vec2(obs[i], "center", wo);
            s.radius = need_num(obs[i], "radius", wo);
            s.core_radius = need_num(obs[i], "core_radius", wo);
            c.obstacles.push_back(s);
        }
        const json& rays = need(o, "rays", where);
        if (!rays.is_array()) fail(where + ".rays", "expected an array");
        for (std::size_t i = 0; i < rays.size(); ++i) {
            std::string wr = where + ".rays[" + std::to_string(i) + "]";
            check_keys(rays[i], {"start", "direction"}, wr);
            RecoveryRaySpec s;
            s.start = need_vec2(rays[i], "start", wr);
            s.direction = need_vec2(rays[i], "direction", wr);
            c.rays.push_back(s);
        }
    } else if (c.mode == "density") {
        check_keys(o, {"mode", "grid", "lines", "contours", "k", "delta1", "launch_distance",
                       "steps", "window_radius", "tol"},
                   where);
        c.grid = parse_grid(need(o, "grid", where), where + ".grid");
        c.lines = parse_lines(need(o, "lines", where), where + ".lines");
        const json& cs = need(o, "contours", where);
        if (!cs.is_array()) fail(where + ".contours", "expected an array");
        for (std::size_t i = 0; i < cs.size(); ++i) {
            std::string wc = where + ".contours[" + std::to_string(i) + "]";
            check_keys(cs[i], {"x0", "theta", "omega"}, wc);
            DensityContourSpec s;
            s.x0 = need_vec2(cs[i], "x0", wc);
            s.theta = need_vec2(cs[i], "theta", wc);
            s.omega = need_vec2(cs[i], "omega", wc);
            c.contours.push_back(s);
        }
        c.k = need_num(o, "k", where);
        c.delta1 = need_num(o, "delta1", where);
        c.launch_distance = need_num(o, "launch_distance", where);
        c.steps = need_int(o, "steps", where);
        c.window_radius = need_num(o, "window_radius", where);
    } else {
        fail(where + ".mode", "must be \"analytic\" or \"density\"");
    }
    c.tol = opt_num(o, "tol", 1e-6, where);
    return c;
}

SpectrumSweepConfig parse_spectrum(const json& o, const std::string& where) {
    check_keys(o, {"alphas", "cutoff", "count", "e1", "e2", "potential"}, where);
    SpectrumSweepConfig c;
    const json& as = need(o, "alphas", where);
    if (!as.is_array() || as.empty()) fail(where + ".alphas", "expected a nonempty array");
    for (std::size_t i = 0; i < as.size(); ++i) {
        std::string wa = where + ".alphas[" + std::to_string(i) + "]";
        if (!as[i].is_array() || as[i].size() != 2) fail(wa, "expected [alpha1, alpha2]");
        c.alphas.push_back({as_num(as[i][0], wa), as_num(as[i][1], wa)});
    }
    c.cutoff = opt_int(o, "cutoff", 8, where);
    c.count = opt_int(o, "count", 10, where);
    if (o.contains("e1")) c.e1 = need_vec2(o, "e1", where);
    if (o.contains("e2")) c.e2 = need_vec2(o, "e2", where);
    if (o.contains("potential")) {
        const json& pv = o.at("potential");
        if (!pv.is_array()) fail(where + ".potential", "expected an array");
        for (std::size_t i = 0; i < pv.size(); ++i) {
            std::string wp = where + ".potential[" + std::to_string(i) + "]";
            check_keys(pv[i], {"n1", "n2", "re", "im"}, wp);
            FourierCoefficient fc;
            fc.n1 = need_int(pv[i], "n1", wp);
            fc.n2 = need_int(pv[i], "n2", wp);
            fc.value = {need_num(pv[i], "re", wp), opt_num(pv[i], "im", 0.0, wp)};
            c.potential.push_back(fc);
        }
    }
    return c;
}

AmplitudeSweepConfig parse_amplitude(const json& o, const std::string& where) {
    check_keys(o, {"alpha", "n_theta", "theta_min", "theta_max"}, where);
    AmplitudeSweepConfig c;
    c.alpha = need_num(o, "alpha", where);
    c.n_theta = need_int(o, "n_theta", where);
    c.theta_min = need_num(o, "theta_min", where);
    c.theta_max = need_num(o, "theta_max", where);
    return c;
}

SynthConfig parse_synth(const json& o, const std::string& where) {
    check_keys(o, {"grid", "bumps", "support", "mollifier_radius", "t_nodes", "loop_radius"},
               where);
    SynthConfig c;
    c.grid = parse_grid(need(o, "grid", where), where + ".grid");
    const json& bs = need(o, "bumps", where);
    if (!bs.is_array()) fail(where + ".bumps", "expected an array");
    for (std::size_t i = 0; i < bs.size(); ++i) {
        std::string wb = where + ".bumps[" + std::to_string(i) + "]";
        check_keys(bs[i], {"amplitude", "center", "radius", "sharpness"}, wb);
        SynthBumpSpec b;
        b.amplitude = need_num(bs[i], "amplitude", wb);
        b.center = need_vec2(bs[i], "center", wb);
        b.radius = need_num(bs[i], "radius", wb);
        b.sharpness = opt_num(bs[i], "sharpness", 1.0, wb);
        c.bumps.push_back(b);
    }
    const json& sp = need(o, "support", where);
    std::string ws = where + ".support";
    check_keys(sp, {"center", "radius"}, ws);
    c.support_center = need_vec2(sp, "center", ws);
    c.support_radius = need_num(sp, "radius", ws);
    c.mollifier_radius = opt_num(o, "mollifier_radius", 0.0, where);
    c.t_nodes = opt_int(o, "t_nodes", 16, where);
    c.loop_radius = need_num(o, "loop_radius", where);
    return c;
}

GravityCheckConfig parse_gravity(const json& o, const std::string& where) {
    check_keys(o, {"metric", "loops", "probes", "tol", "shift_poly"}, where);
    GravityCheckConfig c;

    const json& m = need(o, "metric", where);
    std::string wm = where + ".metric";
    std::string type = need_str(m, "type", wm);
    if (type == "flat") {
        check_keys(m, {"type"}, wm);
        // the default-constructed metric is Minkowski
    } else if (type == "vortex") {
        check_keys(m, {"type", "strength", "center"}, wm);
        double s = need_num(m, "strength", wm);
        Vec2 ctr = need_vec2(m, "center", wm);
        c.metric.g0j = [s, ctr](const Vec2& p) {
            Vec2 d = p - ctr;
            double r2 = d.norm2();
            return Vec2{-s * d.y / r2, s * d.x / r2};
        };
    } else if (type == "rotating") {
        check_keys(m, {"type", "omega", "center"}, wm);
        double w = need_num(m, "omega", wm);
        Vec2 ctr = need_vec2(m, "center", wm);
        c.metric.g0j = [w, ctr](const Vec2& p) {
            Vec2 d = p - ctr;
            return Vec2{-w * d.y, w * d.x};
        };
    } else if (type == "lapse_well") {
        check_keys(m, {"type", "depth", "sigma", "center"}, wm);
        double depth = need_num(m, "depth", wm);
        double sigma = need_num(m, "sigma", wm);
        if (sigma <= 0) fail(wm + ".sigma", "must be positive");
        Vec2 ctr = need_vec2(m, "center", wm);
        c.metric.g00 = [depth, sigma, ctr](const Vec2& p) {
            double r2 = (p - ctr).norm2();
            return 1.0 + depth * std::exp(-r2 / (2 * sigma * sigma));
        };
    } else {
        fail(wm + ".type", "unknown metric \"" + type + "\"");
    }

    const json& ls = need(o, "loops", where);
    if (!ls.is_array() || ls.empty()) fail(where + ".loops", "expected a nonempty array");
    for (std::size_t i = 0; i < ls.size(); ++i) {
        std::string wl = where + ".loops[" + std::to_string(i) + "]";
        if (ls[i].contains("points")) {
            check_keys(ls[i], {"points"}, wl);
            const json& pv = ls[i].at("points");
            if (!pv.is_array() || pv.size() < 3) fail(wl + ".points", "need at least 3 points");
            std::vector<Vec2> pts;
            for (std::size_t k = 0; k < pv.size(); ++k)
                pts.push_back(as_vec2(pv[k], wl + ".points"));
            if (dist(pts.front(), pts.back()) > 1e-12) pts.push_back(pts.front());
            c.loops.push_back(Path{std::move(pts)});
        } else {
            check_keys(ls[i], {"center", "radius", "segments"}, wl);
            Vec2 ctr = need_vec2(ls[i], "center", wl);
            double r = need_num(ls[i], "radius", wl);
            int nseg = opt_int(ls[i], "segments", 256, wl);
            if (r <= 0 || nseg < 8) fail(wl, "need radius > 0 and at least 8 segments");
            c.loops.push_back(Path::circle(ctr, r, nseg));
        }
    }

    const json& pb = need(o, "probes", where);
    std::string wp = where + ".probes";
    check_keys(pb, {"n", "lo", "hi", "exclude"}, wp);
    int n = need_int(pb, "n", wp);
    double lo = need_num(pb, "lo", wp), hi = need_num(pb, "hi", wp);
    if (n < 2 || hi <= lo) fail(wp, "need n >= 2 and hi > lo");
    std::vector<std::pair<Vec2, double>> excl;
    if (pb.contains("exclude")) {
        const json& ev = pb.at("exclude");
        if (!ev.is_array()) fail(wp + ".exclude", "expected an array");
        for (std::size_t i = 0; i < ev.size(); ++i) {
            std::string we = wp + ".exclude[" + std::to_string(i) + "]";
            check_keys(ev[i], {"center", "radius"}, we);
            excl.push_back({need_vec2(ev[i], "center", we), need_num(ev[i], "radius", we)});
        }
    }
    double h = (hi - lo) / (n - 1);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            Vec2 p{lo + ix * h, lo + iy * h};
            bool keep = true;
            for (const auto& [ctr, r] : excl) keep = keep && dist(p, ctr) > r;
            if (keep) c.probes.push_back(p);
        }
    }
    if (c.probes.empty()) fail(wp, "every probe point was excluded");

    c.tol = opt_num(o, "tol", 1e-6, where);
    if (o.contains("shift_poly")) {
        const json& sv = o.at("shift_poly");
        if (!sv.is_array() || sv.empty()) fail(where + ".shift_poly", "expected [[c,px,py],...]");
        std::vector<std::array<double, 3>> terms;
        for (std::size_t i = 0; i < sv.size(); ++i) {
            std::string wt = where + ".shift_poly[" + std::to_string(i) + "]";
            if (!sv[i].is_array() || sv[i].size() != 3) fail(wt, "expected [c, px, py]");
            double px = as_num(sv[i][1], wt), py = as_num(sv[i][2], wt);
            if (px < 0 || py < 0 || px != std::floor(px) || py != std::floor(py))
                fail(wt, "powers must be nonnegative integers");
            terms.push_back({as_num(sv[i][0], wt), px, py});
        }
        c.shift_grad = [terms](const Vec2& p) {
            Vec2 gr{0.0, 0.0};
            for (const auto& t : terms) {
                double cpow = t[0], px = t[1], py = t[2];
                if (px >= 1)
                    gr.x += cpow * px * std::pow(p.x, px - 1) * std::pow(p.y, py);
                if (py >= 1)
                    gr.y += cpow * py * std::pow(p.x, px) * std::pow(p.y, py - 1);
            }
            return gr;
        };
    }
    return c;
}

} // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("scenario: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw config_error("scenario: top level must be an object");
    std::string version = need_str(doc, "version", "top level");
    if (version != "abx-scenario/1")
        throw config_error("scenario: unsupported config version \"" + version + "\"");
    std::string kind = need_str(doc, "kind", "top level");
    static const std::set<std::string> kinds{"magnetic_ab",   "electric_ab",    "combined_ab",
                                            "flux_recovery", "spectrum_sweep", "amplitude_sweep",
                                            "synth",         "gravity_check"};
    if (!kinds.count(kind)) throw config_error("scenario: unknown kind \"" + kind + "\"");
    check_keys(doc, {"version", "kind", "seed", "out", kind}, "top level");

    ScenarioConfig cfg;
    cfg.kind = kind;
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_integer() || doc.at("seed").get<long long>() < 0)
            throw config_error("scenario: seed must be a nonnegative integer");
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
    cfg.out_dir = opt_str(doc, "out", "", "top level");

    const json& block = need(doc, kind.c_str(), "top level");
    if (kind == "magnetic_ab")
        cfg.detail = parse_magnetic(block, kind);
    else if (kind == "electric_ab")
        cfg.detail = parse_electric(block, kind);
    else if (kind == "combined_ab")
        cfg.detail = parse_combined(block, kind);
    else if (kind == "flux_recovery")
        cfg.detail = parse_recovery(block, kind);
    else if (kind == "spectrum_sweep")
        cfg.detail = parse_spectrum(block, kind);
    else if (kind == "amplitude_sweep")
        cfg.detail = parse_amplitude(block, kind);
    else if (kind == "synth")
        cfg.detail = parse_synth(block, kind);
    else
        cfg.detail = parse_gravity(block, kind);
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("scenario: cannot open \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

// ---- report pipeline --------------------------------------------------------

namespace {

namespace fs = std::filesystem;

struct TextReport {
    std::string s;

    void kv(const std::string& k, const std::string& v) {
        s += k;
        if (k.size() < 26) s.append(26 - k.size(), ' ');
        s += " = " + v + "\n";
    }
    void num(const std::string& k, double v) { kv(k, format_double(v)); }
    void flag(const std::string& k, bool v) { kv(k, v ? "yes" : "no"); }
    void raw(const std::string& line) { s += line + "\n"; }
};

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

ScalarGridField density_difference(const WaveState& a, const WaveState& b) {
    ScalarGridField d(a.grid());
    for (std::size_t i = 0; i < d.data.size(); ++i)
        d.data[i] = std::norm(a.values.data[i]) - std::norm(b.values.data[i]);
    return d;
}

ordered_json vec_json(const std::vector<double>& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(x);
    return a;
}

void emit_magnetic(const MagneticAbConfig& c, const std::string& out, ordered_json& rj,
                   TextReport& tr) {
    MagneticAbReport r = run_magnetic_ab(c);
    rj["enclosed_phase"] = r.enclosed_phase;
    rj["target"] = r.target;
    rj["fringe"] = r.fringe;
    rj["fringe_raw"] = r.fringe_raw;
    rj["deviation"] = r.deviation;
    rj["relative_deviation"] = r.relative_deviation;
    rj["amplitude_u"] = r.amplitude_u;
    rj["amplitude_v"] = r.amplitude_v;
    rj["k_effective"] = r.k_effective;
    rj["matching_residual"] = r.matching_residual;
    rj["group_speed"] = r.group_speed;
    rj["duration"] = r.duration;
    rj["window_nodes"] = r.window_nodes;
    rj["x0"] = {r.x0_snapped.x, r.x0_snapped.y};
    rj["artifacts"] = {"u.abxf", "v.abxf"};
    write_abxf_complex(join(out, "u.abxf"), r.u.values);
    write_abxf_complex(join(out, "v.abxf"), r.v.values);

    tr.raw("two-packet interference");
    tr.num("enclosed phase", r.enclosed_phase);
    tr.num("target fringe", r.target);
    tr.num("measured fringe", r.fringe);
    tr.num("deviation", r.deviation);
    tr.num("relative deviation", r.relative_deviation);
    tr.num("carrier", r.k_effective);
    tr.num("group speed", r.group_speed);
    tr.num("transit time", r.duration);
    tr.kv("window nodes", std::to_string(r.window_nodes));
}

void emit_electric(const ElectricAbConfig& c, const std::string& out, ordered_json& rj,
                   TextReport& tr) {
    ElectricAbReport r = run_electric_ab(c);
    rj["alpha_target"] = r.alpha_target;
    rj["phase_measured"] = r.phase_measured;
    rj["phase_error"] = r.phase_error;
    rj["density_sup_diff"] = r.density_sup_diff;
    rj["overlap_modulus"] = r.overlap_modulus;
    rj["inner_mass"] = r.inner_mass;
    rj["absorbed_primary"] = r.absorbed_primary;
    rj["absorbed_reference"] = r.absorbed_reference;
    rj["effect_expected"] = r.effect_expected;
    rj["effect_detected"] = r.effect_detected;
    rj["artifacts"] = {"final_primary.abxf", "final_reference.abxf", "density_diff.abxf"};
    write_abxf_complex(join(out, "final_primary.abxf"), r.final_primary.values);
    write_abxf_complex(join(out, "final_reference.abxf"), r.final_reference.values);
    write_abxf_real(join(out, "density_diff.abxf"),
                    density_difference(r.final_primary, r.final_reference));

    tr.raw("gated potential comparison");
    tr.num("target phase difference", wrap_to_pi(-r.alpha_target));
    tr.num("measured sealed phase", r.phase_measured);
    tr.num("phase error", r.phase_error);
    tr.num("relative deviation",
           std::abs(r.alpha_target) > 1e-9 ? r.phase_error / std::abs(r.alpha_target) : 0.0);
    tr.num("density sup difference", r.density_sup_diff);
    tr.num("overlap modulus", r.overlap_modulus);
    tr.flag("effect expected", r.effect_expected);
    tr.flag("effect detected", r.effect_detected);
}

void emit_combined(const CombinedAbConfig& c, const std::string&, ordered_json& rj,
                   TextReport& tr) {
    CombinedAbReport r = run_combined_ab(c);
    rj["alpha1"] = r.alpha1;
    rj["alpha1_pp"] = r.alpha1_pp;
    rj["alpha2"] = r.alpha2;
    rj["alpha2_pp"] = r.alpha2_pp;
    rj["diff_magnetic"] = r.diff_magnetic;
    rj["sum_magnetic"] = r.sum_magnetic;
    rj["diff_electromagnetic"] = r.diff_electromagnetic;
    rj["criterion_a"] = r.criterion_a;
    rj["criterion_b"] = r.criterion_b;
    rj["verdict"] = r.verdict;
    rj["expected"] = c.expected;
    rj["matches_expected"] = r.matches_expected;
    ordered_json dj;
    dj["run"] = r.dynamics_run;
    if (r.dynamics_run) {
        dj["fringe"] = r.fringe;
        dj["fringe_pp"] = r.fringe_pp;
        dj["fringe_diff"] = r.fringe_diff;
        dj["magnetic_fired"] = r.magnetic_fired;
        dj["density_sup_diff"] = r.density_sup_diff;
        dj["electric_fired"] = r.electric_fired;
    }
    rj["dynamics"] = dj;

    tr.raw("configuration discrimination");
    tr.num("alpha1", r.alpha1);
    tr.num("alpha1''", r.alpha1_pp);
    tr.num("alpha2", r.alpha2);
    tr.num("alpha2''", r.alpha2_pp);
    tr.num("magnetic difference", r.diff_magnetic);
    tr.num("magnetic sum", r.sum_magnetic);
    tr.num("electromagnetic diff", r.diff_electromagnetic);
    tr.flag("criterion a", r.criterion_a);
    tr.flag("criterion b", r.criterion_b);
    tr.kv("verdict", r.verdict);
    if (!c.expected.empty()) {
        tr.kv("expected", c.expected);
        tr.flag("matches expected", r.matches_expected);
    }
    if (r.dynamics_run) {
        tr.num("fringe", r.fringe);
        tr.num("fringe''", r.fringe_pp);
        tr.num("fringe difference", r.fringe_diff);
        tr.flag("magnetic channel fired", r.magnetic_fired);
        tr.num("density sup difference", r.density_sup_diff);
        tr.flag("electric channel fired", r.electric_fired);
    }
}

void emit_recovery(const FluxRecoveryConfig& c, const std::string& out, ordered_json& rj,
                   TextReport& tr) {
    FluxRecoveryReport r = run_flux_recovery(c);
    rj["mode"] = c.mode;
    rj["true_fluxes"] = vec_json(r.true_fluxes);
    rj["candidates"] = {vec_json(r.candidates[0]), vec_json(r.candidates[1])};
    rj["residual"] = r.residual;
    rj["recovery_error"] = r.recovery_error;
    rj["recovery_error_rel"] = r.recovery_error_rel;
    rj["sign_pair"] = r.sign_pair;
    ordered_json wj = ordered_json::array();
    for (const auto& w : r.windings) {
        ordered_json row = ordered_json::array();
        for (int x : w) row.push_back(x);
        wj.push_back(row);
    }
    rj["windings"] = wj;
    rj["readings"] = vec_json(r.readings);
    rj["artifacts"] = {"readings.csv", "candidates.csv"};

    std::size_t n = r.true_fluxes.size();
    {
        CsvWriter csv(join(out, "readings.csv"));
        std::vector<std::string> cols{"contour"};
        for (std::size_t i = 0; i < n; ++i) cols.push_back("w" + std::to_string(i));
        cols.push_back("reading");
        csv.header(cols);
        for (std::size_t m = 0; m < r.readings.size(); ++m) {
            std::vector<std::string> row{std::to_string(m)};
            for (int x : r.windings[m]) row.push_back(std::to_string(x));
            row.push_back(format_double(r.readings[m]));
            csv.row_mixed(row);
        }
    }
    {
        CsvWriter csv(join(out, "candidates.csv"));
        csv.header({"obstacle", "truth", "candidate_a", "candidate_b"});
        for (std::size_t i = 0; i < n; ++i)
            csv.row_mixed({std::to_string(i), format_double(r.true_fluxes[i]),
                           format_double(r.candidates[0][i]), format_double(r.candidates[1][i])});
    }

    tr.raw("flux recovery (" + c.mode + ")");
    for (std::size_t i = 0; i < n; ++i) {
        tr.num("true flux " + std::to_string(i), r.true_fluxes[i]);
        tr.num("recovered flux " + std::to_string(i), r.candidates[0][i]);
    }
    tr.num("worst deviation", r.recovery_error);
    tr.num("relative deviation", r.recovery_error_rel);
    tr.num("residual", r.residual);
    tr.flag("sign pair", r.sign_pair);
}

void emit_spectrum(const SpectrumSweepConfig& c, const std::string& out, ordered_json& rj,
                   TextReport& tr) {
    SpectrumSweepReport r = run_spectrum_sweep(c);
    rj["cutoff"] = c.cutoff;
    rj["count"] = c.count;
    ordered_json ej = ordered_json::array();
    for (const auto& row : r.eigenvalues) ej.push_back(vec_json(row));
    rj["eigenvalues"] = ej;
    rj["artifacts"] = {"spectrum.csv"};

    CsvWriter csv(join(out, "spectrum.csv"));
    std::vector<std::string> cols{"alpha1", "alpha2"};
    for (int i = 0; i < c.count; ++i) cols.push_back("e" + std::to_string(i));
    csv.header(cols);
    for (std::size_t m = 0; m < r.eigenvalues.size(); ++m) {
        std::vector<double> row{c.alphas[m][0], c.alphas[m][1]};
        row.insert(row.end(), r.eigenvalues[m].begin(), r.eigenvalues[m].end());
        csv.row(row);
    }

    tr.raw("torus spectrum sweep");
    for (std::size_t m = 0; m < r.eigenvalues.size(); ++m)
        tr.num("lowest eigenvalue, row " + std::to_string(m), r.eigenvalues[m].front());
}

void emit_amplitude(const AmplitudeSweepConfig& c, const std::string& out, ordered_json& rj,
                    TextReport& tr) {
    AmplitudeSweepReport r = run_amplitude_sweep(c);
    rj["alpha"] = c.alpha;
    rj["n_theta"] = c.n_theta;
    rj["worst_identity_residual"] = r.worst_identity_residual;
    rj["artifacts"] = {"amplitude.csv"};

    CsvWriter csv(join(out, "amplitude.csv"));
    csv.header({"theta", "re", "im", "density", "identity_residual"});
    double s2 = std::pow(std::sin(c.alpha / 2.0), 2);
    for (std::size_t i = 0; i < r.theta.size(); ++i) {
        double prod = r.density[i] * 4 * std::numbers::pi * std::numbers::pi *
                      std::pow(std::sin(r.theta[i] / 2.0), 2);
        csv.row({r.theta[i], r.value[i].real(), r.value[i].imag(), r.density[i],
                 std::abs(prod - s2)});
    }

    tr.raw("scattering amplitude sweep");
    tr.num("target modulus identity", s2);
    tr.num("worst identity residual", r.worst_identity_residual);
    tr.num("relative deviation", s2 > 1e-12 ? r.worst_identity_residual / s2 : 0.0);
}

void emit_synth(const SynthConfig& c, const std::string& out, ordered_json& rj, TextReport& tr) {
    SynthReport r = run_synth(c);
    rj["total_flux"] = r.total_flux;
    rj["tail_flux"] = r.tail_flux;
    rj["curl_error_rel"] = r.curl_error_rel;
    rj["leakage_rel"] = r.leakage_rel;
    rj["loop_flux"] = r.loop_flux;
    rj["loop_flux_deviation"] = r.loop_flux_deviation;
    rj["artifacts"] = {"b.abxf", "core_a1.abxf", "core_a2.abxf"};
    write_abxf_real(join(out, "b.abxf"), r.field);
    write_abxf_real(join(out, "core_a1.abxf"), r.core.a1);
    write_abxf_real(join(out, "core_a2.abxf"), r.core.a2);

    tr.raw("potential synthesis");
    tr.num("target flux", r.total_flux);
    tr.num("measured loop flux", r.loop_flux);
    tr.num("relative deviation",
           std::abs(r.total_flux) > 1e-12 ? r.loop_flux_deviation / std::abs(r.total_flux)
                                          : r.loop_flux_deviation);
    tr.num("interior curl error", r.curl_error_rel);
    tr.num("leakage", r.leakage_rel);
}

void emit_gravity(const GravityCheckConfig& c, const std::string& out, ordered_json& rj,
                  TextReport& tr) {
    GravityCheckReport r = run_gravity_check(c);
    rj["locally_static"] = r.locally_static;
    rj["globally_static"] = r.globally_static;
    rj["fluxes"] = vec_json(r.fluxes);
    rj["shift_checked"] = r.shift_checked;
    if (r.shift_checked) rj["shift_invariance_dev"] = r.shift_invariance_dev;
    rj["artifacts"] = {"fluxes.csv"};

    CsvWriter csv(join(out, "fluxes.csv"));
    csv.header({"loop", "flux"});
    for (std::size_t i = 0; i < r.fluxes.size(); ++i)
        csv.row_mixed({std::to_string(i), format_double(r.fluxes[i])});

    tr.raw("stationary metric audit");
    tr.flag("locally static", r.locally_static);
    tr.flag("globally static", r.globally_static);
    for (std::size_t i = 0; i < r.fluxes.size(); ++i)
        tr.num("loop flux " + std::to_string(i), r.fluxes[i]);
    if (r.shift_checked) tr.num("isometry flux deviation", r.shift_invariance_dev);
}

} // namespace

std::string run_scenario(const ScenarioConfig& cfg, const std::string& out_dir_override) {
    std::string out = out_dir_override.empty() ? cfg.out_dir : out_dir_override;
    if (out.empty())
        throw config_error("scenario: no output directory; set \"out\" or pass --out");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw config_error("scenario: cannot create output directory \"" + out + "\"");

    ordered_json report;
    report["version"] = "abx-report/1";
    report["kind"] = cfg.kind;
    report["seed"] = cfg.seed;
    ordered_json results;
    TextReport tr;
    tr.raw("kind: " + cfg.kind);

    if (auto* m = std::get_if<MagneticAbConfig>(&cfg.detail))
        emit_magnetic(*m, out, results, tr);
    else if (auto* e = std::get_if<ElectricAbConfig>(&cfg.detail))
        emit_electric(*e, out, results, tr);
    else if (auto* cb = std::get_if<CombinedAbConfig>(&cfg.detail))
        emit_combined(*cb, out, results, tr);
    else if (auto* fr = std::get_if<FluxRecoveryConfig>(&cfg.detail))
        emit_recovery(*fr, out, results, tr);
    else if (auto* sp = std::get_if<SpectrumSweepConfig>(&cfg.detail))
        emit_spectrum(*sp, out, results, tr);
    else if (auto* am = std::get_if<AmplitudeSweepConfig>(&cfg.detail))
        emit_amplitude(*am, out, results, tr);
    else if (auto* sy = std::get_if<SynthConfig>(&cfg.detail))
        emit_synth(*sy, out, results, tr);
    else if (auto* gv = std::get_if<GravityCheckConfig>(&cfg.detail))
        emit_gravity(*gv, out, results, tr);
    else
        throw config_error("scenario: unhandled kind \"" + cfg.kind + "\"");

    report["results"] = results;
    {
        std::ofstream jf(join(out, "report.json"), std::ios::binary);
        if (!jf) throw config_error("scenario: cannot write report.json");
        jf << report.dump(2) << "\n";
    }
    {
        std::ofstream tf(join(out, "report.txt"), std::ios::binary);
        if (!tf) throw config_error("scenario: cannot write report.txt");
        tf << tr.s;
    }
    return tr.s;
}

} // namespace abx
