#include "abx/rays.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "abx/errors.hpp"
#include "abx/fields.hpp"

namespace abx {

namespace {

constexpr double hit_eps = 1e-9;     // minimum travel between trace events
constexpr double corner_tol = 1e-9;  // rejection distance around polygon corners

struct Hit {
    double t = 0.0;
    Vec2 normal;  // outward unit normal at the hit point
    bool corner = false;
};

// Earliest forward intersection with the obstacle boundary before t_max,
// approaching from outside. A reflection leaves the ray exactly on the
// boundary moving outward, so the entry-root test cannot re-trigger on the
// obstacle just left.
std::optional<Hit> first_hit(const ConvexObstacle& ob, const Vec2& p, const Vec2& w,
                             double t_max) {
    if (ob.is_disc()) {
        Vec2 d = p - ob.center;
        double b = w.dot(d);
        double disc = b * b - (d.norm2() - ob.radius * ob.radius);
        if (disc <= 0.0) return std::nullopt;
        double t = -b - std::sqrt(disc);
        if (t <= hit_eps || t >= t_max) return std::nullopt;
        return Hit{t, (p + w * t - ob.center) / ob.radius, false};
    }
    std::optional<Hit> best;
    std::size_t n = ob.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = ob.vertices[i];
        const Vec2& b = ob.vertices[(i + 1) % n];
        Vec2 e = b - a;
        Vec2 nu = Vec2{e.y, -e.x}.unit();  // outward for counterclockwise vertices
        double denom = w.dot(nu);
        if (denom >= -1e-15) continue;  // back-facing or grazing along the edge
        double t = (a - p).dot(nu) / denom;
        if (t <= hit_eps || t >= t_max) continue;
        Vec2 h = p + w * t;
        double s = (h - a).dot(e) / e.norm2();
        bool near_corner = dist(h, a) < corner_tol || dist(h, b) < corner_tol;
        if ((s <= 0.0 || s >= 1.0) && !near_corner) continue;
        if (!best || t < best->t) best = Hit{t, nu, near_corner};
    }
    return best;
}

double box_exit(const Box2& box, const Vec2& p, const Vec2& w) {
    double t = std::numeric_limits<double>::infinity();
    if (w.x > 0.0) t = std::min(t, (box.hi.x - p.x) / w.x);
    if (w.x < 0.0) t = std::min(t, (box.lo.x - p.x) / w.x);
    if (w.y > 0.0) t = std::min(t, (box.hi.y - p.y) / w.y);
    if (w.y < 0.0) t = std::min(t, (box.lo.y - p.y) / w.y);
    return t;
}

} // namespace

ConvexObstacle ConvexObstacle::disc(const Vec2& c, double r) {
    if (!(r > 0.0)) throw config_error("obstacle disc radius must be positive");
    ConvexObstacle o;
    o.center = c;
    o.radius = r;
    return o;
}

ConvexObstacle ConvexObstacle::polygon(std::vector<Vec2> verts) {
    std::size_t n = verts.size();
    if (n < 3) throw config_error("obstacle polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 e0 = verts[(i + 1) % n] - verts[i];
        Vec2 e1 = verts[(i + 2) % n] - verts[(i + 1) % n];
        if (!(e0.norm() > 0.0)) throw config_error("obstacle polygon repeats a vertex");
        if (!(e0.cross(e1) > 0.0))
            throw config_error("obstacle polygon must be strictly convex and counterclockwise");
    }
    ConvexObstacle o;
    o.vertices = std::move(verts);
    return o;
}

Vec2 ConvexObstacle::reference_point() const {
    if (is_disc()) return center;
    Vec2 c{0.0, 0.0};
    for (const Vec2& v : vertices) c += v;
    return c / double(vertices.size());
}

bool ConvexObstacle::contains(const Vec2& p) const {
    if (is_disc()) return dist(p, center) < radius;
    std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 e = vertices[(i + 1) % n] - vertices[i];
        if (!(e.cross(p - vertices[i]) > 0.0)) return false;
    }
    return true;
}

bool ConvexObstacle::segment_enters(const Vec2& a, const Vec2& b, double depth) const {
    if (is_disc()) return point_segment_distance(center, a, b) < radius - depth;
    // clip the segment against the polygon half-planes shrunk by `depth`; a
    // nonempty surviving parameter interval means real penetration
    double t0 = 0.0, t1 = 1.0;
    Vec2 d = b - a;
    std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& v = vertices[i];
        Vec2 e = vertices[(i + 1) % n] - v;
        Vec2 nu = Vec2{e.y, -e.x}.unit();
        double denom = d.dot(nu);
        double num = (v - a).dot(nu) - depth;
        if (std::abs(denom) < 1e-30) {
            if (num < 0.0) return false;
            continue;
        }
        double tc = num / denom;
        if (denom > 0.0) t1 = std::min(t1, tc);
        else t0 = std::max(t0, tc);
        if (t0 >= t1) return false;
    }
    return t0 < t1;
}

Path BrokenRay::polyline() const {
    if (segments.empty()) throw config_error("broken ray has no segments");
    Path p;
    p.pts.reserve(segments.size() + 1);
    for (const RaySegment& s : segments) p.pts.push_back(s.start);
    p.pts.push_back(segments.back().end());
    return p;
}

BrokenRay trace_broken_ray(const Vec2& start, const Vec2& direction,
                           const std::vector<ConvexObstacle>& obstacles, const Box2& box,
                           int max_reflections) {
    if (!(box.lo.x < box.hi.x && box.lo.y < box.hi.y)) throw config_error("ray box is empty");
    if (std::abs(direction.norm() - 1.0) > 1e-9)
        throw config_error("ray direction must be unit length");
    if (!box.contains(start)) throw config_error("ray start lies outside the box");
    for (const ConvexObstacle& ob : obstacles)
        if (ob.contains(start)) throw config_error("ray start lies inside an obstacle");
    if (max_reflections < 0) throw config_error("reflection cap must be nonnegative");

    BrokenRay ray;
    Vec2 p = start;
    Vec2 w = direction.unit();
    for (;;) {
        double t_box = box_exit(box, p, w);
        std::optional<Hit> hit;
        for (const ConvexObstacle& ob : obstacles) {
            auto h = first_hit(ob, p, w, hit ? hit->t : t_box);
            if (h) hit = h;
        }
        if (!hit) {
            if (!(t_box > hit_eps) || !std::isfinite(t_box))
                throw config_error("ray exits the box immediately");
            ray.segments.push_back({p, w, t_box});
            return ray;
        }
        if (hit->corner) throw config_error("broken ray hits a polygon corner");
        if (int(ray.reflection_points.size()) >= max_reflections)
            throw config_error("reflection cap reached: the broken ray looks trapped");
        ray.segments.push_back({p, w, hit->t});
        p = p + w * hit->t;
        ray.reflection_points.push_back(p);
        w = (w - hit->normal * (2.0 * hit->normal.dot(w))).unit();
    }
}

std::vector<int> winding_numbers(const Path& contour,
                                 const std::vector<ConvexObstacle>& obstacles) {
    if (contour.pts.size() < 3 || !contour.closed(1e-9))
        throw config_error("winding contour must be closed");
    for (const ConvexObstacle& ob : obstacles)
        for (std::size_t i = 0; i + 1 < contour.pts.size(); ++i)
            if (ob.contains(contour.pts[i]) ||
                ob.segment_enters(contour.pts[i], contour.pts[i + 1]))
                throw config_error("winding contour passes through an obstacle");
    std::vector<int> w;
    w.reserve(obstacles.size());
    for (const ConvexObstacle& ob : obstacles) {
        Vec2 c = ob.reference_point();
        // each step subtends strictly less than pi because the contour cannot
        // cross the interior point c, so the atan2 branch is never ambiguous
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < contour.pts.size(); ++i) {
            Vec2 u = contour.pts[i] - c;
            Vec2 v = contour.pts[i + 1] - c;
            total += std::atan2(u.cross(v), u.dot(v));
        }
        double turns = total / (2.0 * M_PI);
        long k = std::lround(turns);
        if (std::abs(turns - double(k)) > 1e-6)
            throw numeric_error("winding angle sum did not land on an integer");
        w.push_back(int(k));
    }
    return w;
}

double loop_phase(const VectorPotential& A, const BrokenRay& gamma, const Path& beta,
                  const Constants& cst, int order, int panels_per_segment) {
    if (gamma.segments.empty() || beta.pts.size() < 2)
        throw config_error("loop phase needs a traced ray and a comparison path");
    if (dist(gamma.start(), beta.pts.front()) > 1e-9 || dist(gamma.end(), beta.pts.back()) > 1e-9)
        throw config_error("ray and comparison path must share both endpoints");
    double i1 = flux_line_integral(A, gamma.polyline(), cst, order, panels_per_segment);
    double i2 = flux_line_integral(A, beta, cst, order, panels_per_segment);
    return wrap_to_pi(i1 - i2);
}

namespace {

// |phase| representative in [0, pi) implied by cos_only = cos^2(phase/2); the
// sine magnitude is clamped just below 1 so the representative stays short of
// pi and the two sign branches never collide
double density_base(double cos_only) {
    double s = std::sqrt(std::max(1.0 - std::clamp(cos_only, 0.0, 1.0), 0.0));
    return 2.0 * std::asin(std::min(s, 1.0 - 1e-12));
}

} // namespace

FluxMeasurement FluxMeasurement::from_phase(std::vector<int> w, double ph) {
    FluxMeasurement m;
    m.winding = std::move(w);
    m.phase = ph;
    return m;
}

FluxMeasurement FluxMeasurement::from_density(std::vector<int> w, double contrast) {
    if (!(contrast >= -1e-9 && contrast <= 4.0 + 1e-9))
        throw config_error("density contrast must lie in [0, 4]");
    FluxMeasurement m;
    m.winding = std::move(w);
    m.cos_only = std::clamp(1.0 - contrast / 4.0, 0.0, 1.0);
    return m;
}

FluxRecovery recover_fluxes(const std::vector<FluxMeasurement>& measurements, int n_obstacles,
                            double tol) {
    int n = n_obstacles;
    int m = int(measurements.size());
    if (n < 1) throw config_error("flux recovery needs at least one obstacle");
    if (m < n) throw config_error("flux recovery needs at least as many measurements as obstacles");
    if (!(tol > 0.0)) throw config_error("flux recovery tolerance must be positive");

    Eigen::MatrixXd W(m, n);
    std::vector<double> base(m);  // canonical phase, or |phase| for density rows
    std::vector<char> density(m);
    bool any_phase = false;
    for (int i = 0; i < m; ++i) {
        const FluxMeasurement& mm = measurements[i];
        if (int(mm.winding.size()) != n)
            throw config_error("measurement winding length must equal the obstacle count");
        if (mm.phase.has_value() == mm.cos_only.has_value())
            throw config_error("measurement must carry exactly one of phase and cos_only");
        for (int j = 0; j < n; ++j) W(i, j) = double(mm.winding[j]);
        density[i] = mm.cos_only.has_value();
        if (density[i]) {
            if (!(*mm.cos_only >= -1e-9 && *mm.cos_only <= 1.0 + 1e-9))
                throw config_error("cos_only must lie in [0, 1]");
            base[i] = density_base(*mm.cos_only);
        } else {
            base[i] = wrap_to_pi(*mm.phase);
            any_phase = true;
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> full(W);
    full.setThreshold(1e-9);
    if (full.rank() < n) throw config_error("winding matrix leaves some flux undetermined");

    // greedy square pivot subsystem of full rank
    std::vector<int> piv;
    for (int i = 0; i < m && int(piv.size()) < n; ++i) {
        Eigen::MatrixXd cand(int(piv.size()) + 1, n);
        for (int r = 0; r < int(piv.size()); ++r) cand.row(r) = W.row(piv[r]);
        cand.row(int(piv.size())) = W.row(i);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(cand);
        lu.setThreshold(1e-9);
        if (lu.rank() == cand.rows()) piv.push_back(i);
    }
    Eigen::MatrixXd P(n, n);
    for (int r = 0; r < n; ++r) P.row(r) = W.row(piv[r]);
    Eigen::PartialPivLU<Eigen::MatrixXd> plu(P);

    // admissible right-hand values per pivot equation; every true value obeys
    // |winding . alpha| <= pi sum|w| for canonical alpha
    std::vector<std::vector<double>> choices(n);
    double n_branches = 1.0;
    for (int a = 0; a < n; ++a) {
        int i = piv[a];
        double bound = 1e-6;
        for (int j = 0; j < n; ++j) bound += M_PI * std::abs(W(i, j));
        std::vector<double> vals;
        int nsign = density[i] ? 2 : 1;
        for (int sidx = 0; sidx < nsign; ++sidx) {
            double v0 = (sidx == 0 ? 1.0 : -1.0) * base[i];
            int kmin = int(std::ceil((-bound - v0) / (2.0 * M_PI)));
            int kmax = int(std::floor((bound - v0) / (2.0 * M_PI)));
            for (int k = kmin; k <= kmax; ++k) vals.push_back(v0 + 2.0 * M_PI * k);
        }
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end(),
                               [](double x, double y) { return std::abs(x - y) < 1e-12; }),
                   vals.end());
        choices[a] = std::move(vals);
        n_branches *= double(choices[a].size());
    }
    if (n_branches > 4e6)
        throw config_error("winding magnitudes make the branch search infeasible");

    auto mismatch = [&](const auto& alpha) {
        double worst = 0.0;
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += W(i, j) * alpha[j];
            double d = density[i] ? std::abs(std::abs(wrap_to_pi(s)) - base[i])
                                  : std::abs(wrap_to_pi(s - base[i]));
            worst = std::max(worst, d);
        }
        return worst;
    };

    std::vector<std::vector<double>> survivors;
    std::vector<std::size_t> idx(n, 0);
    Eigen::VectorXd rhs(n);
    for (;;) {
        for (int a = 0; a < n; ++a) rhs(a) = choices[a][idx[a]];
        Eigen::VectorXd alpha = plu.solve(rhs);
        if (mismatch(alpha) <= tol) {
            std::vector<double> s(n);
            for (int j = 0; j < n; ++j) s[j] = wrap_to_pi(alpha(j));
            survivors.push_back(std::move(s));
        }
        int a = 0;
        while (a < n && ++idx[a] == choices[a].size()) {
            idx[a] = 0;
            ++a;
        }
        if (a == n) break;
    }

    auto same = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double d = 0.0;
        for (int j = 0; j < n; ++j) d = std::max(d, std::abs(wrap_to_pi(a[j] - b[j])));
        return d <= 10.0 * tol;
    };
    auto flip = [&](const std::vector<double>& a) {
        std::vector<double> f(n);
        for (int j = 0; j < n; ++j) f[j] = wrap_to_pi(-a[j]);
        return f;
    };
    std::vector<std::vector<double>> classes;
    for (const auto& s : survivors) {
        bool fresh = true;
        for (const auto& c : classes)
            if (same(s, c) || same(s, flip(c))) {
                fresh = false;
                break;
            }
        if (fresh) classes.push_back(s);
    }
    if (classes.empty())
        throw numeric_error("no sign and offset branch reproduces the measurements");
    if (classes.size() > 1)
        throw numeric_error("measurements leave more than the global sign ambiguous");

    // polish: fix the branch implied by the survivor (integer offsets and
    // density signs), then least-squares over all equations
    std::vector<double> a0 = classes.front();
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += W(i, j) * a0[j];
        double target = density[i] ? (wrap_to_pi(s) >= 0.0 ? base[i] : -base[i]) : base[i];
        y(i) = target + 2.0 * M_PI * std::round((s - target) / (2.0 * M_PI));
    }
    Eigen::VectorXd af = W.colPivHouseholderQr().solve(y);
    std::vector<double> polished(n);
    for (int j = 0; j < n; ++j) polished[j] = wrap_to_pi(af(j));
    if (mismatch(polished) > mismatch(a0)) polished = a0;

    std::vector<double> mirror = flip(polished);
    if (!any_phase) {
        // pure density data is flip symmetric; order the pair by making the
        // first decisively nonzero component positive
        for (int j = 0; j < n; ++j) {
            if (std::abs(polished[j]) > 10.0 * tol) {
                if (polished[j] < 0.0) std::swap(polished, mirror);
                break;
            }
        }
    }
    FluxRecovery out;
    out.residual = mismatch(polished);
    out.candidates = {std::move(polished), std::move(mirror)};
    return out;
}

} // namespace abx
