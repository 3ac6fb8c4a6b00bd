#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace abx {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    // scalar cross product; positive when o is counterclockwise from *this
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
    Vec2 unit() const { double n = norm(); return {x / n, y / n}; }
    // 90 degree counterclockwise rotation
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// distance from point p to the segment [a,b]
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 d = b - a;
    double len2 = d.norm2();
    if (len2 == 0.0) return dist(p, a);
    double t = (p - a).dot(d) / len2;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return dist(p, a + d * t);
}

// Piecewise-linear path in the plane. Loops are closed by appending the first
// vertex, so closed() is a geometric test, not a flag.
struct Path {
    std::vector<Vec2> pts;

    Path() = default;
    explicit Path(std::vector<Vec2> p) : pts(std::move(p)) {}

    std::size_t segments() const { return pts.empty() ? 0 : pts.size() - 1; }
    bool closed(double tol = 1e-12) const {
        return pts.size() >= 2 && dist(pts.front(), pts.back()) <= tol;
    }
    double length() const {
        double L = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) L += dist(pts[i], pts[i + 1]);
        return L;
    }

    static Path circle(const Vec2& center, double radius, int nseg = 256) {
        Path p;
        p.pts.reserve(nseg + 1);
        for (int i = 0; i <= nseg; ++i) {
            double th = 2.0 * M_PI * double(i) / double(nseg);
            p.pts.push_back({center.x + radius * std::cos(th), center.y + radius * std::sin(th)});
        }
        p.pts.back() = p.pts.front();
        return p;
    }

    static Path line(const Vec2& a, const Vec2& b, int nseg = 1) {
        Path p;
        p.pts.reserve(nseg + 1);
        for (int i = 0; i <= nseg; ++i) p.pts.push_back(a + (b - a) * (double(i) / nseg));
        return p;
    }

    // concatenation; the head of `next` must coincide with our tail
    Path& append(const Path& next, double tol = 1e-9);
};

// wrap an angle or phase to (-pi, pi]
inline double wrap_to_pi(double a) {
    double w = std::remainder(a, 2.0 * M_PI);
    if (w <= -M_PI) w += 2.0 * M_PI;
    return w;
}

// Space-time vertex for loops in (x, t); used by the electromagnetic flux.
struct Vec3t {
    Vec2 x;
    double t = 0.0;
};

struct SpacetimePath {
    std::vector<Vec3t> pts;
    std::size_t segments() const { return pts.empty() ? 0 : pts.size() - 1; }
};

} // namespace abx
