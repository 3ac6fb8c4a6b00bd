#pragma once

#include <array>
#include <optional>
#include <vector>

#include "abx/constants.hpp"
#include "abx/geometry.hpp"
#include "abx/potentials.hpp"

namespace abx {

// Axis-aligned scene boundary; traced rays terminate on it.
struct Box2 {
    Vec2 lo;
    Vec2 hi;
    bool contains(const Vec2& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
};

// Convex scatterer: a disc, or a strictly convex polygon with counterclockwise
// vertices (no three collinear). Convexity keeps every reflection single
// valued; obstacles in time-dependent scenes are the caller's snapshot at one
// frozen instant.
struct ConvexObstacle {
    Vec2 center;                 // disc center
    double radius = 0.0;         // > 0 iff disc
    std::vector<Vec2> vertices;  // nonempty iff polygon

    static ConvexObstacle disc(const Vec2& c, double r);
    static ConvexObstacle polygon(std::vector<Vec2> verts);

    bool is_disc() const { return vertices.empty(); }
    // disc center or vertex centroid; strictly interior, the anchor winding
    // numbers are measured around
    Vec2 reference_point() const;
    bool contains(const Vec2& p) const;  // open interior
    // true when the segment [a, b] penetrates the interior deeper than `depth`
    // (touching and grazing along the boundary do not count)
    bool segment_enters(const Vec2& a, const Vec2& b, double depth = 1e-12) const;
};

struct RaySegment {
    Vec2 start;
    Vec2 direction;  // unit
    double length = 0.0;
    Vec2 end() const { return start + direction * length; }
};

// Piecewise-straight billiard trajectory; at each recorded reflection point
// consecutive directions obey the specular law.
struct BrokenRay {
    std::vector<RaySegment> segments;
    std::vector<Vec2> reflection_points;

    const Vec2& start() const { return segments.front().start; }
    Vec2 end() const { return segments.back().end(); }
    Path polyline() const;
};

// Traces from `start` along unit `direction`, reflecting off the earliest
// obstacle hit by omega' = omega - 2 (nu.omega) nu with nu the outward normal,
// until the ray leaves `box`. A hit within 1e-9 of a polygon corner is
// rejected (the normal is ambiguous there), and a ray that still wants to
// reflect after `max_reflections` bounces counts as trapped; both throw.
BrokenRay trace_broken_ray(const Vec2& start, const Vec2& direction,
                           const std::vector<ConvexObstacle>& obstacles, const Box2& box,
                           int max_reflections = 64);

// Winding number of the closed polyline about each obstacle, from the summed
// signed angle steps seen at the obstacle's reference point. The polyline must
// close within 1e-9 and stay clear of every interior; the angle sum must land
// on an integer multiple of 2 pi within 1e-6.
std::vector<int> winding_numbers(const Path& contour,
                                 const std::vector<ConvexObstacle>& obstacles);

// (e/hbar c) [ int_gamma A.dl - int_beta A.dl ] wrapped to (-pi, pi]. The two
// routes must share both endpoints within 1e-9; the result equals the enclosed
// fluxes weighted by the winding numbers of gamma followed by beta reversed.
double loop_phase(const VectorPotential& A, const BrokenRay& gamma, const Path& beta,
                  const Constants& cst = {}, int order = 8, int panels_per_segment = 16);

// One interferometric reading along a contour of known windings. Phase mode
// records the loop phase itself, known mod 2 pi. Density mode records
// cos_only = cos^2(phase/2): an intensity pattern fixes the phase only through
// its cosine, which is where the global sign ambiguity of recovered fluxes
// comes from.
struct FluxMeasurement {
    std::vector<int> winding;
    std::optional<double> phase;
    std::optional<double> cos_only;

    static FluxMeasurement from_phase(std::vector<int> w, double ph);
    // contrast is the fringe depth 4 sin^2(phase/2) read off a density pattern
    static FluxMeasurement from_density(std::vector<int> w, double contrast);
};

// The two flux vectors {alpha, -alpha}, componentwise canonical in (-pi, pi],
// consistent with every measurement; residual is the worst wrapped equation
// mismatch of the first candidate.
struct FluxRecovery {
    std::array<std::vector<double>, 2> candidates;
    double residual = 0.0;
};

// Solves winding . alpha ~ measurements for the per-obstacle fluxes. Full
// column rank of the winding matrix pins alpha up to finitely many branches: a
// 2 pi offset per equation, bounded because |winding . alpha| <= pi sum|w|,
// plus a sign per density equation. Branches are enumerated on a square pivot
// subsystem, each candidate is validated against all measurements within
// `tol`, and the winner is polished by least squares over the implied branch.
// Anything other than a single +- pair of survivors throws.
FluxRecovery recover_fluxes(const std::vector<FluxMeasurement>& measurements, int n_obstacles,
                            double tol = 1e-6);

} // namespace abx
