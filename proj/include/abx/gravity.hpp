#pragma once

#include <functional>
#include <vector>

#include "abx/geometry.hpp"

namespace abx {

// Symmetric spatial block of a stationary metric at a point; defaults to the
// flat -identity so the default metric is Minkowski.
struct Sym2 {
    double xx = -1.0;
    double xy = 0.0;
    double yy = -1.0;
};

// Stationary metric on a planar spatial domain: component functions of x only,
// line element g00 dx0^2 + 2 g0j dx0 dxj + gjk dxj dxk. Lorentz signature
// (g00 > 0, spatial block negative definite) is the caller's responsibility;
// operations check g00 wherever they sample, and validate_lorentz_signature
// probes both conditions explicitly.
struct StationaryMetric {
    std::function<double(const Vec2&)> g00 = [](const Vec2&) { return 1.0; };
    std::function<Vec2(const Vec2&)> g0j = [](const Vec2&) { return Vec2{0.0, 0.0}; };
    std::function<Sym2(const Vec2&)> gjk = [](const Vec2&) { return Sym2{}; };
};

// Throws unless g00 > 0 and the spatial block is negative definite at every
// probe point.
void validate_lorentz_signature(const StationaryMetric& metric, const std::vector<Vec2>& probes);

// Loop integral of the 1-form (g0j/g00) dxj, the stationary-metric analogue of
// a magnetic flux: unchanged under time-shift isometries and zero for metrics
// with vanishing g0j. The value is an exact real number, not reduced modulo
// anything. The loop must close within 1e-9 and avoid g00 <= 0.
double gravitational_flux(const StationaryMetric& metric, const Path& loop,
                          int quadrature_order = 8, int panels_per_segment = 16);

// Pullback of the metric under the time shift (x0, x) -> (x0 + a(x), x); only
// the gradient of a enters. g00 is unchanged, g0j picks up -g00 grad a, and
// the spatial block completes the square, so the line element and every loop
// flux are preserved.
StationaryMetric time_shift_isometry(const StationaryMetric& metric,
                                     const std::function<Vec2(const Vec2&)>& grad_a);

struct StaticObstruction {
    bool locally_static = false;   // the flux 1-form is closed at every probe
    bool globally_static = false;  // closed, and every basis-loop flux vanishes
    std::vector<double> fluxes;    // one gravitational_flux per basis loop
};

// Local staticity is a centered-difference curl test of g0j/g00 at each probe
// (step 1e-4, threshold tol); global staticity additionally needs every
// basis-loop flux below tol in magnitude. A metric can be locally static at
// every probe yet fail globally when the domain has holes that the basis
// loops encircle.
StaticObstruction static_obstruction(const StationaryMetric& metric,
                                     const std::vector<Path>& basis_loops,
                                     const std::vector<Vec2>& probe_grid, double tol);

}  // namespace abx
