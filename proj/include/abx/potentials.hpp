#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "abx/constants.hpp"
#include "abx/geometry.hpp"
#include "abx/grid.hpp"

namespace abx {

// Magnetic vector potential as a closure over the plane. Singular points (AB
// vortex centers) are declared so line quadratures can refuse paths that cross
// them and the solver can insist they are hidden behind an obstacle.
struct VectorPotential {
    std::function<Vec2(const Vec2&)> eval;
    std::vector<Vec2> singularities;
    // smallest disc outside which A vanishes identically; infinity when no
    // such disc exists (an uncompensated AB tail)
    Vec2 support_center{0.0, 0.0};
    double support_radius = std::numeric_limits<double>::infinity();

    Vec2 operator()(const Vec2& x) const { return eval(x); }
    bool compact() const { return std::isfinite(support_radius); }
};

// Electric potential V(x, t).
struct ScalarPotential {
    std::function<double(const Vec2&, double)> eval;
    double operator()(const Vec2& x, double t) const { return eval(x, t); }
};

VectorPotential make_zero_potential();
ScalarPotential make_zero_scalar();

// A0(x) = (alpha0 / 2 pi) (-(x2-c2), (x1-c1)) / |x-c|^2, curl A0 = alpha0 delta_c.
// alpha0 is the loop flux in units of (e/hbar c) \oint A.dx, i.e. the AB phase.
VectorPotential make_ab_potential(double alpha0, const Vec2& center = {0.0, 0.0});

// symmetric gauge for a uniform field B0: A = (B0/2) (-(x2-c2), x1-c1)
VectorPotential make_uniform_field(double b0, const Vec2& center = {0.0, 0.0});

VectorPotential make_constant_potential(const Vec2& a0);

// Finite solenoid: azimuthal potential of a C-infinity bump of total flux
// `alpha` confined to |x-c| < core_radius. Coincides with the AB potential
// outside the core and is smooth everywhere, so nothing is singular; the field
// region still has to be masked for AB experiments.
VectorPotential make_solenoid(double alpha, const Vec2& center, double core_radius);

// flux density of the solenoid above: curl of make_solenoid at radius r
double solenoid_flux_density(double alpha, double core_radius, double r);

// Opposite solenoids of flux +alpha at c_plus and -alpha at c_minus whose
// combined potential is exactly zero outside the disc of radius fade_end
// around the pair midpoint: the common far tail is curl-free with zero
// winding, so it is removed by subtracting the gradient of a cutoff times the
// angle-difference function. Loops enclosing exactly one core still pick up
// the full +-alpha, which makes the pair the compact stand-in for an isolated
// flux line whenever rays or walls must stay in a potential-free region.
// Requires fade_start >= |c_plus - c_minus|/2 + core_radius and
// fade_end > fade_start; the potential is C-infinity with no singular points.
VectorPotential make_flux_pair(double alpha, const Vec2& c_plus, const Vec2& c_minus,
                               double core_radius, double fade_start, double fade_end);

// grid-sampled potential with bilinear interpolation; evaluation outside the
// sampled rectangle is a contract violation
VectorPotential make_grid_potential(std::shared_ptr<const VectorGridField> f);

VectorPotential make_sum(std::vector<VectorPotential> terms);

// V(x,t) = profile(t) on points where region(x) is true, else 0
ScalarPotential make_gated_scalar(std::function<double(double)> profile,
                                  std::function<bool(const Vec2&)> region);

// Gauge function g = exp(i(phi(x,t) + p*theta_c(x))) acting on wavefunctions by
// multiplication; p is the winding number about `winding_center`. The pair
// (A, V) transforms as A' = A + (hbar c/e)(grad phi + p grad theta),
// V' = V - (hbar/e) dphi/dt, which keeps (g u, A', V') equivalent to (u, A, V).
struct GaugeFunction {
    std::function<double(const Vec2&, double)> phi = [](const Vec2&, double) { return 0.0; };
    std::function<Vec2(const Vec2&, double)> grad_phi = [](const Vec2&, double) { return Vec2{}; };
    std::function<double(const Vec2&, double)> dphi_dt = [](const Vec2&, double) { return 0.0; };
    int winding = 0;
    Vec2 winding_center{0.0, 0.0};

    std::complex<double> factor(const Vec2& x, double t = 0.0) const;
    // total spatial gradient including the winding term p * (-y, x)/r^2
    Vec2 total_gradient(const Vec2& x, double t = 0.0) const;
};

} // namespace abx
