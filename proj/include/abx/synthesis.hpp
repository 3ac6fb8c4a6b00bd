#pragma once

#include <functional>

#include "abx/grid.hpp"
#include "abx/potentials.hpp"

namespace abx {

// Disc declared to contain the support of a sampled field.
struct SupportDisc {
    Vec2 center;
    double radius = 0.0;
};

// Discrete curl dA2/dx - dA1/dy. Interior nodes use centered differences,
// edge nodes the three-point one-sided stencil; both are second order, so
// the curl of a discrete gradient built from the same 1D stencils vanishes
// to rounding. Needs at least three nodes per axis.
ScalarGridField curl_2d(const VectorGridField& A);

// h^2 * sum of samples.
double total_flux(const ScalarGridField& B);

ScalarGridField sample_scalar(const Grid2D& g, const std::function<double(const Vec2&)>& f);

// Radial profile exp(-sharpness / (1 - (r/radius)^2)) scaled to unit
// discrete mass, so subtracting alpha * mollifier removes exactly alpha
// of discrete flux.
ScalarGridField mollifier_bump(const Grid2D& g, const Vec2& center, double radius,
                               double sharpness = 1.0);

// Compact-support vector potential with curl approximately B, for fields of
// zero total flux. The transform of B is factored through the frequency-space
// identity  B~(xi) = xi1*B1~(xi) + xi2*B2~(xi)  with
// B_j~(xi) = \int_0^1 (d B~/d xi_j)(t xi) dt, evaluated on the grid's Nyquist
// frequency box by Gauss-Legendre quadrature in t (t_nodes points); the
// potential is A~ = (i B2~, -i B1~) inverse-transformed to the grid, with
// each mode divided by the centered-difference symbol factor so that the
// interior grid curl reproduces B mode by mode, exactly up to t-quadrature.
// Only the Nyquist lines, where that symbol vanishes, are dropped; their
// content sets the reconstruction floor and surfaces mainly in the one-sided
// edge rows of curl_2d. Inputs whose discrete flux is not below 1e-8 of the
// L1 mass are rejected.
VectorGridField synthesize_compact_potential(const ScalarGridField& B, const SupportDisc& support,
                                             int t_nodes = 16);

// Circulation of a grid potential around the circle |x - center| = radius,
// evaluated as the discrete Stokes sum: centered-stencil curl summed over
// nodes inside the circle times the cell area. For grid-aligned loops this
// equals the trapezoidal line integral of the two-column averaged potential
// identically; sampling an interpolant on the circle instead would add
// O(h^2) interpolation noise on top of any near-Nyquist content.
double loop_flux(const VectorGridField& A, const Vec2& center, double radius);

struct FluxSplit {
    double alpha0 = 0.0;   // total flux of the input field
    VectorPotential tail;  // azimuthal alpha0 / (2 pi r) potential; zero when alpha0 = 0
    VectorGridField core;  // compact part with curl = B - alpha0 * mollifier
};

// Splits B into an analytic flux-carrying tail centered at the origin plus a
// compact zero-flux core. mollifier_radius <= 0 selects four grid spacings.
FluxSplit split_flux_potential(const ScalarGridField& B, const SupportDisc& support,
                               double mollifier_radius = 0.0, int t_nodes = 16);

} // namespace abx
