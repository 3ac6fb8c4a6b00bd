#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "abx/constants.hpp"
#include "abx/geometry.hpp"
#include "abx/grid.hpp"
#include "abx/potentials.hpp"

namespace abx {

// alpha = (e / hbar c) \int_path A . dx, composite Gauss-Legendre per segment.
// Counterclockwise loops around a positive flux give a positive result. Paths
// must keep a distance > 1e-9 from every declared singular point.
double flux_line_integral(const VectorPotential& A, const Path& path,
                          const Constants& cst = {}, int order = 8,
                          int panels_per_segment = 1);

// electromagnetic flux (e/hbar) \oint [ (1/c) A . dx - V dt ] over a loop in (x, t)
double spacetime_flux(const VectorPotential& A, const ScalarPotential& V,
                      const SpacetimePath& loop, const Constants& cst = {}, int order = 8,
                      int panels_per_segment = 1);

// simultaneous substitution A -> A + (hbar c/e) grad(phi + p theta),
// V -> V - (hbar/e) phi_t
std::pair<VectorPotential, ScalarPotential> gauge_transform(const VectorPotential& A,
                                                            const ScalarPotential& V,
                                                            const GaugeFunction& g,
                                                            const Constants& cst = {});

struct GaugeEquivalenceResult {
    bool equivalent = false;
    std::vector<int> offsets;       // flux difference / 2 pi per basis loop
    std::vector<double> residuals;  // distance of each difference from 2 pi Z
};

// Two static pairs are gauge equivalent iff every basis-loop flux difference is
// an integer multiple of 2 pi and the electric parts agree along the loops.
GaugeEquivalenceResult check_gauge_equivalence(const VectorPotential& A, const ScalarPotential& V,
                                               const VectorPotential& A2, const ScalarPotential& V2,
                                               const std::vector<Path>& basis_loops,
                                               const Constants& cst = {}, double tol = 1e-9);

// gauge-invariant probability current S(u) = Im[(hbar du/dx - i (e/c) A u) conj(u)]
VectorGridField probability_current(const ComplexGridField& u, const VectorPotential& A,
                                    const Constants& cst = {});

struct BoundaryTriple {
    std::vector<Vec2> points;
    std::vector<double> f1;  // |u|^2
    std::vector<double> f2;  // normal derivative of |u|^2 (one-sided)
    std::vector<Vec2> f3;    // current S(u)
};

// samples the gauge-invariant boundary data along a segment of the grid edge
BoundaryTriple boundary_triple(const ComplexGridField& u, const VectorPotential& A,
                               const Path& segment, const Constants& cst = {});

// Matrix-valued (Hermitian) connection for non-abelian transport.
struct MatrixPotential {
    int dim = 1;
    std::function<Eigen::MatrixXcd(const Vec2&)> a1;
    std::function<Eigen::MatrixXcd(const Vec2&)> a2;
};

// Path-ordered transport c' = i (A . dx) c integrated along the path with the
// midpoint rule: W = exp(i A(mid_n).dx_n) ... exp(i A(mid_1).dx_1), later
// factors on the left. Hermitian A gives a unitary W; Hermiticity is spot
// checked and violations rejected.
Eigen::MatrixXcd wilson_line(const MatrixPotential& A, const Path& path,
                             int steps_per_segment = 64);

// scaling-and-squaring matrix exponential, absolute tolerance ~1e-14
Eigen::MatrixXcd matrix_exp(const Eigen::MatrixXcd& M);

} // namespace abx
