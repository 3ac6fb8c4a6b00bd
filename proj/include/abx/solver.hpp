#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "abx/constants.hpp"
#include "abx/grid.hpp"
#include "abx/potentials.hpp"

namespace abx {

// Obstacle interior flags; true means the node is Dirichlet and the wave is
// pinned to zero there.
struct ObstacleMask {
    GridField<unsigned char> inside;

    ObstacleMask() = default;
    explicit ObstacleMask(const Grid2D& g) : inside(g, 0) {}
    bool at(int ix, int iy) const { return inside.at(ix, iy) != 0; }
    std::size_t count() const;
};

// Mask as a function of time; closures express moving, merging, splitting, or
// gated obstacles. The mask must be well defined at every step time.
using MaskGenerator = std::function<ObstacleMask(const Grid2D&, double)>;

struct MaskDisc {
    Vec2 center;
    double radius = 0.0;
};

ObstacleMask mask_none(const Grid2D& g);
ObstacleMask mask_discs(const Grid2D& g, const std::vector<MaskDisc>& discs);

// Annulus wall r_inner <= |x - center| <= r_outer with an open gate sector of
// half-width `gate_halfwidth` (radians) around direction angle `gate_angle`;
// half-width 0 closes the wall completely.
ObstacleMask mask_annulus(const Grid2D& g, const Vec2& center, double r_inner, double r_outer,
                          double gate_angle = 0.0, double gate_halfwidth = 0.0);

MaskGenerator static_mask(ObstacleMask m);

struct WaveState {
    ComplexGridField values;
    double time = 0.0;

    WaveState() = default;
    explicit WaveState(const Grid2D& g) : values(g) {}
    const Grid2D& grid() const { return values.grid; }
};

// sqrt of the cell-area weighted squared magnitude sum
double wave_norm(const WaveState& u);

// Five-point magnetic Schrödinger operator with Peierls link phases. A single
// hopping coefficient is stored per edge and used conjugated in the reverse
// direction, so the operator is Hermitian by construction. Masked rows and
// columns are replaced by the identity.
struct DiscreteHamiltonian {
    Grid2D grid;
    Constants cst;
    std::vector<std::complex<double>> hop_x;  // edge (ix,iy) -> (ix+1,iy), size (nx-1)*ny
    std::vector<std::complex<double>> hop_y;  // edge (ix,iy) -> (ix,iy+1), size nx*(ny-1)
    std::vector<double> onsite;               // diagonal, real
    std::vector<unsigned char> masked;

    std::size_t hx_idx(int ix, int iy) const { return std::size_t(iy) * (grid.nx - 1) + ix; }
    std::size_t hy_idx(int ix, int iy) const { return std::size_t(iy) * grid.nx + ix; }

    // out = H in (out must not alias in)
    void apply(const std::vector<std::complex<double>>& in,
               std::vector<std::complex<double>>& out) const;
};

// Hopping -(hbar^2/2m h^2) e^{i theta} where theta = (e/hbar c) A(midpoint).dx
// is taken with dx the displacement of the hop into the row node, so wave
// phases accumulate +(e/hbar c) \int A.dl along the direction of propagation.
// On-site hbar^2/m (1/hx^2 + 1/hy^2) + e V(x, t). Every singularity of A lying
// inside the grid must be covered by a fully masked cell.
DiscreteHamiltonian build_hamiltonian(const Grid2D& g, const VectorPotential& A,
                                      const ScalarPotential& V, const ObstacleMask& mask,
                                      const Constants& cst, double t);

struct StepInfo {
    int iterations = 0;
    double residual = 0.0;  // true relative residual of the implicit solve
};

// One Crank-Nicolson step: (I + i dt/2hbar H) u_next = (I - i dt/2hbar H) u.
// The implicit system is solved by conjugate gradients on the normal equations
// (the shifted operator is normal and bounded below by 1, so the normal system
// is well conditioned and its residual bounds the true one), Jacobi
// preconditioned, to relative residual 1e-12, at most 500 iterations.
WaveState step_crank_nicolson(const WaveState& u, const DiscreteHamiltonian& H, double dt,
                              StepInfo* info = nullptr);

struct EvolveDiagnostics {
    std::vector<double> times;
    std::vector<double> norms;     // after each step
    std::vector<double> absorbed;  // squared norm removed by mask growth, per step
    double absorbed_total = 0.0;
    int worst_iterations = 0;
};

// Steps from state.time to t_final with the mask and the Hamiltonian
// re-evaluated at each midstep time. Amplitude on newly masked nodes is
// removed and reported as absorbed. dt is adjusted to divide the span into a
// whole number of equal steps.
WaveState evolve(WaveState state, const VectorPotential& A, const ScalarPotential& V,
                 const MaskGenerator& mask_at, double t_final, double dt,
                 const Constants& cst = {}, EvolveDiagnostics* diag = nullptr);

// Geometric-optics packet: cutoff envelope of radius delta1 around x0, plane
// phase (m k / hbar) x.direction, and the accumulated potential phase
// (e/hbar c) \int_0^inf direction.A(x - s direction) ds per node, the ray
// integral truncated where it leaves the grid (exact once supp A is inside).
// Rays passing within 1e-9 of a singularity of A are rejected.
WaveState go_packet(const Grid2D& g, const Vec2& x0, const Vec2& direction, double k,
                    double delta1, const VectorPotential& A, const Constants& cst = {});

} // namespace abx
