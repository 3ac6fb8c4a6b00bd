#pragma once

#include <complex>
#include <vector>

#include "abx/geometry.hpp"

namespace abx {

// One Fourier coefficient of the scalar potential, indexed on the dual
// lattice: V(x) = sum_c value_c exp(2 pi i (c1 x1* + c2 x2*)) in dual-basis
// coordinates. A real potential needs the Hermitian-symmetric completion:
// the coefficient at (-n1, -n2) must be the conjugate of the one at (n1, n2).
struct FourierCoefficient {
    int n1 = 0;
    int n2 = 0;
    std::complex<double> value;
};

// Magnetic Schroedinger operator on the flat torus spanned by e1 and e2 with
// a curl-free vector potential, represented by its two loop holonomies. The
// gauge representative is the constant field whose line integrals along the
// lattice loops e1 and e2 equal alpha1 and alpha2; every curl-free potential
// with those holonomies is gauge-equivalent to it on the torus, so the
// spectrum depends on the potential only through (alpha1, alpha2).
struct TorusOperator {
    Vec2 e1{1.0, 0.0};  // lattice basis, must be linearly independent
    Vec2 e2{0.0, 1.0};
    double alpha1 = 0.0;  // holonomy along the e1 loop
    double alpha2 = 0.0;  // holonomy along the e2 loop
    std::vector<FourierCoefficient> potential;
    int cutoff = 1;  // plane-wave window: dual indices with |m_i| <= cutoff
};

// Basis dimension of the plane-wave truncation, (2 cutoff + 1)^2.
int torus_basis_size(const TorusOperator& op);

// Dense Galerkin matrix in the plane-wave basis exp(2 pi i m . x*), row-major
// with torus_basis_size rows. Diagonal entries are the kinetic quadratic form
// (2 pi m - alpha)^T G^{-1} (2 pi m - alpha) with G the lattice Gram matrix;
// the potential couples rows whose dual indices differ by a coefficient index.
// Hermitian by construction once the coefficient set passes validation.
std::vector<std::complex<double>> torus_matrix(const TorusOperator& op);

// The n_eigs smallest eigenvalues of the truncated operator, ascending.
// For vanishing potential these are exactly the kinetic values enumerated
// over the window, so they match the infinite-lattice closed form whenever
// the window covers the minimizing dual indices.
std::vector<double> torus_spectrum(const TorusOperator& op, int n_eigs);

// Result of comparing two sorted spectra: indistinguishable when the largest
// elementwise gap stays below the tolerance. Holonomy pairs related by a
// joint sign flip or by 2 pi shifts produce indistinguishable spectra; pairs
// with different cosines are expected to separate.
struct SpectralComparison {
    bool indistinguishable = false;
    double max_difference = 0.0;
};

SpectralComparison spectral_flux_signature(const std::vector<double>& spectrum_a,
                                           const std::vector<double>& spectrum_b, double tol);

}  // namespace abx
