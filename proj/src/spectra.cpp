#include "abx/spectra.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <utility>

#include "abx/errors.hpp"

namespace abx {

namespace {

void validate(const TorusOperator& op) {
    if (!std::isfinite(op.e1.x) || !std::isfinite(op.e1.y) || !std::isfinite(op.e2.x) ||
        !std::isfinite(op.e2.y))
        throw config_error("torus lattice vectors must be finite");
    if (std::abs(op.e1.cross(op.e2)) <= 1e-12)
        throw config_error("torus lattice vectors must be linearly independent");
    if (op.cutoff < 1) throw config_error("plane-wave cutoff must be at least 1");
    if (!std::isfinite(op.alpha1) || !std::isfinite(op.alpha2))
        throw config_error("torus holonomies must be finite");

    std::map<std::pair<int, int>, std::complex<double>> coef;
    for (const auto& c : op.potential) {
        if (!std::isfinite(c.value.real()) || !std::isfinite(c.value.imag()))
            throw config_error("torus potential coefficients must be finite");
        if (!coef.emplace(std::make_pair(c.n1, c.n2), c.value).second)
            throw config_error("duplicate Fourier index in the torus potential");
    }
    for (const auto& [idx, v] : coef) {
        auto mirror = coef.find({-idx.first, -idx.second});
        if (mirror == coef.end() || std::abs(mirror->second - std::conj(v)) > 1e-12)
            throw config_error(
                "torus potential must be Hermitian-symmetric: each coefficient needs its "
                "conjugate at the negated index");
    }
}

Eigen::MatrixXcd assemble(const TorusOperator& op) {
    validate(op);
    int c = op.cutoff;
    int n = 2 * c + 1;
    int dim = n * n;

    // inverse Gram matrix of the lattice basis, the metric of the dual frame
    double g11 = op.e1.dot(op.e1), g12 = op.e1.dot(op.e2), g22 = op.e2.dot(op.e2);
    double det = g11 * g22 - g12 * g12;
    double i11 = g22 / det, i12 = -g12 / det, i22 = g11 / det;

    auto index = [&](int m1, int m2) { return (m1 + c) * n + (m2 + c); };

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (int m1 = -c; m1 <= c; ++m1)
        for (int m2 = -c; m2 <= c; ++m2) {
            double q1 = 2.0 * M_PI * m1 - op.alpha1;
            double q2 = 2.0 * M_PI * m2 - op.alpha2;
            h(index(m1, m2), index(m1, m2)) = i11 * q1 * q1 + 2.0 * i12 * q1 * q2 + i22 * q2 * q2;
        }
    // row m picks up coefficient v_d from column m - d
    for (const auto& f : op.potential)
        for (int p1 = -c; p1 <= c; ++p1)
            for (int p2 = -c; p2 <= c; ++p2) {
                int m1 = p1 + f.n1, m2 = p2 + f.n2;
                if (m1 < -c || m1 > c || m2 < -c || m2 > c) continue;
                h(index(m1, m2), index(p1, p2)) += f.value;
            }
    return h;
}

}  // namespace

int torus_basis_size(const TorusOperator& op) {
    validate(op);
    int n = 2 * op.cutoff + 1;
    return n * n;
}

std::vector<std::complex<double>> torus_matrix(const TorusOperator& op) {
    Eigen::MatrixXcd h = assemble(op);
    std::vector<std::complex<double>> out(static_cast<size_t>(h.rows()) * h.cols());
    for (int r = 0; r < h.rows(); ++r)
        for (int col = 0; col < h.cols(); ++col) out[static_cast<size_t>(r) * h.cols() + col] = h(r, col);
    return out;
}

std::vector<double> torus_spectrum(const TorusOperator& op, int n_eigs) {
    Eigen::MatrixXcd h = assemble(op);
    if (n_eigs < 1) throw config_error("eigenvalue count must be positive");
    if (n_eigs > h.rows()) throw config_error("eigenvalue count exceeds the basis dimension");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw numeric_error("torus eigensolve failed to converge");
    std::vector<double> out(static_cast<size_t>(n_eigs));
    for (int i = 0; i < n_eigs; ++i) out[static_cast<size_t>(i)] = solver.eigenvalues()(i);
    return out;
}

SpectralComparison spectral_flux_signature(const std::vector<double>& spectrum_a,
                                           const std::vector<double>& spectrum_b, double tol) {
    if (spectrum_a.size() != spectrum_b.size())
        throw config_error("spectra must have equal length to compare");
    if (!(tol > 0.0) || !std::isfinite(tol))
        throw config_error("spectral comparison tolerance must be positive");
    for (const auto* s : {&spectrum_a, &spectrum_b})
        for (size_t i = 1; i < s->size(); ++i)
            if ((*s)[i] < (*s)[i - 1] - 1e-12)
                throw config_error("spectra must be sorted ascending");
    SpectralComparison cmp;
    for (size_t i = 0; i < spectrum_a.size(); ++i)
        cmp.max_difference = std::max(cmp.max_difference, std::abs(spectrum_a[i] - spectrum_b[i]));
    cmp.indistinguishable = cmp.max_difference < tol;
    return cmp;
}

}  // namespace abx
