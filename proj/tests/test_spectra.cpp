#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "abx/errors.hpp"
#include "abx/spectra.hpp"
#include "helpers.hpp"

using namespace abx;

namespace {

// real even potential: cosine modes only, so every coefficient equals its
// mirror and the holonomy sign flip is an exact spectral symmetry
std::vector<FourierCoefficient> even_potential() {
    return {{1, 0, {0.35, 0.0}}, {-1, 0, {0.35, 0.0}}, {0, 1, {0.5, 0.0}},
            {0, -1, {0.5, 0.0}}, {1, 1, {0.2, 0.0}},   {-1, -1, {0.2, 0.0}}};
}

// kinetic closed form on the infinite dual lattice, sorted ascending
std::vector<double> closed_form(const TorusOperator& op, int window, int count) {
    double g11 = op.e1.dot(op.e1), g12 = op.e1.dot(op.e2), g22 = op.e2.dot(op.e2);
    double det = g11 * g22 - g12 * g12;
    std::vector<double> vals;
    for (int m1 = -window; m1 <= window; ++m1)
        for (int m2 = -window; m2 <= window; ++m2) {
            double q1 = 2.0 * M_PI * m1 - op.alpha1;
            double q2 = 2.0 * M_PI * m2 - op.alpha2;
            vals.push_back((g22 * q1 * q1 - 2.0 * g12 * q1 * q2 + g11 * q2 * q2) / det);
        }
    std::sort(vals.begin(), vals.end());
    vals.resize(count);
    return vals;
}

double max_dev(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("free torus: ground level zero, first excited shell 4 pi^2 fourfold") {
    TorusOperator op;
    op.cutoff = 3;
    auto s = torus_spectrum(op, 5);
    CHECK(std::abs(s[0]) < 1e-10);
    for (int i = 1; i <= 4; ++i) CHECK(std::abs(s[i] - 4.0 * M_PI * M_PI) < 1e-10);
}

TEST_CASE("half-quantum holonomy splits the free shells into pi^2 pairs") {
    TorusOperator op;
    op.alpha1 = M_PI;
    op.cutoff = 4;
    auto s = torus_spectrum(op, 6);
    CHECK(std::abs(s[0] - M_PI * M_PI) < 1e-10);
    CHECK(std::abs(s[1] - M_PI * M_PI) < 1e-10);
    for (int i = 2; i <= 5; ++i) CHECK(std::abs(s[i] - 5.0 * M_PI * M_PI) < 1e-10);
    CHECK(s[2] - s[1] > 1.0);
}

TEST_CASE("joint holonomy sign flip leaves the free spectrum unchanged") {
    TorusOperator a, b;
    a.alpha1 = 1.0;
    a.alpha2 = 0.5;
    a.cutoff = 6;
    b = a;
    b.alpha1 = -1.0;
    b.alpha2 = -0.5;
    CHECK(max_dev(torus_spectrum(a, 12), torus_spectrum(b, 12)) < 1e-12);
}

TEST_CASE("free spectra match the dual-lattice closed form") {
    const double alphas[][2] = {{0.0, 0.0}, {M_PI, M_PI},  {-M_PI, 0.5},
                                {1.7, -2.2}, {0.3, 3.0},    {-2.9, -0.1}};
    for (int cutoff : {6, 7})
        for (const auto& a : alphas) {
            TorusOperator op;
            op.alpha1 = a[0];
            op.alpha2 = a[1];
            op.cutoff = cutoff;
            CHECK(max_dev(torus_spectrum(op, 10), closed_form(op, cutoff + 3, 10)) < 1e-10);
        }
}

TEST_CASE("general lattice kinetic term follows the inverse Gram quadratic form") {
    TorusOperator op;
    op.e1 = {1.3, 0.2};
    op.e2 = {-0.4, 1.1};
    op.alpha1 = 0.7;
    op.alpha2 = -1.1;
    op.cutoff = 6;
    CHECK(max_dev(torus_spectrum(op, 10), closed_form(op, 9, 10)) < 1e-10);
}

TEST_CASE("weak potential shifts the ground level by the second-order sum") {
    TorusOperator op;
    op.alpha1 = 0.6;
    op.alpha2 = 0.2;
    op.cutoff = 6;
    double free0 = torus_spectrum(op, 1)[0];
    CHECK(std::abs(free0 - 0.4) < 1e-12);

    double eps = 1e-3;
    op.potential = {{1, 0, {eps, 0.0}}, {-1, 0, {eps, 0.0}}};
    double pert0 = torus_spectrum(op, 1)[0];
    auto kin = [&](int m1, int m2) {
        double q1 = 2.0 * M_PI * m1 - op.alpha1, q2 = 2.0 * M_PI * m2 - op.alpha2;
        return q1 * q1 + q2 * q2;
    };
    double shift2 =
        eps * eps / (kin(0, 0) - kin(1, 0)) + eps * eps / (kin(0, 0) - kin(-1, 0));
    CHECK(shift2 < 0.0);
    CHECK(std::abs((pert0 - free0) - shift2) < 1e-11);
}

TEST_CASE("spectrum agrees with an independently assembled Galerkin matrix") {
    TorusOperator op;
    op.e1 = {1.3, 0.2};
    op.e2 = {-0.4, 1.1};
    op.alpha1 = 0.7;
    op.alpha2 = -1.1;
    op.potential = {{1, 0, {0.3, 0.4}},  {-1, 0, {0.3, -0.4}}, {0, 2, {-0.15, 0.05}},
                    {0, -2, {-0.15, -0.05}}, {0, 0, {0.6, 0.0}}};
    op.cutoff = 4;

    int c = op.cutoff, n = 2 * c + 1, dim = n * n;
    double g11 = op.e1.dot(op.e1), g12 = op.e1.dot(op.e2), g22 = op.e2.dot(op.e2);
    double det = g11 * g22 - g12 * g12;
    std::map<std::pair<int, int>, std::complex<double>> coef;
    for (const auto& f : op.potential) coef[{f.n1, f.n2}] = f.value;

    Eigen::MatrixXcd h(dim, dim);
    for (int r1 = -c; r1 <= c; ++r1)
        for (int r2 = -c; r2 <= c; ++r2)
            for (int c1 = -c; c1 <= c; ++c1)
                for (int c2 = -c; c2 <= c; ++c2) {
                    std::complex<double> entry = 0.0;
                    if (r1 == c1 && r2 == c2) {
                        double q1 = 2.0 * M_PI * r1 - op.alpha1;
                        double q2 = 2.0 * M_PI * r2 - op.alpha2;
                        entry = (g22 * q1 * q1 - 2.0 * g12 * q1 * q2 + g11 * q2 * q2) / det;
                    }
                    auto it = coef.find({r1 - c1, r2 - c2});
                    if (it != coef.end()) entry += it->second;
                    h((r1 + c) * n + (r2 + c), (c1 + c) * n + (c2 + c)) = entry;
                }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    REQUIRE(solver.info() == Eigen::Success);

    auto got = torus_spectrum(op, dim);
    double d = 0.0;
    for (int i = 0; i < dim; ++i) d = std::max(d, std::abs(got[i] - solver.eigenvalues()(i)));
    CHECK(d < 1e-11);
}

TEST_CASE("assembled matrix is Hermitian and sized by the cutoff window") {
    TorusOperator op;
    op.alpha1 = 0.9;
    op.alpha2 = -0.4;
    op.potential = even_potential();
    op.cutoff = 4;
    CHECK(torus_basis_size(op) == 81);
    auto m = torus_matrix(op);
    REQUIRE(m.size() == 81u * 81u);
    double dev = 0.0;
    for (int r = 0; r < 81; ++r)
        for (int c = 0; c < 81; ++c)
            dev = std::max(dev, std::abs(m[r * 81 + c] - std::conj(m[c * 81 + r])));
    CHECK(dev <= 1e-14);
}

TEST_CASE("holonomy sign flips and 2 pi shifts are spectrally indistinguishable") {
    TorusOperator base;
    base.alpha1 = 0.9;
    base.alpha2 = -0.4;
    base.potential = even_potential();
    base.cutoff = 8;
    auto s0 = torus_spectrum(base, 8);

    auto variant = [&](double a1, double a2) {
        TorusOperator v = base;
        v.alpha1 = a1;
        v.alpha2 = a2;
        return torus_spectrum(v, 8);
    };
    // truncation breaks the shift relabeling only near the window edge, so the
    // low eigenvalues agree far below the 1e-10 bound at cutoff 8
    CHECK(max_dev(variant(-0.9, 0.4), s0) < 1e-10);
    CHECK(max_dev(variant(0.9 + 2.0 * M_PI, -0.4), s0) < 1e-10);
    CHECK(max_dev(variant(0.9, -0.4 - 2.0 * M_PI), s0) < 1e-10);
    CHECK(max_dev(variant(-0.9 + 2.0 * M_PI, 0.4 - 2.0 * M_PI), s0) < 1e-10);

    auto cmp = spectral_flux_signature(s0, variant(0.9 + 2.0 * M_PI, -0.4), 1e-8);
    CHECK(cmp.indistinguishable);
    CHECK(cmp.max_difference < 1e-10);
    cmp = spectral_flux_signature(s0, variant(-0.9, 0.4), 1e-8);
    CHECK(cmp.indistinguishable);
}

TEST_CASE("holonomies with different cosines separate well above tolerance") {
    TorusOperator a, b;
    a.alpha1 = M_PI / 2;
    a.cutoff = 8;
    b.alpha1 = M_PI / 3;
    b.cutoff = 8;
    auto cmp = spectral_flux_signature(torus_spectrum(a, 6), torus_spectrum(b, 6), 0.1);
    CHECK(!cmp.indistinguishable);
    CHECK(cmp.max_difference > 1.3);
}

TEST_CASE("spectral comparison rejects malformed input") {
    std::vector<double> s3{0.0, 1.0, 2.0}, s2{0.0, 1.0};
    CHECK_THROWS_AS((void)spectral_flux_signature(s3, s2, 1e-6), config_error);
    CHECK_THROWS_AS((void)spectral_flux_signature(s3, s3, 0.0), config_error);
    CHECK_THROWS_AS((void)spectral_flux_signature(s3, s3, -1.0), config_error);
    std::vector<double> unsorted{1.0, 0.0, 2.0};
    CHECK_THROWS_AS((void)spectral_flux_signature(unsorted, s3, 1e-6), config_error);
    CHECK_THROWS_AS((void)spectral_flux_signature(s3, unsorted, 1e-6), config_error);
}

TEST_CASE("operator validation rejects degenerate input") {
    TorusOperator op;
    op.cutoff = 0;
    CHECK_THROWS_AS((void)torus_spectrum(op, 1), config_error);
    op.cutoff = 2;
    op.e2 = {2.0, 0.0};
    CHECK_THROWS_AS((void)torus_spectrum(op, 1), config_error);
    op.e2 = {0.0, 1.0};
    op.alpha1 = std::nan("");
    CHECK_THROWS_AS((void)torus_spectrum(op, 1), config_error);
    op.alpha1 = 0.0;
    CHECK_THROWS_AS((void)torus_spectrum(op, 0), config_error);
    CHECK_THROWS_AS((void)torus_spectrum(op, 26), config_error);
    CHECK_NOTHROW((void)torus_spectrum(op, 25));
}

TEST_CASE("potential validation enforces the Hermitian-symmetric completion") {
    TorusOperator op;
    op.cutoff = 2;
    op.potential = {{1, 0, {1.0, 0.0}}};
    CHECK_THROWS_AS((void)torus_spectrum(op, 1), config_error);
    op.potential = {{1, 0, {1.0, 0.0}}, {-1, 0, {0.5, 0.0}}};
    CHECK_THROWS_AS((void)torus_spectrum(op, 1), config_error);
    op.potential = {{1, 0, {1.0, 0.0}}, {1, 0, {1.0, 0.0}}, {-1, 0, {1.0, 0.0}}};
    CHECK_THROWS_AS((void)torus_spectrum(op, 1), config_error);
    op.potential = {{0, 0, {1.0, 0.5}}};
    CHECK_THROWS_AS((void)torus_spectrum(op, 1), config_error);
    op.potential = {{1, 0, {0.3, 0.4}}, {-1, 0, {0.3, -0.4}}};
    CHECK_NOTHROW((void)torus_spectrum(op, 1));
}
