#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "abx/errors.hpp"
#include "abx/fields.hpp"
#include "abx/quadrature.hpp"
#include "abx/synthesis.hpp"

using namespace abx;

namespace {

// Gaussian bell under a smooth radial cutoff: chi(r) = exp(-r^2/2 sigma^2) S(tau),
// tau = (r - r0)/(r1 - r0), with S a C-infinity step that is 1 below r0 and 0
// above r1. The first two derivatives of S are computed analytically, so the
// Laplacian samples are exact and the field vanishes identically beyond r1.
struct RingField {
    double sigma, r0, r1;

    static void step(double tau, double& S, double& S1, double& S2) {
        if (tau <= 0) { S = 1; S1 = 0; S2 = 0; return; }
        if (tau >= 1) { S = 0; S1 = 0; S2 = 0; return; }
        double f = std::exp(-1.0 / tau), g = std::exp(-1.0 / (1.0 - tau));
        double fp = f / (tau * tau), gp = -g / ((1 - tau) * (1 - tau));
        double s = f + g, sp = fp + gp;
        double D = 1.0 / (tau * tau) + 1.0 / ((1 - tau) * (1 - tau));
        double Dp = -2.0 / (tau * tau * tau) + 2.0 / ((1 - tau) * (1 - tau) * (1 - tau));
        double P = -f * g * D;
        double Pp = -f * g * ((1.0 / (tau * tau) - 1.0 / ((1 - tau) * (1 - tau))) * D + Dp);
        S = g / s;
        S1 = P / (s * s);
        S2 = (Pp - 2.0 * P * sp / s) / (s * s);
    }

    double chi(double r) const {
        double S, S1, S2;
        step((r - r0) / (r1 - r0), S, S1, S2);
        return std::exp(-r * r / (2 * sigma * sigma)) * S;
    }

    // radial Laplacian chi'' + chi'/r, with the r -> 0 limit
    double lap(double r) const {
        double w = r1 - r0, S, S1, S2;
        step((r - r0) / w, S, S1, S2);
        double u = std::exp(-r * r / (2 * sigma * sigma));
        double up = -r / (sigma * sigma) * u;
        double upp = (r * r / (sigma * sigma * sigma * sigma) - 1.0 / (sigma * sigma)) * u;
        double c1 = up * S + u * S1 / w;
        double c2 = upp * S + 2 * up * S1 / w + u * S2 / (w * w);
        if (r < 1e-12) return 2 * c2;
        return c2 + c1 / r;
    }
};

// Laplacian of a ring, with the discrete-flux residue of the sampling (a few
// 1e-8 relative) sponged into a mollifier column so the zero-flux
// precondition of the synthesizer is met exactly.
ScalarGridField ring_laplacian(const Grid2D& g, const RingField& w, double sponge_radius) {
    ScalarGridField B = sample_scalar(g, [&](const Vec2& x) { return w.lap(x.norm()); });
    ScalarGridField moll = mollifier_bump(g, {0, 0}, sponge_radius);
    double s0 = 0, ms = 0;
    for (double v : B.data) s0 += v;
    for (double v : moll.data) ms += v;
    for (std::size_t i = 0; i < B.data.size(); ++i) B.data[i] -= (s0 / ms) * moll.data[i];
    return B;
}

double max_mag(const VectorGridField& A) {
    double m = 0;
    for (std::size_t i = 0; i < A.a1.data.size(); ++i)
        m = std::max(m, std::hypot(A.a1.data[i], A.a2.data[i]));
    return m;
}

double max_abs(const ScalarGridField& B) {
    double m = 0;
    for (double v : B.data) m = std::max(m, std::abs(v));
    return m;
}

double max_diff(const VectorGridField& A, const VectorGridField& B) {
    double m = 0;
    for (std::size_t i = 0; i < A.a1.data.size(); ++i)
        m = std::max(m, std::hypot(A.a1.data[i] - B.a1.data[i], A.a2.data[i] - B.a2.data[i]));
    return m;
}

// Independent rebuild of the synthesizer with the t integral evaluated by
// composite 8-point Gauss-Legendre over `panels` equal panels instead of a
// single high-order rule; agreement with the library output bounds the
// t-quadrature error of both.
VectorGridField reference_potential(const ScalarGridField& B, int panels) {
    using cd = std::complex<double>;
    using Mat = Eigen::MatrixXcd;
    const Grid2D& g = B.grid;
    const int nx = g.nx, ny = g.ny;
    double area = g.cell_area();
    std::vector<double> xs(nx), ys(ny), xix(nx), xiy(ny);
    for (int a = 0; a < nx; ++a) xs[a] = g.origin.x + a * g.spacing.x;
    for (int b = 0; b < ny; ++b) ys[b] = g.origin.y + b * g.spacing.y;
    for (int p = 0; p < nx; ++p) xix[p] = 2.0 * M_PI / (nx * g.spacing.x) * (p - nx / 2);
    for (int q = 0; q < ny; ++q) xiy[q] = 2.0 * M_PI / (ny * g.spacing.y) * (q - ny / 2);
    Mat C1(nx, ny), C2(nx, ny);
    for (int b = 0; b < ny; ++b)
        for (int a = 0; a < nx; ++a) {
            cd w = cd(0, -1.0) * (B.at(a, b) * area);
            C1(a, b) = w * xs[a];
            C2(a, b) = w * ys[b];
        }
    const QuadRule& rule = gauss_legendre(8);
    Mat Bt1 = Mat::Zero(nx, ny), Bt2 = Mat::Zero(nx, ny), E1(nx, nx), E2(ny, ny);
    for (int pl = 0; pl < panels; ++pl) {
        double lo = double(pl) / panels, wid = 1.0 / panels;
        for (int k = 0; k < 8; ++k) {
            double t = lo + wid * 0.5 * (rule.nodes[k] + 1.0);
            double w = wid * 0.5 * rule.weights[k];
            for (int p = 0; p < nx; ++p)
                for (int a = 0; a < nx; ++a) E1(p, a) = std::polar(1.0, -t * xix[p] * xs[a]);
            for (int q = 0; q < ny; ++q)
                for (int b = 0; b < ny; ++b) E2(q, b) = std::polar(1.0, -t * xiy[q] * ys[b]);
            Bt1.noalias() += w * (E1 * C1 * E2.transpose());
            Bt2.noalias() += w * (E1 * C2 * E2.transpose());
        }
    }
    auto sinc = [](double z) { return z == 0.0 ? 1.0 : std::sin(z) / z; };
    Mat F1(nx, ny), F2(nx, ny);
    for (int q = 0; q < ny; ++q) {
        double c2 = sinc(xiy[q] * g.spacing.y);
        for (int p = 0; p < nx; ++p) {
            double c1 = sinc(xix[p] * g.spacing.x);
            if (std::abs(c1) < 0.02 || std::abs(c2) < 0.02) {
                F1(p, q) = cd(0.0);
                F2(p, q) = cd(0.0);
            } else {
                F1(p, q) = cd(0.0, 1.0) * Bt2(p, q) / c2;
                F2(p, q) = cd(0.0, -1.0) * Bt1(p, q) / c1;
            }
        }
    }
    Mat G1(nx, nx), G2(ny, ny);
    for (int p = 0; p < nx; ++p)
        for (int a = 0; a < nx; ++a) G1(a, p) = std::polar(1.0, xix[p] * xs[a]);
    for (int q = 0; q < ny; ++q)
        for (int b = 0; b < ny; ++b) G2(b, q) = std::polar(1.0, xiy[q] * ys[b]);
    double scale = 1.0 / (nx * g.spacing.x * ny * g.spacing.y);
    Mat A1 = G1 * F1 * G2.transpose() * scale;
    Mat A2 = G1 * F2 * G2.transpose() * scale;
    VectorGridField A(g);
    for (int b = 0; b < ny; ++b)
        for (int a = 0; a < nx; ++a) {
            A.a1.at(a, b) = A1(a, b).real();
            A.a2.at(a, b) = A2(a, b).real();
        }
    return A;
}

// Trapezoidal line integral of the two-column averaged potential around the
// grid-aligned rectangle with corner nodes (i0,j0)-(i1,j1); telescopes to the
// centered-curl sum over the enclosed nodes, giving a line-quadrature check
// of the Stokes evaluation in loop_flux.
double rectangle_circulation(const VectorGridField& A, int i0, int i1, int j0, int j1) {
    const Grid2D& g = A.grid();
    double hx = g.spacing.x, hy = g.spacing.y, L = 0;
    for (int j = j0 + 1; j < j1; ++j)
        L += 0.5 * hy *
             (A.a2.at(i1, j) + A.a2.at(i1 - 1, j) - A.a2.at(i0, j) - A.a2.at(i0 + 1, j));
    for (int i = i0 + 1; i < i1; ++i)
        L -= 0.5 * hx *
             (A.a1.at(i, j1) + A.a1.at(i, j1 - 1) - A.a1.at(i, j0) - A.a1.at(i, j0 + 1));
    return L;
}

// discrete gradient built from the same 1D stencils as curl_2d
VectorGridField discrete_gradient(const ScalarGridField& psi) {
    const Grid2D& g = psi.grid;
    double hx = g.spacing.x, hy = g.spacing.y;
    VectorGridField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (i == 0)
                out.a1.at(i, j) = (-3 * psi.at(0, j) + 4 * psi.at(1, j) - psi.at(2, j)) / (2 * hx);
            else if (i == g.nx - 1)
                out.a1.at(i, j) =
                    (3 * psi.at(i, j) - 4 * psi.at(i - 1, j) + psi.at(i - 2, j)) / (2 * hx);
            else
                out.a1.at(i, j) = (psi.at(i + 1, j) - psi.at(i - 1, j)) / (2 * hx);
            if (j == 0)
                out.a2.at(i, j) = (-3 * psi.at(i, 0) + 4 * psi.at(i, 1) - psi.at(i, 2)) / (2 * hy);
            else if (j == g.ny - 1)
                out.a2.at(i, j) =
                    (3 * psi.at(i, j) - 4 * psi.at(i, j - 1) + psi.at(i, j - 2)) / (2 * hy);
            else
                out.a2.at(i, j) = (psi.at(i, j + 1) - psi.at(i, j - 1)) / (2 * hy);
        }
    return out;
}

} // namespace

TEST_CASE("curl of the zero potential vanishes identically") {
    Grid2D g = Grid2D::square(16, -1.0, 1.0);
    ScalarGridField c = curl_2d(VectorGridField(g));
    for (double v : c.data) CHECK(v == 0.0);
}

TEST_CASE("curl of the rigid rotation potential is the unit field everywhere") {
    // A = (-y, x)/2 is linear, so both the centered and the one-sided stencils
    // differentiate it exactly, edges included
    Grid2D g = Grid2D::square(40, -1.7, 1.7);
    VectorGridField A(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Vec2 x = g.node(i, j);
            A.a1.at(i, j) = -0.5 * x.y;
            A.a2.at(i, j) = 0.5 * x.x;
        }
    ScalarGridField c = curl_2d(A);
    for (double v : c.data) CHECK(std::abs(v - 1.0) < 1e-10);
}

TEST_CASE("curl annihilates a sampled polynomial gradient") {
    // grad(x^2 y^2) = (2xy^2, 2x^2 y): per-axis degree <= 2, again exact for
    // both stencils, so only rounding remains
    Grid2D g = Grid2D::square(48, -1.5, 1.5);
    VectorGridField A(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Vec2 x = g.node(i, j);
            A.a1.at(i, j) = 2.0 * x.x * x.y * x.y;
            A.a2.at(i, j) = 2.0 * x.x * x.x * x.y;
        }
    CHECK(max_abs(curl_2d(A)) < 1e-8);
}

TEST_CASE("interior curl truncation on a cubic gradient is exactly h^2") {
    // for grad(x^3 y) the centered x-stencil returns 3x^2 + h^2, everything
    // else is exact, so the interior defect equals h^2 to rounding and the
    // classical second-order refinement ratio follows without any fit
    for (int n : {32, 64}) {
        Grid2D g = Grid2D::square(n, -1.0, 1.0);
        double h = g.spacing.x;
        VectorGridField A(g);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                Vec2 x = g.node(i, j);
                A.a1.at(i, j) = 3.0 * x.x * x.x * x.y;
                A.a2.at(i, j) = x.x * x.x * x.x;
            }
        ScalarGridField c = curl_2d(A);
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) CHECK(std::abs(c.at(i, j) - h * h) < 1e-12);
    }
}

TEST_CASE("curl of a discrete gradient is zero to rounding") {
    // the 1D difference operators act on different indices and therefore
    // commute exactly, whatever the sampled function
    Grid2D g = Grid2D::square(64, -1.0, 1.0);
    ScalarGridField psi = sample_scalar(
        g, [](const Vec2& x) { return std::exp(std::sin(2.0 * x.x) + std::cos(3.0 * x.y)); });
    CHECK(max_abs(curl_2d(discrete_gradient(psi))) < 1e-11);
}

TEST_CASE("curl rejects mismatched and undersized grids") {
    VectorGridField bad;
    bad.a1 = ScalarGridField(Grid2D::square(8, -1.0, 1.0));
    bad.a2 = ScalarGridField(Grid2D::square(9, -1.0, 1.0));
    CHECK_THROWS_AS(curl_2d(bad), config_error);

    Grid2D tiny{2, 2, {-1, -1}, {1.0, 1.0}};
    CHECK_THROWS_AS(curl_2d(VectorGridField(tiny)), config_error);
}

TEST_CASE("total flux is the cell-area weighted sample sum") {
    Grid2D g = Grid2D::square(16, -1.0, 1.0);
    ScalarGridField B(g);
    for (double& v : B.data) v = 0.75;
    CHECK(total_flux(B) == doctest::Approx(0.75 * 256 * g.cell_area()).epsilon(1e-14));
}

TEST_CASE("mollifier bump is a unit-mass field confined to its radius") {
    // odd node count puts nodes exactly at the center and at half radius
    Grid2D g{65, 65, {-1, -1}, {0.03125, 0.03125}};
    ScalarGridField m = mollifier_bump(g, {0, 0}, 0.5);
    CHECK(total_flux(m) == doctest::Approx(1.0).epsilon(1e-12));
    double center = m.at(32, 32);
    CHECK(center > 0.0);
    for (int j = 0; j < 65; ++j)
        for (int i = 0; i < 65; ++i) {
            double r = g.node(i, j).norm();
            if (r >= 0.5) CHECK(m.at(i, j) == 0.0);
            CHECK(m.at(i, j) <= center);
        }
    // profile pin: value at half radius over the center value is e^{-1/3}
    CHECK(m.at(40, 32) / center == doctest::Approx(std::exp(-1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("mollifier rejects non-positive and unresolvable radii") {
    Grid2D g = Grid2D::square(16, -1.0, 1.0);
    CHECK_THROWS_AS(mollifier_bump(g, {0, 0}, 0.0), config_error);
    CHECK_THROWS_AS(mollifier_bump(g, {0, 0}, -0.3), config_error);
    // radius far below the spacing: no interior node survives
    CHECK_THROWS_AS(mollifier_bump(g, {0.5 * g.spacing.x, 0}, 1e-4), config_error);
}

TEST_CASE("the zero field synthesizes to the zero potential") {
    Grid2D g = Grid2D::square(32, -1.0, 1.0);
    VectorGridField A = synthesize_compact_potential(ScalarGridField(g), {{0, 0}, 0.5});
    CHECK(max_mag(A) == 0.0);
}

TEST_CASE("synthesis reproduces smooth ring fields and stays on their support") {
    Grid2D g = Grid2D::square(64, -2.0, 2.0);
    SupportDisc disc{{0, 0}, 1.1};
    for (RingField w : {RingField{0.130, 0.72, 1.00}, RingField{0.128, 0.70, 1.00}}) {
        CAPTURE(w.sigma);
        ScalarGridField B = ring_laplacian(g, w, 0.45);
        VectorGridField A = synthesize_compact_potential(B, disc, 16);
        ScalarGridField c = curl_2d(A);
        double bm = max_abs(B), am = max_mag(A);
        double cerr = 0, leak = 0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                cerr = std::max(cerr, std::abs(c.at(i, j) - B.at(i, j)));
                if (g.node(i, j).norm() > 1.5)
                    leak = std::max(leak, std::hypot(A.a1.at(i, j), A.a2.at(i, j)));
            }
        CHECK(cerr / bm < 1e-6);
        CHECK(leak / am < 1e-4);
        // zero net flux: every loop enclosing the support sees zero circulation
        CHECK(std::abs(loop_flux(A, {0, 0}, 1.6)) < 1e-6);
        CHECK(std::abs(rectangle_circulation(A, 3, 60, 3, 60)) < 1e-6);
    }
}

TEST_CASE("synthesis agrees with an independent composite-rule reference") {
    Grid2D g = Grid2D::square(64, -2.0, 2.0);
    ScalarGridField B = ring_laplacian(g, {0.130, 0.72, 1.00}, 0.45);
    VectorGridField A = synthesize_compact_potential(B, {{0, 0}, 1.1}, 16);
    VectorGridField R = reference_potential(B, 16);
    CHECK(max_diff(A, R) / max_mag(A) < 1e-6);
}

TEST_CASE("quadrature is converged for a two-bump dipole") {
    // mirror-placed opposite bumps: the sampled flux cancels exactly by
    // symmetry of the node set, no sponging needed
    Grid2D g = Grid2D::square(64, -2.0, 2.0);
    auto bump = [](double s) { return s >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - s)); };
    ScalarGridField B = sample_scalar(g, [&](const Vec2& x) {
        double rp = std::hypot(x.x + 0.5, x.y) / 0.5, rm = std::hypot(x.x - 0.5, x.y) / 0.5;
        return bump(rp * rp) - bump(rm * rm);
    });
    double s0 = 0;
    for (double v : B.data) s0 += v;
    REQUIRE(std::abs(s0) < 1e-14);
    VectorGridField A24 = synthesize_compact_potential(B, {{0, 0}, 1.1}, 24);
    VectorGridField A64 = synthesize_compact_potential(B, {{0, 0}, 1.1}, 64);
    CHECK(max_diff(A24, A64) / max_mag(A24) < 1e-6);
}

TEST_CASE("two quadrature depths differ by a discrete gradient") {
    Grid2D g = Grid2D::square(64, -2.0, 2.0);
    ScalarGridField B = ring_laplacian(g, {0.130, 0.72, 1.00}, 0.45);
    VectorGridField A16 = synthesize_compact_potential(B, {{0, 0}, 1.1}, 16);
    VectorGridField A48 = synthesize_compact_potential(B, {{0, 0}, 1.1}, 48);
    VectorGridField D(g);
    for (std::size_t i = 0; i < D.a1.data.size(); ++i) {
        D.a1.data[i] = A16.a1.data[i] - A48.a1.data[i];
        D.a2.data[i] = A16.a2.data[i] - A48.a2.data[i];
    }
    CHECK(max_abs(curl_2d(D)) / max_abs(B) < 1e-8);

    // and adding an explicit discrete gradient never moves the curl
    ScalarGridField psi = sample_scalar(
        g, [](const Vec2& x) { return std::sin(1.3 * x.x) * std::cos(0.7 * x.y); });
    VectorGridField grad = discrete_gradient(psi);
    VectorGridField shifted(g);
    for (std::size_t i = 0; i < shifted.a1.data.size(); ++i) {
        shifted.a1.data[i] = A16.a1.data[i] + grad.a1.data[i];
        shifted.a2.data[i] = A16.a2.data[i] + grad.a2.data[i];
    }
    ScalarGridField c0 = curl_2d(A16), c1 = curl_2d(shifted);
    double d = 0;
    for (std::size_t i = 0; i < c0.data.size(); ++i)
        d = std::max(d, std::abs(c1.data[i] - c0.data[i]));
    CHECK(d < 1e-10);
}

TEST_CASE("synthesis rejects fields with net flux, pointing at the splitter") {
    Grid2D g = Grid2D::square(32, -1.0, 1.0);
    ScalarGridField B = mollifier_bump(g, {0, 0}, 0.4);
    try {
        synthesize_compact_potential(B, {{0, 0}, 0.5});
        FAIL("expected a configuration error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("split_flux_potential") != std::string::npos);
    }
}

TEST_CASE("synthesis rejects fields escaping the declared disc") {
    Grid2D g = Grid2D::square(64, -2.0, 2.0);
    ScalarGridField B = ring_laplacian(g, {0.130, 0.72, 1.00}, 0.45);
    CHECK_THROWS_AS(synthesize_compact_potential(B, {{0, 0}, 0.5}, 16), config_error);
}

TEST_CASE("synthesis guards its inputs") {
    Grid2D g = Grid2D::square(32, -1.0, 1.0);
    ScalarGridField B(g);
    B.at(10, 12) = std::nan("");
    CHECK_THROWS_AS(synthesize_compact_potential(B, {{0, 0}, 0.8}), config_error);
    CHECK_THROWS_AS(synthesize_compact_potential(ScalarGridField(g), {{0, 0}, 0.8}, 0),
                    config_error);
    // disc sticking out of the grid
    CHECK_THROWS_AS(synthesize_compact_potential(ScalarGridField(g), {{0.8, 0}, 0.5}),
                    config_error);
}

TEST_CASE("loop flux guards its loop") {
    Grid2D g = Grid2D::square(32, -1.0, 1.0);
    VectorGridField A(g);
    CHECK_THROWS_AS(loop_flux(A, {0, 0}, 0.0), config_error);
    CHECK_THROWS_AS(loop_flux(A, {0, 0}, -1.0), config_error);
    // loop swallowing boundary nodes: the Stokes sum is no longer a circulation
    CHECK_THROWS_AS(loop_flux(A, {0, 0}, 1.5), config_error);
}

TEST_CASE("flux split: unit-circle circulation of tail plus core is the total flux") {
    // single positive bump of total flux 2 pi; the tail carries exactly the
    // flux, the core repairs the shape without moving any circulation
    Grid2D g = Grid2D::square(64, -1.25, 1.25);
    RingField w{0.109, 0.5325, 0.75};
    ScalarGridField B = sample_scalar(g, [&](const Vec2& x) { return w.chi(x.norm()); });
    double f = total_flux(B);
    REQUIRE(f > 0.0);
    for (double& v : B.data) v *= 2.0 * M_PI / f;

    FluxSplit fs = split_flux_potential(B, {{0, 0}, 0.85});
    CHECK(fs.alpha0 == doctest::Approx(2.0 * M_PI).epsilon(1e-12));

    double tail_loop = flux_line_integral(fs.tail, Path::circle({0, 0}, 1.0));
    double core_loop = loop_flux(fs.core, {0, 0}, 1.0);
    CHECK(std::abs(tail_loop + core_loop - 2.0 * M_PI) < 1e-6);

    // loop-shape independence: a wider circle sees the same circulation
    double tail_loop2 = flux_line_integral(fs.tail, Path::circle({0, 0}, 1.1));
    double core_loop2 = loop_flux(fs.core, {0, 0}, 1.1);
    CHECK(std::abs(tail_loop2 + core_loop2 - 2.0 * M_PI) < 1e-6);
}

TEST_CASE("flux split of a pure mollifier column leaves an exactly zero core") {
    Grid2D g = Grid2D::square(64, -1.25, 1.25);
    ScalarGridField B = mollifier_bump(g, {0, 0}, 0.45);
    for (double& v : B.data) v *= 2.5;
    FluxSplit fs = split_flux_potential(B, {{0, 0}, 0.85}, 0.45);
    CHECK(fs.alpha0 == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(max_mag(fs.core) == 0.0);
    CHECK(flux_line_integral(fs.tail, Path::circle({0, 0}, 0.9)) ==
          doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("flux split degenerates cleanly for zero-flux input") {
    Grid2D g = Grid2D::square(64, -2.0, 2.0);
    ScalarGridField B = ring_laplacian(g, {0.130, 0.72, 1.00}, 0.45);
    FluxSplit fs = split_flux_potential(B, {{0, 0}, 1.1});
    CHECK(fs.alpha0 == 0.0);
    Vec2 t = fs.tail.eval({0.7, 0.1});
    CHECK(t.x == 0.0);
    CHECK(t.y == 0.0);
    // the core alone must reproduce the field
    ScalarGridField c = curl_2d(fs.core);
    double e = 0;
    for (std::size_t i = 0; i < c.data.size(); ++i)
        e = std::max(e, std::abs(c.data[i] - B.data[i]));
    CHECK(e / max_abs(B) < 1e-6);
}

TEST_CASE("flux split guards its geometry") {
    Grid2D g = Grid2D::square(64, -1.25, 1.25);
    ScalarGridField B = mollifier_bump(g, {0, 0}, 0.3);
    // origin outside the declared disc
    CHECK_THROWS_AS(split_flux_potential(B, {{0.9, 0}, 0.3}), config_error);
    // mollifier support exceeding the disc
    CHECK_THROWS_AS(split_flux_potential(B, {{0, 0}, 0.2}, 0.5), config_error);
}
