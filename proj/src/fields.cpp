#include "abx/fields.hpp"

#include <cmath>

#include "abx/errors.hpp"
#include "abx/quadrature.hpp"

namespace abx {

namespace {

void check_path_clears_singularities(const VectorPotential& A, const Path& path) {
    for (const Vec2& s : A.singularities) {
        for (std::size_t i = 0; i + 1 < path.pts.size(); ++i) {
            if (point_segment_distance(s, path.pts[i], path.pts[i + 1]) <= 1e-9)
                throw config_error("line quadrature: path passes through a singular point");
        }
    }
}

} // namespace

double flux_line_integral(const VectorPotential& A, const Path& path, const Constants& cst,
                          int order, int panels_per_segment) {
    if (path.pts.size() < 2) throw config_error("flux: path needs at least one segment");
    check_path_clears_singularities(A, path);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < path.pts.size(); ++i) {
        Vec2 a = path.pts[i], d = path.pts[i + 1] - path.pts[i];
        s += gl_integrate_composite([&](double t) { return A(a + d * t).dot(d); }, 0.0, 1.0,
                                    order, panels_per_segment);
    }
    return cst.flux_coupling() * s;
}

double spacetime_flux(const VectorPotential& A, const ScalarPotential& V,
                      const SpacetimePath& loop, const Constants& cst, int order,
                      int panels_per_segment) {
    if (loop.pts.size() < 2) throw config_error("spacetime flux: loop needs at least one segment");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < loop.pts.size(); ++i) {
        Vec2 a = loop.pts[i].x, dx = loop.pts[i + 1].x - loop.pts[i].x;
        double t0 = loop.pts[i].t, dt = loop.pts[i + 1].t - loop.pts[i].t;
        s += gl_integrate_composite(
            [&](double t) {
                Vec2 x = a + dx * t;
                return A(x).dot(dx) / cst.light_speed - V(x, t0 + dt * t) * dt;
            },
            0.0, 1.0, order, panels_per_segment);
    }
    return cst.electric_coupling() * s;
}

std::pair<VectorPotential, ScalarPotential> gauge_transform(const VectorPotential& A,
                                                            const ScalarPotential& V,
                                                            const GaugeFunction& g,
                                                            const Constants& cst) {
    double scale_a = cst.hbar * cst.light_speed / cst.charge;
    double scale_v = cst.hbar / cst.charge;
    VectorPotential A2;
    A2.eval = [A, g, scale_a](const Vec2& x) { return A(x) + scale_a * g.total_gradient(x); };
    A2.singularities = A.singularities;
    if (g.winding != 0) A2.singularities.push_back(g.winding_center);
    // a pure gauge term never extends the support obstruction, but the winding
    // tail is not compact; keep the hint only for winding-free gauges
    if (g.winding == 0) {
        A2.support_center = A.support_center;
        A2.support_radius = A.support_radius;
    }
    ScalarPotential V2;
    V2.eval = [V, g, scale_v](const Vec2& x, double t) {
        return V(x, t) - scale_v * g.dphi_dt(x, t);
    };
    return {std::move(A2), std::move(V2)};
}

GaugeEquivalenceResult check_gauge_equivalence(const VectorPotential& A, const ScalarPotential& V,
                                               const VectorPotential& A2, const ScalarPotential& V2,
                                               const std::vector<Path>& basis_loops,
                                               const Constants& cst, double tol) {
    GaugeEquivalenceResult res;
    res.equivalent = true;
    for (const Path& loop : basis_loops) {
        if (!loop.closed(1e-9)) throw config_error("gauge equivalence: basis loop is not closed");
        double d = flux_line_integral(A2, loop, cst) - flux_line_integral(A, loop, cst);
        double n = std::round(d / (2.0 * M_PI));
        double r = std::abs(d - 2.0 * M_PI * n);
        res.offsets.push_back(int(n));
        res.residuals.push_back(r);
        if (r > tol) res.equivalent = false;
        // static electric parts must agree pointwise; sample along the loop
        for (std::size_t i = 0; i + 1 < loop.pts.size(); ++i) {
            Vec2 mid = (loop.pts[i] + loop.pts[i + 1]) * 0.5;
            if (std::abs(V(mid, 0.0) - V2(mid, 0.0)) > tol) {
                res.equivalent = false;
                break;
            }
        }
    }
    return res;
}

VectorGridField probability_current(const ComplexGridField& u, const VectorPotential& A,
                                    const Constants& cst) {
    const Grid2D& g = u.grid;
    if (g.nx < 2 || g.ny < 2) throw config_error("probability_current: grid too small");
    VectorGridField S(g);
    double q = cst.charge / cst.light_speed;
    using cd = std::complex<double>;
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            cd uc = u.at(ix, iy);
            // centered differences inside, one-sided on the edge rows
            cd dux, duy;
            if (ix == 0)
                dux = (u.at(1, iy) - u.at(0, iy)) / g.spacing.x;
            else if (ix == g.nx - 1)
                dux = (u.at(g.nx - 1, iy) - u.at(g.nx - 2, iy)) / g.spacing.x;
            else
                dux = (u.at(ix + 1, iy) - u.at(ix - 1, iy)) / (2.0 * g.spacing.x);
            if (iy == 0)
                duy = (u.at(ix, 1) - u.at(ix, 0)) / g.spacing.y;
            else if (iy == g.ny - 1)
                duy = (u.at(ix, g.ny - 1) - u.at(ix, g.ny - 2)) / g.spacing.y;
            else
                duy = (u.at(ix, iy + 1) - u.at(ix, iy - 1)) / (2.0 * g.spacing.y);
            Vec2 a = A(g.node(ix, iy));
            cd ix_term = (cst.hbar * dux - cd(0.0, 1.0) * q * a.x * uc) * std::conj(uc);
            cd iy_term = (cst.hbar * duy - cd(0.0, 1.0) * q * a.y * uc) * std::conj(uc);
            S.a1.at(ix, iy) = ix_term.imag();
            S.a2.at(ix, iy) = iy_term.imag();
        }
    }
    return S;
}

BoundaryTriple boundary_triple(const ComplexGridField& u, const VectorPotential& A,
                               const Path& segment, const Constants& cst) {
    const Grid2D& g = u.grid;
    Vec2 lo = g.origin, hi = g.upper();
    const double tol = 1e-9;

    VectorGridField S = probability_current(u, A, cst);
    BoundaryTriple out;

    for (std::size_t s = 0; s + 1 < segment.pts.size(); ++s) {
        Vec2 a = segment.pts[s], b = segment.pts[s + 1];
        // the segment must lie along one grid edge
        int side = -1;  // 0:left 1:right 2:bottom 3:top
        if (std::abs(a.x - lo.x) < tol && std::abs(b.x - lo.x) < tol) side = 0;
        else if (std::abs(a.x - hi.x) < tol && std::abs(b.x - hi.x) < tol) side = 1;
        else if (std::abs(a.y - lo.y) < tol && std::abs(b.y - lo.y) < tol) side = 2;
        else if (std::abs(a.y - hi.y) < tol && std::abs(b.y - hi.y) < tol) side = 3;
        if (side < 0) throw config_error("boundary_triple: segment is not on the grid edge");

        auto density = [&](int ix, int iy) { return std::norm(u.at(ix, iy)); };

        // one-sided outward slope: (edge value - first interior value) / h
        if (side <= 1) {
            int ix = (side == 0) ? 0 : g.nx - 1;
            int in = (side == 0) ? 1 : g.nx - 2;
            int iy0 = int(std::ceil((std::min(a.y, b.y) - lo.y) / g.spacing.y - tol));
            int iy1 = int(std::floor((std::max(a.y, b.y) - lo.y) / g.spacing.y + tol));
            for (int iy = std::max(0, iy0); iy <= std::min(g.ny - 1, iy1); ++iy) {
                out.points.push_back(g.node(ix, iy));
                out.f1.push_back(density(ix, iy));
                out.f2.push_back((density(ix, iy) - density(in, iy)) / g.spacing.x);
                out.f3.push_back({S.a1.at(ix, iy), S.a2.at(ix, iy)});
            }
        } else {
            int iy = (side == 2) ? 0 : g.ny - 1;
            int in = (side == 2) ? 1 : g.ny - 2;
            int ix0 = int(std::ceil((std::min(a.x, b.x) - lo.x) / g.spacing.x - tol));
            int ix1 = int(std::floor((std::max(a.x, b.x) - lo.x) / g.spacing.x + tol));
            for (int ix = std::max(0, ix0); ix <= std::min(g.nx - 1, ix1); ++ix) {
                out.points.push_back(g.node(ix, iy));
                out.f1.push_back(density(ix, iy));
                out.f2.push_back((density(ix, iy) - density(ix, in)) / g.spacing.y);
                out.f3.push_back({S.a1.at(ix, iy), S.a2.at(ix, iy)});
            }
        }
    }
    return out;
}

Eigen::MatrixXcd matrix_exp(const Eigen::MatrixXcd& M) {
    // scale so the Taylor series converges fast, then square back
    double nrm = M.cwiseAbs().sum();
    int s = 0;
    double scaled = nrm;
    while (scaled > 0.25) {
        scaled *= 0.5;
        ++s;
    }
    Eigen::MatrixXcd X = M / std::pow(2.0, s);
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(M.rows(), M.cols());
    Eigen::MatrixXcd sum = term;
    for (int k = 1; k < 40; ++k) {
        term = term * X / double(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-16) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

Eigen::MatrixXcd wilson_line(const MatrixPotential& A, const Path& path, int steps_per_segment) {
    if (A.dim < 1 || !A.a1 || !A.a2) throw config_error("wilson_line: malformed potential");
    if (path.pts.size() < 2) throw config_error("wilson_line: path needs at least one segment");
    if (steps_per_segment < 1) throw config_error("wilson_line: steps_per_segment must be >= 1");

    const std::complex<double> I(0.0, 1.0);
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Identity(A.dim, A.dim);
    bool hermiticity_checked = false;

    for (std::size_t seg = 0; seg + 1 < path.pts.size(); ++seg) {
        Vec2 a = path.pts[seg];
        Vec2 d = (path.pts[seg + 1] - path.pts[seg]) / double(steps_per_segment);
        for (int k = 0; k < steps_per_segment; ++k) {
            Vec2 mid = a + d * (k + 0.5);
            Eigen::MatrixXcd a1 = A.a1(mid), a2 = A.a2(mid);
            if (a1.rows() != A.dim || a1.cols() != A.dim || a2.rows() != A.dim ||
                a2.cols() != A.dim)
                throw config_error("wilson_line: component dimension mismatch");
            if (!hermiticity_checked) {
                if ((a1 - a1.adjoint()).cwiseAbs().maxCoeff() > 1e-12 ||
                    (a2 - a2.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
                    throw config_error("wilson_line: potential is not Hermitian");
                hermiticity_checked = true;
            }
            // later factors multiply on the left
            W = matrix_exp(I * (a1 * d.x + a2 * d.y)) * W;
        }
    }
    return W;
}

} // namespace abx
