#include "abx/gravity.hpp"

#include <cmath>

#include "abx/errors.hpp"
#include "abx/quadrature.hpp"

namespace abx {

namespace {

void check_metric_set(const StationaryMetric& m) {
    if (!m.g00 || !m.g0j || !m.gjk)
        throw config_error("stationary metric component functions must all be set");
}

// the integrand 1-form components w = g0j/g00, guarded against signature loss
Vec2 flux_form(const StationaryMetric& m, const Vec2& p) {
    double c = m.g00(p);
    if (!(c > 0.0))
        throw config_error("stationary metric loses its signature: g00 <= 0 sampled");
    return m.g0j(p) * (1.0 / c);
}

}  // namespace

void validate_lorentz_signature(const StationaryMetric& metric, const std::vector<Vec2>& probes) {
    check_metric_set(metric);
    for (const Vec2& p : probes) {
        if (!(metric.g00(p) > 0.0))
            throw config_error("stationary metric signature: g00 must be positive");
        Sym2 g = metric.gjk(p);
        if (!(g.xx < 0.0) || !(g.xx * g.yy - g.xy * g.xy > 0.0))
            throw config_error(
                "stationary metric signature: spatial block must be negative definite");
    }
}

double gravitational_flux(const StationaryMetric& metric, const Path& loop, int quadrature_order,
                          int panels_per_segment) {
    check_metric_set(metric);
    if (loop.pts.size() < 2) throw config_error("gravitational flux: loop needs segments");
    if (!loop.closed(1e-9)) throw config_error("gravitational flux: loop must be closed");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < loop.pts.size(); ++i) {
        Vec2 a = loop.pts[i], d = loop.pts[i + 1] - loop.pts[i];
        s += gl_integrate_composite([&](double t) { return flux_form(metric, a + d * t).dot(d); },
                                    0.0, 1.0, quadrature_order, panels_per_segment);
    }
    return s;
}

StationaryMetric time_shift_isometry(const StationaryMetric& metric,
                                     const std::function<Vec2(const Vec2&)>& grad_a) {
    check_metric_set(metric);
    if (!grad_a) throw config_error("time shift: gradient function must be set");
    StationaryMetric out;
    out.g00 = metric.g00;
    out.g0j = [g00 = metric.g00, g0j = metric.g0j, grad_a](const Vec2& p) {
        return g0j(p) - grad_a(p) * g00(p);
    };
    out.gjk = [g00 = metric.g00, g0j = metric.g0j, gjk = metric.gjk, grad_a](const Vec2& p) {
        Sym2 g = gjk(p);
        Vec2 b = g0j(p), da = grad_a(p);
        double c = g00(p);
        return Sym2{g.xx - 2.0 * b.x * da.x + c * da.x * da.x,
                    g.xy - b.x * da.y - b.y * da.x + c * da.x * da.y,
                    g.yy - 2.0 * b.y * da.y + c * da.y * da.y};
    };
    return out;
}

StaticObstruction static_obstruction(const StationaryMetric& metric,
                                     const std::vector<Path>& basis_loops,
                                     const std::vector<Vec2>& probe_grid, double tol) {
    check_metric_set(metric);
    if (!(tol > 0.0) || !std::isfinite(tol))
        throw config_error("static obstruction: tolerance must be positive");

    const double h = 1e-4;
    StaticObstruction result;
    result.locally_static = true;
    for (const Vec2& p : probe_grid) {
        double curl = (flux_form(metric, {p.x + h, p.y}).y - flux_form(metric, {p.x - h, p.y}).y -
                       flux_form(metric, {p.x, p.y + h}).x + flux_form(metric, {p.x, p.y - h}).x) /
                      (2.0 * h);
        if (std::abs(curl) >= tol) result.locally_static = false;
    }
    result.globally_static = result.locally_static;
    for (const Path& loop : basis_loops) {
        result.fluxes.push_back(gravitational_flux(metric, loop));
        if (std::abs(result.fluxes.back()) >= tol) result.globally_static = false;
    }
    return result;
}

}  // namespace abx
