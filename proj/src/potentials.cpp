#include "abx/potentials.hpp"

#include <cmath>

#include "abx/errors.hpp"
#include "abx/quadrature.hpp"

namespace abx {

VectorPotential make_zero_potential() {
    VectorPotential p;
    p.eval = [](const Vec2&) { return Vec2{0.0, 0.0}; };
    p.support_radius = 0.0;
    return p;
}

ScalarPotential make_zero_scalar() {
    return {[](const Vec2&, double) { return 0.0; }};
}

VectorPotential make_ab_potential(double alpha0, const Vec2& center) {
    VectorPotential p;
    double pref = alpha0 / (2.0 * M_PI);
    p.eval = [pref, center](const Vec2& x) {
        Vec2 d = x - center;
        double r2 = d.norm2();
        return Vec2{-pref * d.y / r2, pref * d.x / r2};
    };
    p.singularities = {center};
    return p;
}

VectorPotential make_uniform_field(double b0, const Vec2& center) {
    VectorPotential p;
    p.eval = [b0, center](const Vec2& x) {
        Vec2 d = x - center;
        return Vec2{-0.5 * b0 * d.y, 0.5 * b0 * d.x};
    };
    return p;
}

VectorPotential make_constant_potential(const Vec2& a0) {
    VectorPotential p;
    p.eval = [a0](const Vec2&) { return a0; };
    return p;
}

namespace {

// unnormalized radial bump profile on [0, 1)
inline double bump_w(double s) {
    double q = 1.0 - s * s;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

// one-sided C-infinity ramp ingredient: 0 for t <= 0, e^{-1/t} beyond
inline double bump_w2(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// Cumulative flux table for the solenoid: F(r) = \int_0^r s w(s/rho) ds,
// tabulated once per instance so the azimuthal profile is cheap to sample.
struct SolenoidTable {
    double rho;
    double total;
    std::vector<double> cum;  // cum[i] = F(i * rho / (N-1))
    static constexpr int N = 4097;

    explicit SolenoidTable(double core_radius) : rho(core_radius), cum(N, 0.0) {
        double dr = rho / (N - 1);
        for (int i = 1; i < N; ++i) {
            double a = (i - 1) * dr, b = i * dr;
            cum[i] = cum[i - 1] +
                     gl_integrate([this](double s) { return s * bump_w(s / rho); }, a, b, 8);
        }
        total = cum[N - 1];
    }

    // fraction of the total flux inside radius r, in [0, 1]
    double enclosed_fraction(double r) const {
        if (r <= 0.0) return 0.0;
        if (r >= rho) return 1.0;
        double f = r / rho * (N - 1);
        int i = int(f);
        if (i >= N - 1) return 1.0;
        double t = f - i;
        return (cum[i] * (1.0 - t) + cum[i + 1] * t) / total;
    }
};

} // namespace

VectorPotential make_solenoid(double alpha, const Vec2& center, double core_radius) {
    if (core_radius <= 0.0) throw config_error("solenoid: core_radius must be positive");
    auto tab = std::make_shared<SolenoidTable>(core_radius);
    VectorPotential p;
    double pref = alpha / (2.0 * M_PI);
    p.eval = [pref, center, tab](const Vec2& x) {
        Vec2 d = x - center;
        double r2 = d.norm2();
        if (r2 == 0.0) return Vec2{0.0, 0.0};
        double m = tab->enclosed_fraction(std::sqrt(r2));
        return Vec2{-pref * m * d.y / r2, pref * m * d.x / r2};
    };
    return p;
}

double solenoid_flux_density(double alpha, double core_radius, double r) {
    // curl of the azimuthal profile: alpha * w(r/rho) * r-independent norm
    static thread_local double cached_rho = -1.0;
    static thread_local double cached_total = 0.0;
    if (cached_rho != core_radius) {
        SolenoidTable tab(core_radius);
        cached_rho = core_radius;
        cached_total = tab.total;
    }
    return alpha * bump_w(r / core_radius) / (2.0 * M_PI * cached_total);
}

VectorPotential make_flux_pair(double alpha, const Vec2& c_plus, const Vec2& c_minus,
                               double core_radius, double fade_start, double fade_end) {
    if (core_radius <= 0.0) throw config_error("flux pair: core_radius must be positive");
    Vec2 mid = (c_plus + c_minus) * 0.5;
    double half_sep = 0.5 * dist(c_plus, c_minus);
    if (fade_start < half_sep + core_radius)
        throw config_error("flux pair: fade_start must cover both cores");
    if (!(fade_end > fade_start)) throw config_error("flux pair: fade_end must exceed fade_start");

    auto tab = std::make_shared<SolenoidTable>(core_radius);
    double pref = alpha / (2.0 * M_PI);
    double w0 = fade_start, w1 = fade_end;
    VectorPotential p;
    p.support_center = mid;
    p.support_radius = fade_end;
    p.eval = [=](const Vec2& x) {
        Vec2 dm = x - mid;
        double rho = dm.norm();
        if (rho >= w1) return Vec2{0.0, 0.0};
        Vec2 dp = x - c_plus, dn = x - c_minus;
        double rp2 = dp.norm2(), rn2 = dn.norm2();
        // angle gradients about the two cores; cores are strictly inside the
        // fade_start disc so the 1/r^2 factors are tamed by m(r)/r -> 0
        Vec2 gp = rp2 > 0.0 ? Vec2{-dp.y / rp2, dp.x / rp2} : Vec2{0.0, 0.0};
        Vec2 gn = rn2 > 0.0 ? Vec2{-dn.y / rn2, dn.x / rn2} : Vec2{0.0, 0.0};
        double mp = tab->enclosed_fraction(std::sqrt(rp2));
        double mn = tab->enclosed_fraction(std::sqrt(rn2));
        Vec2 a = gp * mp - gn * mn;
        if (rho > w0) {
            // subtract grad(G psi); psi = arg((z-z_plus) conj(z-z_minus)) is
            // single valued here because its cut is the segment between the
            // cores, well inside the fade_start disc
            double t = (rho - w0) / (w1 - w0);
            double bt = bump_w2(t), bu = bump_w2(1.0 - t);
            double G = bt / (bt + bu);
            double Gp = 0.0;
            if (t > 0.0 && t < 1.0) {
                double num = bt * bu * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)));
                Gp = num / ((bt + bu) * (bt + bu)) / (w1 - w0);
            }
            double wr = dp.x * dn.x + dp.y * dn.y;
            double wi = dp.y * dn.x - dp.x * dn.y;
            double psi = std::atan2(wi, wr);
            Vec2 grad_g = dm * (Gp / rho);
            a -= (gp - gn) * G + grad_g * psi;
        }
        return a * pref;
    };
    return p;
}

VectorPotential make_grid_potential(std::shared_ptr<const VectorGridField> f) {
    if (!f || f->a1.grid.size() == 0) throw config_error("grid potential: empty field");
    VectorPotential p;
    p.eval = [f](const Vec2& x) { return f->interp(x); };
    // conservative support hint: the sampled rectangle's circumscribed disc
    Vec2 lo = f->grid().origin, hi = f->grid().upper();
    p.support_center = (lo + hi) * 0.5;
    p.support_radius = 0.5 * dist(lo, hi);
    return p;
}

VectorPotential make_sum(std::vector<VectorPotential> terms) {
    VectorPotential p;
    auto shared = std::make_shared<std::vector<VectorPotential>>(std::move(terms));
    p.eval = [shared](const Vec2& x) {
        Vec2 s{0.0, 0.0};
        for (const auto& t : *shared) s += t(x);
        return s;
    };
    bool all_compact = true;
    Vec2 c{0.0, 0.0};
    for (const auto& t : *shared) {
        p.singularities.insert(p.singularities.end(), t.singularities.begin(),
                               t.singularities.end());
        if (!t.compact()) all_compact = false;
    }
    if (all_compact && !shared->empty()) {
        for (const auto& t : *shared) c += t.support_center;
        c = c / double(shared->size());
        double r = 0.0;
        for (const auto& t : *shared)
            r = std::max(r, dist(c, t.support_center) + t.support_radius);
        p.support_center = c;
        p.support_radius = r;
    }
    return p;
}

ScalarPotential make_gated_scalar(std::function<double(double)> profile,
                                  std::function<bool(const Vec2&)> region) {
    ScalarPotential v;
    v.eval = [profile = std::move(profile), region = std::move(region)](const Vec2& x, double t) {
        return region(x) ? profile(t) : 0.0;
    };
    return v;
}

std::complex<double> GaugeFunction::factor(const Vec2& x, double t) const {
    double ph = phi(x, t);
    if (winding != 0) {
        Vec2 d = x - winding_center;
        ph += winding * std::atan2(d.y, d.x);
    }
    return std::polar(1.0, ph);
}

Vec2 GaugeFunction::total_gradient(const Vec2& x, double t) const {
    Vec2 g = grad_phi(x, t);
    if (winding != 0) {
        Vec2 d = x - winding_center;
        double r2 = d.norm2();
        g += Vec2{-winding * d.y / r2, winding * d.x / r2};
    }
    return g;
}

} // namespace abx
