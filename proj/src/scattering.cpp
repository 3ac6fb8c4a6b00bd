#include "abx/scattering.hpp"

#include <cmath>

#include "abx/errors.hpp"

namespace abx {

namespace {

void check_angle(double theta) {
    if (!std::isfinite(theta) || !(std::abs(theta) > 1e-9) || !(std::abs(theta) <= M_PI))
        throw config_error("scattering angle must satisfy 1e-9 < |theta| <= pi");
}

} // namespace

std::complex<double> ab_amplitude_smooth(double theta, double alpha) {
    check_angle(theta);
    if (!std::isfinite(alpha)) throw config_error("flux must be finite");
    double m = std::ceil(alpha / (2.0 * M_PI));
    std::complex<double> pref(0.0, std::sin(0.5 * alpha) / M_PI);
    return pref * std::polar(1.0, m * theta) / (1.0 - std::polar(1.0, theta));
}

double ab_cross_section_density(double theta, double alpha) {
    check_angle(theta);
    if (!std::isfinite(alpha)) throw config_error("flux must be finite");
    double s = std::sin(0.5 * alpha);
    double st = std::sin(0.5 * theta);
    return s * s / (4.0 * M_PI * M_PI * st * st);
}

double bessel_j_real(double nu, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw config_error("Bessel argument must be positive");
    if (nu >= 0.0) return std::cyl_bessel_j(nu, x);
    double mu = -nu;
    if (mu == std::floor(mu)) {
        double j = std::cyl_bessel_j(mu, x);
        return std::fmod(mu, 2.0) == 0.0 ? j : -j;
    }
    return std::cyl_bessel_j(mu, x) * std::cos(mu * M_PI) -
           std::cyl_neumann(mu, x) * std::sin(mu * M_PI);
}

RadialMode ab_radial_mode(int n, double alpha, double k, double r) {
    if (!(k > 0.0)) throw config_error("wavenumber must be positive");
    if (!(r > 0.0)) throw config_error("radius must be positive");
    if (!std::isfinite(alpha)) throw config_error("flux must be finite");
    double nu = double(n) + alpha;
    if (std::abs(nu) > 200.0) throw config_error("radial mode order magnitude exceeds 200");
    double x = k * r;
    return {bessel_j_real(nu, x), bessel_j_real(-nu, x)};
}

} // namespace abx
