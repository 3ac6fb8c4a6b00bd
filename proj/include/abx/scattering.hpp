#pragma once

#include <complex>

namespace abx {

// One sample of the smooth part of the flux-line scattering amplitude.
struct AmplitudeSample {
    double theta = 0.0;  // in (-pi, pi] excluding 0
    std::complex<double> value;
};

// Smooth (principal value) part of the flux-line scattering amplitude,
// (i sin(alpha/2) / pi) e^{i ceil(alpha / 2 pi) theta} / (1 - e^{i theta}).
// The forward direction carries the delta and principal-value structure and is
// excluded rather than regularized: |theta| must lie in (1e-9, pi].
std::complex<double> ab_amplitude_smooth(double theta, double alpha);

// sin^2(alpha/2) / (4 pi^2 sin^2(theta/2)), the squared modulus of the smooth
// amplitude. The normalization is dimensionless; absolute cross sections carry
// an energy-dependent prefactor on top of this angular shape.
double ab_cross_section_density(double theta, double alpha);

// Bessel J of arbitrary real order. Negative non-integer orders use the
// connection formula J_{-nu} = J_nu cos(nu pi) - Y_nu sin(nu pi); negative
// integer orders reflect with the sign (-1)^n.
double bessel_j_real(double nu, double x);

// Radial partial-wave pair (J_{n+alpha}(k r), J_{-n-alpha}(k r)); the first is
// the solution regular at the origin when n + alpha > 0, the second the
// singular companion. Order magnitudes above 200 are rejected; accuracy is
// 1e-12 relative for k r <= 50.
struct RadialMode {
    double regular = 0.0;
    double singular = 0.0;
};
RadialMode ab_radial_mode(int n, double alpha, double k, double r);

} // namespace abx
