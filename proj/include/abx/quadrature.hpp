#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

namespace abx {

struct QuadRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes by Newton iteration from the Chebyshev initial guess.
// Orders used here are small (<= 64); rules are cached per order.
inline const QuadRule& gauss_legendre(int n) {
    static std::map<int, QuadRule> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // recurrence for P_n(x) and derivative
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    auto [pos, ok] = cache.emplace(n, std::move(r));
    (void)ok;
    return pos->second;
}

// \int_a^b f(t) dt with an n-point rule
template <class F>
double gl_integrate(F&& f, double a, double b, int n) {
    const QuadRule& r = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
        s += r.weights[i] * f(mid + half * r.nodes[i]);
    return s * half;
}

// composite rule: `panels` equal panels, n points each
template <class F>
double gl_integrate_composite(F&& f, double a, double b, int n, int panels) {
    double s = 0.0;
    double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) s += gl_integrate(f, a + p * w, a + (p + 1) * w, n);
    return s;
}

} // namespace abx
