#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "abx/errors.hpp"
#include "abx/gravity.hpp"
#include "helpers.hpp"

using namespace abx;

namespace {

// vortex-shaped off-diagonal terms: curl-free away from the origin but with
// loop integral a0 around it, the stationary-metric twin of an ideal flux line
StationaryMetric vortex_metric(double a0) {
    StationaryMetric m;
    m.g0j = [a0](const Vec2& p) {
        double r2 = p.x * p.x + p.y * p.y;
        return Vec2{-p.y, p.x} * (a0 / (2.0 * M_PI * r2));
    };
    return m;
}

Path unit_circle() { return Path::circle({0.0, 0.0}, 1.0, 128); }

Path big_square() {
    Path sq;
    sq.pts = {{-1.5, -1.5}, {1.5, -1.5}, {1.5, 1.5}, {-1.5, 1.5}, {-1.5, -1.5}};
    return sq;
}

std::vector<Vec2> ring_probes() {
    std::vector<Vec2> probes;
    for (int i = 0; i < 16; ++i) {
        double t = 2.0 * M_PI * i / 16;
        probes.push_back({0.5 * std::cos(t), 0.5 * std::sin(t)});
        probes.push_back({0.9 * std::cos(t + 0.1), 0.9 * std::sin(t + 0.1)});
    }
    return probes;
}

}  // namespace

TEST_CASE("metrics without time-space coupling carry zero flux on every loop") {
    StationaryMetric flat;
    CHECK(gravitational_flux(flat, unit_circle()) == 0.0);
    CHECK(gravitational_flux(flat, big_square()) == 0.0);

    StationaryMetric curved;
    curved.g00 = [](const Vec2& p) { return 2.0 + std::sin(p.x) * std::cos(p.y); };
    curved.gjk = [](const Vec2& p) { return Sym2{-1.0 - p.x * p.x, 0.1, -2.0}; };
    CHECK(gravitational_flux(curved, unit_circle()) == 0.0);

    auto ob = static_obstruction(flat, {unit_circle(), big_square()}, ring_probes(), 1e-6);
    CHECK(ob.locally_static);
    CHECK(ob.globally_static);
    REQUIRE(ob.fluxes.size() == 2);
    CHECK(ob.fluxes[0] == 0.0);
    CHECK(ob.fluxes[1] == 0.0);
}

TEST_CASE("vortex off-diagonal terms integrate to their strength on any loop around") {
    // closed-form oracle: the 1-form is d(angle) * a0 / 2 pi, so any loop
    // winding once picks up exactly a0 regardless of shape
    auto m = vortex_metric(2.4);
    CHECK(std::abs(gravitational_flux(m, unit_circle()) - 2.4) < 1e-12);
    CHECK(std::abs(gravitational_flux(m, Path::circle({0.2, -0.1}, 0.6, 96)) - 2.4) < 1e-12);
    CHECK(std::abs(gravitational_flux(m, big_square()) - 2.4) < 1e-12);
}

TEST_CASE("gradient off-diagonal terms carry zero flux: closed loops telescope") {
    StationaryMetric m;
    m.g0j = [](const Vec2& p) { return Vec2{2.0 * p.x * p.y, p.x * p.x + std::cos(p.y)}; };
    CHECK(std::abs(gravitational_flux(m, unit_circle())) < 1e-12);
    CHECK(std::abs(gravitational_flux(m, big_square())) < 1e-12);
}

TEST_CASE("reversing the loop orientation flips the flux sign") {
    auto m = vortex_metric(1.7);
    Path fwd = unit_circle(), rev = fwd;
    std::reverse(rev.pts.begin(), rev.pts.end());
    CHECK(std::abs(gravitational_flux(m, fwd) + gravitational_flux(m, rev)) < 1e-12);
}

TEST_CASE("time shifts transform the components but never the loop flux") {
    StationaryMetric rich;
    rich.g00 = [](const Vec2& p) { return 1.0 + 0.3 * std::sin(p.x + p.y); };
    rich.g0j = [](const Vec2& p) {
        double r2 = p.x * p.x + p.y * p.y;
        return Vec2{-p.y, p.x} * (1.0 / (2.0 * M_PI * r2)) + Vec2{0.2, -0.1};
    };
    rich.gjk = [](const Vec2& p) { return Sym2{-1.3, 0.2 * p.x, -1.0 - p.y * p.y}; };
    auto grad_a = [](const Vec2& p) { return Vec2{p.y + 1.1 * std::cos(p.x), p.x + 0.5}; };
    auto shifted = time_shift_isometry(rich, grad_a);

    for (const Path& loop : {unit_circle(), Path::circle({0.2, -0.1}, 0.6, 96), big_square()}) {
        double before = gravitational_flux(rich, loop);
        double after = gravitational_flux(shifted, loop);
        CHECK(std::abs(before - after) < 1e-10);
    }

    // component transformation law, recomputed directly at sample points
    for (const Vec2& p : {Vec2{0.7, -0.4}, Vec2{-1.1, 0.3}, Vec2{0.2, 1.4}}) {
        double c = rich.g00(p);
        Vec2 b = rich.g0j(p), da = grad_a(p);
        Sym2 g = rich.gjk(p);
        CHECK(shifted.g00(p) == c);
        CHECK(std::abs(shifted.g0j(p).x - (b.x - c * da.x)) < 1e-15);
        CHECK(std::abs(shifted.g0j(p).y - (b.y - c * da.y)) < 1e-15);
        Sym2 gs = shifted.gjk(p);
        CHECK(std::abs(gs.xx - (g.xx - 2.0 * b.x * da.x + c * da.x * da.x)) < 1e-15);
        CHECK(std::abs(gs.xy - (g.xy - b.x * da.y - b.y * da.x + c * da.x * da.y)) < 1e-15);
        CHECK(std::abs(gs.yy - (g.yy - 2.0 * b.y * da.y + c * da.y * da.y)) < 1e-15);
    }
}

TEST_CASE("constant time shifts leave the metric alone") {
    auto m = vortex_metric(0.9);
    auto same = time_shift_isometry(m, [](const Vec2&) { return Vec2{0.0, 0.0}; });
    for (const Vec2& p : {Vec2{0.5, 0.5}, Vec2{-0.8, 0.1}}) {
        CHECK(same.g0j(p).x == m.g0j(p).x);
        CHECK(same.g0j(p).y == m.g0j(p).y);
        CHECK(same.gjk(p).xx == m.gjk(p).xx);
    }
    CHECK(std::abs(gravitational_flux(same, unit_circle()) -
                   gravitational_flux(m, unit_circle())) < 1e-14);
}

TEST_CASE("shifting a static metric creates gradient coupling but no flux") {
    StationaryMetric flat;
    flat.g00 = [](const Vec2& p) { return 1.0 + 0.1 * p.x * p.x; };
    auto grad_a = [](const Vec2& p) { return Vec2{p.y, p.x}; };
    auto shifted = time_shift_isometry(flat, grad_a);
    Vec2 p{0.3, -0.6};
    CHECK(std::abs(shifted.g0j(p).x - (-flat.g00(p) * p.y)) < 1e-15);
    CHECK(std::abs(shifted.g0j(p).y - (-flat.g00(p) * p.x)) < 1e-15);
    CHECK(std::abs(gravitational_flux(shifted, unit_circle())) < 1e-12);
    CHECK(std::abs(gravitational_flux(shifted, big_square())) < 1e-12);
}

TEST_CASE("a shear coupling is caught by the local curl test") {
    StationaryMetric shear;
    shear.g0j = [](const Vec2& p) { return Vec2{0.0, p.x}; };
    // quadrature integrates the polygonal loop exactly, so the flux equals the
    // area of the inscribed 128-gon, not of the circle
    double polygon_area = 0.5 * 128 * std::sin(2.0 * M_PI / 128);
    CHECK(std::abs(gravitational_flux(shear, unit_circle()) - polygon_area) < 1e-12);

    auto ob = static_obstruction(shear, {unit_circle()}, ring_probes(), 1e-6);
    CHECK(!ob.locally_static);
    CHECK(!ob.globally_static);
}

TEST_CASE("curl-free coupling around an excluded point: locally but not globally static") {
    auto ob = static_obstruction(vortex_metric(1.0), {unit_circle()}, ring_probes(), 1e-6);
    CHECK(ob.locally_static);
    CHECK(!ob.globally_static);
    REQUIRE(ob.fluxes.size() == 1);
    CHECK(std::abs(ob.fluxes[0] - 1.0) < 1e-9);
}

TEST_CASE("obstruction verdicts are mutually consistent") {
    std::vector<StationaryMetric> metrics;
    metrics.push_back(StationaryMetric{});
    metrics.push_back(vortex_metric(1.0));
    StationaryMetric shear;
    shear.g0j = [](const Vec2& p) { return Vec2{0.0, p.x}; };
    metrics.push_back(shear);
    for (const auto& m : metrics) {
        auto ob = static_obstruction(m, {unit_circle()}, ring_probes(), 1e-6);
        if (ob.globally_static) CHECK(ob.locally_static);
        for (double f : ob.fluxes)
            if (std::abs(f) >= 1e-6) CHECK(!ob.globally_static);
    }
}

TEST_CASE("signature validation probes both metric blocks") {
    std::vector<Vec2> probes{{0.5, 0.5}, {-0.8, 0.1}};
    CHECK_NOTHROW(validate_lorentz_signature(StationaryMetric{}, probes));

    StationaryMetric wrong_time;
    wrong_time.g00 = [](const Vec2&) { return -1.0; };
    CHECK_THROWS_AS(validate_lorentz_signature(wrong_time, probes), config_error);

    StationaryMetric wrong_space;
    wrong_space.gjk = [](const Vec2&) { return Sym2{1.0, 0.0, 1.0}; };
    CHECK_THROWS_AS(validate_lorentz_signature(wrong_space, probes), config_error);

    StationaryMetric indefinite;
    indefinite.gjk = [](const Vec2&) { return Sym2{-1.0, 0.0, 1.0}; };
    CHECK_THROWS_AS(validate_lorentz_signature(indefinite, probes), config_error);

    // g00 changes sign across the loop, so sampling must fail
    StationaryMetric folding;
    folding.g00 = [](const Vec2& p) { return p.x; };
    folding.g0j = [](const Vec2&) { return Vec2{0.1, 0.0}; };
    CHECK_THROWS_AS((void)gravitational_flux(folding, unit_circle()), config_error);
    CHECK_THROWS_AS(validate_lorentz_signature(folding, {{-0.5, 0.0}}), config_error);
}

TEST_CASE("degenerate input is rejected") {
    StationaryMetric m = vortex_metric(1.0);
    Path open_arc;
    open_arc.pts = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
    CHECK_THROWS_AS((void)gravitational_flux(m, open_arc), config_error);
    Path empty;
    CHECK_THROWS_AS((void)gravitational_flux(m, empty), config_error);

    StationaryMetric unset;
    unset.g0j = nullptr;
    CHECK_THROWS_AS((void)gravitational_flux(unset, unit_circle()), config_error);
    CHECK_THROWS_AS((void)time_shift_isometry(m, nullptr), config_error);
    CHECK_THROWS_AS((void)static_obstruction(m, {}, {}, 0.0), config_error);
    CHECK_THROWS_AS((void)static_obstruction(m, {}, {}, -1.0), config_error);
}
