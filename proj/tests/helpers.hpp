#pragma once

#include <complex>
#include <functional>
#include <random>

#include "abx/grid.hpp"

namespace abx::testing {

inline ComplexGridField sample_complex(const Grid2D& g,
                                       const std::function<std::complex<double>(const Vec2&)>& f) {
    ComplexGridField u(g);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) u.at(ix, iy) = f(g.node(ix, iy));
    return u;
}

inline ScalarGridField sample_real(const Grid2D& g,
                                   const std::function<double(const Vec2&)>& f) {
    ScalarGridField u(g);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) u.at(ix, iy) = f(g.node(ix, iy));
    return u;
}

// fixed-seed generator so every run sees the same "random" instances
inline std::mt19937& rng() {
    static std::mt19937 gen(20260823u);
    return gen;
}

} // namespace abx::testing
