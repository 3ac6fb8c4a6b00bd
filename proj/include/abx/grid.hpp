#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "abx/errors.hpp"
#include "abx/geometry.hpp"

namespace abx {

// Uniform rectangular grid. Data layout is row-major with x fastest:
// value(ix, iy) = data[iy*nx + ix]. Node (0,0) sits at `origin`.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    Vec2 origin;
    Vec2 spacing;  // (hx, hy)

    std::size_t size() const { return std::size_t(nx) * std::size_t(ny); }
    std::size_t idx(int ix, int iy) const { return std::size_t(iy) * nx + ix; }
    Vec2 node(int ix, int iy) const {
        return {origin.x + ix * spacing.x, origin.y + iy * spacing.y};
    }
    Vec2 upper() const { return node(nx - 1, ny - 1); }
    double cell_area() const { return spacing.x * spacing.y; }
    bool contains(const Vec2& p, double pad = 0.0) const {
        Vec2 hi = upper();
        return p.x >= origin.x - pad && p.x <= hi.x + pad && p.y >= origin.y - pad &&
               p.y <= hi.y + pad;
    }

    static Grid2D square(int n, double lo, double hi) {
        Grid2D g;
        g.nx = g.ny = n;
        g.origin = {lo, lo};
        double h = (hi - lo) / (n - 1);
        g.spacing = {h, h};
        return g;
    }

    bool operator==(const Grid2D& o) const {
        return nx == o.nx && ny == o.ny && origin.x == o.origin.x && origin.y == o.origin.y &&
               spacing.x == o.spacing.x && spacing.y == o.spacing.y;
    }
};

template <class T>
struct GridField {
    Grid2D grid;
    std::vector<T> data;

    GridField() = default;
    explicit GridField(const Grid2D& g, T fill = T{}) : grid(g), data(g.size(), fill) {}

    T& at(int ix, int iy) { return data[grid.idx(ix, iy)]; }
    const T& at(int ix, int iy) const { return data[grid.idx(ix, iy)]; }

    // bilinear interpolation; `p` must lie inside the grid rectangle
    T interp(const Vec2& p) const {
        double fx = (p.x - grid.origin.x) / grid.spacing.x;
        double fy = (p.y - grid.origin.y) / grid.spacing.y;
        int ix = int(fx), iy = int(fy);
        if (fx < 0 || fy < 0 || ix > grid.nx - 1 || iy > grid.ny - 1)
            throw config_error("grid interpolation outside the sampled rectangle");
        if (ix >= grid.nx - 1) ix = grid.nx - 2;
        if (iy >= grid.ny - 1) iy = grid.ny - 2;
        double tx = fx - ix, ty = fy - iy;
        const T& v00 = at(ix, iy);
        const T& v10 = at(ix + 1, iy);
        const T& v01 = at(ix, iy + 1);
        const T& v11 = at(ix + 1, iy + 1);
        return v00 * ((1 - tx) * (1 - ty)) + v10 * (tx * (1 - ty)) + v01 * ((1 - tx) * ty) +
               v11 * (tx * ty);
    }
};

using ScalarGridField = GridField<double>;
using ComplexGridField = GridField<std::complex<double>>;

// A sampled vector field: the two components share one grid.
struct VectorGridField {
    ScalarGridField a1;
    ScalarGridField a2;

    VectorGridField() = default;
    explicit VectorGridField(const Grid2D& g) : a1(g), a2(g) {}
    const Grid2D& grid() const { return a1.grid; }
    Vec2 interp(const Vec2& p) const { return {a1.interp(p), a2.interp(p)}; }
};

} // namespace abx
