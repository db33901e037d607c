#pragma once

#include <cmath>
#include <complex>

#include "errors.hpp"
#include "numlin.hpp"

namespace speclab {

// Uniform rectangular lattice on [x0,x1] x [y0,y1], endpoints included.
// Node (i, j) maps to x0 + i*dx + (y0 + j*dy) i; flat index j*nx + i (row-major).
struct GridSpec {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    int nx = 2, ny = 2;

    void validate() const {
        if (!(std::isfinite(x0) && std::isfinite(x1) && std::isfinite(y0) && std::isfinite(y1)))
            throw validation_error("GridSpec: non-finite bounds");
        if (!(x0 < x1) || !(y0 < y1)) throw validation_error("GridSpec: requires x0 < x1 and y0 < y1");
        if (nx < 2 || ny < 2) throw validation_error("GridSpec: requires nx >= 2 and ny >= 2");
    }

    double dx() const { return (x1 - x0) / (nx - 1); }
    double dy() const { return (y1 - y0) / (ny - 1); }
    double cell_diag() const { return std::hypot(dx(), dy()); }

    double x(int i) const { return x0 + i * dx(); }
    double y(int j) const { return y0 + j * dy(); }
    cpx node(int i, int j) const { return {x(i), y(j)}; }

    long node_count() const { return static_cast<long>(nx) * ny; }
    long flat(int i, int j) const { return static_cast<long>(j) * nx + i; }

    double diameter() const { return std::hypot(x1 - x0, y1 - y0); }

    bool contains(cpx z) const {
        return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
    }
};

} // namespace speclab
