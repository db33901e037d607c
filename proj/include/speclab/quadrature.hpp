#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include "errors.hpp"
#include "numlin.hpp"

namespace speclab {

namespace detail {

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; symmetric).
inline constexpr double kGL16Nodes[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499,
};
inline constexpr double kGL16Weights[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541,
};

inline cpx gl16(const std::function<cpx(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cpx acc = 0;
    for (int i = 0; i < 8; ++i) {
        const double dx = h * kGL16Nodes[i];
        acc += kGL16Weights[i] * (f(c - dx) + f(c + dx));
    }
    return h * acc;
}

inline cpx adaptive_panel(const std::function<cpx(double)>& f, double a, double b,
                          cpx whole, double tol, int depth) {
    if (depth > 40) throw accuracy_error("adaptive_gauss_legendre: recursion depth exhausted");
    const double mid = 0.5 * (a + b);
    const cpx left = gl16(f, a, mid);
    const cpx right = gl16(f, mid, b);
    if (std::abs(left + right - whole) <= tol) return left + right;
    return adaptive_panel(f, a, mid, left, 0.5 * tol, depth + 1) +
           adaptive_panel(f, mid, b, right, 0.5 * tol, depth + 1);
}

} // namespace detail

// Adaptive Gauss-Legendre integral of a complex-valued integrand with an
// absolute tolerance; panels bisect until the two-half refinement settles.
inline cpx adaptive_gauss_legendre(const std::function<cpx(double)>& f, double a, double b,
                                   double abs_tol) {
    if (!(a < b)) throw validation_error("adaptive_gauss_legendre: requires a < b");
    if (!(abs_tol > 0)) throw validation_error("adaptive_gauss_legendre: tolerance must be positive");
    return detail::adaptive_panel(f, a, b, detail::gl16(f, a, b), abs_tol, 0);
}

} // namespace speclab
