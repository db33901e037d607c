#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "numlin.hpp"
#include "parallel.hpp"

namespace speclab {

namespace detail {

inline double directed_hausdorff(const std::vector<cpx>& from, const std::vector<cpx>& to,
                                 int threads) {
    std::vector<double> row(from.size(), 0.0);
    parallel_for_chunks(static_cast<long>(from.size()), threads, [&](long i) {
        double best = std::numeric_limits<double>::infinity();
        const cpx a = from[static_cast<size_t>(i)];
        for (const cpx& b : to) best = std::min(best, std::abs(a - b));
        row[static_cast<size_t>(i)] = best;
    });
    return *std::max_element(row.begin(), row.end());
}

} // namespace detail

// Exact Hausdorff distance between finite nonempty point sets:
// max(sup_a inf_b |a-b|, sup_b inf_a |a-b|). Brute force, no approximation.
inline double hausdorff_distance(const std::vector<cpx>& a, const std::vector<cpx>& b,
                                 int threads = 0) {
    if (a.empty() || b.empty())
        throw validation_error("hausdorff_distance: both sets must be nonempty");
    for (const cpx& z : a)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw validation_error("hausdorff_distance: non-finite point");
    for (const cpx& z : b)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw validation_error("hausdorff_distance: non-finite point");
    return std::max(detail::directed_hausdorff(a, b, threads),
                    detail::directed_hausdorff(b, a, threads));
}

inline double set_diameter(const std::vector<cpx>& a) {
    if (a.empty()) throw validation_error("set_diameter: empty set");
    double d = 0;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = i + 1; j < a.size(); ++j) d = std::max(d, std::abs(a[i] - a[j]));
    return d;
}

} // namespace speclab
