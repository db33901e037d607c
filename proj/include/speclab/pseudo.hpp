#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "numlin.hpp"
#include "parallel.hpp"

namespace speclab {

// Resolvent norms sampled on a grid; +inf marks nodes on the numerical spectrum.
struct PseudospectrumField {
    GridSpec grid;
    std::vector<double> values; // row-major ny x nx, values[j*nx + i]
    int matrix_dim = 0;
    std::map<std::string, std::string> meta;

    double at(int i, int j) const { return values[grid.flat(i, j)]; }
};

struct ContourSet {
    double eps = 0;
    std::vector<std::vector<cpx>> polylines; // each closed: first point repeated last
};

// Above this dimension per-node SVDs dominate runtime; use the Schur path.
inline constexpr int kSchurFieldCutoff = 96;

// values[j][i] = ||(M - node(i,j))^{-1}||. Deterministic: node results never
// depend on scheduling (warm starts are confined to single rows).
inline PseudospectrumField field(const ComplexMatrix& m, const GridSpec& grid, int threads = 0) {
    require_square(m, "field");
    grid.validate();
    PseudospectrumField f;
    f.grid = grid;
    f.matrix_dim = static_cast<int>(m.rows());
    f.values.assign(grid.node_count(), 0.0);

    if (m.rows() >= kSchurFieldCutoff) {
        SchurResolvent schur(m);
        parallel_for_chunks(grid.ny, threads, [&](long j) {
            SchurResolvent::WarmStart warm;
            for (int i = 0; i < grid.nx; ++i)
                f.values[grid.flat(i, static_cast<int>(j))] =
                    schur.resolvent_norm(grid.node(i, static_cast<int>(j)), &warm);
        });
        f.meta["method"] = "schur-lanczos-bidiagonalization";
        f.meta["svd-fallbacks"] = std::to_string(schur.fallback_count());
    } else {
        parallel_for_chunks(grid.ny, threads, [&](long j) {
            for (int i = 0; i < grid.nx; ++i)
                f.values[grid.flat(i, static_cast<int>(j))] =
                    resolvent_norm(m, grid.node(i, static_cast<int>(j)));
        });
        f.meta["method"] = "svd";
    }
    f.meta["sentinel"] = "inf marks numerically singular shifts";
    return f;
}

// Strict inequality: the pseudospectrum is open.
inline bool membership(const ComplexMatrix& m, cpx lambda, double eps) {
    if (!(eps > 0)) throw validation_error("membership: eps must be positive");
    return resolvent_norm(m, lambda) > 1.0 / eps;
}

// Grid nodes with resolvent norm above 1/eps, row-major order.
inline std::vector<cpx> sublevel_points(const PseudospectrumField& f, double eps) {
    if (!(eps > 0)) throw validation_error("sublevel_points: eps must be positive");
    const double thr = 1.0 / eps;
    std::vector<cpx> out;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i)
            if (f.at(i, j) > thr) out.push_back(f.grid.node(i, j));
    return out;
}

namespace detail {

// Marching squares on the padded field. The ghost ring sits one spacing
// outside the rectangle with value -1 (below every threshold 1/eps), which
// closes all level sets; crossings into the ring are clamped to the boundary.
class MarchingSquares {
public:
    MarchingSquares(const PseudospectrumField& f, double threshold)
        : f_(f), thr_(threshold), nx_(f.grid.nx + 2), ny_(f.grid.ny + 2) {}

    std::vector<std::vector<cpx>> run() {
        build_segments();
        return chain_segments();
    }

private:
    // Node value in padded coordinates; +inf becomes a large finite number so
    // linear interpolation stays defined.
    double value(int pi, int pj) const {
        int i = pi - 1, j = pj - 1;
        if (i < 0 || j < 0 || i >= f_.grid.nx || j >= f_.grid.ny) return -1.0;
        double v = f_.at(i, j);
        if (std::isinf(v)) return 1e30;
        return v;
    }

    double px(int pi) const { return f_.grid.x0 + (pi - 1) * f_.grid.dx(); }
    double py(int pj) const { return f_.grid.y0 + (pj - 1) * f_.grid.dy(); }

    cpx clamp_to_rect(double x, double y) const {
        x = std::min(std::max(x, f_.grid.x0), f_.grid.x1);
        y = std::min(std::max(y, f_.grid.y0), f_.grid.y1);
        return {x, y};
    }

    // Edge key: horizontal edges keyed by their left node, vertical by their
    // bottom node. Keys make segment endpoints match exactly when chaining.
    long hkey(int pi, int pj) const { return (static_cast<long>(pj) * nx_ + pi) * 2; }
    long vkey(int pi, int pj) const { return (static_cast<long>(pj) * nx_ + pi) * 2 + 1; }

    cpx interp_h(int pi, int pj) const {
        double a = value(pi, pj), b = value(pi + 1, pj);
        double t = (thr_ - a) / (b - a);
        return clamp_to_rect(px(pi) + t * f_.grid.dx(), py(pj));
    }
    cpx interp_v(int pi, int pj) const {
        double a = value(pi, pj), b = value(pi, pj + 1);
        double t = (thr_ - a) / (b - a);
        return clamp_to_rect(px(pi), py(pj) + t * f_.grid.dy());
    }

    void add_segment(long e0, long e1) { segments_.push_back({e0, e1}); }

    void build_segments() {
        // Cell corners: 1 = value > thr. Bits: 1 bottom-left, 2 bottom-right,
        // 4 top-right, 8 top-left. Each case yields edges crossed in pairs.
        for (int pj = 0; pj + 1 < ny_; ++pj) {
            for (int pi = 0; pi + 1 < nx_; ++pi) {
                int c = 0;
                if (value(pi, pj) > thr_) c |= 1;
                if (value(pi + 1, pj) > thr_) c |= 2;
                if (value(pi + 1, pj + 1) > thr_) c |= 4;
                if (value(pi, pj + 1) > thr_) c |= 8;
                if (c == 0 || c == 15) continue;
                long bottom = hkey(pi, pj), top = hkey(pi, pj + 1);
                long left = vkey(pi, pj), right = vkey(pi + 1, pj);
                switch (c) {
                    case 1: case 14: add_segment(bottom, left); break;
                    case 2: case 13: add_segment(bottom, right); break;
                    case 3: case 12: add_segment(left, right); break;
                    case 4: case 11: add_segment(top, right); break;
                    case 6: case 9:  add_segment(bottom, top); break;
                    case 7: case 8:  add_segment(top, left); break;
                    case 5: case 10: {
                        // Saddle: disambiguate by the cell-center average.
                        double mid = 0.25 * (value(pi, pj) + value(pi + 1, pj) +
                                             value(pi + 1, pj + 1) + value(pi, pj + 1));
                        bool center_in = mid > thr_;
                        if ((c == 5) == center_in) {
                            add_segment(left, top);
                            add_segment(bottom, right);
                        } else {
                            add_segment(left, bottom);
                            add_segment(top, right);
                        }
                        break;
                    }
                    default: break;
                }
            }
        }
    }

    cpx edge_point(long key) const {
        long cell = key / 2;
        int pi = static_cast<int>(cell % nx_), pj = static_cast<int>(cell / nx_);
        return (key % 2 == 0) ? interp_h(pi, pj) : interp_v(pi, pj);
    }

    std::vector<std::vector<cpx>> chain_segments() {
        std::unordered_map<long, std::vector<long>> adj;
        adj.reserve(segments_.size() * 2);
        for (size_t s = 0; s < segments_.size(); ++s) {
            adj[segments_[s].first].push_back(static_cast<long>(s));
            adj[segments_[s].second].push_back(static_cast<long>(s));
        }
        std::vector<bool> used(segments_.size(), false);
        std::vector<std::vector<cpx>> polylines;
        for (size_t s0 = 0; s0 < segments_.size(); ++s0) {
            if (used[s0]) continue;
            // Every level set of the padded field is a closed loop, so any
            // unused segment starts a cycle.
            std::vector<long> edge_keys;
            long start = segments_[s0].first;
            long current = start;
            long seg = static_cast<long>(s0);
            edge_keys.push_back(start);
            while (true) {
                used[seg] = true;
                long nxt = (segments_[seg].first == current) ? segments_[seg].second
                                                             : segments_[seg].first;
                edge_keys.push_back(nxt);
                current = nxt;
                if (current == start) break;
                long next_seg = -1;
                for (long cand : adj[current])
                    if (!used[cand]) { next_seg = cand; break; }
                if (next_seg < 0) break; // open chain only on degenerate level sets
                seg = next_seg;
            }
            if (edge_keys.size() < 3) continue;
            std::vector<cpx> poly;
            poly.reserve(edge_keys.size());
            for (long k : edge_keys) poly.push_back(edge_point(k));
            polylines.push_back(std::move(poly));
        }
        return polylines;
    }

    const PseudospectrumField& f_;
    double thr_;
    int nx_, ny_;
    std::vector<std::pair<long, long>> segments_;
};

} // namespace detail

// Level sets of the resolvent-norm field at thresholds 1/eps, one ContourSet
// per level. Levels must be strictly decreasing (coarse to fine). A level the
// field never reaches yields an empty ContourSet.
inline std::vector<ContourSet> contours(const PseudospectrumField& f,
                                        const std::vector<double>& eps_levels) {
    f.grid.validate();
    for (size_t i = 0; i < eps_levels.size(); ++i) {
        if (!(eps_levels[i] > 0)) throw validation_error("contours: eps levels must be positive");
        if (i > 0 && !(eps_levels[i] < eps_levels[i - 1]))
            throw validation_error("contours: eps levels must be strictly decreasing");
    }
    std::vector<ContourSet> out;
    out.reserve(eps_levels.size());
    for (double eps : eps_levels) {
        detail::MarchingSquares ms(f, 1.0 / eps);
        ContourSet cs;
        cs.eps = eps;
        cs.polylines = ms.run();
        out.push_back(std::move(cs));
    }
    return out;
}

} // namespace speclab
