#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "numlin.hpp"
#include "parallel.hpp"

namespace speclab {

enum class IndexKind { NaturalIndexed, IntegerIndexed };

// Generator of diagonal blocks T_k and superdiagonal coupling blocks S_k for
// block-diagonally dominant operators. Natural specs run k = 1..n, integer
// specs k = -n..n-1 (the truncation windows of assemble).
struct BlockSequenceSpec {
    IndexKind index_kind = IndexKind::NaturalIndexed;
    std::function<Eigen::MatrixXcd(int)> block;     // T_k, square m_k x m_k
    std::function<Eigen::MatrixXcd(int)> coupling;  // S_k, m_k x m_{k+1}
    std::string description;

    Eigen::MatrixXcd block_at(int k) const {
        Eigen::MatrixXcd t = block(k);
        if (t.rows() != t.cols() || t.rows() < 1)
            throw validation_error("BlockSequenceSpec: diagonal block must be square");
        if (!t.allFinite()) throw validation_error("BlockSequenceSpec: non-finite block entry");
        return t;
    }

    std::vector<int> window(int n) const {
        std::vector<int> idx;
        if (index_kind == IndexKind::NaturalIndexed)
            for (int k = 1; k <= n; ++k) idx.push_back(k);
        else
            for (int k = -n; k <= n - 1; ++k) idx.push_back(k);
        return idx;
    }

    // Tail indices |k| in [K/2, K], ordered by (|k|, k); the divergence and
    // cluster estimators sample block norms along this subsequence.
    std::vector<int> tail_indices(int K_blocks) const {
        std::vector<int> idx;
        int lo = (K_blocks + 1) / 2;
        for (int a = lo; a <= K_blocks; ++a) {
            if (index_kind == IndexKind::IntegerIndexed) idx.push_back(-a);
            idx.push_back(a);
        }
        return idx;
    }
};

// Block-tridiagonal-upper truncation: T_k on the diagonal, S_k immediately
// above. The integer window -n..n-1 yields the 4n x 4n delay matrices.
inline ComplexMatrix assemble(const BlockSequenceSpec& spec, int n) {
    if (n < 1) throw validation_error("assemble: n must be >= 1");
    std::vector<int> idx = spec.window(n);
    std::vector<Eigen::MatrixXcd> blocks;
    blocks.reserve(idx.size());
    Eigen::Index dim = 0;
    for (int k : idx) {
        blocks.push_back(spec.block_at(k));
        dim += blocks.back().rows();
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::Index off = 0;
    for (size_t t = 0; t < idx.size(); ++t) {
        const Eigen::Index mk = blocks[t].rows();
        m.block(off, off, mk, mk) = blocks[t];
        if (t + 1 < idx.size() && spec.coupling) {
            Eigen::MatrixXcd s = spec.coupling(idx[t]);
            if (!s.allFinite()) throw validation_error("assemble: non-finite coupling entry");
            const Eigen::Index mk1 = blocks[t + 1].rows();
            if (s.rows() != mk || s.cols() != mk1)
                throw validation_error("assemble: coupling block size mismatch");
            m.block(off, off + mk, mk, mk1) = s;
        }
        off += mk;
    }
    return ComplexMatrix(m);
}

// ||(T_k - lambda)^{-1}|| by exact small-block SVD.
inline double block_resolvent_norm(const BlockSequenceSpec& spec, int k, cpx lambda) {
    Eigen::MatrixXcd b = spec.block_at(k);
    b.diagonal().array() -= lambda;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(b);
    double sigma = svd.singularValues()(b.rows() - 1);
    if (sigma < singularity_floor(b.norm()))
        throw validation_error("block_resolvent_norm: lambda is in the block spectrum");
    return 1.0 / sigma;
}

// Delay line blocks: T_j = [[0,1],[a_j,0]] with a_j = 8 j^2, S_j = [[0,0],[1,0]].
inline BlockSequenceSpec delay_spec() {
    BlockSequenceSpec s;
    s.index_kind = IndexKind::IntegerIndexed;
    s.description = "delay";
    s.block = [](int j) {
        Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2, 2);
        t(0, 1) = 1.0;
        t(1, 0) = 8.0 * j * j;
        return t;
    };
    s.coupling = [](int) {
        Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2, 2);
        c(1, 0) = 1.0;
        return c;
    };
    return s;
}

// Closed form for the delay blocks: ||(T_j - lambda)^{-1}|| =
// sigma_max([[lambda, 1], [a_j, lambda]]) / |a_j - lambda^2|.
inline double delay_block_norm_closed(int j, cpx lambda) {
    const double a = 8.0 * j * j;
    const cpx det = a - lambda * lambda;
    if (std::abs(det) == 0.0)
        throw validation_error("delay_block_norm_closed: lambda is in the block spectrum");
    // sigma_max^2 of a 2x2 B: (F + sqrt(F^2 - 4 D^2)) / 2, F = ||B||_F^2, D = |det B|.
    const double F = 2.0 * std::norm(lambda) + 1.0 + a * a;
    const double D = std::abs(det);
    const double smax2 = 0.5 * (F + std::sqrt(std::max(F * F - 4.0 * D * D, 0.0)));
    return std::sqrt(smax2) / D;
}

struct Example1Params {
    // a_j = 8 j^2, b_j = 1 + 1/j, c_j = 1/j, d_j = d + 1/j. The c_j sequence
    // sits outside the superdiagonal coupling model and vanishes in the limit;
    // it is accepted in configuration but does not enter assembly.
    double d = 2.0;
};

// Upper-triangular 2x2 block family: T_k = [[a_k, b_{2k-1}],[0, d_k]],
// coupling S_k = [[0,0],[b_{2k},0]]. Limit data: a_k -> inf, b_k -> 1, d_k -> d.
inline BlockSequenceSpec example1_spec(Example1Params params = {}) {
    BlockSequenceSpec s;
    s.index_kind = IndexKind::NaturalIndexed;
    s.description = "example1";
    const double d = params.d;
    s.block = [d](int k) {
        Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2, 2);
        t(0, 0) = 8.0 * k * k;
        t(0, 1) = 1.0 + 1.0 / (2.0 * k - 1.0);
        t(1, 1) = d + 1.0 / k;
        return t;
    };
    s.coupling = [](int k) {
        Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2, 2);
        c(1, 0) = 1.0 + 1.0 / (2.0 * k);
        return c;
    };
    return s;
}

// Exact eigenvalues of the n-th delay truncation: {±sqrt(8) |j| : j = -n..n-1},
// each j contributing a ± pair.
inline std::vector<cpx> delay_spectrum_oracle(int n) {
    if (n < 1) throw validation_error("delay_spectrum_oracle: n must be >= 1");
    std::vector<cpx> out;
    for (int j = -n; j <= n - 1; ++j) {
        double r = 2.0 * std::numbers::sqrt2 * std::abs(j);
        out.push_back(-r);
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), complex_less);
    return out;
}

struct LimitSetEstimate {
    GridSpec grid;
    enum class Kind { EssentialSpectrum, EpsNearSpectrum } kind;
    double eps = 0; // meaningful for EpsNearSpectrum
    std::vector<bool> flagged; // row-major over grid nodes
    int K_blocks = 0;
    double tolerance = 0;

    std::vector<cpx> flagged_points() const {
        std::vector<cpx> out;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                if (flagged[grid.flat(i, j)]) out.push_back(grid.node(i, j));
        return out;
    }
};

namespace detail {

inline std::vector<double> tail_norms(const BlockSequenceSpec& spec,
                                      const std::vector<int>& tail, cpx lambda) {
    std::vector<double> v;
    v.reserve(tail.size());
    for (int k : tail) {
        Eigen::MatrixXcd b = spec.block_at(k);
        b.diagonal().array() -= lambda;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(b);
        double sigma = svd.singularValues()(b.rows() - 1);
        // lambda on a block spectrum flags as divergent rather than erroring.
        if (sigma < singularity_floor(b.norm()))
            v.push_back(std::numeric_limits<double>::infinity());
        else
            v.push_back(1.0 / sigma);
    }
    return v;
}

} // namespace detail

// Divergence surrogate for the limiting essential spectrum: flag nodes where
// the tail block norms reach the threshold.
inline LimitSetEstimate essential_limit_estimate(const BlockSequenceSpec& spec,
                                                 const GridSpec& grid, int K_blocks,
                                                 double threshold, int threads = 0) {
    grid.validate();
    if (K_blocks < 16) throw validation_error("essential_limit_estimate: K_blocks must be >= 16");
    if (!(threshold > 0)) throw validation_error("essential_limit_estimate: threshold must be positive");
    LimitSetEstimate est;
    est.grid = grid;
    est.kind = LimitSetEstimate::Kind::EssentialSpectrum;
    est.K_blocks = K_blocks;
    est.tolerance = threshold;
    est.flagged.assign(grid.node_count(), false);
    const std::vector<int> tail = spec.tail_indices(K_blocks);
    parallel_for_chunks(grid.ny, threads, [&](long j) {
        for (int i = 0; i < grid.nx; ++i) {
            std::vector<double> v = detail::tail_norms(spec, tail, grid.node(i, static_cast<int>(j)));
            double sup = *std::max_element(v.begin(), v.end());
            est.flagged[grid.flat(i, static_cast<int>(j))] = sup >= threshold;
        }
    });
    return est;
}

// Cluster surrogate for the limiting essential eps-near spectrum: flag nodes
// where some tail norm sits within tol of 1/eps and the nearby subsequence
// oscillates below tol. Default tol is 0.05/eps.
inline LimitSetEstimate eps_near_limit_estimate(const BlockSequenceSpec& spec,
                                                const GridSpec& grid, double eps,
                                                int K_blocks, double tol = 0,
                                                int threads = 0) {
    grid.validate();
    if (!(eps > 0)) throw validation_error("eps_near_limit_estimate: eps must be positive");
    if (K_blocks < 16) throw validation_error("eps_near_limit_estimate: K_blocks must be >= 16");
    if (tol == 0) tol = 0.05 / eps;
    if (!(tol > 0)) throw validation_error("eps_near_limit_estimate: tol must be positive");
    LimitSetEstimate est;
    est.grid = grid;
    est.kind = LimitSetEstimate::Kind::EpsNearSpectrum;
    est.eps = eps;
    est.K_blocks = K_blocks;
    est.tolerance = tol;
    est.flagged.assign(grid.node_count(), false);
    const std::vector<int> tail = spec.tail_indices(K_blocks);
    const double target = 1.0 / eps;
    parallel_for_chunks(grid.ny, threads, [&](long j) {
        for (int i = 0; i < grid.nx; ++i) {
            std::vector<double> v = detail::tail_norms(spec, tail, grid.node(i, static_cast<int>(j)));
            bool hit = false;
            for (size_t t = 0; t < v.size() && !hit; ++t) {
                if (std::abs(v[t] - target) > tol) continue;
                size_t lo = t >= 2 ? t - 2 : 0;
                size_t hi = std::min(v.size(), t + 3);
                double vmin = v[lo], vmax = v[lo];
                for (size_t u = lo; u < hi; ++u) {
                    vmin = std::min(vmin, v[u]);
                    vmax = std::max(vmax, v[u]);
                }
                hit = (vmax - vmin) <= tol;
            }
            est.flagged[grid.flat(i, static_cast<int>(j))] = hit;
        }
    });
    return est;
}

// Constant-resolvent-norm region of the delay family: lambda = r e^{i phi}
// with cos(2 phi) < 0 and r >= max{(1+sqrt 5)/2, 1/|cos(2 phi)|}. Returns the
// sup of block norms over |j| <= J, which the limit theory pins to 1 from below.
inline double constant_norm_region_check(cpx lambda, int J) {
    if (J < 1) throw validation_error("constant_norm_region_check: J must be >= 1");
    const double r = std::abs(lambda);
    const double phi = std::arg(lambda);
    const double c2 = std::cos(2.0 * phi);
    const double golden = 0.5 * (1.0 + std::sqrt(5.0));
    if (!(c2 < 0))
        throw validation_error("constant_norm_region_check: cos(2 phi) must be negative");
    if (!(r >= std::max(golden, 1.0 / std::abs(c2))))
        throw validation_error("constant_norm_region_check: |lambda| below the region bound");
    BlockSequenceSpec spec = delay_spec();
    double sup = 0;
    for (int j = -J; j <= J; ++j) sup = std::max(sup, block_resolvent_norm(spec, j, lambda));
    if (sup > 1.0 + 1e-10 || sup < 1.0 - 5.0 / std::sqrt(static_cast<double>(J)))
        throw accuracy_error("constant_norm_region_check: block norm sup escaped [1 - 5/sqrt(J), 1 + 1e-10]");
    return sup;
}

} // namespace speclab
