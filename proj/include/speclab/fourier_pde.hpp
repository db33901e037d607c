#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "numlin.hpp"
#include "parallel.hpp"
#include "pseudo.hpp"
#include "quadrature.hpp"

namespace speclab {

// Constant-coefficient symbol p(zeta) = sum_{alpha <= k} c_alpha zeta^alpha on R.
// Ellipticity for d = 1 is exactly c_k != 0.
struct SymbolPolynomial {
    int order = 1;
    std::vector<cpx> coeffs; // degree 0..order

    void validate() const {
        if (order < 1) throw validation_error("SymbolPolynomial: order must be >= 1");
        if (coeffs.size() != static_cast<size_t>(order) + 1)
            throw validation_error("SymbolPolynomial: coefficient count must be order + 1");
        for (const cpx& c : coeffs)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw validation_error("SymbolPolynomial: non-finite coefficient");
        if (coeffs[order] == cpx(0.0))
            throw validation_error("SymbolPolynomial: leading coefficient must be nonzero");
    }
};

inline cpx symbol_eval(const SymbolPolynomial& p, double zeta) {
    cpx acc = 0;
    for (int d = p.order; d >= 0; --d) acc = acc * zeta + p.coeffs[d];
    return acc;
}

// Advection-diffusion demo symbol: p(zeta) = zeta^2 - 2 i zeta,
// the Fourier image of -u'' - 2 u'.
inline SymbolPolynomial default_pde_symbol() {
    SymbolPolynomial p;
    p.order = 2;
    p.coeffs = {cpx(0.0), cpx(0.0, -2.0), cpx(1.0)};
    return p;
}

// {p(pi zeta / n) : |zeta| <= cutoff}, sorted by (re, im). With cutoff = n
// this is the spectrum of the doubly truncated unperturbed operator.
inline std::vector<cpx> truncated_symbol_spectrum(const SymbolPolynomial& p, int n, int cutoff) {
    p.validate();
    if (n < 1) throw validation_error("truncated_symbol_spectrum: n must be >= 1");
    if (cutoff < n) throw validation_error("truncated_symbol_spectrum: cutoff must be >= n");
    std::vector<cpx> out;
    out.reserve(2 * cutoff + 1);
    for (int z = -cutoff; z <= cutoff; ++z)
        out.push_back(symbol_eval(p, std::numbers::pi * z / n));
    std::sort(out.begin(), out.end(), complex_less);
    return out;
}

// Bounded potential with decay: |b(x)| <= 1e-14 sup|b| beyond decay_radius.
struct PotentialSpec {
    std::function<cpx(double)> evaluator;
    double decay_radius = 1.0;

    void validate() const {
        if (!evaluator) throw validation_error("PotentialSpec: missing evaluator");
        if (!(decay_radius > 0)) throw validation_error("PotentialSpec: decay_radius must be positive");
        double sup = 0;
        const int samples = 400;
        for (int i = -samples; i <= samples; ++i) {
            double x = decay_radius * i / samples;
            double v = std::abs(evaluator(x));
            if (!std::isfinite(v)) throw validation_error("PotentialSpec: non-finite sample");
            sup = std::max(sup, v);
        }
        for (double factor : {1.02, 1.1, 1.5, 2.0, 4.0}) {
            for (double sign : {-1.0, 1.0}) {
                double v = std::abs(evaluator(sign * decay_radius * factor));
                if (v > 1e-14 * sup)
                    throw validation_error("PotentialSpec: potential does not decay below 1e-14 * sup beyond decay_radius");
            }
        }
    }
};

// b(x) = amplitude * sin(x) exp(-x^2). exp(-36) ~ 2e-16 clears the decay bound.
inline PotentialSpec gauss_sine_potential(double amplitude) {
    PotentialSpec b;
    b.evaluator = [amplitude](double x) { return cpx(amplitude * std::sin(x) * std::exp(-x * x)); };
    b.decay_radius = 6.0;
    return b;
}

// Fourier coefficients beta_m = (1/(2n)) int_{-n}^{n} b(x) e^{-i pi m x / n} dx
// for |m| <= max_offset, by adaptive quadrature over the decay support.
inline std::map<int, cpx> potential_coeffs(const PotentialSpec& b, int n, int max_offset,
                                           int threads = 0) {
    b.validate();
    if (n < 1) throw validation_error("potential_coeffs: n must be >= 1");
    if (max_offset < 0) throw validation_error("potential_coeffs: max_offset must be >= 0");
    const double R = std::min(static_cast<double>(n), b.decay_radius);
    const double tol = 1e-12; // absolute, on beta_m itself
    std::vector<cpx> vals(max_offset + 1);
    parallel_for_chunks(max_offset + 1, threads, [&](long m) {
        const double w = std::numbers::pi * m / n;
        auto f = [&](double x) { return b.evaluator(x) * std::exp(cpx(0.0, -w * x)); };
        vals[m] = adaptive_gauss_legendre(f, -R, R, tol * 2.0 * n) / (2.0 * n);
    });
    std::map<int, cpx> out;
    for (int m = 0; m <= max_offset; ++m) out[m] = vals[m];
    // beta_{-m} = conj(beta_m) holds exactly for real potentials; otherwise
    // the negative offsets need their own quadrature.
    bool real_potential = true;
    for (int i = 0; i <= 64; ++i) {
        double x = -b.decay_radius + 2.0 * b.decay_radius * i / 64;
        if (std::abs(b.evaluator(x).imag()) > 0) { real_potential = false; break; }
    }
    if (real_potential) {
        for (int m = 1; m <= max_offset; ++m) out[-m] = std::conj(out[m]);
    } else {
        std::vector<cpx> neg(max_offset + 1);
        parallel_for_chunks(max_offset, threads, [&](long idx) {
            const long m = idx + 1;
            const double w = -std::numbers::pi * m / n;
            auto f = [&](double x) { return b.evaluator(x) * std::exp(cpx(0.0, -w * x)); };
            neg[m] = adaptive_gauss_legendre(f, -R, R, tol * 2.0 * n) / (2.0 * n);
        });
        for (int m = 1; m <= max_offset; ++m) out[-m] = neg[m];
    }
    return out;
}

// Doubly truncated operator on (-n, n): (2 cutoff + 1)^2 matrix indexed by
// zeta, eta in {-cutoff..cutoff}, entry p(pi zeta / n) delta + beta_{zeta-eta}.
// The standard coupling is cutoff = n; larger cutoffs widen the frequency
// window [-pi cutoff / n, pi cutoff / n] at fixed domain size.
inline ComplexMatrix assemble_truncation_cutoff(const SymbolPolynomial& p, const PotentialSpec& b,
                                                int n, int cutoff, int threads = 0) {
    p.validate();
    if (n < 1) throw validation_error("assemble_truncation_cutoff: n must be >= 1");
    if (cutoff < n) throw validation_error("assemble_truncation_cutoff: cutoff must be >= n");
    std::map<int, cpx> beta = potential_coeffs(b, n, 2 * cutoff, threads);
    const int dim = 2 * cutoff + 1;
    Eigen::MatrixXcd m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const int zeta = i - cutoff;
        for (int j = 0; j < dim; ++j) {
            const int eta = j - cutoff;
            m(i, j) = beta.at(zeta - eta);
        }
        m(i, i) += symbol_eval(p, std::numbers::pi * zeta / n);
    }
    return ComplexMatrix(m);
}

inline ComplexMatrix assemble_truncation(const SymbolPolynomial& p, const PotentialSpec& b,
                                         int n, int threads = 0) {
    return assemble_truncation_cutoff(p, b, n, n, threads);
}

// p sampled on a uniform grid of [-zeta_range, zeta_range]; the reference
// essential-spectrum polyline for convergence studies.
inline std::vector<cpx> essential_curve(const SymbolPolynomial& p, double zeta_range, int m) {
    p.validate();
    if (!(zeta_range > 0)) throw validation_error("essential_curve: zeta_range must be positive");
    if (m < 64) throw validation_error("essential_curve: m must be >= 64");
    std::vector<cpx> out;
    out.reserve(m + 1);
    for (int t = 0; t <= m; ++t)
        out.push_back(symbol_eval(p, -zeta_range + 2.0 * zeta_range * t / m));
    return out;
}

inline double distance_to_polyline(cpx z, const std::vector<cpx>& poly) {
    double best = std::numeric_limits<double>::infinity();
    if (poly.size() == 1) return std::abs(z - poly.front());
    for (size_t t = 0; t + 1 < poly.size(); ++t) {
        const cpx a = poly[t], b = poly[t + 1];
        const cpx ab = b - a;
        const double len2 = std::norm(ab);
        double s = len2 > 0 ? std::clamp(((z - a) * std::conj(ab)).real() / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, std::abs(z - (a + s * ab)));
    }
    return best;
}

// Periodic first-derivative truncation: diagonal in the Fourier basis with
// eigenvalues 2 pi i k / n, |k| <= cutoff. Its eps-pseudospectrum stays inside
// the strip |Re lambda| < eps for every n, while the half-plane Re >= 0 fills
// the limit spectrum; the report carries the strip check for the given grid.
struct FirstDerivativeReport {
    PseudospectrumField field;
    std::vector<cpx> flagged; // sublevel nodes at the requested eps
    double eps = 0;
    double max_abs_re_flagged = 0;
    bool flagged_within_strip = false; // |Re| < eps + one grid cell for all flagged

    double dist_to_flagged(cpx z) const {
        double d = std::numeric_limits<double>::infinity();
        for (const cpx& f : flagged) d = std::min(d, std::abs(f - z));
        return d;
    }
};

inline FirstDerivativeReport first_derivative_demo(int n, const GridSpec& grid, double eps) {
    if (n < 1) throw validation_error("first_derivative_demo: n must be >= 1");
    grid.validate();
    if (!(eps > 0)) throw validation_error("first_derivative_demo: eps must be positive");

    // Lattice tall enough to cover the grid with margin.
    const double ymax = std::max(std::abs(grid.y0), std::abs(grid.y1)) + 1.0;
    const int cutoff = std::max(n, static_cast<int>(std::ceil(ymax * n / (2.0 * std::numbers::pi))) + 1);

    // Normal (diagonal) matrix: the resolvent norm is exactly 1/dist to the
    // eigenvalue lattice; no SVD needed.
    FirstDerivativeReport rep;
    rep.eps = eps;
    rep.field.grid = grid;
    rep.field.matrix_dim = 2 * cutoff + 1;
    rep.field.values.assign(grid.node_count(), 0.0);
    rep.field.meta["method"] = "diagonal-lattice";
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const cpx z = grid.node(i, j);
            double d2 = std::numeric_limits<double>::infinity();
            for (int k = -cutoff; k <= cutoff; ++k) {
                const double im = 2.0 * std::numbers::pi * k / n;
                d2 = std::min(d2, std::norm(z - cpx(0.0, im)));
            }
            const double d = std::sqrt(d2);
            rep.field.values[grid.flat(i, j)] =
                d == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / d;
        }
    }
    rep.flagged = sublevel_points(rep.field, eps);
    for (const cpx& z : rep.flagged)
        rep.max_abs_re_flagged = std::max(rep.max_abs_re_flagged, std::abs(z.real()));
    rep.flagged_within_strip = rep.max_abs_re_flagged < eps + grid.cell_diag();
    return rep;
}

} // namespace speclab
