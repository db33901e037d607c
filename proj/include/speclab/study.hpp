#pragma once

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "blockops.hpp"
#include "errors.hpp"
#include "fourier_pde.hpp"
#include "grid.hpp"
#include "hausdorff.hpp"
#include "numlin.hpp"
#include "pseudo.hpp"
#include "toeplitz.hpp"

namespace speclab {

// One resolved truncation level: eigenvalues and grid-node sublevel sets
// clipped to the study window K.
struct SpectralPortrait {
    int n = 0;
    std::vector<cpx> eigenvalues;
    std::optional<PseudospectrumField> field;
    std::vector<ContourSet> contour_sets;
    std::string source;

    void validate() const {
        for (size_t i = 1; i < contour_sets.size(); ++i)
            if (!(contour_sets[i].eps < contour_sets[i - 1].eps))
                throw validation_error("SpectralPortrait: contour eps levels must be strictly decreasing");
        if (field && !eigenvalues.empty() &&
            static_cast<int>(eigenvalues.size()) != field->matrix_dim)
            throw validation_error("SpectralPortrait: eigenvalue count must equal matrix dimension");
    }
};

enum class Verdict { Genuine, Polluting, Undecided };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Genuine: return "Genuine";
        case Verdict::Polluting: return "Polluting";
        default: return "Undecided";
    }
}

struct PollutionFlag {
    cpx point;
    Verdict verdict = Verdict::Undecided;
    std::string evidence;
};

struct LevelData {
    int n = 0;
    std::vector<cpx> eigenvalues_in_K;
    // aligned with the eps_levels passed to the study, outer order preserved
    std::vector<std::pair<double, std::vector<cpx>>> sublevel;
};

struct ConvergenceReport {
    GridSpec K;
    std::vector<LevelData> per_n; // ascending n
    std::map<std::pair<int, int>, double> hausdorff_spectra;          // consecutive (n, n')
    std::map<int, double> hausdorff_spectra_ref;                      // n -> distance to reference
    std::map<std::tuple<double, int, int>, double> hausdorff_pseudo;  // (eps, n, n')
    std::vector<PollutionFlag> pollution_flags;
};

// A truncation family the study driver can resolve at any n. Exactly one of
// the reference callbacks may be set: per-n exact reference (delay oracle,
// symbol lattice) or a window-discretized reference (Toeplitz winding set).
struct OperatorFamily {
    std::string name;
    std::function<ComplexMatrix(int)> assemble;
    std::function<std::vector<cpx>(int)> reference_per_n;
    std::function<std::vector<cpx>(const GridSpec&)> reference_in_window;
};

inline std::vector<cpx> clip_to_window(const std::vector<cpx>& pts, const GridSpec& K) {
    std::vector<cpx> out;
    for (const cpx& z : pts)
        if (K.contains(z)) out.push_back(z);
    return out;
}

inline OperatorFamily delay_family() {
    OperatorFamily fam;
    fam.name = "delay";
    fam.assemble = [](int n) { return assemble(delay_spec(), n); };
    fam.reference_per_n = [](int n) { return delay_spectrum_oracle(n); };
    return fam;
}

inline OperatorFamily toeplitz_family(const ToeplitzSymbol& sym, const PerturbationSpec& pert) {
    OperatorFamily fam;
    fam.name = "toeplitz";
    fam.assemble = [sym, pert](int n) {
        ComplexMatrix m = finite_section(sym, n);
        return apply_perturbation(m, pert);
    };
    fam.reference_in_window = [sym](const GridSpec& K) {
        // Winding-number spectrum of the unperturbed symbol on K's nodes:
        // curve points and nonzero-winding nodes.
        std::vector<cpx> out;
        for (int j = 0; j < K.ny; ++j)
            for (int i = 0; i < K.nx; ++i) {
                SpectrumVerdict v = spectrum_classify(sym, K.node(i, j));
                if (v.kind != SpectrumClass::Resolvent) out.push_back(K.node(i, j));
            }
        return out;
    };
    return fam;
}

inline OperatorFamily pde_family(const SymbolPolynomial& p, const PotentialSpec& b,
                                 std::vector<cpx> discrete_candidates = {}) {
    OperatorFamily fam;
    fam.name = "pde";
    fam.assemble = [p, b](int n) { return assemble_truncation(p, b, n); };
    fam.reference_per_n = [p, discrete_candidates](int n) {
        std::vector<cpx> out = truncated_symbol_spectrum(p, n, n);
        out.insert(out.end(), discrete_candidates.begin(), discrete_candidates.end());
        return out;
    };
    return fam;
}

// Resolve each level, clip to K, and record consecutive-n and reference
// Hausdorff distances. Pairs with an empty clipped side are omitted rather
// than reported, since the distance is undefined there.
inline ConvergenceReport convergence_study(const OperatorFamily& family,
                                           const std::vector<int>& n_list, const GridSpec& K,
                                           const std::vector<double>& eps_levels,
                                           int threads = 0) {
    if (!family.assemble) throw validation_error("convergence_study: family has no assembler");
    if (n_list.size() < 2) throw validation_error("convergence_study: n_list needs length >= 2");
    for (size_t i = 1; i < n_list.size(); ++i)
        if (!(n_list[i] > n_list[i - 1]))
            throw validation_error("convergence_study: n_list must be strictly increasing");
    K.validate();
    for (double e : eps_levels)
        if (!(e > 0)) throw validation_error("convergence_study: eps levels must be positive");

    ConvergenceReport rep;
    rep.K = K;
    for (int n : n_list) {
        ComplexMatrix m = [&] {
            try {
                return family.assemble(n);
            } catch (const validation_error& err) {
                throw validation_error("convergence_study: family '" + family.name +
                                       "' failed at n = " + std::to_string(n) + ": " + err.what());
            }
        }();
        LevelData lvl;
        lvl.n = n;
        lvl.eigenvalues_in_K = clip_to_window(eigenvalues(m), K);
        if (!eps_levels.empty()) {
            PseudospectrumField f = field(m, K, threads);
            for (double e : eps_levels) lvl.sublevel.emplace_back(e, sublevel_points(f, e));
        }
        rep.per_n.push_back(std::move(lvl));
    }

    for (size_t t = 0; t + 1 < rep.per_n.size(); ++t) {
        const LevelData& a = rep.per_n[t];
        const LevelData& b = rep.per_n[t + 1];
        if (!a.eigenvalues_in_K.empty() && !b.eigenvalues_in_K.empty())
            rep.hausdorff_spectra[{a.n, b.n}] =
                hausdorff_distance(a.eigenvalues_in_K, b.eigenvalues_in_K, threads);
        for (size_t e = 0; e < a.sublevel.size(); ++e) {
            const auto& [eps, pa] = a.sublevel[e];
            const auto& pb = b.sublevel[e].second;
            if (!pa.empty() && !pb.empty())
                rep.hausdorff_pseudo[{eps, a.n, b.n}] = hausdorff_distance(pa, pb, threads);
        }
    }

    std::vector<cpx> window_ref;
    if (family.reference_in_window) window_ref = clip_to_window(family.reference_in_window(K), K);
    for (const LevelData& lvl : rep.per_n) {
        std::vector<cpx> ref;
        if (family.reference_per_n) ref = clip_to_window(family.reference_per_n(lvl.n), K);
        else ref = window_ref;
        if (!ref.empty() && !lvl.eigenvalues_in_K.empty())
            rep.hausdorff_spectra_ref[lvl.n] =
                hausdorff_distance(lvl.eigenvalues_in_K, ref, threads);
    }
    return rep;
}

// Reference against which stable clusters are judged.
struct PollutionReference {
    enum class Kind {
        ExplicitPoints,      // cluster genuine iff within tol of a listed point
        ToeplitzNoPollution, // finite sections pollute nowhere: stable => genuine
        PdeCurve             // genuine iff near the symbol curve or a listed candidate
    };
    Kind kind = Kind::ExplicitPoints;
    std::vector<cpx> points;
    double tol = 0.1;
    ToeplitzSymbol symbol;
    SymbolPolynomial pde_symbol;
    double zeta_range = 64.0;
    int curve_samples = 8192;
};

inline PollutionReference explicit_reference(std::vector<cpx> points, double tol) {
    if (!(tol > 0)) throw validation_error("explicit_reference: tol must be positive");
    PollutionReference r;
    r.kind = PollutionReference::Kind::ExplicitPoints;
    r.points = std::move(points);
    r.tol = tol;
    return r;
}

inline PollutionReference toeplitz_no_pollution_reference(const ToeplitzSymbol& sym) {
    sym.validate();
    PollutionReference r;
    r.kind = PollutionReference::Kind::ToeplitzNoPollution;
    r.symbol = sym;
    return r;
}

inline PollutionReference pde_reference(const SymbolPolynomial& p, std::vector<cpx> candidates,
                                        double tol, double zeta_range = 64.0) {
    p.validate();
    if (!(tol > 0)) throw validation_error("pde_reference: tol must be positive");
    PollutionReference r;
    r.kind = PollutionReference::Kind::PdeCurve;
    r.pde_symbol = p;
    r.points = std::move(candidates);
    r.tol = tol;
    r.zeta_range = zeta_range;
    return r;
}

namespace detail {

inline double min_point_distance(cpx z, const std::vector<cpx>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const cpx& p : pts) best = std::min(best, std::abs(z - p));
    return best;
}

struct ClusterChain {
    std::vector<cpx> points; // one per level, coarse to fine
    bool complete = false;   // matched at every level
    bool stable = false;     // complete with shrinking drift
};

// Greedy nearest-neighbor chains seeded at the coarsest level. Each finer
// eigenvalue is claimed at most once; seeds are processed in (re, im) order
// so the matching is deterministic.
inline std::vector<ClusterChain> build_chains(const std::vector<LevelData>& per_n, double radius) {
    std::vector<ClusterChain> chains;
    if (per_n.empty()) return chains;
    std::vector<cpx> seeds = per_n.front().eigenvalues_in_K;
    std::sort(seeds.begin(), seeds.end(), complex_less);
    std::vector<std::vector<bool>> claimed(per_n.size());
    for (size_t l = 0; l < per_n.size(); ++l)
        claimed[l].assign(per_n[l].eigenvalues_in_K.size(), false);

    for (const cpx& seed : seeds) {
        ClusterChain chain;
        chain.points.push_back(seed);
        bool broken = false;
        for (size_t l = 1; l < per_n.size(); ++l) {
            const std::vector<cpx>& cand = per_n[l].eigenvalues_in_K;
            long best = -1;
            double best_d = radius;
            for (size_t i = 0; i < cand.size(); ++i) {
                if (claimed[l][i]) continue;
                double d = std::abs(cand[i] - chain.points.back());
                if (d <= best_d) {
                    // ties resolved toward the (re, im)-smaller candidate
                    if (d < best_d || best < 0 || complex_less(cand[i], cand[best])) {
                        best = static_cast<long>(i);
                        best_d = d;
                    }
                }
            }
            if (best < 0) { broken = true; break; }
            claimed[l][static_cast<size_t>(best)] = true;
            chain.points.push_back(cand[static_cast<size_t>(best)]);
        }
        chain.complete = !broken;
        if (chain.complete) {
            std::vector<double> drift;
            for (size_t i = 0; i + 1 < chain.points.size(); ++i)
                drift.push_back(std::abs(chain.points[i + 1] - chain.points[i]));
            // Finite surrogate for "converging cluster": the last hop is no
            // larger than the first, or already small against the radius.
            chain.stable = drift.size() < 2 || drift.back() <= drift.front() + 1e-12 ||
                           drift.back() <= 0.25 * radius;
        }
        chains.push_back(std::move(chain));
    }
    return chains;
}

} // namespace detail

// Match stable eigenvalue clusters against a reference. Unstable or broken
// chains stay Undecided; a stable cluster gets exactly one verdict.
inline ConvergenceReport classify_pollution(ConvergenceReport report,
                                            const PollutionReference& reference) {
    if (report.per_n.size() < 2)
        throw validation_error("classify_pollution: report needs at least two truncation levels");
    const double radius = 0.05 * report.K.diameter();

    std::vector<cpx> curve;
    if (reference.kind == PollutionReference::Kind::PdeCurve)
        curve = essential_curve(reference.pde_symbol, reference.zeta_range, reference.curve_samples);

    report.pollution_flags.clear();
    for (const detail::ClusterChain& chain : detail::build_chains(report.per_n, radius)) {
        PollutionFlag flag;
        flag.point = chain.points.back();
        std::ostringstream ev;
        ev << "chain over " << chain.points.size() << "/" << report.per_n.size() << " levels";
        if (!chain.complete) {
            flag.verdict = Verdict::Undecided;
            ev << "; broken before the finest level";
        } else if (!chain.stable) {
            flag.verdict = Verdict::Undecided;
            ev << "; drift not shrinking";
        } else {
            switch (reference.kind) {
                case PollutionReference::Kind::ExplicitPoints: {
                    double d = detail::min_point_distance(flag.point, reference.points);
                    flag.verdict = d <= reference.tol ? Verdict::Genuine : Verdict::Polluting;
                    ev << "; distance to reference set " << d;
                    break;
                }
                case PollutionReference::Kind::ToeplitzNoPollution: {
                    SpectrumVerdict v = spectrum_classify(reference.symbol, flag.point);
                    flag.verdict = Verdict::Genuine;
                    if (v.kind == SpectrumClass::Resolvent)
                        ev << "; winding 0: stable cluster, pollution-free family";
                    else if (v.kind == SpectrumClass::OnCurve)
                        ev << "; on the symbol curve";
                    else
                        ev << "; winding " << v.winding;
                    break;
                }
                case PollutionReference::Kind::PdeCurve: {
                    double dc = distance_to_polyline(flag.point, curve);
                    double dp = detail::min_point_distance(flag.point, reference.points);
                    double d = std::min(dc, dp);
                    flag.verdict = d <= reference.tol ? Verdict::Genuine : Verdict::Polluting;
                    ev << "; distance to symbol curve " << dc << ", to candidates " << dp;
                    break;
                }
            }
        }
        flag.evidence = ev.str();
        report.pollution_flags.push_back(std::move(flag));
    }
    return report;
}

} // namespace speclab
