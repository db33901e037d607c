// speclab: spectra and pseudospectra of structured non-selfadjoint operators.
//
// Subcommands assemble truncations, sample resolvent-norm fields, extract
// contours, run convergence studies, and emit JSON/CSV/SVG files.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <speclab/speclab.hpp>

using namespace speclab;
using nlohmann::json;

namespace {

struct CommonOpts {
    int n = 0; // 0: subcommand default
    std::vector<int> n_list;
    std::vector<double> grid6;
    std::vector<double> eps;
    std::string out;
    std::string format = "json";
    int threads = 0;
    long seed = 0;
    std::string config_path;

    CLI::Option* n_opt = nullptr;
    CLI::Option* n_list_opt = nullptr;
    CLI::Option* grid_opt = nullptr;
    CLI::Option* eps_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* format_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
    CLI::Option* seed_opt = nullptr;

    json config; // loaded after parse when --config was given
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    c.n_opt = cmd->add_option("--n", c.n, "Truncation parameter");
    c.n_list_opt = cmd->add_option("--n-list", c.n_list, "Truncation parameters for studies")
                       ->delimiter(',');
    c.grid_opt = cmd->add_option("--grid", c.grid6, "Grid as x0,x1,y0,y1,nx,ny")
                     ->delimiter(',')
                     ->expected(6);
    c.eps_opt = cmd->add_option("--eps", c.eps, "Pseudospectrum levels e1,e2,...")->delimiter(',');
    c.out_opt = cmd->add_option("--out", c.out, "Output path");
    c.format_opt = cmd->add_option("--format", c.format, "Output format")
                       ->check(CLI::IsMember({"json", "csv", "svg"}));
    c.threads_opt = cmd->add_option("--threads", c.threads, "Worker threads (0: hardware)")
                        ->check(CLI::NonNegativeNumber);
    c.seed_opt = cmd->add_option("--seed", c.seed, "Seed recorded for fixture runs");
    cmd->add_option("--config", c.config_path, "JSON config mirroring the flags");
}

// Flags win over config; config wins over defaults.
void merge_config(CommonOpts& c) {
    if (c.config_path.empty()) return;
    c.config = load_json(c.config_path);
    const json& j = c.config;
    if (!j.is_object()) throw validation_error("config: expected a JSON object");
    if (c.n_opt->count() == 0 && j.contains("n")) c.n = j["n"].get<int>();
    if (c.n_list_opt->count() == 0 && j.contains("n_list"))
        c.n_list = j["n_list"].get<std::vector<int>>();
    if (c.grid_opt->count() == 0 && j.contains("grid")) {
        const json& g = j["grid"];
        if (g.is_array()) {
            c.grid6 = g.get<std::vector<double>>();
        } else if (g.is_object()) {
            c.grid6 = {g.at("x0").get<double>(), g.at("x1").get<double>(),
                       g.at("y0").get<double>(), g.at("y1").get<double>(),
                       g.at("nx").get<double>(), g.at("ny").get<double>()};
        } else {
            throw validation_error("config: grid must be an array or object");
        }
    }
    if (c.eps_opt->count() == 0 && j.contains("eps")) c.eps = j["eps"].get<std::vector<double>>();
    if (c.out_opt->count() == 0 && j.contains("out")) c.out = j["out"].get<std::string>();
    if (c.format_opt->count() == 0 && j.contains("format")) {
        c.format = j["format"].get<std::string>();
        if (c.format != "json" && c.format != "csv" && c.format != "svg")
            throw validation_error("config: format must be json, csv, or svg");
    }
    if (c.threads_opt->count() == 0 && j.contains("threads")) c.threads = j["threads"].get<int>();
    if (c.seed_opt->count() == 0 && j.contains("seed")) c.seed = j["seed"].get<long>();
}

int resolve_threads(const CommonOpts& c) {
    if (c.threads_opt->count() > 0 || c.config.contains("threads")) return c.threads;
    if (const char* env = std::getenv("SPECLAB_THREADS")) {
        try {
            size_t used = 0;
            int v = std::stoi(env, &used);
            if (used != std::string(env).size() || v < 0) throw std::invalid_argument(env);
            return v;
        } catch (const std::exception&) {
            throw validation_error("SPECLAB_THREADS must be a non-negative integer");
        }
    }
    return 0;
}

GridSpec grid_from_values(const std::vector<double>& v) {
    if (v.size() != 6) throw validation_error("grid: expected x0,x1,y0,y1,nx,ny");
    GridSpec g{v[0], v[1], v[2], v[3], static_cast<int>(v[4]), static_cast<int>(v[5])};
    if (g.nx != v[4] || g.ny != v[5]) throw validation_error("grid: nx and ny must be integers");
    g.validate();
    return g;
}

GridSpec pick_grid(const CommonOpts& c, const GridSpec& fallback) {
    if (!c.grid6.empty()) return grid_from_values(c.grid6);
    return fallback;
}

// Contour extraction wants strictly decreasing positive levels.
std::vector<double> normalize_eps(std::vector<double> eps) {
    for (double e : eps)
        if (!(e > 0)) throw validation_error("eps levels must be positive");
    std::sort(eps.begin(), eps.end(), std::greater<double>());
    eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
    return eps;
}

std::string output_path(const CommonOpts& c, const std::string& stem) {
    if (!c.out.empty()) return c.out;
    return "speclab-" + stem + "." + c.format;
}

GridSpec padded_curve_grid(const SymbolCurve& curve, int nx, int ny) {
    auto [lo, hi] = curve.bounding_box();
    double pad_x = 0.1 * std::max(hi.real() - lo.real(), 1.0);
    double pad_y = 0.1 * std::max(hi.imag() - lo.imag(), 1.0);
    return GridSpec{lo.real() - pad_x, hi.real() + pad_x, lo.imag() - pad_y, hi.imag() + pad_y,
                    nx, ny};
}

SpectralPortrait make_portrait(const ComplexMatrix& m, int n, const GridSpec& grid,
                               const std::vector<double>& eps, int threads, std::string source,
                               long seed) {
    SpectralPortrait p;
    p.n = n;
    p.source = std::move(source);
    p.eigenvalues = eigenvalues(m);
    p.field = field(m, grid, threads);
    p.field->meta["seed"] = std::to_string(seed);
    if (!eps.empty()) p.contour_sets = contours(*p.field, eps);
    return p;
}

void emit_portrait(const SpectralPortrait& p, const CommonOpts& c, const std::string& stem,
                   const std::vector<cpx>& reference_curve = {}) {
    const std::string path = output_path(c, stem);
    if (c.format == "json") emit_json(portrait_to_json(p), path);
    else if (c.format == "csv") emit_csv(*p.field, path);
    else emit_svg(p, path, reference_curve);
    std::cout << "wrote " << path << "\n";
}

void emit_report(const ConvergenceReport& r, const CommonOpts& c, const std::string& stem) {
    const std::string path = output_path(c, stem);
    if (c.format == "json") emit_json(report_to_json(r), path);
    else if (c.format == "csv") emit_csv(r, path);
    else emit_svg(r, path);
    std::cout << "wrote " << path << "\n";
}

ToeplitzSymbol symbol_from_config(const CommonOpts& c) {
    if (c.config.contains("symbol")) return symbol_from_json(c.config["symbol"]);
    return default_symbol();
}

// "default" (rank-10 diagonal bump), "none", or explicit [i, j, re(, im)] rows.
PerturbationSpec perturbation_from_config(const CommonOpts& c) {
    if (!c.config.contains("perturbation")) return default_perturbation();
    const json& j = c.config["perturbation"];
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "default") return default_perturbation();
        if (s == "none") return PerturbationSpec{};
        throw validation_error("perturbation: expected 'default', 'none', or entry rows");
    }
    if (!j.is_array()) throw validation_error("perturbation: expected 'default', 'none', or entry rows");
    PerturbationSpec s;
    for (const json& row : j) {
        if (!row.is_array() || row.size() < 3 || row.size() > 4)
            throw validation_error("perturbation: rows are [i, j, re] or [i, j, re, im]");
        int i = row[0].get<int>(), k = row[1].get<int>();
        if (i < 1 || k < 1) throw validation_error("perturbation: indices are 1-based");
        s.entries[{i, k}] = cpx(row[2].get<double>(), row.size() == 4 ? row[3].get<double>() : 0.0);
    }
    return s;
}

SymbolPolynomial pde_symbol_from_config(const CommonOpts& c) {
    if (c.config.contains("pde_symbol")) return pde_symbol_from_json(c.config["pde_symbol"]);
    return default_pde_symbol();
}

PotentialSpec potential_from_config(const CommonOpts& c) {
    if (c.config.contains("potential")) return potential_from_json(c.config["potential"]);
    return gauss_sine_potential(20.0);
}

BlockSequenceSpec block_spec_from_config(const CommonOpts& c) {
    if (c.config.contains("block_spec")) return block_spec_from_json(c.config["block_spec"]);
    return example1_spec();
}

int run_toeplitz(CommonOpts& c) {
    merge_config(c);
    const int n = c.n > 0 ? c.n : 100;
    const int threads = resolve_threads(c);
    ToeplitzSymbol sym = symbol_from_config(c);
    PerturbationSpec pert = perturbation_from_config(c);
    SymbolCurve curve = symbol_curve(sym, 4096);
    GridSpec grid = pick_grid(c, padded_curve_grid(curve, 201, 201));
    std::vector<double> eps = normalize_eps(c.eps.empty() ? std::vector<double>{1.0, 0.5} : c.eps);

    ComplexMatrix m = apply_perturbation(finite_section(sym, n), pert);
    std::string source = "toeplitz n=" + std::to_string(n) +
                         (pert.entries.empty() ? "" : " perturbed");
    SpectralPortrait p = make_portrait(m, n, grid, eps, threads, source, c.seed);
    emit_portrait(p, c, "toeplitz", curve.samples);
    return 0;
}

int run_delay(CommonOpts& c) {
    merge_config(c);
    const int n = c.n > 0 ? c.n : 20;
    const int threads = resolve_threads(c);
    GridSpec grid = pick_grid(c, GridSpec{-12, 12, -6, 6, 201, 101});
    std::vector<double> eps = normalize_eps(c.eps.empty() ? std::vector<double>{1.0, 0.5} : c.eps);
    ComplexMatrix m = assemble(delay_spec(), n);
    SpectralPortrait p =
        make_portrait(m, n, grid, eps, threads, "delay n=" + std::to_string(n), c.seed);
    emit_portrait(p, c, "delay");
    return 0;
}

int run_pde(CommonOpts& c, int cutoff_flag, const CLI::Option* cutoff_opt) {
    merge_config(c);
    const int n = c.n > 0 ? c.n : 100;
    int cutoff = cutoff_flag;
    if (cutoff_opt->count() == 0 && c.config.contains("cutoff"))
        cutoff = c.config["cutoff"].get<int>();
    if (cutoff <= 0) cutoff = n;
    const int threads = resolve_threads(c);
    SymbolPolynomial p = pde_symbol_from_config(c);
    PotentialSpec b = potential_from_config(c);
    GridSpec grid = pick_grid(c, GridSpec{-5, 10, -7, 7, 201, 201});
    std::vector<double> eps = normalize_eps(c.eps.empty() ? std::vector<double>{1.0, 0.5} : c.eps);

    ComplexMatrix m = assemble_truncation_cutoff(p, b, n, cutoff, threads);
    std::string source = "pde n=" + std::to_string(n) + " cutoff=" + std::to_string(cutoff);
    SpectralPortrait portrait = make_portrait(m, n, grid, eps, threads, source, c.seed);
    emit_portrait(portrait, c, "pde", essential_curve(p, 64.0, 2048));
    return 0;
}

int run_deriv_demo(CommonOpts& c) {
    merge_config(c);
    const int n = c.n > 0 ? c.n : 50;
    GridSpec grid = pick_grid(c, GridSpec{-1, 1, -1, 1, 21, 21});
    const double eps = c.eps.empty() ? 0.5 : normalize_eps(c.eps).front();
    FirstDerivativeReport rep = first_derivative_demo(n, grid, eps);

    SpectralPortrait p;
    p.n = n;
    p.source = "deriv-demo n=" + std::to_string(n);
    p.field = rep.field;
    p.field->meta["eps"] = fmt17(eps);
    p.field->meta["flagged_count"] = std::to_string(rep.flagged.size());
    p.field->meta["max_abs_re_flagged"] = fmt17(rep.max_abs_re_flagged);
    p.field->meta["flagged_within_strip"] = rep.flagged_within_strip ? "true" : "false";
    p.field->meta["dist_lambda_1"] = fmt17(rep.dist_to_flagged(cpx(1, 0)));
    p.contour_sets = contours(*p.field, {eps});
    emit_portrait(p, c, "deriv-demo");
    return 0;
}

int run_blockdiag(CommonOpts& c, std::string mode, int K_blocks, double threshold, double tol) {
    merge_config(c);
    if (c.config.contains("mode") && mode.empty()) mode = c.config["mode"].get<std::string>();
    if (mode.empty()) mode = "essential";
    if (c.config.contains("K_blocks") && K_blocks == 0) K_blocks = c.config["K_blocks"].get<int>();
    if (K_blocks == 0) K_blocks = 1024;
    if (c.config.contains("threshold") && threshold == 0)
        threshold = c.config["threshold"].get<double>();
    if (threshold == 0) threshold = 1e3;
    if (c.config.contains("tol") && tol == 0) tol = c.config["tol"].get<double>();
    const int threads = resolve_threads(c);
    BlockSequenceSpec spec = block_spec_from_config(c);
    GridSpec grid = pick_grid(c, GridSpec{1, 3, -1, 1, 21, 21});

    LimitSetEstimate est;
    if (mode == "essential") {
        est = essential_limit_estimate(spec, grid, K_blocks, threshold, threads);
    } else if (mode == "eps-near") {
        const double eps = c.eps.empty() ? 0.5 : normalize_eps(c.eps).front();
        est = eps_near_limit_estimate(spec, grid, eps, K_blocks, tol, threads);
    } else {
        throw validation_error("blockdiag: mode must be 'essential' or 'eps-near'");
    }

    const std::string path = output_path(c, "blockdiag");
    if (c.format == "json") {
        json j;
        j["meta"] = {{"kind", "limit-set-estimate"},
                     {"mode", mode},
                     {"block_spec", spec.description},
                     {"K_blocks", est.K_blocks}};
        if (mode == "essential") j["meta"]["threshold"] = threshold;
        else {
            j["meta"]["eps"] = est.eps;
            j["meta"]["tol"] = est.tolerance;
        }
        j["grid"] = {{"x0", grid.x0}, {"x1", grid.x1}, {"y0", grid.y0},
                     {"y1", grid.y1}, {"nx", grid.nx}, {"ny", grid.ny}};
        json flags = json::array();
        for (bool f : est.flagged) flags.push_back(f ? 1 : 0);
        j["flagged"] = std::move(flags);
        json pts = json::array();
        for (const cpx& z : est.flagged_points()) pts.push_back(json::array({z.real(), z.imag()}));
        j["flagged_points"] = std::move(pts);
        emit_json(j, path);
    } else if (c.format == "csv") {
        auto out = detail::open_out(path);
        out << "re,im,flagged\n";
        for (int jj = 0; jj < grid.ny; ++jj)
            for (int ii = 0; ii < grid.nx; ++ii)
                out << fmt17(grid.x(ii)) << "," << fmt17(grid.y(jj)) << ","
                    << (est.flagged[grid.flat(ii, jj)] ? 1 : 0) << "\n";
        if (!out) throw validation_error("emit: write failed for '" + path + "'");
    } else {
        throw validation_error("blockdiag: supported formats are json and csv");
    }
    std::cout << "wrote " << path << "\n";
    return 0;
}

int run_study(CommonOpts& c, std::string family, const CLI::Option* family_opt) {
    merge_config(c);
    if (family_opt->count() == 0 && c.config.contains("family"))
        family = c.config["family"].get<std::string>();
    const int threads = resolve_threads(c);

    OperatorFamily fam;
    PollutionReference ref;
    std::vector<int> n_list = c.n_list;
    GridSpec K;
    std::vector<double> eps = normalize_eps(c.eps);

    if (family == "delay") {
        fam = delay_family();
        if (n_list.empty()) n_list = {5, 10, 20};
        K = pick_grid(c, GridSpec{-10, 10, -10, 10, 101, 101});
        ref = explicit_reference(delay_spectrum_oracle(n_list.back()), 0.1);
    } else if (family == "toeplitz") {
        ToeplitzSymbol sym = symbol_from_config(c);
        fam = toeplitz_family(sym, perturbation_from_config(c));
        if (n_list.empty()) n_list = {50, 100, 200};
        K = pick_grid(c, padded_curve_grid(symbol_curve(sym, 4096), 41, 41));
        ref = toeplitz_no_pollution_reference(sym);
    } else if (family == "pde") {
        SymbolPolynomial p = pde_symbol_from_config(c);
        std::vector<cpx> candidates;
        if (c.config.contains("candidates"))
            for (const json& row : c.config["candidates"])
                candidates.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
        fam = pde_family(p, potential_from_config(c), candidates);
        if (n_list.empty()) n_list = {100, 200};
        K = pick_grid(c, GridSpec{-5, 10, -7, 7, 201, 201});
        if (c.eps_opt->count() == 0 && !c.config.contains("eps")) eps = {1.0};
        ref = pde_reference(p, candidates, 0.1);
    } else {
        throw validation_error("study: family must be 'delay', 'toeplitz', or 'pde'");
    }

    ConvergenceReport rep = convergence_study(fam, n_list, K, eps, threads);
    rep = classify_pollution(rep, ref);
    emit_report(rep, c, "study");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectra and pseudospectra of structured non-selfadjoint operators"};
    app.require_subcommand(1);

    // One option set per subcommand: config merging consults option counts,
    // so the bindings must not be shared.
    CommonOpts co_toeplitz, co_blockdiag, co_delay, co_pde, co_deriv, co_study;
    std::string mode, family = "delay";
    int cutoff = 0, K_blocks = 0;
    double threshold = 0, tol = 0;

    CLI::App* cmd_toeplitz =
        app.add_subcommand("toeplitz", "Finite sections of a banded Toeplitz symbol");
    add_common(cmd_toeplitz, co_toeplitz);

    CLI::App* cmd_blockdiag =
        app.add_subcommand("blockdiag", "Limiting-set estimators for block families");
    add_common(cmd_blockdiag, co_blockdiag);
    cmd_blockdiag->add_option("--mode", mode, "essential | eps-near")
        ->check(CLI::IsMember({"essential", "eps-near"}));
    cmd_blockdiag->add_option("--K-blocks", K_blocks, "Tail window size (default 1024)");
    cmd_blockdiag->add_option("--threshold", threshold, "Divergence threshold (default 1e3)");
    cmd_blockdiag->add_option("--tol", tol, "Near-limit tolerance (default 0.05/eps)");

    CLI::App* cmd_delay = app.add_subcommand("delay", "Block truncations of the delay operator");
    add_common(cmd_delay, co_delay);

    CLI::App* cmd_pde =
        app.add_subcommand("pde", "Fourier truncation of the PDE symbol plus potential");
    add_common(cmd_pde, co_pde);
    const CLI::Option* cutoff_opt =
        cmd_pde->add_option("--cutoff", cutoff, "Frequency cutoff (default n)");

    CLI::App* cmd_deriv =
        app.add_subcommand("deriv-demo", "First-derivative pseudospectra counterexample");
    add_common(cmd_deriv, co_deriv);

    CLI::App* cmd_study =
        app.add_subcommand("study", "Convergence study with pollution classification");
    add_common(cmd_study, co_study);
    const CLI::Option* family_opt =
        cmd_study->add_option("--family", family, "delay | toeplitz | pde")
            ->check(CLI::IsMember({"delay", "toeplitz", "pde"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (cmd_toeplitz->parsed()) return run_toeplitz(co_toeplitz);
        if (cmd_blockdiag->parsed()) return run_blockdiag(co_blockdiag, mode, K_blocks, threshold, tol);
        if (cmd_delay->parsed()) return run_delay(co_delay);
        if (cmd_pde->parsed()) return run_pde(co_pde, cutoff, cutoff_opt);
        if (cmd_deriv->parsed()) return run_deriv_demo(co_deriv);
        if (cmd_study->parsed()) return run_study(co_study, family, family_opt);
        std::cerr << "error: no subcommand selected\n";
        return 2;
    } catch (const accuracy_error& e) {
        std::cerr << "accuracy error: " << e.what() << "\n";
        return 3;
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
