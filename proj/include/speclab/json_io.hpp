#pragma once

#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockops.hpp"
#include "errors.hpp"
#include "fourier_pde.hpp"
#include "toeplitz.hpp"

namespace speclab {

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open '" + path + "' for reading");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

namespace detail {

// Accepts a bare number (real) or [re, im].
inline cpx entry_from_json(const nlohmann::json& j, const char* where) {
    if (j.is_number()) return cpx(j.get<double>());
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return cpx(j[0].get<double>(), j[1].get<double>());
    throw validation_error(std::string(where) + ": entry must be a number or [re, im]");
}

inline int key_to_int(const std::string& key, const char* where) {
    try {
        size_t used = 0;
        int v = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw validation_error(std::string(where) + ": key '" + key + "' is not an integer");
    }
}

inline Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j, const char* where) {
    if (!j.is_array() || j.empty())
        throw validation_error(std::string(where) + ": matrix must be a nonempty array of rows");
    const size_t rows = j.size();
    const size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw validation_error(std::string(where) + ": matrix rows must be nonempty arrays");
    Eigen::MatrixXcd m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw validation_error(std::string(where) + ": ragged matrix rows");
        for (size_t c = 0; c < cols; ++c) m(r, c) = entry_from_json(j[r][c], where);
    }
    return m;
}

} // namespace detail

// {"coeffs": {"-3": [-7, 0], "2": [15, 0], ...}} mapping offset -> entry.
inline ToeplitzSymbol symbol_from_json(const nlohmann::json& j) {
    if (!j.contains("coeffs") || !j["coeffs"].is_object())
        throw validation_error("symbol: expected object with a 'coeffs' map");
    ToeplitzSymbol sym;
    for (const auto& [key, val] : j["coeffs"].items())
        sym.coeffs[detail::key_to_int(key, "symbol coeffs")] =
            detail::entry_from_json(val, "symbol coeffs");
    sym.validate();
    return sym;
}

// {"2": [1, 0], "1": [0, -2], ...} mapping degree -> coefficient.
inline SymbolPolynomial pde_symbol_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.empty())
        throw validation_error("pde symbol: expected a nonempty degree -> coefficient map");
    int order = 0;
    for (const auto& [key, val] : j.items()) {
        (void)val;
        int d = detail::key_to_int(key, "pde symbol");
        if (d < 0) throw validation_error("pde symbol: negative degree");
        order = std::max(order, d);
    }
    SymbolPolynomial p;
    p.order = order;
    p.coeffs.assign(order + 1, cpx(0.0));
    for (const auto& [key, val] : j.items())
        p.coeffs[detail::key_to_int(key, "pde symbol")] = detail::entry_from_json(val, "pde symbol");
    p.validate();
    return p;
}

// {"builtin": "gauss-sine", "amplitude": 20} or
// {"samples": [[x, re, im] ...]} with spacing <= 0.01; samples interpolate
// linearly and the potential is zero outside the tabulated range.
inline PotentialSpec potential_from_json(const nlohmann::json& j) {
    if (j.contains("builtin")) {
        const std::string name = j["builtin"].get<std::string>();
        if (name != "gauss-sine")
            throw validation_error("potential: unknown builtin '" + name + "'");
        double amplitude = j.value("amplitude", 20.0);
        if (!std::isfinite(amplitude)) throw validation_error("potential: non-finite amplitude");
        return gauss_sine_potential(amplitude);
    }
    if (!j.contains("samples"))
        throw validation_error("potential: expected 'builtin' or 'samples'");
    const nlohmann::json& s = j["samples"];
    if (!s.is_array() || s.size() < 2)
        throw validation_error("potential samples: need at least two samples");
    auto xs = std::make_shared<std::vector<double>>();
    auto vs = std::make_shared<std::vector<cpx>>();
    for (const nlohmann::json& row : s) {
        if (!row.is_array() || (row.size() != 2 && row.size() != 3))
            throw validation_error("potential samples: rows must be [x, re] or [x, re, im]");
        xs->push_back(row[0].get<double>());
        vs->emplace_back(row[1].get<double>(), row.size() == 3 ? row[2].get<double>() : 0.0);
    }
    for (size_t i = 1; i < xs->size(); ++i) {
        double h = (*xs)[i] - (*xs)[i - 1];
        if (!(h > 0)) throw validation_error("potential samples: x must be strictly increasing");
        if (h > 0.01 + 1e-12)
            throw validation_error("potential samples: spacing must be <= 0.01");
    }
    PotentialSpec b;
    b.decay_radius = std::max(std::abs(xs->front()), std::abs(xs->back()));
    b.evaluator = [xs, vs](double x) -> cpx {
        if (x <= xs->front() || x >= xs->back()) return cpx(0.0);
        auto it = std::upper_bound(xs->begin(), xs->end(), x);
        size_t hi = static_cast<size_t>(it - xs->begin());
        double t = (x - (*xs)[hi - 1]) / ((*xs)[hi] - (*xs)[hi - 1]);
        return (*vs)[hi - 1] * (1.0 - t) + (*vs)[hi] * t;
    };
    return b;
}

// {"builtin": "delay"} | {"builtin": "example1", "d": 2.0} or explicit tables:
// {"index_kind": "natural" | "integer", "blocks": {"1": [[...]...], ...},
//  "couplings": {...}, "tail": "repeat-last"}.
inline BlockSequenceSpec block_spec_from_json(const nlohmann::json& j) {
    if (j.contains("builtin")) {
        const std::string name = j["builtin"].get<std::string>();
        if (name == "delay") return delay_spec();
        if (name == "example1") {
            Example1Params p;
            p.d = j.value("d", p.d);
            if (!std::isfinite(p.d)) throw validation_error("block spec: non-finite d");
            return example1_spec(p);
        }
        throw validation_error("block spec: unknown builtin '" + name + "'");
    }
    if (!j.contains("blocks"))
        throw validation_error("block spec: expected 'builtin' or explicit 'blocks'");
    const std::string tail = j.value("tail", std::string("repeat-last"));
    if (tail == "formula-unsupported")
        throw validation_error("block spec: tail rule 'formula-unsupported' cannot be assembled");
    if (tail != "repeat-last")
        throw validation_error("block spec: unknown tail rule '" + tail + "'");
    const std::string ik = j.value("index_kind", std::string("natural"));
    BlockSequenceSpec spec;
    if (ik == "natural") spec.index_kind = IndexKind::NaturalIndexed;
    else if (ik == "integer") spec.index_kind = IndexKind::IntegerIndexed;
    else throw validation_error("block spec: index_kind must be 'natural' or 'integer'");

    auto blocks = std::make_shared<std::map<int, Eigen::MatrixXcd>>();
    for (const auto& [key, val] : j["blocks"].items())
        (*blocks)[detail::key_to_int(key, "block spec blocks")] =
            detail::matrix_from_json(val, "block spec blocks");
    if (blocks->empty()) throw validation_error("block spec: empty block table");
    const Eigen::Index dim = blocks->begin()->second.rows();
    for (const auto& [k, m] : *blocks) {
        (void)k;
        if (m.rows() != dim || m.cols() != dim)
            throw validation_error("block spec: all blocks must be square with a common dimension");
    }
    auto couplings = std::make_shared<std::map<int, Eigen::MatrixXcd>>();
    if (j.contains("couplings"))
        for (const auto& [key, val] : j["couplings"].items()) {
            Eigen::MatrixXcd m = detail::matrix_from_json(val, "block spec couplings");
            if (m.rows() != dim || m.cols() != dim)
                throw validation_error("block spec: coupling dimension mismatch");
            (*couplings)[detail::key_to_int(key, "block spec couplings")] = m;
        }

    // repeat-last: indices beyond the tabulated range reuse the nearest
    // tabulated entry on that side.
    auto clamp_lookup = [](const std::map<int, Eigen::MatrixXcd>& table, int k) {
        auto it = table.find(k);
        if (it != table.end()) return it->second;
        if (k < table.begin()->first) return table.begin()->second;
        return table.rbegin()->second;
    };
    spec.block = [blocks, clamp_lookup](int k) { return clamp_lookup(*blocks, k); };
    spec.coupling = [couplings, clamp_lookup, dim](int k) -> Eigen::MatrixXcd {
        if (couplings->empty()) return Eigen::MatrixXcd::Zero(dim, dim);
        return clamp_lookup(*couplings, k);
    };
    spec.description = "tabulated blocks (tail: repeat-last)";
    return spec;
}

} // namespace speclab
