#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "pseudo.hpp"
#include "study.hpp"

namespace speclab {

using nlohmann::json;

// All hand-formatted numbers carry 17 significant digits so every double
// round-trips; JSON numbers use the serializer's shortest lossless form.
inline std::string fmt17(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline json point_json(cpx z) { return json::array({z.real(), z.imag()}); }

inline json grid_json(const GridSpec& g) {
    return json{{"x0", g.x0}, {"x1", g.x1}, {"y0", g.y0}, {"y1", g.y1},
                {"nx", g.nx}, {"ny", g.ny}};
}

inline GridSpec grid_from_json(const json& j) {
    GridSpec g;
    g.x0 = j.at("x0").get<double>();
    g.x1 = j.at("x1").get<double>();
    g.y0 = j.at("y0").get<double>();
    g.y1 = j.at("y1").get<double>();
    g.nx = j.at("nx").get<int>();
    g.ny = j.at("ny").get<int>();
    g.validate();
    return g;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("emit: cannot open '" + path + "' for writing");
    return out;
}

} // namespace detail

inline json portrait_to_json(const SpectralPortrait& p) {
    p.validate();
    json j;
    j["meta"] = json::object();
    j["meta"]["source"] = p.source;
    // JSON has no infinity: infinite resolvent norms are emitted as null.
    j["meta"]["resnorm_infinity"] = "null";
    if (p.field)
        for (const auto& [k, v] : p.field->meta) j["meta"][k] = v;
    j["n"] = p.n;
    json eig = json::array();
    for (const cpx& z : p.eigenvalues) eig.push_back(detail::point_json(z));
    j["eigenvalues"] = std::move(eig);
    if (p.field) {
        j["grid"] = detail::grid_json(p.field->grid);
        json rn = json::array();
        for (double v : p.field->values) {
            if (std::isinf(v)) rn.push_back(nullptr);
            else rn.push_back(v);
        }
        j["resnorm"] = std::move(rn);
    } else {
        j["grid"] = nullptr;
        j["resnorm"] = json::array();
    }
    json contours = json::array();
    for (const ContourSet& cs : p.contour_sets) {
        json polys = json::array();
        for (const std::vector<cpx>& poly : cs.polylines) {
            json pj = json::array();
            for (const cpx& z : poly) pj.push_back(detail::point_json(z));
            polys.push_back(std::move(pj));
        }
        contours.push_back(json{{"eps", cs.eps}, {"polylines", std::move(polys)}});
    }
    j["contours"] = std::move(contours);
    return j;
}

inline SpectralPortrait portrait_from_json(const json& j) {
    SpectralPortrait p;
    p.n = j.at("n").get<int>();
    if (j.contains("meta") && j["meta"].contains("source"))
        p.source = j["meta"]["source"].get<std::string>();
    for (const json& e : j.at("eigenvalues"))
        p.eigenvalues.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    if (!j.at("grid").is_null()) {
        PseudospectrumField f;
        f.grid = detail::grid_from_json(j["grid"]);
        for (const json& v : j.at("resnorm"))
            f.values.push_back(v.is_null() ? std::numeric_limits<double>::infinity()
                                           : v.get<double>());
        if (f.values.size() != static_cast<size_t>(f.grid.node_count()))
            throw validation_error("portrait_from_json: resnorm length does not match grid");
        f.matrix_dim = static_cast<int>(p.eigenvalues.size());
        p.field = std::move(f);
    }
    for (const json& cj : j.at("contours")) {
        ContourSet cs;
        cs.eps = cj.at("eps").get<double>();
        for (const json& pj : cj.at("polylines")) {
            std::vector<cpx> poly;
            for (const json& e : pj) poly.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
            cs.polylines.push_back(std::move(poly));
        }
        p.contour_sets.push_back(std::move(cs));
    }
    return p;
}

inline json report_to_json(const ConvergenceReport& r) {
    json j;
    j["meta"] = json::object();
    j["meta"]["kind"] = "convergence-report";
    j["grid"] = detail::grid_json(r.K);
    json per_n = json::array();
    for (const LevelData& lvl : r.per_n) {
        json lj;
        lj["n"] = lvl.n;
        json eig = json::array();
        for (const cpx& z : lvl.eigenvalues_in_K) eig.push_back(detail::point_json(z));
        lj["eigenvalues"] = std::move(eig);
        json sub = json::array();
        for (const auto& [eps, pts] : lvl.sublevel) {
            json pj = json::array();
            for (const cpx& z : pts) pj.push_back(detail::point_json(z));
            sub.push_back(json{{"eps", eps}, {"points", std::move(pj)}});
        }
        lj["sublevel"] = std::move(sub);
        per_n.push_back(std::move(lj));
    }
    j["per_n"] = std::move(per_n);
    json hs = json::array();
    for (const auto& [key, d] : r.hausdorff_spectra)
        hs.push_back(json{{"n", key.first}, {"n2", key.second}, {"distance", d}});
    j["hausdorff_spectra"] = std::move(hs);
    json hr = json::array();
    for (const auto& [n, d] : r.hausdorff_spectra_ref)
        hr.push_back(json{{"n", n}, {"distance", d}});
    j["hausdorff_spectra_ref"] = std::move(hr);
    json hp = json::array();
    for (const auto& [key, d] : r.hausdorff_pseudo)
        hp.push_back(json{{"eps", std::get<0>(key)}, {"n", std::get<1>(key)},
                          {"n2", std::get<2>(key)}, {"distance", d}});
    j["hausdorff_pseudo"] = std::move(hp);
    json flags = json::array();
    for (const PollutionFlag& f : r.pollution_flags)
        flags.push_back(json{{"point", detail::point_json(f.point)},
                             {"verdict", verdict_name(f.verdict)},
                             {"evidence", f.evidence}});
    j["pollution_flags"] = std::move(flags);
    return j;
}

inline void emit_json(const json& j, const std::string& path) {
    auto out = detail::open_out(path);
    out << j.dump(2) << "\n";
    if (!out) throw validation_error("emit: write failed for '" + path + "'");
}

// CSV field dump: one row per grid node, row-major, infinite norms as "inf".
inline void emit_csv(const PseudospectrumField& f, const std::string& path) {
    auto out = detail::open_out(path);
    out << "re,im,resnorm\n";
    for (int jrow = 0; jrow < f.grid.ny; ++jrow)
        for (int i = 0; i < f.grid.nx; ++i) {
            cpx z = f.grid.node(i, jrow);
            out << fmt17(z.real()) << "," << fmt17(z.imag()) << ","
                << fmt17(f.at(i, jrow)) << "\n";
        }
    if (!out) throw validation_error("emit: write failed for '" + path + "'");
}

inline void emit_csv(const ConvergenceReport& r, const std::string& path) {
    auto out = detail::open_out(path);
    out << "kind,eps,n,n2,distance\n";
    for (const auto& [key, d] : r.hausdorff_spectra)
        out << "spectra,," << key.first << "," << key.second << "," << fmt17(d) << "\n";
    for (const auto& [n, d] : r.hausdorff_spectra_ref)
        out << "spectra-ref,," << n << ",," << fmt17(d) << "\n";
    for (const auto& [key, d] : r.hausdorff_pseudo)
        out << "pseudo," << fmt17(std::get<0>(key)) << "," << std::get<1>(key) << ","
            << std::get<2>(key) << "," << fmt17(d) << "\n";
    if (!out) throw validation_error("emit: write failed for '" + path + "'");
}

namespace detail {

struct SvgMapper {
    GridSpec box;
    double w = 720, h = 0, mx = 60, my = 40;
    SvgMapper(const GridSpec& b) : box(b) {
        h = w * (b.y1 - b.y0) / (b.x1 - b.x0);
        h = std::clamp(h, 160.0, 1400.0);
    }
    double sx(double x) const { return mx + (x - box.x0) / (box.x1 - box.x0) * w; }
    double sy(double y) const { return my + (box.y1 - y) / (box.y1 - box.y0) * h; }
    double width() const { return w + 2 * mx; }
    double height() const { return h + 2 * my; }
};

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string svg_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline void svg_axes(std::ofstream& out, const SvgMapper& m) {
    out << "<rect x=\"" << svg_num(m.mx) << "\" y=\"" << svg_num(m.my) << "\" width=\""
        << svg_num(m.w) << "\" height=\"" << svg_num(m.h)
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    const int ticks = 6;
    for (int t = 0; t <= ticks; ++t) {
        double x = m.box.x0 + (m.box.x1 - m.box.x0) * t / ticks;
        double y = m.box.y0 + (m.box.y1 - m.box.y0) * t / ticks;
        out << "<line x1=\"" << svg_num(m.sx(x)) << "\" y1=\"" << svg_num(m.my + m.h)
            << "\" x2=\"" << svg_num(m.sx(x)) << "\" y2=\"" << svg_num(m.my + m.h + 5)
            << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << svg_num(m.sx(x)) << "\" y=\"" << svg_num(m.my + m.h + 18)
            << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\">"
            << svg_label(x) << "</text>\n";
        out << "<line x1=\"" << svg_num(m.mx - 5) << "\" y1=\"" << svg_num(m.sy(y))
            << "\" x2=\"" << svg_num(m.mx) << "\" y2=\"" << svg_num(m.sy(y))
            << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << svg_num(m.mx - 8) << "\" y=\"" << svg_num(m.sy(y) + 4)
            << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\">"
            << svg_label(y) << "</text>\n";
    }
    out << "<text x=\"" << svg_num(m.mx + m.w / 2) << "\" y=\"" << svg_num(m.my + m.h + 34)
        << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\">Re</text>\n";
    out << "<text x=\"" << svg_num(18.0) << "\" y=\"" << svg_num(m.my + m.h / 2)
        << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << svg_num(m.my + m.h / 2) << ")\">Im</text>\n";
}

inline void svg_polyline_path(std::ofstream& out, const SvgMapper& m,
                              const std::vector<std::vector<cpx>>& polys,
                              const std::string& style) {
    if (polys.empty()) return;
    out << "<path d=\"";
    for (const std::vector<cpx>& poly : polys) {
        for (size_t t = 0; t < poly.size(); ++t)
            out << (t == 0 ? "M" : "L") << svg_num(m.sx(poly[t].real())) << " "
                << svg_num(m.sy(poly[t].imag()));
        out << "Z";
    }
    out << "\" " << style << "/>\n";
}

} // namespace detail

// Grey sublevel fills (lighter = larger eps), eigenvalue dots, optional
// reference curve, annotated axes. Nested regions render correctly through
// the even-odd fill rule.
inline void emit_svg(const SpectralPortrait& p, const std::string& path,
                     const std::vector<cpx>& reference_curve = {}) {
    p.validate();
    GridSpec box;
    if (p.field) box = p.field->grid;
    else {
        if (p.eigenvalues.empty())
            throw validation_error("emit_svg: portrait has neither field nor eigenvalues");
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (const cpx& z : p.eigenvalues) {
            x0 = std::min(x0, z.real());
            x1 = std::max(x1, z.real());
            y0 = std::min(y0, z.imag());
            y1 = std::max(y1, z.imag());
        }
        double pad = 0.1 * std::max({x1 - x0, y1 - y0, 1.0});
        box = GridSpec{x0 - pad, x1 + pad, y0 - pad, y1 + pad, 2, 2};
    }
    detail::SvgMapper m(box);
    auto out = detail::open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::svg_num(m.width())
        << "\" height=\"" << detail::svg_num(m.height()) << "\" viewBox=\"0 0 "
        << detail::svg_num(m.width()) << " " << detail::svg_num(m.height()) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    const size_t k = p.contour_sets.size();
    for (size_t c = 0; c < k; ++c) {
        double shade = k > 1 ? 0.85 - 0.4 * static_cast<double>(c) / (k - 1) : 0.75;
        int g = static_cast<int>(shade * 255);
        char color[16];
        std::snprintf(color, sizeof color, "#%02x%02x%02x", g, g, g);
        detail::svg_polyline_path(out, m, p.contour_sets[c].polylines,
                                  std::string("fill=\"") + color +
                                      "\" fill-rule=\"evenodd\" stroke=\"#555\" stroke-width=\"0.6\"");
    }
    if (!reference_curve.empty()) {
        out << "<path d=\"";
        for (size_t t = 0; t < reference_curve.size(); ++t)
            out << (t == 0 ? "M" : "L") << detail::svg_num(m.sx(reference_curve[t].real())) << " "
                << detail::svg_num(m.sy(reference_curve[t].imag()));
        out << "\" fill=\"none\" stroke=\"#c03030\" stroke-width=\"1.2\"/>\n";
    }
    for (const cpx& z : p.eigenvalues)
        if (box.contains(z))
            out << "<circle cx=\"" << detail::svg_num(m.sx(z.real())) << "\" cy=\""
                << detail::svg_num(m.sy(z.imag())) << "\" r=\"2\" fill=\"#2040c0\"/>\n";
    detail::svg_axes(out, m);
    // Legend: eps levels top-right.
    double ly = m.my + 14;
    for (const ContourSet& cs : p.contour_sets) {
        out << "<text x=\"" << detail::svg_num(m.mx + m.w - 8) << "\" y=\"" << detail::svg_num(ly)
            << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\">eps = "
            << detail::svg_label(cs.eps) << "</text>\n";
        ly += 14;
    }
    out << "</svg>\n";
    if (!out) throw validation_error("emit: write failed for '" + path + "'");
}

inline void emit_svg(const ConvergenceReport& r, const std::string& path) {
    detail::SvgMapper m(r.K);
    auto out = detail::open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::svg_num(m.width())
        << "\" height=\"" << detail::svg_num(m.height()) << "\" viewBox=\"0 0 "
        << detail::svg_num(m.width()) << " " << detail::svg_num(m.height()) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!r.per_n.empty())
        for (const cpx& z : r.per_n.back().eigenvalues_in_K)
            out << "<circle cx=\"" << detail::svg_num(m.sx(z.real())) << "\" cy=\""
                << detail::svg_num(m.sy(z.imag())) << "\" r=\"2\" fill=\"#2040c0\"/>\n";
    for (const PollutionFlag& f : r.pollution_flags) {
        const char* color = f.verdict == Verdict::Genuine ? "#208020"
                            : f.verdict == Verdict::Polluting ? "#c03030" : "#b0a020";
        out << "<circle cx=\"" << detail::svg_num(m.sx(f.point.real())) << "\" cy=\""
            << detail::svg_num(m.sy(f.point.imag())) << "\" r=\"5\" fill=\"none\" stroke=\""
            << color << "\" stroke-width=\"1.5\"/>\n";
    }
    detail::svg_axes(out, m);
    out << "</svg>\n";
    if (!out) throw validation_error("emit: write failed for '" + path + "'");
}

} // namespace speclab
