#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "domain.hpp"
#include "field.hpp"
#include "potentials.hpp"

namespace bklab {

using json = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;

// Shortest round-trip decimal form.
inline std::string fmt_num(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row)
    {
        if (row.size() != header.size())
            throw ConfigError("CSV row width does not match the header");
        rows.push_back(std::move(row));
    }

    std::string str() const
    {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i)
                    out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ConfigError("cannot open for writing: " + path.string());
    os << text;
    if (!os)
        throw ConfigError("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline CsvTable parse_csv(const std::string& text)
{
    CsvTable t;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.add(std::move(cells));
        }
    }
    return t;
}

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::optional<double> slope;
};

struct PlotPoint {
    std::string series;
    double x = 0.0;
    double y = 0.0;
};

namespace detail {

inline std::string xml_escape(const std::string& s)
{
    std::string o;
    for (char c : s) {
        switch (c) {
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '&': o += "&amp;"; break;
        case '"': o += "&quot;"; break;
        default: o += c;
        }
    }
    return o;
}

} // namespace detail

// 800 x 600 log10-log10 plot. Every marker carries its exact sample in data-x / data-y so the plot can be
// checked against the CSV it was drawn from.
inline std::string loglog_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<PlotSeries>& series)
{
    constexpr double W = 800, H = 600, left = 90, right = 30, top = 50, bottom = 70;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            xmin = std::min(xmin, std::log10(s.x[i]));
            xmax = std::max(xmax, std::log10(s.x[i]));
            ymin = std::min(ymin, std::log10(s.y[i]));
            ymax = std::max(ymax, std::log10(s.y[i]));
        }
    if (!std::isfinite(xmin)) {
        xmin = ymin = 0.0;
        xmax = ymax = 1.0;
    }
    xmin = std::floor(xmin);
    xmax = std::max(std::ceil(xmax), xmin + 1.0);
    ymin = std::floor(ymin);
    ymax = std::max(std::ceil(ymax), ymin + 1.0);
    auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * (W - left - right); };
    auto py = [&](double ly) { return H - bottom - (ly - ymin) / (ymax - ymin) * (H - top - bottom); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream o;
    o.precision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
    o << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    o << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">" << detail::xml_escape(title) << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\"" << H - top - bottom
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int d = static_cast<int>(xmin); d <= static_cast<int>(xmax); ++d)
        o << "<line x1=\"" << px(d) << "\" y1=\"" << H - bottom << "\" x2=\"" << px(d) << "\" y2=\"" << H - bottom + 6
          << "\" stroke=\"black\"/><text x=\"" << px(d) << "\" y=\"" << H - bottom + 22
          << "\" text-anchor=\"middle\" font-size=\"13\">1e" << d << "</text>\n";
    for (int d = static_cast<int>(ymin); d <= static_cast<int>(ymax); ++d)
        o << "<line x1=\"" << left - 6 << "\" y1=\"" << py(d) << "\" x2=\"" << left << "\" y2=\"" << py(d)
          << "\" stroke=\"black\"/><text x=\"" << left - 10 << "\" y=\"" << py(d) + 4
          << "\" text-anchor=\"end\" font-size=\"13\">1e" << d << "</text>\n";
    o << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 20 << "\" text-anchor=\"middle\" font-size=\"15\">"
      << detail::xml_escape(xlabel) << " (log10)</text>\n";
    o << "<text x=\"22\" y=\"" << (top + H - bottom) / 2 << "\" text-anchor=\"middle\" font-size=\"15\" transform=\"rotate(-90 22 "
      << (top + H - bottom) / 2 << ")\">" << detail::xml_escape(ylabel) << " (log10)</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* c = colors[k % 6];
        std::ostringstream pts;
        pts.precision(6);
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (s.x[i] > 0.0 && s.y[i] > 0.0 && std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                pts << px(std::log10(s.x[i])) << ',' << py(std::log10(s.y[i])) << ' ';
        o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0 && s.y[i] > 0.0 && std::isfinite(s.x[i]) && std::isfinite(s.y[i])))
                continue;
            o << "<circle cx=\"" << px(std::log10(s.x[i])) << "\" cy=\"" << py(std::log10(s.y[i])) << "\" r=\"3.5\" fill=\"" << c
              << "\" data-series=\"" << detail::xml_escape(s.name) << "\" data-x=\"" << fmt_num(s.x[i]) << "\" data-y=\""
              << fmt_num(s.y[i]) << "\"/>\n";
        }
        std::string legend = s.name;
        if (s.slope)
            legend += "  slope = " + fmt_num(std::round(*s.slope * 1e4) / 1e4);
        o << "<text x=\"" << W - right - 10 << "\" y=\"" << top + 20 + 18 * k << "\" text-anchor=\"end\" font-size=\"13\" fill=\"" << c
          << "\">" << detail::xml_escape(legend) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

inline std::vector<PlotPoint> parse_svg_points(const std::string& svg)
{
    static const std::regex re("data-series=\"([^\"]*)\" data-x=\"([^\"]*)\" data-y=\"([^\"]*)\"");
    std::vector<PlotPoint> out;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it)
        out.push_back({(*it)[1].str(), std::stod((*it)[2].str()), std::stod((*it)[3].str())});
    return out;
}

namespace detail {

inline void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what)
{
    if (!j.is_object())
        throw ConfigError(what + " must be a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key()))
            throw ConfigError(what + ": unknown key '" + it.key() + "'");
}

inline cplx json_point(const json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(what + " must be a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline double json_number(const json& j, const char* key, const std::string& what)
{
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError(what + ": numeric '" + key + "' required");
    return j[key].get<double>();
}

inline void check_version(const json& j, const std::string& what)
{
    if (!j.contains("version"))
        throw ConfigError(what + ": missing 'version'");
    if (!j["version"].is_number_integer() || j["version"].get<int>() != kConfigVersion)
        throw ConfigError(what + ": unsupported version");
}

} // namespace detail

inline json parse_json_text(const std::string& text, const std::string& what)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

inline json grid_to_json(const Grid& g) { return json{{"half_width", g.half_width()}, {"n", g.size()}}; }

inline Grid grid_from_json(const json& j)
{
    detail::require_keys(j, {"half_width", "n"}, "grid");
    const double n = detail::json_number(j, "n", "grid");
    if (n != std::floor(n))
        throw ConfigError("grid: 'n' must be an integer");
    return Grid(detail::json_number(j, "half_width", "grid"), static_cast<int>(n));
}

// {"version": 1, "grid": {...}, "shape": {"type": "disk", "center": [x, y], "radius": r}} or
// {"type": "polygon", "vertices": [[x, y], ...]}. The grid may be omitted when a field supplies it; when both
// are present they must agree.
inline Domain domain_from_json(const json& j, const std::optional<Grid>& grid_hint = std::nullopt)
{
    detail::require_keys(j, {"version", "grid", "shape"}, "domain");
    detail::check_version(j, "domain");
    std::optional<Grid> g;
    if (j.contains("grid"))
        g = grid_from_json(j["grid"]);
    if (g && grid_hint && !(*g == *grid_hint))
        throw GridMismatch("domain grid differs from the field grid");
    if (!g)
        g = grid_hint;
    if (!g)
        throw ConfigError("domain: no grid given and none implied by a field");
    if (!j.contains("shape"))
        throw ConfigError("domain: 'shape' required");
    const json& s = j["shape"];
    if (!s.is_object() || !s.contains("type") || !s["type"].is_string())
        throw ConfigError("domain shape needs a string 'type'");
    const std::string type = s["type"];
    if (type == "disk") {
        detail::require_keys(s, {"type", "center", "radius"}, "disk");
        const cplx c = s.contains("center") ? detail::json_point(s["center"], "disk center") : cplx(0.0);
        return Domain(*g, Disk{c, detail::json_number(s, "radius", "disk")});
    }
    if (type == "polygon") {
        detail::require_keys(s, {"type", "vertices"}, "polygon");
        if (!s.contains("vertices") || !s["vertices"].is_array())
            throw ConfigError("polygon: 'vertices' array required");
        Polygon p;
        for (const auto& v : s["vertices"]) p.vertices.push_back(detail::json_point(v, "polygon vertex"));
        return Domain(*g, p);
    }
    throw ConfigError("domain: unknown shape type '" + type + "'");
}

inline json domain_to_json(const Domain& d)
{
    json s;
    if (const auto* disk = std::get_if<Disk>(&d.shape())) {
        s = json{{"type", "disk"}, {"center", {disk->center.real(), disk->center.imag()}}, {"radius", disk->radius}};
    } else {
        json v = json::array();
        for (cplx z : std::get<Polygon>(d.shape()).vertices) v.push_back({z.real(), z.imag()});
        s = json{{"type", "polygon"}, {"vertices", v}};
    }
    return json{{"version", kConfigVersion}, {"grid", grid_to_json(d.grid())}, {"shape", s}};
}

// {"version": 1, "grid": {...}, "terms": [{"type": "bump", "amplitude": a, "center": [x, y], "radius": r},
// {"type": "gaussian", "amplitude": a, "center": [x, y], "width": w}, {"type": "constant", "value": c}]}, summed.
// Amplitudes may be numbers or [re, im] pairs.
inline Field potential_from_json(const json& j, const std::optional<Grid>& grid_hint = std::nullopt)
{
    detail::require_keys(j, {"version", "grid", "terms"}, "potential");
    detail::check_version(j, "potential");
    std::optional<Grid> g;
    if (j.contains("grid"))
        g = grid_from_json(j["grid"]);
    if (g && grid_hint && !(*g == *grid_hint))
        throw GridMismatch("potential grid differs from the domain grid");
    if (!g)
        g = grid_hint;
    if (!g)
        throw ConfigError("potential: no grid given");
    if (!j.contains("terms") || !j["terms"].is_array())
        throw ConfigError("potential: 'terms' array required");
    auto amplitude = [](const json& t, const char* key) {
        if (!t.contains(key))
            throw ConfigError(std::string("potential term: '") + key + "' required");
        return t[key].is_array() ? detail::json_point(t[key], key) : cplx(detail::json_number(t, key, "potential term"));
    };
    Field f(*g);
    for (const json& t : j["terms"]) {
        if (!t.is_object() || !t.contains("type") || !t["type"].is_string())
            throw ConfigError("potential term needs a string 'type'");
        const std::string type = t["type"];
        if (type == "bump") {
            detail::require_keys(t, {"type", "amplitude", "center", "radius"}, "bump");
            const cplx c = t.contains("center") ? detail::json_point(t["center"], "bump center") : cplx(0.0);
            f += bump_field(*g, amplitude(t, "amplitude"), c, detail::json_number(t, "radius", "bump"));
        } else if (type == "gaussian") {
            detail::require_keys(t, {"type", "amplitude", "center", "width"}, "gaussian");
            const cplx c = t.contains("center") ? detail::json_point(t["center"], "gaussian center") : cplx(0.0);
            f += gaussian_field(*g, amplitude(t, "amplitude"), c, detail::json_number(t, "width", "gaussian"));
        } else if (type == "constant") {
            detail::require_keys(t, {"type", "value"}, "constant");
            f += Field(*g, amplitude(t, "value"));
        } else {
            throw ConfigError("potential: unknown term type '" + type + "'");
        }
    }
    return f;
}

// A field file (BKFLD1 header) or a JSON potential description.
inline Field load_potential(const std::filesystem::path& path, const std::optional<Grid>& grid_hint = std::nullopt)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot open potential: " + path.string());
    char magic[6] = {};
    is.read(magic, 6);
    if (is.gcount() == 6 && std::string(magic, 6) == "BKFLD1") {
        Field f = read_field(path.string());
        if (grid_hint && !(f.grid() == *grid_hint))
            throw GridMismatch("field file grid differs from the domain grid: " + path.string());
        return f;
    }
    return potential_from_json(parse_json_text(read_text(path), path.string()), grid_hint);
}

inline Domain load_domain(const std::filesystem::path& path, const std::optional<Grid>& grid_hint = std::nullopt)
{
    return domain_from_json(parse_json_text(read_text(path), path.string()), grid_hint);
}

inline BoundaryTrace trace_from_csv(const CsvTable& t, const Domain& dom)
{
    if (t.header != std::vector<std::string>{"arclength", "re", "im"})
        throw ConfigError("trace CSV needs columns arclength,re,im");
    if (t.rows.size() != dom.nodes().size())
        throw ConfigError("trace length does not match the domain's boundary nodes");
    BoundaryTrace g;
    for (const auto& r : t.rows) g.emplace_back(std::stod(r[1]), std::stod(r[2]));
    return g;
}

inline CsvTable trace_to_csv(const BoundaryTrace& g, const Domain& dom)
{
    if (g.size() != dom.nodes().size())
        throw ConfigError("trace length does not match the domain's boundary nodes");
    CsvTable t{{"arclength", "re", "im"}, {}};
    for (std::size_t i = 0; i < g.size(); ++i)
        t.add({fmt_num(dom.nodes()[i].arclength), fmt_num(g[i].real()), fmt_num(g[i].imag())});
    return t;
}

} // namespace bklab
