#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "bvcert/common.hpp"
#include "bvcert/space.hpp"

namespace bvcert {

using json = nlohmann::ordered_json;

/// A loaded input document: the space plus any named functions and measures
/// shipped alongside it.
struct space_document {
    metric_measure_space space;
    std::map<std::string, scalar_field> functions;
    std::map<std::string, point_measure> measures;
};

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw input_error("write failed: " + path);
}

inline json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw input_error(what + ": " + e.what());
    }
}

inline json parse_json_file(const std::string& path) {
    return parse_json_text(read_text_file(path), "cannot parse " + path);
}

namespace detail {

inline double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw input_error(where + " must be a number");
    return j.get<double>();
}

inline int as_index(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw input_error(where + " must be an integer");
    return j.get<int>();
}

inline std::vector<double> as_number_array(const json& j, const std::string& where) {
    if (!j.is_array()) throw input_error(where + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(as_number(v, where + " entry"));
    return out;
}

inline std::vector<graph_edge> parse_edges(const json& j, const std::string& where) {
    if (!j.is_array()) throw input_error(where + " must be an array");
    std::vector<graph_edge> edges;
    edges.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 3)
            throw input_error(where + " entries must be [i, j, length] triples");
        graph_edge ge;
        ge.a = as_index(e[0], where + " endpoint");
        ge.b = as_index(e[1], where + " endpoint");
        ge.length = as_number(e[2], where + " length");
        edges.push_back(ge);
    }
    return edges;
}

} // namespace detail

/// Parses a space document. The metric is one of:
///   {"type": "matrix", "d": [[...], ...]}        explicit distance matrix,
///                                                optional "edges" for curves
///                                                measured in that metric
///   {"type": "graph", "n": n, "edges": [...]}    shortest-path length metric
///   {"type": "grid", "nx", "ny", "hx", "hy"}     axis-aligned rectangle
///                                                sample, index = iy*nx + ix
inline space_document load_space_document(const json& doc) {
    if (!doc.is_object()) throw input_error("document root must be an object");
    if (!doc.contains("name") || !doc["name"].is_string())
        throw input_error("document needs a string field \"name\"");
    if (!doc.contains("metric") || !doc["metric"].is_object())
        throw input_error("document needs an object field \"metric\"");
    if (!doc.contains("mu")) throw input_error("document needs an array field \"mu\"");

    const std::string name = doc["name"].get<std::string>();
    std::vector<double> mass = detail::as_number_array(doc["mu"], "\"mu\"");

    std::vector<std::string> labels;
    if (doc.contains("labels")) {
        if (!doc["labels"].is_array()) throw input_error("\"labels\" must be an array of strings");
        for (const auto& l : doc["labels"]) {
            if (!l.is_string()) throw input_error("\"labels\" must be an array of strings");
            labels.push_back(l.get<std::string>());
        }
    }

    const json& metric = doc["metric"];
    if (!metric.contains("type") || !metric["type"].is_string())
        throw input_error("\"metric\" needs a string field \"type\"");
    const std::string type = metric["type"].get<std::string>();

    space_document out;
    if (type == "matrix") {
        if (!metric.contains("d") || !metric["d"].is_array())
            throw input_error("matrix metric needs an array field \"d\"");
        const json& rows = metric["d"];
        const int n = static_cast<int>(rows.size());
        std::vector<double> dist;
        dist.reserve(static_cast<size_t>(n) * n);
        for (const auto& row : rows) {
            std::vector<double> r = detail::as_number_array(row, "\"d\" row");
            if (static_cast<int>(r.size()) != n)
                throw input_error("\"d\" must be a square matrix");
            dist.insert(dist.end(), r.begin(), r.end());
        }
        std::vector<graph_edge> edges;
        if (metric.contains("edges")) edges = detail::parse_edges(metric["edges"], "\"edges\"");
        out.space = make_matrix_space(name, n, std::move(dist), std::move(mass),
                                      std::move(edges), std::move(labels));
    } else if (type == "graph") {
        if (!metric.contains("n")) throw input_error("graph metric needs an integer field \"n\"");
        int n = detail::as_index(metric["n"], "\"n\"");
        if (!metric.contains("edges")) throw input_error("graph metric needs \"edges\"");
        std::vector<graph_edge> edges = detail::parse_edges(metric["edges"], "\"edges\"");
        out.space = make_graph_space(name, n, std::move(edges), std::move(mass),
                                     std::move(labels));
    } else if (type == "grid") {
        for (const char* key : {"nx", "ny", "hx", "hy"})
            if (!metric.contains(key))
                throw input_error(std::string("grid metric needs \"") + key + "\"");
        int nx = detail::as_index(metric["nx"], "\"nx\"");
        int ny = detail::as_index(metric["ny"], "\"ny\"");
        double hx = detail::as_number(metric["hx"], "\"hx\"");
        double hy = detail::as_number(metric["hy"], "\"hy\"");
        if (!labels.empty()) throw input_error("grid spaces use default labels");
        out.space = make_grid_space(name, nx, ny, hx, hy, std::move(mass));
    } else {
        throw input_error("unknown metric type \"" + type + "\"");
    }

    if (doc.contains("functions")) {
        if (!doc["functions"].is_object()) throw input_error("\"functions\" must be an object");
        for (const auto& [fname, values] : doc["functions"].items()) {
            scalar_field u{detail::as_number_array(values, "function \"" + fname + "\"")};
            require_field(out.space, u);
            out.functions.emplace(fname, std::move(u));
        }
    }
    if (doc.contains("measures")) {
        if (!doc["measures"].is_object()) throw input_error("\"measures\" must be an object");
        for (const auto& [mname, values] : doc["measures"].items()) {
            point_measure nu{detail::as_number_array(values, "measure \"" + mname + "\"")};
            require_measure(out.space, nu);
            out.measures.emplace(mname, std::move(nu));
        }
    }
    return out;
}

inline space_document load_space_document_file(const std::string& path) {
    return load_space_document(parse_json_file(path));
}

/// Canonical document for a loaded space, parseable by load_space_document.
/// Functions and measures appear in sorted name order; default labels are
/// omitted.
inline json document_to_json(const space_document& doc) {
    const metric_measure_space& space = doc.space;
    json j = json::object();
    j["name"] = space.name;
    json metric = json::object();
    if (space.grid) {
        metric["type"] = "grid";
        metric["nx"] = space.grid->nx;
        metric["ny"] = space.grid->ny;
        metric["hx"] = space.grid->hx;
        metric["hy"] = space.grid->hy;
    } else if (space.graph_backed) {
        metric["type"] = "graph";
        metric["n"] = space.n;
        json edges = json::array();
        for (const auto& e : space.edges) edges.push_back(json::array({e.a, e.b, e.length}));
        metric["edges"] = std::move(edges);
    } else {
        metric["type"] = "matrix";
        json rows = json::array();
        for (int i = 0; i < space.n; ++i) {
            json row = json::array();
            for (int k = 0; k < space.n; ++k) row.push_back(space.d(i, k));
            rows.push_back(std::move(row));
        }
        metric["d"] = std::move(rows);
        if (!space.edges.empty()) {
            json edges = json::array();
            for (const auto& e : space.edges) edges.push_back(json::array({e.a, e.b, e.length}));
            metric["edges"] = std::move(edges);
        }
    }
    j["metric"] = std::move(metric);
    j["mu"] = space.mass;
    bool default_labels = true;
    for (int i = 0; i < space.n && default_labels; ++i)
        default_labels = space.labels[static_cast<size_t>(i)] == std::to_string(i);
    if (!default_labels) j["labels"] = space.labels;
    if (!doc.functions.empty()) {
        json fns = json::object();
        for (const auto& [fname, u] : doc.functions) fns[fname] = u.values;
        j["functions"] = std::move(fns);
    }
    if (!doc.measures.empty()) {
        json ms = json::object();
        for (const auto& [mname, nu] : doc.measures) ms[mname] = nu.masses;
        j["measures"] = std::move(ms);
    }
    return j;
}

/// A real number as a JSON node: plain number when finite, the strings
/// "inf"/"-inf" otherwise, so reports survive serialization unchanged.
inline json json_real(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

inline double read_real(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw input_error(where + " must be a number or \"inf\"/\"-inf\"");
}

namespace detail {

inline bool is_scalar_array(const json& j) {
    for (const auto& v : j)
        if (v.is_array() || v.is_object()) return false;
    return true;
}

inline void dump_node(const json& j, std::string& out, int depth) {
    switch (j.type()) {
    case json::value_t::number_float:
        out += format_real(j.get<double>());
        return;
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        const bool flat = is_scalar_array(j);
        out += '[';
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += flat ? ", " : ",";
            if (!flat) {
                out += '\n';
                out.append(static_cast<size_t>(2 * (depth + 1)), ' ');
            }
            dump_node(v, out, depth + 1);
            first = false;
        }
        if (!flat) {
            out += '\n';
            out.append(static_cast<size_t>(2 * depth), ' ');
        }
        out += ']';
        return;
    }
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (const auto& [key, v] : j.items()) {
            if (!first) out += ',';
            out += '\n';
            out.append(static_cast<size_t>(2 * (depth + 1)), ' ');
            out += json(key).dump();
            out += ": ";
            dump_node(v, out, depth + 1);
            first = false;
        }
        out += '\n';
        out.append(static_cast<size_t>(2 * depth), ' ');
        out += '}';
        return;
    }
    default:
        out += j.dump(); // strings, integers, booleans, null
        return;
    }
}

} // namespace detail

/// Deterministic pretty printer: insertion-ordered keys, two-space indent,
/// floating-point numbers at 17 significant digits, scalar arrays on one line.
inline std::string dump_json(const json& j) {
    std::string out;
    detail::dump_node(j, out, 0);
    out += '\n';
    return out;
}

} // namespace bvcert
