#pragma once

// Decimal formatting and the layout / JSON file plumbing shared by the CLI.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsspack/geometry.hpp"

namespace fsspack {

/// Malformed input file or field.
class ParseError : public Error {
public:
    using Error::Error;
};

/// 17 significant digits: parses back to the identical double.
[[nodiscard]] inline std::string format_exact(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

/// Exactly `places` decimals, truncated toward zero (never rounded up).
[[nodiscard]] inline std::string format_truncated(double value, int places = 8) {
    if (!std::isfinite(value)) return format_exact(value);
    // glibc prints the exact binary expansion; 1100 digits covers every double
    std::vector<char> buf(1500);
    std::snprintf(buf.data(), buf.size(), "%.1100f", std::abs(value));
    std::string text(buf.data());
    const auto dot = text.find('.');
    text = text.substr(0, dot + 1 + static_cast<std::size_t>(places));
    const bool all_zero = text.find_first_not_of("0.") == std::string::npos;
    return (value < 0.0 && !all_zero) ? "-" + text : text;
}

[[nodiscard]] inline double parse_decimal(const std::string& text, const std::string& field) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
        throw ParseError(field + ": not a finite decimal: \"" + text + "\"");
    return v;
}

inline std::string join_field(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

/// Accepts either a JSON number or a decimal string.
[[nodiscard]] inline double require_decimal(const nlohmann::json& obj, const std::string& key,
                                            const std::string& where) {
    const std::string field = join_field(where, key);
    if (!obj.contains(key)) throw ParseError(field + ": missing");
    const auto& v = obj[key];
    if (v.is_string()) return parse_decimal(v.get<std::string>(), field);
    if (v.is_number()) {
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ParseError(field + ": not finite");
        return d;
    }
    throw ParseError(field + ": expected a decimal string or number");
}

[[nodiscard]] inline std::string require_string(const nlohmann::json& obj, const std::string& key,
                                                const std::string& where) {
    const std::string field = join_field(where, key);
    if (!obj.contains(key) || !obj[key].is_string()) throw ParseError(field + ": missing or not a string");
    return obj[key].get<std::string>();
}

[[nodiscard]] inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path + ": cannot open for writing");
    out << text;
    if (!out) throw Error(path + ": write failed");
}

/// Parses JSON text, translating syntax errors into line/column diagnostics.
[[nodiscard]] inline nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t k = 0; k < stop; ++k) {
            if (text[k] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                         ": JSON syntax error");
    }
}

[[nodiscard]] inline nlohmann::json parse_json_file(const std::string& path) {
    return parse_json_text(read_text_file(path), path);
}

/// A layout together with the instance it was packed into.
struct LayoutDocument {
    std::string instance;
    Layout layout;
};

/// { "instance", "n", "radius" (8 decimals, truncated), "centers": [[x, y], ...] }
[[nodiscard]] inline nlohmann::json layout_to_json(const std::string& instance_name, const Layout& layout) {
    nlohmann::json doc;
    doc["instance"] = instance_name;
    doc["n"] = layout.size();
    doc["radius"] = format_truncated(layout.radius, 8);
    doc["centers"] = nlohmann::json::array();
    for (const auto& c : layout.centers)
        doc["centers"].push_back(nlohmann::json::array({format_exact(c.x), format_exact(c.y)}));
    return doc;
}

[[nodiscard]] inline LayoutDocument layout_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParseError("layout: document must be an object");
    LayoutDocument out;
    out.instance = require_string(doc, "instance", "");
    if (!doc.contains("n") || !doc["n"].is_number_integer() || doc["n"].get<long long>() < 0)
        throw ParseError("n: missing or not a nonnegative integer");
    const auto n = doc["n"].get<std::size_t>();
    out.layout.radius = require_decimal(doc, "radius", "");
    if (out.layout.radius < 0.0) throw ParseError("radius: must be nonnegative");
    if (!doc.contains("centers") || !doc["centers"].is_array()) throw ParseError("centers: missing or not an array");
    const auto& centers = doc["centers"];
    if (centers.size() != n)
        throw ParseError("centers: has " + std::to_string(centers.size()) + " entries but n = " + std::to_string(n));
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const std::string where = "centers[" + std::to_string(k) + "]";
        const auto& pair = centers[k];
        if (!pair.is_array() || pair.size() != 2) throw ParseError(where + ": expected [x, y]");
        nlohmann::json wrapped{{"x", pair[0]}, {"y", pair[1]}};
        out.layout.centers.push_back({require_decimal(wrapped, "x", where), require_decimal(wrapped, "y", where)});
    }
    return out;
}

inline void save_layout(const std::string& path, const std::string& instance_name, const Layout& layout) {
    write_text_file(path, layout_to_json(instance_name, layout).dump(2) + "\n");
}

[[nodiscard]] inline LayoutDocument load_layout(const std::string& path) {
    return layout_from_json(parse_json_file(path));
}

}  // namespace fsspack
