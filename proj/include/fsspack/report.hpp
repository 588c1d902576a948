#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsspack/correction.hpp"
#include "fsspack/geometry.hpp"
#include "fsspack/io.hpp"

namespace fsspack {

/// One (problem, n) line of a result table.
struct ResultRow {
    std::string problem;  // built-in id ("1".."6") or the instance name of a user file
    std::optional<int> f_count;
    std::size_t n{0};
    double best_radius{0.0};
    double total_time_s{0.0};
    std::size_t replication_of_best{0};
    std::uint64_t seed{0};
    std::size_t solver_invocations{0};
};

inline constexpr const char* kCsvHeader = "problem,f_count,n,best_radius,total_time_s,replication_of_best,seed";

[[nodiscard]] inline std::string results_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << kCsvHeader << "\n";
    for (const auto& r : rows) {
        char time[32];
        std::snprintf(time, sizeof time, "%.2f", r.total_time_s);
        out << r.problem << "," << (r.f_count ? std::to_string(*r.f_count) : "") << "," << r.n << ","
            << format_truncated(r.best_radius, 8) << "," << time << "," << r.replication_of_best << ","
            << r.seed << "\n";
    }
    return out.str();
}

/// Timing lives only in "total_time_s"; every other field is a pure function of
/// (instance, n, iterations, replications, seed).
[[nodiscard]] inline nlohmann::json results_json(const std::vector<ResultRow>& rows) {
    auto doc = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row;
        row["problem"] = r.problem;
        row["f_count"] = r.f_count ? nlohmann::json(*r.f_count) : nlohmann::json(nullptr);
        row["n"] = r.n;
        row["best_radius"] = format_truncated(r.best_radius, 8);
        row["best_radius_full"] = format_exact(r.best_radius);
        row["total_time_s"] = r.total_time_s;
        row["replication_of_best"] = r.replication_of_best;
        row["seed"] = r.seed;
        row["solver_invocations"] = r.solver_invocations;
        doc.push_back(row);
    }
    return doc;
}

[[nodiscard]] inline nlohmann::json report_to_json(const FeasibilityReport& report) {
    nlohmann::json doc;
    doc["feasible"] = report.feasible;
    doc["tolerance"] = report.tolerance;
    doc["worst_containment_violation"] = report.worst_containment_violation;
    doc["worst_pairwise_violation"] = report.worst_pairwise_violation;
    doc["worst_prohibited_violation"] = report.worst_prohibited_violation;
    doc["worst_containment_circle"] =
        report.worst_containment_circle ? nlohmann::json(*report.worst_containment_circle) : nlohmann::json(nullptr);
    doc["worst_pairwise_circles"] = report.worst_pairwise_circles
                                        ? nlohmann::json::array({report.worst_pairwise_circles->first,
                                                                 report.worst_pairwise_circles->second})
                                        : nlohmann::json(nullptr);
    doc["worst_prohibited_pair"] = report.worst_prohibited_pair
                                       ? nlohmann::json::array({report.worst_prohibited_pair->first,
                                                                report.worst_prohibited_pair->second})
                                       : nlohmann::json(nullptr);
    doc["worst_constraint"] = report.worst_constraint();
    return doc;
}

namespace detail {

inline std::string xml_escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

inline std::string svg_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

}  // namespace detail

/// Static picture of a packing: container outlined, prohibited areas filled,
/// packed circles outlined. SVG y grows downward, so y is negated.
[[nodiscard]] inline std::string render_svg(const Instance& instance, const Layout& layout) {
    using detail::svg_number;
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"600\" "
           "viewBox=\"-1.05 -1.05 2.1 2.1\">\n";
    out << "  <title>" << detail::xml_escape(instance.name) << ", n = " << layout.size() << ", R = "
        << format_truncated(layout.radius, 8) << "</title>\n";
    out << "  <rect x=\"-1.05\" y=\"-1.05\" width=\"2.1\" height=\"2.1\" fill=\"white\"/>\n";
    out << "  <circle class=\"container\" cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"black\" "
           "stroke-width=\"0.006\"/>\n";
    for (const auto& f : instance.prohibited) {
        out << "  <circle class=\"prohibited\" cx=\"" << svg_number(f.center.x) << "\" cy=\""
            << svg_number(-f.center.y) << "\" r=\"" << svg_number(f.radius) << "\" fill=\"black\"/>\n";
    }
    for (const auto& c : layout.centers) {
        out << "  <circle class=\"packed\" cx=\"" << svg_number(c.x) << "\" cy=\"" << svg_number(-c.y)
            << "\" r=\"" << svg_number(layout.radius) << "\" fill=\"none\" stroke=\"#1f4e99\" "
            << "stroke-width=\"0.004\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace fsspack
