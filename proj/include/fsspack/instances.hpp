#pragma once

// Built-in test instances and the instance file format.
//
// Catalogue coordinates are kept as exact rationals and converted to double on
// demand, so each value is the correctly rounded image of its decimal.

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsspack/geometry.hpp"
#include "fsspack/io.hpp"

namespace fsspack {

struct Rational {
    std::int64_t num{0};
    std::int64_t den{1};

    [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct RationalCircle {
    Rational x;
    Rational y;
    Rational r;

    [[nodiscard]] ProhibitedCircle to_circle() const { return {{x.value(), y.value()}, r.value()}; }
};

namespace detail {

// Union-of-circles area, all values over 15 (stored in hundredths over 1500).
inline constexpr std::array<std::array<std::int64_t, 3>, 11> kUnionHundredths{{
    {-980, 630, 130},
    {-820, 650, 110},
    {-650, 650, 140},
    {-600, 550, 130},
    {-500, 400, 125},
    {-450, 200, 150},
    {-400, 50, 125},
    {-350, -100, 135},
    {-280, 270, 120},
    {-630, 170, 120},
    {-130, 370, 120},
}};

}  // namespace detail

inline constexpr int kProblemCount = 6;
inline constexpr int kMinUnionCount = 4;
inline constexpr int kMaxUnionCount = 11;

/// Exact rational data for a built-in problem.
[[nodiscard]] inline std::vector<RationalCircle> builtin_rationals(int problem,
                                                                   std::optional<int> f_count = {}) {
    if (problem < 1 || problem > kProblemCount)
        throw Error("unknown test problem " + std::to_string(problem) + " (expected 1-6)");
    if (f_count && problem != 1) throw Error("f_count applies only to test problem 1");

    // 1/10.5 = 2/21 and 10.25/17.5 = 41/70
    const Rational small{2, 21}, small_offset{-19, 21}, small_far{19, 21};
    const Rational large{41, 70}, large_offset{-29, 70};
    const Rational zero{0, 1};

    switch (problem) {
        case 1: {
            const int count = f_count.value_or(kMaxUnionCount);
            if (count < kMinUnionCount || count > kMaxUnionCount)
                throw Error("f_count " + std::to_string(count) + " out of range (expected 4-11)");
            std::vector<RationalCircle> out;
            for (int k = 0; k < count; ++k) {
                const auto& row = detail::kUnionHundredths[static_cast<std::size_t>(k)];
                out.push_back({{row[0], 1500}, {row[1], 1500}, {row[2], 1500}});
            }
            return out;
        }
        case 2: return {{zero, zero, small}};
        case 3: return {{zero, small_offset, small}};
        case 4: return {{zero, zero, large}};
        case 5: return {{zero, large_offset, large}};
        case 6:
            return {{zero, small_offset, small},
                    {zero, small_far, small},
                    {small_offset, zero, small},
                    {small_far, zero, small}};
    }
    return {};
}

[[nodiscard]] inline std::string builtin_name(int problem, std::optional<int> f_count = {}) {
    if (problem == 1) return "problem1_f" + std::to_string(f_count.value_or(kMaxUnionCount));
    return "problem" + std::to_string(problem);
}

[[nodiscard]] inline Instance builtin_instance(int problem, std::optional<int> f_count = {}) {
    Instance instance;
    for (const auto& c : builtin_rationals(problem, f_count)) instance.prohibited.push_back(c.to_circle());
    instance.name = builtin_name(problem, f_count);
    return instance;
}

/// Looks up a catalogue entry by name: "problem2".."problem6", "problem1_f4".."problem1_f11",
/// "problem1" (all eleven circles) or "empty".
[[nodiscard]] inline std::optional<Instance> find_builtin(const std::string& name) {
    if (name == "empty") return Instance{"empty", {}};
    if (name == "problem1") return builtin_instance(1);
    for (int f = kMinUnionCount; f <= kMaxUnionCount; ++f)
        if (name == builtin_name(1, f)) return builtin_instance(1, f);
    for (int p = 2; p <= kProblemCount; ++p)
        if (name == builtin_name(p)) return builtin_instance(p);
    return std::nullopt;
}

[[nodiscard]] inline nlohmann::json instance_to_json(const Instance& instance) {
    nlohmann::json doc;
    doc["name"] = instance.name;
    doc["prohibited"] = nlohmann::json::array();
    for (const auto& f : instance.prohibited) {
        doc["prohibited"].push_back({{"x", format_exact(f.center.x)},
                                     {"y", format_exact(f.center.y)},
                                     {"r", format_exact(f.radius)}});
    }
    return doc;
}

/// Parses an instance document. Throws ParseError naming the offending field.
[[nodiscard]] inline Instance instance_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParseError("instance: document must be an object");
    Instance instance;
    instance.name = require_string(doc, "name", "");
    if (!doc.contains("prohibited") || !doc["prohibited"].is_array())
        throw ParseError("prohibited: missing or not an array");
    const auto& list = doc["prohibited"];
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string where = "prohibited[" + std::to_string(k) + "]";
        if (!list[k].is_object()) throw ParseError(where + ": expected an object");
        ProhibitedCircle f;
        f.center.x = require_decimal(list[k], "x", where);
        f.center.y = require_decimal(list[k], "y", where);
        f.radius = require_decimal(list[k], "r", where);
        if (!(f.radius > 0.0)) throw ParseError(where + ".r: radius must be positive, got " + format_exact(f.radius));
        instance.prohibited.push_back(f);
    }
    return instance;
}

inline void save_instance(const Instance& instance, const std::string& path) {
    write_text_file(path, instance_to_json(instance).dump(2) + "\n");
}

/// Loads an instance file. Warnings about prohibited circles that can never bind
/// are appended to `warnings` when provided.
[[nodiscard]] inline Instance load_instance(const std::string& path,
                                            std::vector<std::string>* warnings = nullptr) {
    Instance instance = instance_from_json(parse_json_file(path));
    auto notes = validate_instance(instance);
    if (warnings) warnings->insert(warnings->end(), notes.begin(), notes.end());
    return instance;
}

}  // namespace fsspack
