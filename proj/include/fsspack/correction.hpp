#pragma once

// Radius correction and feasibility verification.
//
// Both routines evaluate the three constraint families (containment, circle pairs,
// prohibited pairs) in software floating point with 60 significant decimal digits.
// Near-binding constraints are settled by exact rational arithmetic on the double
// inputs, so "feasible at tolerance 0" is a statement about exact real numbers.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fsspack/geometry.hpp"

namespace fsspack {

namespace mp = boost::multiprecision;

/// Extended working precision for correction: 60 decimal digits.
using WideReal = mp::number<mp::cpp_bin_float<60>, mp::et_off>;
using ExactRational = mp::cpp_rational;

namespace detail {

enum class ConstraintKind { containment, pairwise, prohibited };

struct Candidate {
    ConstraintKind kind;
    std::size_t i;
    std::size_t j;  // second circle or prohibited index
};

// Largest radius each family allows, evaluated at extended precision.
inline WideReal wide_limit(const Candidate& c, std::span<const CartPoint> centers,
                           const Instance& instance) {
    const WideReal xi = centers[c.i].x;
    const WideReal yi = centers[c.i].y;
    switch (c.kind) {
        case ConstraintKind::containment:
            return WideReal(1) - mp::sqrt(xi * xi + yi * yi);
        case ConstraintKind::pairwise: {
            const WideReal dx = xi - WideReal(centers[c.j].x);
            const WideReal dy = yi - WideReal(centers[c.j].y);
            return mp::sqrt(dx * dx + dy * dy) / 2;
        }
        case ConstraintKind::prohibited: {
            const auto& f = instance.prohibited[c.j];
            const WideReal dx = xi - WideReal(f.center.x);
            const WideReal dy = yi - WideReal(f.center.y);
            return mp::sqrt(dx * dx + dy * dy) - WideReal(f.radius);
        }
    }
    return WideReal(0);
}

inline double double_limit(const Candidate& c, std::span<const CartPoint> centers,
                           const Instance& instance) {
    const CartPoint p = centers[c.i];
    switch (c.kind) {
        case ConstraintKind::containment:
            return 1.0 - norm(p);
        case ConstraintKind::pairwise:
            return distance(p, centers[c.j]) / 2.0;
        case ConstraintKind::prohibited: {
            const auto& f = instance.prohibited[c.j];
            return distance(p, f.center) - f.radius;
        }
    }
    return 0.0;
}

// Exact test that the constraint holds for the (double) radius. Squares are
// compared on nonnegative sides only, so no square root is needed.
inline bool exactly_satisfied(const Candidate& c, std::span<const CartPoint> centers,
                              const Instance& instance, double radius) {
    const ExactRational R(radius);
    const ExactRational xi(centers[c.i].x);
    const ExactRational yi(centers[c.i].y);
    switch (c.kind) {
        case ConstraintKind::containment: {
            const ExactRational slack = ExactRational(1) - R;
            if (slack < 0) return false;
            return xi * xi + yi * yi <= slack * slack;
        }
        case ConstraintKind::pairwise: {
            const ExactRational dx = xi - ExactRational(centers[c.j].x);
            const ExactRational dy = yi - ExactRational(centers[c.j].y);
            return dx * dx + dy * dy >= 4 * R * R;
        }
        case ConstraintKind::prohibited: {
            const auto& f = instance.prohibited[c.j];
            const ExactRational dx = xi - ExactRational(f.center.x);
            const ExactRational dy = yi - ExactRational(f.center.y);
            const ExactRational reach = R + ExactRational(f.radius);
            if (reach < 0) return true;
            return dx * dx + dy * dy >= reach * reach;
        }
    }
    return false;
}

template <typename Fn>
void for_each_candidate(std::size_t n, const Instance& instance, Fn&& fn) {
    for (std::size_t i = 0; i < n; ++i) fn(Candidate{ConstraintKind::containment, i, 0});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) fn(Candidate{ConstraintKind::pairwise, i, j});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < instance.prohibited.size(); ++f)
            fn(Candidate{ConstraintKind::prohibited, i, f});
}

// Double-precision estimates are accurate to ~1e-15; anything further than this
// from the double minimum cannot be the true minimum.
inline constexpr double kScreenMargin = 1e-9;
// Extended-precision slack below which a constraint is settled exactly.
inline const WideReal kExactBand = WideReal("1e-40");

}  // namespace detail

/// Largest common radius the fixed centres admit, rounded down to double so that
/// the returned layout satisfies every constraint exactly. Degenerate inputs
/// (empty, centre outside the container or inside a prohibited circle) yield 0.
[[nodiscard]] inline double correct_radius(std::span<const CartPoint> centers,
                                           const Instance& instance) {
    using namespace detail;
    const std::size_t n = centers.size();
    if (n == 0) return 0.0;
    for (const auto& c : centers)
        if (!std::isfinite(c.x) || !std::isfinite(c.y)) return 0.0;

    double screen_min = std::numeric_limits<double>::infinity();
    for_each_candidate(n, instance, [&](const Candidate& c) {
        screen_min = std::min(screen_min, double_limit(c, centers, instance));
    });
    if (!(screen_min > -kScreenMargin)) return 0.0;

    std::vector<Candidate> close;
    std::vector<WideReal> limits;
    WideReal wide_min = std::numeric_limits<double>::infinity();
    for_each_candidate(n, instance, [&](const Candidate& c) {
        if (double_limit(c, centers, instance) > screen_min + kScreenMargin) return;
        close.push_back(c);
        limits.push_back(wide_limit(c, centers, instance));
        if (limits.back() < wide_min) wide_min = limits.back();
    });
    if (wide_min <= 0) return 0.0;

    double radius = static_cast<double>(wide_min);
    if (WideReal(radius) > wide_min) radius = std::nextafter(radius, 0.0);

    // Settle ties between the rounded radius and the extended-precision limit.
    for (std::size_t k = 0; k < close.size() && radius > 0.0; ++k) {
        if (limits[k] - WideReal(radius) > kExactBand) continue;
        while (radius > 0.0 && !exactly_satisfied(close[k], centers, instance, radius))
            radius = std::nextafter(radius, 0.0);
    }
    return radius;
}

/// Outcome of checking a layout against the container, pair and prohibited constraints.
struct FeasibilityReport {
    bool feasible{true};
    double tolerance{0.0};
    double worst_containment_violation{0.0};
    double worst_pairwise_violation{0.0};
    double worst_prohibited_violation{0.0};
    std::optional<std::size_t> worst_containment_circle;
    std::optional<std::pair<std::size_t, std::size_t>> worst_pairwise_circles;
    /// (circle index, prohibited circle index)
    std::optional<std::pair<std::size_t, std::size_t>> worst_prohibited_pair;

    [[nodiscard]] double worst_violation() const {
        return std::max({worst_containment_violation, worst_pairwise_violation,
                         worst_prohibited_violation});
    }

    /// One-line description of the single most violated constraint, or "none".
    [[nodiscard]] std::string worst_constraint() const {
        std::ostringstream out;
        out.precision(17);
        const double worst = worst_violation();
        if (worst <= 0.0) return "none";
        if (worst == worst_containment_violation && worst_containment_circle) {
            out << "containment of circle " << *worst_containment_circle;
        } else if (worst == worst_pairwise_violation && worst_pairwise_circles) {
            out << "overlap of circles " << worst_pairwise_circles->first << " and "
                << worst_pairwise_circles->second;
        } else if (worst_prohibited_pair) {
            out << "overlap of circle " << worst_prohibited_pair->first
                << " with prohibited area " << worst_prohibited_pair->second;
        }
        out << " (violation " << worst << ")";
        return out.str();
    }
};

/// Violations are max(0, |c_i| + R - 1), max(0, 2R - |c_i - c_j|) and
/// max(0, R + R_f - |c_i - f|); the layout is feasible iff all are <= tol.
[[nodiscard]] inline FeasibilityReport verify_layout(const Layout& layout,
                                                     const Instance& instance, double tol) {
    using namespace detail;
    FeasibilityReport report;
    report.tolerance = tol;
    const double R = layout.radius;
    const std::span<const CartPoint> centers(layout.centers);
    const double inf = std::numeric_limits<double>::infinity();

    bool finite = std::isfinite(R) && R >= 0.0;
    for (const auto& c : centers) finite = finite && std::isfinite(c.x) && std::isfinite(c.y);

    for_each_candidate(centers.size(), instance, [&](const Candidate& c) {
        double violation = 0.0;
        if (!finite) {
            violation = inf;
        } else if (double_limit(c, centers, instance) - R < kScreenMargin) {
            if (!exactly_satisfied(c, centers, instance, R)) {
                const WideReal excess = WideReal(R) - wide_limit(c, centers, instance);
                // pairwise limit is half the distance; the violation is on the full distance
                const WideReal scaled = c.kind == ConstraintKind::pairwise ? excess * 2 : excess;
                violation = std::max(static_cast<double>(scaled),
                                     std::numeric_limits<double>::denorm_min());
            }
        }
        switch (c.kind) {
            case ConstraintKind::containment:
                if (violation > report.worst_containment_violation || !report.worst_containment_circle) {
                    report.worst_containment_violation = violation;
                    report.worst_containment_circle = c.i;
                }
                break;
            case ConstraintKind::pairwise:
                if (violation > report.worst_pairwise_violation || !report.worst_pairwise_circles) {
                    report.worst_pairwise_violation = violation;
                    report.worst_pairwise_circles = std::pair{c.i, c.j};
                }
                break;
            case ConstraintKind::prohibited:
                if (violation > report.worst_prohibited_violation || !report.worst_prohibited_pair) {
                    report.worst_prohibited_violation = violation;
                    report.worst_prohibited_pair = std::pair{c.i, c.j};
                }
                break;
        }
    });
    if (!finite) report.worst_containment_violation = inf;
    report.feasible = report.worst_containment_violation <= tol &&
                      report.worst_pairwise_violation <= tol &&
                      report.worst_prohibited_violation <= tol;
    return report;
}

}  // namespace fsspack
