#pragma once

// Per-iteration nonlinear program for mixed Cartesian/Polar circle packing.
//
// Variable vector: R first, then (x_i, y_i) for every Cartesian circle in index
// order, then (r_i, theta_i) for every Polar circle in index order. Every
// constraint is written as g(v) >= 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fsspack/geometry.hpp"

namespace fsspack {

/// Partition of circle indices into Cartesian and Polar sets. Both sorted.
struct Assignment {
    std::vector<std::size_t> cart;
    std::vector<std::size_t> polar;

    /// All circles Cartesian.
    static Assignment all_cartesian(std::size_t n) {
        Assignment a;
        for (std::size_t i = 0; i < n; ++i) a.cart.push_back(i);
        return a;
    }

    static Assignment all_polar(std::size_t n) {
        Assignment a;
        for (std::size_t i = 0; i < n; ++i) a.polar.push_back(i);
        return a;
    }

    /// Builds from per-circle flags, true meaning Polar.
    static Assignment from_polar_flags(const std::vector<bool>& is_polar) {
        Assignment a;
        for (std::size_t i = 0; i < is_polar.size(); ++i)
            (is_polar[i] ? a.polar : a.cart).push_back(i);
        return a;
    }

    [[nodiscard]] std::size_t size() const { return cart.size() + polar.size(); }

    /// Throws unless C and P are disjoint and together cover 0..n-1.
    void validate(std::size_t n) const {
        std::vector<int> seen(n, 0);
        for (const auto* set : {&cart, &polar}) {
            for (std::size_t i : *set) {
                if (i >= n) throw Error("assignment: index " + std::to_string(i) + " out of range");
                if (seen[i]++) throw Error("assignment: index " + std::to_string(i) + " appears twice");
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!seen[i]) throw Error("assignment: index " + std::to_string(i) + " is unassigned");
    }
};

/// Circle pairs and (circle, prohibited) pairs that keep a non-overlap constraint.
struct PairSets {
    std::vector<std::pair<std::size_t, std::size_t>> circle_pairs;
    std::vector<std::pair<std::size_t, std::size_t>> prohibited_pairs;

    /// Every pair, no pruning.
    static PairSets complete(std::size_t n, std::size_t prohibited_count) {
        PairSets s;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s.circle_pairs.emplace_back(i, j);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t f = 0; f < prohibited_count; ++f) s.prohibited_pairs.emplace_back(i, f);
        return s;
    }
};

/// Distance bound on how far a Cartesian centre can move inside its box.
[[nodiscard]] inline double max_displacement(double delta) { return std::numbers::sqrt2 * delta; }

/// Drops pairs that can never overlap while Cartesian circles stay within delta of
/// their current position and R stays below r_cap. Pairs touching a Polar circle
/// are always kept since Polar circles are not boxed.
[[nodiscard]] inline PairSets prune_pairs(const Layout& current, const Assignment& assignment,
                                          double delta, double r_cap, const Instance& instance) {
    const std::size_t n = current.size();
    assignment.validate(n);
    std::vector<bool> polar(n, false);
    for (std::size_t i : assignment.polar) polar[i] = true;

    const double reach = max_displacement(delta);
    PairSets kept;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool boxed = !polar[i] && !polar[j];
            if (boxed && distance(current.centers[i], current.centers[j]) - 2.0 * reach >= 2.0 * r_cap)
                continue;
            kept.circle_pairs.emplace_back(i, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < instance.prohibited.size(); ++f) {
            const auto& area = instance.prohibited[f];
            if (!polar[i] && distance(current.centers[i], area.center) - reach >= r_cap + area.radius)
                continue;
            kept.prohibited_pairs.emplace_back(i, f);
        }
    }
    return kept;
}

/// Constraint families. The integer tags 2..8 are stable identifiers used in reports.
enum class ConstraintFamily : int {
    containment_cart = 2,    // (1-R)^2 - x^2 - y^2 >= 0
    containment_polar = 3,   // 1 - R - r >= 0
    pair_cart_cart = 4,      // |c_i - c_j|^2 - 4R^2 >= 0
    pair_cart_polar = 5,
    pair_polar_polar = 6,
    prohibited_cart = 7,     // |c_i - f|^2 - (R + R_f)^2 >= 0
    prohibited_polar = 8,
};

[[nodiscard]] inline int family_tag(ConstraintFamily family) { return static_cast<int>(family); }

struct NlpConstraint {
    ConstraintFamily family;
    // Circle indices; for pair_cart_polar `first` is the Cartesian circle.
    // For prohibited families `second` is the prohibited-area index.
    std::size_t first{0};
    std::size_t second{0};
    // Variable offsets of each circle's two coordinates (second unused for
    // containment and prohibited families).
    std::size_t first_var{0};
    std::size_t second_var{0};
    // Prohibited area data: Cartesian centre for family 7, Polar centre for 8.
    double fa{0.0};
    double fb{0.0};
    double f_radius{0.0};
};

/// Up to five nonzero partial derivatives of one constraint.
struct SparseGradient {
    std::array<std::size_t, 5> index{};
    std::array<double, 5> value{};
    std::size_t size{0};

    void push(std::size_t i, double v) {
        index[size] = i;
        value[size] = v;
        ++size;
    }
};

struct CircleSlot {
    bool polar{false};
    std::size_t offset{0};  // index of x or r; y or theta follows
};

class NlpProblem {
public:
    static constexpr std::size_t kRadiusIndex = 0;

    [[nodiscard]] std::size_t circle_count() const { return slots_.size(); }
    [[nodiscard]] std::size_t variable_count() const { return lower_.size(); }
    [[nodiscard]] std::size_t constraint_count() const { return constraints_.size(); }

    [[nodiscard]] const std::vector<double>& lower() const { return lower_; }
    [[nodiscard]] const std::vector<double>& upper() const { return upper_; }
    [[nodiscard]] const std::vector<NlpConstraint>& constraints() const { return constraints_; }
    [[nodiscard]] const std::vector<CircleSlot>& slots() const { return slots_; }

    [[nodiscard]] std::size_t count(ConstraintFamily family) const {
        return static_cast<std::size_t>(std::count_if(
            constraints_.begin(), constraints_.end(),
            [family](const NlpConstraint& c) { return c.family == family; }));
    }

    /// Centre of circle i at point v, converted to Cartesian if needed.
    [[nodiscard]] CartPoint center(std::size_t i, std::span<const double> v) const {
        const auto& s = slots_[i];
        if (s.polar) return polar_to_cart({v[s.offset], v[s.offset + 1]});
        return {v[s.offset], v[s.offset + 1]};
    }

    [[nodiscard]] Layout to_layout(std::span<const double> v) const {
        Layout out;
        out.radius = v[kRadiusIndex];
        out.centers.reserve(slots_.size());
        for (std::size_t i = 0; i < slots_.size(); ++i) out.centers.push_back(center(i, v));
        return out;
    }

    /// Start vector from a Cartesian layout, clamped into the variable bounds.
    [[nodiscard]] std::vector<double> start_point(const Layout& current, double radius) const {
        std::vector<double> v(variable_count(), 0.0);
        v[kRadiusIndex] = radius;
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            const auto& s = slots_[i];
            if (s.polar) {
                const PolarPoint p = cart_to_polar(current.centers[i]);
                v[s.offset] = p.r;
                v[s.offset + 1] = p.theta;
            } else {
                v[s.offset] = current.centers[i].x;
                v[s.offset + 1] = current.centers[i].y;
            }
        }
        clamp_to_bounds(v);
        return v;
    }

    void clamp_to_bounds(std::span<double> v) const {
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::clamp(v[k], lower_[k], upper_[k]);
    }

    /// Value of constraint c at v; fills its sparse gradient when grad is non-null.
    [[nodiscard]] double constraint_value(const NlpConstraint& c, std::span<const double> v,
                                          SparseGradient* grad) const {
        const double R = v[kRadiusIndex];
        const std::size_t a = c.first_var;
        const std::size_t b = c.second_var;
        switch (c.family) {
            case ConstraintFamily::containment_cart: {
                const double x = v[a], y = v[a + 1], s = 1.0 - R;
                if (grad) {
                    grad->push(kRadiusIndex, -2.0 * s);
                    grad->push(a, -2.0 * x);
                    grad->push(a + 1, -2.0 * y);
                }
                return s * s - x * x - y * y;
            }
            case ConstraintFamily::containment_polar: {
                if (grad) {
                    grad->push(kRadiusIndex, -1.0);
                    grad->push(a, -1.0);
                }
                return 1.0 - R - v[a];
            }
            case ConstraintFamily::pair_cart_cart: {
                const double dx = v[a] - v[b], dy = v[a + 1] - v[b + 1];
                if (grad) {
                    grad->push(kRadiusIndex, -8.0 * R);
                    grad->push(a, 2.0 * dx);
                    grad->push(a + 1, 2.0 * dy);
                    grad->push(b, -2.0 * dx);
                    grad->push(b + 1, -2.0 * dy);
                }
                return dx * dx + dy * dy - 4.0 * R * R;
            }
            case ConstraintFamily::pair_cart_polar: {
                const double r = v[b], ct = std::cos(v[b + 1]), st = std::sin(v[b + 1]);
                const double u = v[a] - r * ct, w = v[a + 1] - r * st;
                if (grad) {
                    grad->push(kRadiusIndex, -8.0 * R);
                    grad->push(a, 2.0 * u);
                    grad->push(a + 1, 2.0 * w);
                    grad->push(b, -2.0 * (u * ct + w * st));
                    grad->push(b + 1, 2.0 * r * (u * st - w * ct));
                }
                return u * u + w * w - 4.0 * R * R;
            }
            case ConstraintFamily::pair_polar_polar: {
                const double ri = v[a], rj = v[b], diff = v[a + 1] - v[b + 1];
                const double cd = std::cos(diff), sd = std::sin(diff);
                if (grad) {
                    grad->push(kRadiusIndex, -8.0 * R);
                    grad->push(a, 2.0 * ri - 2.0 * rj * cd);
                    grad->push(a + 1, 2.0 * ri * rj * sd);
                    grad->push(b, 2.0 * rj - 2.0 * ri * cd);
                    grad->push(b + 1, -2.0 * ri * rj * sd);
                }
                return ri * ri + rj * rj - 2.0 * ri * rj * cd - 4.0 * R * R;
            }
            case ConstraintFamily::prohibited_cart: {
                const double dx = v[a] - c.fa, dy = v[a + 1] - c.fb, reach = R + c.f_radius;
                if (grad) {
                    grad->push(kRadiusIndex, -2.0 * reach);
                    grad->push(a, 2.0 * dx);
                    grad->push(a + 1, 2.0 * dy);
                }
                return dx * dx + dy * dy - reach * reach;
            }
            case ConstraintFamily::prohibited_polar: {
                const double r = v[a], diff = v[a + 1] - c.fb, reach = R + c.f_radius;
                const double cd = std::cos(diff), sd = std::sin(diff);
                if (grad) {
                    grad->push(kRadiusIndex, -2.0 * reach);
                    grad->push(a, 2.0 * r - 2.0 * c.fa * cd);
                    grad->push(a + 1, 2.0 * r * c.fa * sd);
                }
                return r * r + c.fa * c.fa - 2.0 * r * c.fa * cd - reach * reach;
            }
        }
        return 0.0;
    }

    /// Violation of c at v in distance units: how far a centre sits outside the
    /// container, or how much two discs (or a disc and an area) overlap.
    [[nodiscard]] double geometric_violation(const NlpConstraint& c, std::span<const double> v) const {
        const double R = v[kRadiusIndex];
        switch (c.family) {
            case ConstraintFamily::containment_cart:
                return std::max(0.0, norm(center(c.first, v)) - (1.0 - R));
            case ConstraintFamily::containment_polar:
                return std::max(0.0, v[c.first_var] - (1.0 - R));
            case ConstraintFamily::pair_cart_cart:
            case ConstraintFamily::pair_cart_polar:
            case ConstraintFamily::pair_polar_polar:
                return std::max(0.0, 2.0 * R - distance(center(c.first, v), center(c.second, v)));
            case ConstraintFamily::prohibited_cart:
                return std::max(0.0, R + c.f_radius - distance(center(c.first, v), {c.fa, c.fb}));
            case ConstraintFamily::prohibited_polar:
                return std::max(0.0, R + c.f_radius - distance(center(c.first, v), polar_to_cart({c.fa, c.fb})));
        }
        return 0.0;
    }

private:
    friend NlpProblem build_nlp(const Instance&, const Assignment&, const Layout&, double,
                                const PairSets&, double);

    std::vector<CircleSlot> slots_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<NlpConstraint> constraints_;
};

/// Assembles the program for one search iteration. Cartesian circles are boxed to
/// [X_i - delta, X_i + delta] x [Y_i - delta, Y_i + delta] intersected with [-1, 1]^2;
/// R is bounded by [0, r_cap].
[[nodiscard]] inline NlpProblem build_nlp(const Instance& instance, const Assignment& assignment,
                                          const Layout& current, double delta,
                                          const PairSets& pairs, double r_cap) {
    const std::size_t n = current.size();
    if (assignment.size() != n)
        throw Error("build_nlp: assignment covers " + std::to_string(assignment.size()) +
                    " circles but the layout has " + std::to_string(n));
    assignment.validate(n);
    if (!(delta >= 0.0)) throw Error("build_nlp: delta must be nonnegative");

    NlpProblem p;
    p.slots_.resize(n);
    p.lower_.assign(2 * n + 1, 0.0);
    p.upper_.assign(2 * n + 1, 0.0);
    p.upper_[NlpProblem::kRadiusIndex] = std::max(0.0, r_cap);

    std::size_t next = 1;
    for (std::size_t i : assignment.cart) {
        p.slots_[i] = {false, next};
        const CartPoint c = current.centers[i];
        const double cx = std::clamp(c.x, -1.0, 1.0), cy = std::clamp(c.y, -1.0, 1.0);
        p.lower_[next] = std::max(-1.0, cx - delta);
        p.upper_[next] = std::min(1.0, cx + delta);
        p.lower_[next + 1] = std::max(-1.0, cy - delta);
        p.upper_[next + 1] = std::min(1.0, cy + delta);
        next += 2;
    }
    for (std::size_t i : assignment.polar) {
        p.slots_[i] = {true, next};
        p.lower_[next] = 0.0;
        p.upper_[next] = 1.0;
        p.lower_[next + 1] = 0.0;
        p.upper_[next + 1] = kTwoPi;
        next += 2;
    }

    const auto circle_constraint = [&](ConstraintFamily family, std::size_t i) {
        NlpConstraint c{family, i, 0, p.slots_[i].offset, 0, 0.0, 0.0, 0.0};
        return c;
    };

    for (std::size_t i : assignment.cart)
        p.constraints_.push_back(circle_constraint(ConstraintFamily::containment_cart, i));
    for (std::size_t i : assignment.polar)
        p.constraints_.push_back(circle_constraint(ConstraintFamily::containment_polar, i));

    for (auto [i, j] : pairs.circle_pairs) {
        if (i >= n || j >= n || i == j)
            throw Error("build_nlp: circle pair (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") is not in the assignment");
        if (i > j) std::swap(i, j);
        const bool pi = p.slots_[i].polar, pj = p.slots_[j].polar;
        NlpConstraint c{};
        if (!pi && !pj) {
            c.family = ConstraintFamily::pair_cart_cart;
            c.first = i, c.second = j;
        } else if (pi && pj) {
            c.family = ConstraintFamily::pair_polar_polar;
            c.first = i, c.second = j;
        } else {
            c.family = ConstraintFamily::pair_cart_polar;
            c.first = pi ? j : i;
            c.second = pi ? i : j;
        }
        c.first_var = p.slots_[c.first].offset;
        c.second_var = p.slots_[c.second].offset;
        p.constraints_.push_back(c);
    }

    for (auto [i, f] : pairs.prohibited_pairs) {
        if (i >= n)
            throw Error("build_nlp: prohibited pair names circle " + std::to_string(i) +
                        " which is not in the assignment");
        if (f >= instance.prohibited.size())
            throw Error("build_nlp: prohibited pair names unknown area " + std::to_string(f));
        const auto& area = instance.prohibited[f];
        NlpConstraint c = circle_constraint(
            p.slots_[i].polar ? ConstraintFamily::prohibited_polar : ConstraintFamily::prohibited_cart, i);
        c.second = f;
        c.f_radius = area.radius;
        if (p.slots_[i].polar) {
            const PolarPoint fp = cart_to_polar(area.center);
            c.fa = fp.r;
            c.fb = fp.theta;
        } else {
            c.fa = area.center.x;
            c.fb = area.center.y;
        }
        p.constraints_.push_back(c);
    }
    return p;
}

/// Raised when a constraint evaluates to a non-finite value.
class NonFiniteError : public Error {
public:
    NonFiniteError(std::size_t index, ConstraintFamily family)
        : Error("constraint " + std::to_string(index) + " (family " +
                std::to_string(family_tag(family)) + ") evaluated to a non-finite value"),
          constraint_index(index) {}

    std::size_t constraint_index;
};

struct Evaluation {
    double objective{0.0};  // R, to be maximised
    std::vector<double> objective_gradient;
    std::vector<double> constraints;  // g(v) >= 0 when satisfied
    std::vector<SparseGradient> constraint_gradients;
};

[[nodiscard]] inline Evaluation evaluate(const NlpProblem& problem, std::span<const double> point) {
    if (point.size() != problem.variable_count())
        throw Error("evaluate: point has " + std::to_string(point.size()) + " entries, expected " +
                    std::to_string(problem.variable_count()));
    Evaluation e;
    e.objective = point[NlpProblem::kRadiusIndex];
    e.objective_gradient.assign(point.size(), 0.0);
    e.objective_gradient[NlpProblem::kRadiusIndex] = 1.0;
    e.constraints.reserve(problem.constraint_count());
    e.constraint_gradients.reserve(problem.constraint_count());
    const auto& cs = problem.constraints();
    for (std::size_t k = 0; k < cs.size(); ++k) {
        SparseGradient g;
        const double value = problem.constraint_value(cs[k], point, &g);
        bool finite = std::isfinite(value);
        for (std::size_t t = 0; t < g.size; ++t) finite = finite && std::isfinite(g.value[t]);
        if (!finite) throw NonFiniteError(k, cs[k].family);
        e.constraints.push_back(value);
        e.constraint_gradients.push_back(g);
    }
    return e;
}

}  // namespace fsspack
