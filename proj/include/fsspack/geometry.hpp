#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsspack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Cartesian point in container units. The container is the unit circle at the origin.
struct CartPoint {
    double x{0.0};
    double y{0.0};

    friend bool operator==(const CartPoint&, const CartPoint&) = default;
};

/// Polar point with r >= 0 and theta in [0, 2*pi].
struct PolarPoint {
    double r{0.0};
    double theta{0.0};

    friend bool operator==(const PolarPoint&, const PolarPoint&) = default;
};

/// A fixed circular region that packed circles may touch but not overlap.
struct ProhibitedCircle {
    CartPoint center;
    double radius{0.0};

    friend bool operator==(const ProhibitedCircle&, const ProhibitedCircle&) = default;
};

/// Unit container plus its prohibited areas. An empty list is plain circle-in-circle packing.
struct Instance {
    std::string name;
    std::vector<ProhibitedCircle> prohibited;

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// n circle centres (always stored Cartesian) sharing one radius.
struct Layout {
    std::vector<CartPoint> centers;
    double radius{0.0};

    [[nodiscard]] std::size_t size() const { return centers.size(); }
};

[[nodiscard]] inline double norm(CartPoint p) { return std::hypot(p.x, p.y); }

[[nodiscard]] inline double distance(CartPoint a, CartPoint b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// The origin maps to (0, 0). Theta is normalised into [0, 2*pi).
[[nodiscard]] inline PolarPoint cart_to_polar(CartPoint p) {
    const double r = std::hypot(p.x, p.y);
    if (r == 0.0) return {0.0, 0.0};
    double theta = std::atan2(p.y, p.x);
    if (theta < 0.0) theta += kTwoPi;
    // atan2 of a tiny negative y can round up to exactly 2*pi after the shift
    if (theta >= kTwoPi) theta = 0.0;
    return {r, theta};
}

[[nodiscard]] inline CartPoint polar_to_cart(PolarPoint p) {
    return {p.r * std::cos(p.theta), p.r * std::sin(p.theta)};
}

[[nodiscard]] inline double max_prohibited_radius(const Instance& instance) {
    double largest = 0.0;
    for (const auto& f : instance.prohibited) largest = std::max(largest, f.radius);
    return largest;
}

/// Area-based upper bound on the common radius: sqrt((1 - max_f R_f^2) / n).
/// The radicand is clamped at zero when a prohibited circle covers the container.
[[nodiscard]] inline double r_overall(const Instance& instance, std::size_t n) {
    if (n == 0) throw Error("r_overall: n must be at least 1");
    const double largest = max_prohibited_radius(instance);
    const double radicand = 1.0 - largest * largest;
    if (radicand <= 0.0) return 0.0;
    return std::sqrt(radicand / static_cast<double>(n));
}

/// True when the prohibited circle lies entirely outside the closed unit disk.
[[nodiscard]] inline bool is_vacuous(const ProhibitedCircle& f) {
    return norm(f.center) - f.radius >= 1.0;
}

/// Structural checks on an instance. Throws on invalid radii or non-finite values;
/// returns human-readable warnings for prohibited circles that can never bind.
inline std::vector<std::string> validate_instance(const Instance& instance) {
    std::vector<std::string> warnings;
    for (std::size_t k = 0; k < instance.prohibited.size(); ++k) {
        const auto& f = instance.prohibited[k];
        if (!std::isfinite(f.center.x) || !std::isfinite(f.center.y) || !std::isfinite(f.radius)) {
            throw Error("prohibited[" + std::to_string(k) + "]: non-finite value");
        }
        if (!(f.radius > 0.0)) {
            throw Error("prohibited[" + std::to_string(k) + "].r: radius must be positive");
        }
        if (is_vacuous(f)) {
            warnings.push_back("prohibited[" + std::to_string(k) +
                               "] lies outside the unit container and never binds");
        }
    }
    return warnings;
}

}  // namespace fsspack
