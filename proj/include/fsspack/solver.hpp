#pragma once

// Local smooth constrained maximiser for NlpProblem.
//
// Outer loop: augmented Lagrangian (Powell-Hestenes-Rockafellar form for
// inequalities g(v) >= 0). Inner loop: projected L-BFGS on the box bounds with
// a backtracking Armijo search along the projection arc.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fsspack/formulation.hpp"

namespace fsspack {

struct SolverOptions {
    int max_outer_iterations{50};
    int max_inner_iterations{500};
    double kkt_tolerance{1e-8};
    double feasibility_tolerance{1e-8};
    double initial_penalty{10.0};
    double penalty_growth{10.0};

    void validate() const {
        if (max_outer_iterations <= 0 || max_inner_iterations <= 0)
            throw Error("solver options: iteration limits must be positive");
        if (!(kkt_tolerance > 0.0) || !(feasibility_tolerance > 0.0) || !(initial_penalty > 0.0))
            throw Error("solver options: tolerances and penalty must be positive");
        if (!(penalty_growth > 1.0)) throw Error("solver options: penalty growth must exceed 1");
    }
};

enum class SolveStatus { converged, iteration_limit, numerical_failure };

[[nodiscard]] inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::iteration_limit: return "iteration_limit";
        case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

/// Augmented-Lagrangian value before and after one inner minimisation (fixed multipliers).
struct MeritStep {
    double before{0.0};
    double after{0.0};
};

struct SolverResult {
    std::vector<double> point;
    double objective{0.0};  // the R component of point
    SolveStatus status{SolveStatus::iteration_limit};
    double max_constraint_violation{0.0};  // distance units, see NlpProblem::geometric_violation
    double kkt_residual{0.0};
    int outer_iterations{0};
    int inner_iterations{0};
    std::vector<double> multipliers;
    std::vector<MeritStep> merit_trace;
};

namespace detail {

// Infinity norm of x - P(x - grad).
inline double projected_gradient_norm(std::span<const double> x, std::span<const double> grad,
                                      std::span<const double> lo, std::span<const double> hi) {
    double worst = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double moved = std::clamp(x[k] - grad[k], lo[k], hi[k]);
        worst = std::max(worst, std::abs(moved - x[k]));
    }
    return worst;
}

class AugmentedLagrangian {
public:
    AugmentedLagrangian(const NlpProblem& problem, std::vector<double>& multipliers, double& penalty)
        : problem_(problem), multipliers_(multipliers), penalty_(penalty) {}

    // Returns NaN if any constraint is non-finite.
    double operator()(std::span<const double> v, std::span<double> grad) const {
        std::fill(grad.begin(), grad.end(), 0.0);
        grad[NlpProblem::kRadiusIndex] = -1.0;
        double value = -v[NlpProblem::kRadiusIndex];
        const auto& cs = problem_.constraints();
        const double rho = penalty_;
        for (std::size_t k = 0; k < cs.size(); ++k) {
            SparseGradient g;
            const double gk = problem_.constraint_value(cs[k], v, &g);
            if (!std::isfinite(gk)) return std::numeric_limits<double>::quiet_NaN();
            const double lambda = multipliers_[k];
            const double shifted = lambda - rho * gk;
            if (shifted > 0.0) {
                value += -lambda * gk + 0.5 * rho * gk * gk;
                for (std::size_t t = 0; t < g.size; ++t) grad[g.index[t]] -= shifted * g.value[t];
            } else {
                value += -0.5 * lambda * lambda / rho;
            }
        }
        return value;
    }

    double value(std::span<const double> v) const {
        std::vector<double> scratch(v.size());
        return (*this)(v, scratch);
    }

private:
    const NlpProblem& problem_;
    std::vector<double>& multipliers_;
    double& penalty_;
};

enum class InnerStatus { converged, iteration_limit, stalled, non_finite };

struct InnerResult {
    InnerStatus status{InnerStatus::iteration_limit};
    double value{0.0};
    double projected_gradient{0.0};
    int iterations{0};
};

template <typename Fn>
InnerResult projected_lbfgs(const Fn& fn, std::vector<double>& x, std::span<const double> lo,
                            std::span<const double> hi, double tolerance, int max_iterations) {
    constexpr std::size_t kMemory = 8;
    constexpr int kMaxBacktracks = 40;
    constexpr double kArmijo = 1e-4;

    const std::size_t dim = x.size();
    std::vector<double> grad(dim), next(dim), next_grad(dim), dir(dim), q(dim);
    std::vector<bool> free_var(dim);
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    InnerResult out;
    double f = fn(x, grad);
    if (!std::isfinite(f)) {
        out.status = InnerStatus::non_finite;
        return out;
    }
    int flat_steps = 0;

    for (int it = 0; it < max_iterations; ++it) {
        out.iterations = it;
        out.projected_gradient = projected_gradient_norm(x, grad, lo, hi);
        if (out.projected_gradient <= tolerance) {
            out.status = InnerStatus::converged;
            out.value = f;
            return out;
        }
        for (std::size_t k = 0; k < dim; ++k)
            free_var[k] = !((x[k] <= lo[k] && grad[k] > 0.0) || (x[k] >= hi[k] && grad[k] < 0.0));

        bool accepted = false;
        bool all_non_finite = true;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            // two-loop recursion on the free subspace
            for (std::size_t k = 0; k < dim; ++k) q[k] = free_var[k] ? -grad[k] : 0.0;
            std::vector<double> alpha(s_hist.size());
            for (std::size_t m = s_hist.size(); m-- > 0;) {
                double dot = 0.0;
                for (std::size_t k = 0; k < dim; ++k)
                    if (free_var[k]) dot += s_hist[m][k] * q[k];
                alpha[m] = rho_hist[m] * dot;
                for (std::size_t k = 0; k < dim; ++k)
                    if (free_var[k]) q[k] -= alpha[m] * y_hist[m][k];
            }
            double scale = 1.0;
            if (!s_hist.empty()) {
                double sy = 0.0, yy = 0.0;
                for (std::size_t k = 0; k < dim; ++k) {
                    sy += s_hist.back()[k] * y_hist.back()[k];
                    yy += y_hist.back()[k] * y_hist.back()[k];
                }
                if (yy > 0.0) scale = sy / yy;
            }
            for (std::size_t k = 0; k < dim; ++k) q[k] *= scale;
            for (std::size_t m = 0; m < s_hist.size(); ++m) {
                double dot = 0.0;
                for (std::size_t k = 0; k < dim; ++k)
                    if (free_var[k]) dot += y_hist[m][k] * q[k];
                const double beta = rho_hist[m] * dot;
                for (std::size_t k = 0; k < dim; ++k)
                    if (free_var[k]) q[k] += (alpha[m] - beta) * s_hist[m][k];
            }
            double slope = 0.0, dir_norm = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                dir[k] = free_var[k] ? q[k] : 0.0;
                slope += dir[k] * grad[k];
                dir_norm = std::max(dir_norm, std::abs(dir[k]));
            }
            if (!(slope < 0.0)) {
                for (std::size_t k = 0; k < dim; ++k) dir[k] = free_var[k] ? -grad[k] : 0.0;
                dir_norm = 0.0;
                for (std::size_t k = 0; k < dim; ++k) dir_norm = std::max(dir_norm, std::abs(dir[k]));
                s_hist.clear(), y_hist.clear(), rho_hist.clear();
            }
            // without curvature information, cap the first trial move
            double step = 1.0;
            if (s_hist.empty() && dir_norm > 0.1) step = 0.1 / dir_norm;

            for (int bt = 0; bt < kMaxBacktracks; ++bt, step *= 0.5) {
                double decrease = 0.0;
                for (std::size_t k = 0; k < dim; ++k) {
                    next[k] = std::clamp(x[k] + step * dir[k], lo[k], hi[k]);
                    decrease += grad[k] * (next[k] - x[k]);
                }
                const double fn_next = fn(next, next_grad);
                if (!std::isfinite(fn_next)) continue;
                all_non_finite = false;
                if (decrease < 0.0 && fn_next <= f + kArmijo * decrease) {
                    accepted = true;
                    double sy = 0.0, ss = 0.0, yy = 0.0;
                    std::vector<double> s(dim), y(dim);
                    for (std::size_t k = 0; k < dim; ++k) {
                        s[k] = next[k] - x[k];
                        y[k] = next_grad[k] - grad[k];
                        sy += s[k] * y[k];
                        ss += s[k] * s[k];
                        yy += y[k] * y[k];
                    }
                    if (sy > 1e-12 * std::sqrt(ss * yy)) {
                        s_hist.push_back(std::move(s));
                        y_hist.push_back(std::move(y));
                        rho_hist.push_back(1.0 / sy);
                        if (s_hist.size() > kMemory) {
                            s_hist.pop_front(), y_hist.pop_front(), rho_hist.pop_front();
                        }
                    }
                    flat_steps = (f - fn_next <= 1e-16 * std::max(1.0, std::abs(f))) ? flat_steps + 1 : 0;
                    x.swap(next);
                    grad.swap(next_grad);
                    f = fn_next;
                    break;
                }
            }
            if (!accepted) {
                if (s_hist.empty()) break;
                s_hist.clear(), y_hist.clear(), rho_hist.clear();
            }
        }
        if (!accepted) {
            out.status = all_non_finite ? InnerStatus::non_finite : InnerStatus::stalled;
            out.value = f;
            out.projected_gradient = projected_gradient_norm(x, grad, lo, hi);
            return out;
        }
        if (flat_steps >= 5) {
            out.status = InnerStatus::stalled;
            out.value = f;
            out.iterations = it + 1;
            out.projected_gradient = projected_gradient_norm(x, grad, lo, hi);
            return out;
        }
    }
    out.iterations = max_iterations;
    out.value = f;
    out.projected_gradient = projected_gradient_norm(x, grad, lo, hi);
    return out;
}

}  // namespace detail

/// Locally maximises R. The returned point always satisfies the bounds exactly;
/// `converged` means KKT stationarity within kkt_tolerance and constraint
/// violation within feasibility_tolerance. No randomness: identical inputs give
/// bit-identical results.
[[nodiscard]] inline SolverResult solve(const NlpProblem& problem, std::span<const double> start,
                                        const SolverOptions& options = {}) {
    options.validate();
    if (start.size() != problem.variable_count())
        throw Error("solve: start has " + std::to_string(start.size()) + " entries, expected " +
                    std::to_string(problem.variable_count()));

    const auto& lo = problem.lower();
    const auto& hi = problem.upper();
    const auto& cs = problem.constraints();

    SolverResult result;
    std::vector<double> x(start.begin(), start.end());
    problem.clamp_to_bounds(x);
    std::vector<double> lambda(cs.size(), 0.0);
    double rho = options.initial_penalty;
    detail::AugmentedLagrangian merit(problem, lambda, rho);

    const auto constraint_measures = [&](std::span<const double> v, double& violation,
                                         double& complementarity, bool& finite) {
        violation = 0.0;
        complementarity = 0.0;
        finite = true;
        for (std::size_t k = 0; k < cs.size(); ++k) {
            const double gk = problem.constraint_value(cs[k], v, nullptr);
            if (!std::isfinite(gk)) {
                finite = false;
                return;
            }
            violation = std::max(violation, problem.geometric_violation(cs[k], v));
            complementarity = std::max(complementarity, std::abs(std::min(gk, lambda[k] / rho)));
        }
    };

    double inner_tolerance = 1e-2;
    double previous_measure = std::numeric_limits<double>::infinity();
    result.status = SolveStatus::iteration_limit;
    std::vector<double> grad(x.size());

    for (int outer = 1; outer <= options.max_outer_iterations; ++outer) {
        result.outer_iterations = outer;
        inner_tolerance = std::max(options.kkt_tolerance, inner_tolerance);
        const double before = merit.value(x);
        const detail::InnerResult inner =
            detail::projected_lbfgs(merit, x, lo, hi, inner_tolerance, options.max_inner_iterations);
        result.inner_iterations += inner.iterations;
        if (inner.status == detail::InnerStatus::non_finite) {
            result.status = SolveStatus::numerical_failure;
            break;
        }
        const double after = merit.value(x);
        result.merit_trace.push_back({before, after});
        assert(!(after > before));

        double violation = 0.0, complementarity = 0.0;
        bool finite = true;
        constraint_measures(x, violation, complementarity, finite);
        if (!finite) {
            result.status = SolveStatus::numerical_failure;
            break;
        }
        // gradient of the augmented Lagrangian equals the Lagrangian gradient at
        // the updated multipliers
        merit(x, grad);
        result.kkt_residual = detail::projected_gradient_norm(x, grad, lo, hi);
        for (std::size_t k = 0; k < cs.size(); ++k)
            lambda[k] = std::max(0.0, lambda[k] - rho * problem.constraint_value(cs[k], x, nullptr));
        result.max_constraint_violation = violation;

        if (violation <= options.feasibility_tolerance &&
            complementarity <= options.feasibility_tolerance &&
            result.kkt_residual <= options.kkt_tolerance) {
            result.status = SolveStatus::converged;
            break;
        }
        if (complementarity > options.feasibility_tolerance && complementarity > 0.25 * previous_measure)
            rho = std::min(rho * options.penalty_growth, 1e12);
        previous_measure = complementarity;
        inner_tolerance *= 0.1;
    }

    double violation = 0.0, complementarity = 0.0;
    bool finite = true;
    constraint_measures(x, violation, complementarity, finite);
    if (!finite) result.status = SolveStatus::numerical_failure;
    result.max_constraint_violation = finite ? violation : std::numeric_limits<double>::infinity();
    result.objective = x[NlpProblem::kRadiusIndex];
    result.point = std::move(x);
    result.multipliers = std::move(lambda);
    return result;
}

/// Worst relative error |analytic - fd| / max(1, |analytic|) over the objective and
/// every constraint, with central differences of step h. Variables within h of a
/// bound use a one-sided difference into the box.
[[nodiscard]] inline double gradient_check(const NlpProblem& problem, std::span<const double> point,
                                           double h = 1e-6) {
    const auto& lo = problem.lower();
    const auto& hi = problem.upper();
    const std::size_t dim = problem.variable_count();
    std::vector<double> v(point.begin(), point.end());

    const auto relative = [](double analytic, double fd) {
        return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
    };

    // objective is R itself
    double worst = relative(1.0, 1.0);

    std::vector<double> dense(dim);
    for (const auto& c : problem.constraints()) {
        SparseGradient g;
        (void)problem.constraint_value(c, v, &g);
        std::fill(dense.begin(), dense.end(), 0.0);
        for (std::size_t t = 0; t < g.size; ++t) dense[g.index[t]] += g.value[t];
        for (std::size_t k = 0; k < dim; ++k) {
            const double base = v[k];
            double fd;
            if (base - h < lo[k]) {
                v[k] = base + h;
                const double up = problem.constraint_value(c, v, nullptr);
                v[k] = base;
                fd = (up - problem.constraint_value(c, v, nullptr)) / h;
            } else if (base + h > hi[k]) {
                v[k] = base - h;
                const double down = problem.constraint_value(c, v, nullptr);
                v[k] = base;
                fd = (problem.constraint_value(c, v, nullptr) - down) / h;
            } else {
                v[k] = base + h;
                const double up = problem.constraint_value(c, v, nullptr);
                v[k] = base - h;
                const double down = problem.constraint_value(c, v, nullptr);
                fd = (up - down) / (2.0 * h);
            }
            v[k] = base;
            worst = std::max(worst, relative(dense[k], fd));
        }
    }
    return worst;
}

}  // namespace fsspack
