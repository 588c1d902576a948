#pragma once

// Formulation space search: each iteration re-draws which circles use Cartesian
// and which Polar coordinates, boxes the Cartesian ones around their current
// position, solves the resulting program locally and corrects the radius.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <thread>
#include <vector>

#include "fsspack/correction.hpp"
#include "fsspack/formulation.hpp"
#include "fsspack/geometry.hpp"
#include "fsspack/rng.hpp"
#include "fsspack/solver.hpp"

namespace fsspack {

struct FssConfig {
    std::size_t n{10};
    int iterations{80};
    int replications{25};
    std::uint64_t seed{1};
    double delta_factor{2.0 / 3.0};
    SolverOptions solver{};
    /// Drop pairs that provably cannot collide within the movement boxes.
    bool prune{true};
    /// Worker threads for replications; 0 uses the hardware concurrency.
    unsigned threads{0};

    void validate() const {
        if (n < 1) throw Error("config: n must be at least 1");
        if (iterations < 1) throw Error("config: iterations must be at least 1");
        if (replications < 1) throw Error("config: replications must be at least 1");
        if (!(delta_factor > 0.0)) throw Error("config: delta_factor must be positive");
        solver.validate();
    }
};

struct IterationTrace {
    int iteration{0};
    double corrected_radius{0.0};
    double best_radius{0.0};
    double delta{0.0};
    std::size_t cart_count{0};
    SolveStatus status{SolveStatus::converged};
    double elapsed_s{0.0};
};

struct ReplicationResult {
    Layout best_layout;
    std::vector<IterationTrace> trace;
    double elapsed_s{0.0};
};

struct RunReport {
    Layout best_layout;
    double best_radius{0.0};
    std::size_t replication_of_best{0};
    std::vector<std::vector<IterationTrace>> traces;
    std::vector<double> replication_elapsed_s;
    double total_elapsed_s{0.0};
    std::size_t solver_invocations{0};
};

/// Centres with r uniform on [0, 1] and theta uniform on [0, 2*pi]. The radial
/// draw is not area-uniform, so points concentrate near the origin.
[[nodiscard]] inline Layout random_initial_layout(Philox4x32& rng, std::size_t n) {
    Layout layout;
    layout.centers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rng.uniform01();
        const double theta = kTwoPi * rng.uniform01();
        layout.centers.push_back(polar_to_cart({r, theta}));
    }
    return layout;
}

/// Circle i goes to the Cartesian set iff draws[i] <= 0.5.
[[nodiscard]] inline Assignment assign_from_draws(std::span<const double> draws) {
    Assignment a;
    for (std::size_t i = 0; i < draws.size(); ++i) (draws[i] <= 0.5 ? a.cart : a.polar).push_back(i);
    return a;
}

[[nodiscard]] inline Assignment reassign_sets(Philox4x32& rng, std::size_t n) {
    std::vector<double> draws(n);
    for (auto& d : draws) d = rng.uniform01();
    return assign_from_draws(draws);
}

/// One independent search from a fresh random layout.
[[nodiscard]] inline ReplicationResult run_replication(const Instance& instance, const FssConfig& config,
                                                       Philox4x32& rng) {
    config.validate();
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();

    const double r_cap = r_overall(instance, config.n);
    ReplicationResult out;
    out.trace.reserve(static_cast<std::size_t>(config.iterations));

    Layout current = random_initial_layout(rng, config.n);
    Assignment assignment = reassign_sets(rng, config.n);
    double delta = config.delta_factor * r_cap;
    double best = 0.0;
    double previous = 0.0;
    bool have_best = false;

    for (int t = 0; t < config.iterations; ++t) {
        const auto pass_start = clock::now();
        const PairSets pairs = config.prune ? prune_pairs(current, assignment, delta, r_cap, instance)
                                            : PairSets::complete(config.n, instance.prohibited.size());
        const NlpProblem problem = build_nlp(instance, assignment, current, delta, pairs, r_cap);
        const std::vector<double> start = problem.start_point(current, std::clamp(previous, 0.0, r_cap));
        const SolverResult solved = solve(problem, start, config.solver);

        Layout next = solved.status == SolveStatus::numerical_failure ? current
                                                                     : problem.to_layout(solved.point);
        // r_cap only bites for prohibited areas reaching outside the container
        next.radius = std::min(correct_radius(next.centers, instance), r_cap);

        IterationTrace row;
        row.iteration = t + 1;
        row.corrected_radius = next.radius;
        row.delta = delta;
        row.cart_count = assignment.cart.size();
        row.status = solved.status;

        if (!have_best || next.radius > best) {
            best = next.radius;
            out.best_layout = next;
            have_best = true;
        }
        row.best_radius = best;
        delta = config.delta_factor * next.radius;
        previous = next.radius;
        current = std::move(next);
        assignment = reassign_sets(rng, config.n);

        row.elapsed_s = std::chrono::duration<double>(clock::now() - pass_start).count();
        out.trace.push_back(row);
    }
    out.elapsed_s = std::chrono::duration<double>(clock::now() - started).count();
    return out;
}

/// All replications, each on its own RNG stream derived from (seed, replication).
[[nodiscard]] inline RunReport run(const Instance& instance, const FssConfig& config) {
    config.validate();
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();

    const auto count = static_cast<std::size_t>(config.replications);
    std::vector<ReplicationResult> results(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};

    const auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                Philox4x32 rng(config.seed, k);
                results[k] = run_replication(instance, config, rng);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    }

    RunReport report;
    bool found = false;
    for (std::size_t k = 0; k < count; ++k) {
        if (errors[k]) {
            report.traces.emplace_back();
            report.replication_elapsed_s.push_back(0.0);
            continue;
        }
        auto& r = results[k];
        report.solver_invocations += r.trace.size();
        if (!found || r.best_layout.radius > report.best_radius) {
            report.best_radius = r.best_layout.radius;
            report.best_layout = r.best_layout;
            report.replication_of_best = k;
            found = true;
        }
        report.traces.push_back(std::move(r.trace));
        report.replication_elapsed_s.push_back(r.elapsed_s);
    }
    if (!found) std::rethrow_exception(errors.front());
    report.total_elapsed_s = std::chrono::duration<double>(clock::now() - started).count();
    return report;
}

}  // namespace fsspack
