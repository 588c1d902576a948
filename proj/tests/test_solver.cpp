#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fsspack/correction.hpp"
#include "fsspack/solver.hpp"
#include "oracles.hpp"

using namespace fsspack;

namespace {

struct Case {
    NlpProblem problem;
    std::vector<double> start;
    Instance instance;
};

Case unboxed(const Instance& inst, const Layout& layout, const Assignment& a, double radius) {
    const std::size_t n = layout.size();
    NlpProblem p = build_nlp(inst, a, layout, 2.0, PairSets::complete(n, inst.prohibited.size()), r_overall(inst, n));
    auto start = p.start_point(layout, radius);
    return {std::move(p), std::move(start), inst};
}

Case random_case(std::mt19937_64& gen, std::size_t n, int max_f) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Instance inst = oracle::random_instance(gen, max_f);
    const Layout layout{oracle::random_centers(gen, n), 0.0};
    std::vector<bool> flags(n);
    for (std::size_t i = 0; i < n; ++i) flags[i] = u(gen) > 0.5;
    const double r_cap = r_overall(inst, n);
    const double delta = 2.0 / 3.0 * r_cap;
    const auto a = Assignment::from_polar_flags(flags);
    NlpProblem p = build_nlp(inst, a, layout, delta, prune_pairs(layout, a, delta, r_cap, inst), r_cap);
    auto start = p.start_point(layout, 0.5 * r_cap * u(gen));
    return {std::move(p), std::move(start), inst};
}

}  // namespace

TEST(Solve, SingleCircleMovesToCentre) {
    const Case c = unboxed({}, {{{0.3, 0.2}}, 0.0}, Assignment::all_cartesian(1), 0.1);
    const SolverResult r = solve(c.problem, c.start);
    EXPECT_EQ(r.status, SolveStatus::converged);
    EXPECT_NEAR(r.objective, 1.0, 1e-6);
    EXPECT_NEAR(r.point[1], 0.0, 1e-6);
    EXPECT_NEAR(r.point[2], 0.0, 1e-6);
}

TEST(Solve, TwoCirclesReachHalf) {
    // tangent to each other and to the container: d = 2 - 2R = 2R
    const double expected = 2.0 / 4.0;
    for (const auto& a : {Assignment::all_cartesian(2), Assignment::all_polar(2),
                          Assignment::from_polar_flags({false, true})}) {
        const Case c = unboxed({}, {{{0.4, 0.1}, {-0.35, -0.1}}, 0.0}, a, 0.3);
        const SolverResult r = solve(c.problem, c.start);
        EXPECT_NEAR(r.objective, expected, 1e-4);
        EXPECT_NEAR(correct_radius(c.problem.to_layout(r.point).centers, {}), expected, 1e-4);
    }
}

TEST(Solve, AnnulusSingleCircle) {
    const Instance inst{"p2", {{{0.0, 0.0}, 1.0 / 10.5}}};
    const double expected = oracle::annulus_single_circle(1.0 / 10.5);
    EXPECT_NEAR(expected, 0.45238095, 1e-8);
    for (const auto& a : {Assignment::all_cartesian(1), Assignment::all_polar(1)}) {
        const Case c = unboxed(inst, {{{0.3, 0.3}}, 0.0}, a, 0.1);
        const SolverResult r = solve(c.problem, c.start);
        EXPECT_NEAR(r.objective, expected, 1e-5);
    }
}

TEST(Solve, ResultRespectsBoundsAndIsDeterministic) {
    std::mt19937_64 gen(61);
    for (int trial = 0; trial < 20; ++trial) {
        const Case c = random_case(gen, 2 + trial % 7, 3);
        const SolverResult a = solve(c.problem, c.start);
        const SolverResult b = solve(c.problem, c.start);
        ASSERT_EQ(a.point, b.point);
        ASSERT_EQ(a.status, b.status);
        ASSERT_EQ(a.inner_iterations, b.inner_iterations);
        for (std::size_t k = 0; k < a.point.size(); ++k) {
            ASSERT_GE(a.point[k], c.problem.lower()[k]);
            ASSERT_LE(a.point[k], c.problem.upper()[k]);
        }
    }
}

TEST(Solve, MeritNonincreasingPerOuterIteration) {
    std::mt19937_64 gen(62);
    for (int trial = 0; trial < 30; ++trial) {
        const Case c = random_case(gen, 1 + trial % 8, 3);
        const SolverResult r = solve(c.problem, c.start);
        ASSERT_EQ(static_cast<int>(r.merit_trace.size()), r.outer_iterations);
        for (const auto& step : r.merit_trace) ASSERT_LE(step.after, step.before);
    }
}

TEST(Solve, ConvergedResultsAreFeasibleAndCompatibleWithCorrection) {
    std::mt19937_64 gen(63);
    const SolverOptions options;
    int converged = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const Case c = random_case(gen, 1 + trial % 6, 3);
        const SolverResult r = solve(c.problem, c.start, options);
        if (r.status != SolveStatus::converged) continue;
        ++converged;
        ASSERT_LE(r.max_constraint_violation, options.feasibility_tolerance);
        ASSERT_LE(r.kkt_residual, options.kkt_tolerance);
        const Layout layout = c.problem.to_layout(r.point);
        ASSERT_NEAR(correct_radius(layout.centers, c.instance), r.objective, options.feasibility_tolerance + 1e-9)
            << "trial " << trial;
    }
    EXPECT_GT(converged, 10);
}

TEST(Solve, CorrectionCompatibilityWithProhibitedAreas) {
    std::mt19937_64 gen(64);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const SolverOptions options;
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const Instance inst = oracle::random_instance(gen, 3);
        const std::size_t n = 1 + trial % 6;
        const Layout layout{oracle::random_centers(gen, n), 0.0};
        std::vector<bool> flags(n);
        for (std::size_t i = 0; i < n; ++i) flags[i] = u(gen) > 0.5;
        const Case c = unboxed(inst, layout, Assignment::from_polar_flags(flags), 0.0);
        const SolverResult r = solve(c.problem, c.start, options);
        if (r.status != SolveStatus::converged) continue;
        ++checked;
        const double corrected = correct_radius(c.problem.to_layout(r.point).centers, inst);
        ASSERT_NEAR(corrected, r.objective, options.feasibility_tolerance + 1e-9) << "trial " << trial;
    }
    EXPECT_GT(checked, 10);
}

TEST(Solve, NonFiniteConstraintsReportNumericalFailure) {
    const Instance inst{"far", {{{1e200, 0.0}, 0.5}}};
    const Case c = unboxed(inst, {{{0.1, 0.0}}, 0.0}, Assignment::all_polar(1), 0.1);
    const SolverResult r = solve(c.problem, c.start);
    EXPECT_EQ(r.status, SolveStatus::numerical_failure);
    EXPECT_EQ(std::string(to_string(r.status)), "numerical_failure");
}

TEST(Solve, RejectsBadOptionsAndStart) {
    const Case c = unboxed({}, {{{0.1, 0.0}}, 0.0}, Assignment::all_cartesian(1), 0.1);
    SolverOptions o;
    o.penalty_growth = 1.0;
    EXPECT_THROW((void)solve(c.problem, c.start, o), Error);
    o = {};
    o.kkt_tolerance = 0.0;
    EXPECT_THROW((void)solve(c.problem, c.start, o), Error);
    EXPECT_THROW((void)solve(c.problem, std::vector<double>{0.0}), Error);
}

TEST(GradientCheck, MixedProblemInteriorPoints) {
    std::mt19937_64 gen(71);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const Instance inst{"f", {{{0.2, -0.1}, 0.15}, {{-0.5, 0.4}, 0.1}}};
    const Layout layout{oracle::random_centers(gen, 5), 0.0};
    const NlpProblem p = build_nlp(inst, Assignment::from_polar_flags({true, false, true, false, true}), layout,
                                   0.2, PairSets::complete(5, 2), r_overall(inst, 5));
    for (int k = 0; k < 20; ++k) {
        std::vector<double> v(p.variable_count());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = p.lower()[j] + (p.upper()[j] - p.lower()[j]) * u(gen);
        EXPECT_LT(gradient_check(p, v), 1e-6);
    }
}

TEST(GradientCheck, CartesianProblemIsNearlyExact) {
    std::mt19937_64 gen(72);
    const Instance inst{"f", {{{0.2, -0.1}, 0.15}}};
    const Layout layout{oracle::random_centers(gen, 6), 0.0};
    const NlpProblem p = build_nlp(inst, Assignment::all_cartesian(6), layout, 0.2, PairSets::complete(6, 1), 0.4);
    const auto v = p.start_point(layout, 0.2);
    EXPECT_LT(gradient_check(p, v), 1e-8);
}

TEST(GradientCheck, OneSidedAtAngleBound) {
    const Instance inst{"f", {{{0.0, -0.5}, 0.2}}};
    const Layout layout{{{0.6, 0.0}, {-0.3, 0.4}}, 0.0};
    const NlpProblem p = build_nlp(inst, Assignment::all_polar(2), layout, 0.2, PairSets::complete(2, 1), 0.5);
    auto v = p.start_point(layout, 0.2);
    ASSERT_EQ(v[p.slots()[0].offset + 1], 0.0);
    EXPECT_LT(gradient_check(p, v), 1e-5);
    v[p.slots()[1].offset + 1] = kTwoPi;
    EXPECT_LT(gradient_check(p, v), 1e-5);
}
