// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion that ran;
// the exit status is nonzero if any of them fails. Criterion 9 audits the runs made
// by criteria 1-4 in the same process, so filter those in alongside it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fsspack/cli.hpp"
#include "fsspack/fsspack.hpp"
#include "oracles.hpp"

using namespace fsspack;

namespace {

struct Verdict {
    bool pass{false};
    std::string detail;
};

std::map<int, Verdict>& verdicts() {
    static std::map<int, Verdict> v;
    return v;
}

void record(int criterion, bool pass, const std::string& detail) {
    verdicts()[criterion] = {pass, detail};
    EXPECT_TRUE(pass) << "criterion " << criterion << ": " << detail;
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// Criterion 9 bookkeeping: every corrected radius seen in criteria 1-4.
struct BoundLedger {
    std::size_t samples{0};
    std::size_t violations{0};
    std::size_t infeasible_best{0};
};

BoundLedger& bound_ledger() {
    static BoundLedger b;
    return b;
}

RunReport tracked_run(const Instance& instance, std::size_t n, int iterations, int replications) {
    FssConfig config;
    config.n = n;
    config.iterations = iterations;
    config.replications = replications;
    config.seed = 1;
    const RunReport report = run(instance, config);
    const double cap = r_overall(instance, n);
    auto& ledger = bound_ledger();
    for (const auto& trace : report.traces) {
        for (const auto& row : trace) {
            ++ledger.samples;
            if (!(row.corrected_radius >= 0.0 && row.corrected_radius <= cap)) ++ledger.violations;
        }
    }
    if (!verify_layout(report.best_layout, instance, 0.0).feasible) ++ledger.infeasible_best;
    return report;
}

const RunReport& table_cell(const std::string& key, const Instance& instance, std::size_t n) {
    static std::map<std::string, RunReport> cache;
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, tracked_run(instance, n, 80, 25)).first;
    return it->second;
}

}  // namespace

TEST(Acceptance, Criterion1AnalyticOptima) {
    const auto t0 = std::chrono::steady_clock::now();
    const double optimum[] = {1.0, 0.5, 2.0 * std::sqrt(3.0) - 3.0};
    bool pass = true;
    std::string detail;
    for (std::size_t n = 1; n <= 3; ++n) {
        const RunReport r = tracked_run({}, n, 40, 5);
        const double gap = std::abs(r.best_radius - optimum[n - 1]);
        pass = pass && gap <= 1e-3;
        detail += fmt("n=%zu R=%.10f (optimum %.10f) ", n, r.best_radius, optimum[n - 1]);
    }
    const double elapsed = seconds_since(t0);
    record(1, pass, detail + fmt("in %.1fs", elapsed));
}

TEST(Acceptance, Criterion2AnnulusSingleCircle) {
    const auto t0 = std::chrono::steady_clock::now();
    const Instance inst = builtin_instance(2);
    const double expected = oracle::annulus_single_circle(inst.prohibited[0].radius);
    const RunReport r = tracked_run(inst, 1, 40, 5);
    const double gap = std::abs(r.best_radius - expected);
    record(2, gap <= 1e-4,
           fmt("R=%.10f oracle=%.10f gap=%.2e in %.1fs", r.best_radius, expected, gap, seconds_since(t0)));
}

TEST(Acceptance, Criterion3TableCells) {
    struct Cell {
        const char* label;
        Instance instance;
        double published;
    };
    const std::vector<Cell> cells{{"problem 2", builtin_instance(2), 0.25060817},
                                  {"problem 3", builtin_instance(3), 0.26225892},
                                  {"problem 6", builtin_instance(6), 0.26018588},
                                  {"problem 1 |F|=11", builtin_instance(1, 11), 0.24958389}};
    bool pass = true;
    std::string detail;
    for (const auto& cell : cells) {
        const auto t0 = std::chrono::steady_clock::now();
        const RunReport& r = table_cell(cell.instance.name + "_n10", cell.instance, 10);
        const double floor = 0.98 * cell.published;
        pass = pass && r.best_radius >= floor;
        detail += fmt("%s R=%s (floor %.8f, published %.8f, %.0fs); ", cell.label,
                      format_truncated(r.best_radius).c_str(), floor, cell.published, seconds_since(t0));
    }
    record(3, pass, detail);
}

TEST(Acceptance, Criterion4MonotoneInN) {
    const Instance inst = builtin_instance(2);
    const RunReport& ten = table_cell(inst.name + "_n10", inst, 10);
    const RunReport& twenty = table_cell(inst.name + "_n20", inst, 20);
    record(4, twenty.best_radius < ten.best_radius,
           fmt("n=20 R=%s < n=10 R=%s", format_truncated(twenty.best_radius).c_str(),
               format_truncated(ten.best_radius).c_str()));
}

TEST(Acceptance, Criterion5CorrectionFeasibility) {
    std::mt19937_64 gen(20261014);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int feasible = 0, maximal = 0, positive = 0;
    const int sets = 1000;
    for (int k = 0; k < sets; ++k) {
        const Instance inst = k % 5 == 0 ? Instance{} : oracle::random_instance(gen, 5);
        const std::size_t n = 1 + static_cast<std::size_t>(u(gen) * 20);
        std::vector<CartPoint> centers;
        while (centers.size() < n) {
            const auto c = oracle::random_centers(gen, 1)[0];
            bool free = true;
            for (const auto& f : inst.prohibited) free = free && distance(c, f.center) > f.radius;
            if (free) centers.push_back(c);
        }
        const double r = correct_radius(centers, inst);
        if (verify_layout({centers, r}, inst, 0.0).feasible) ++feasible;
        if (r > 0.0) {
            ++positive;
            if (!verify_layout({centers, r + 1e-9}, inst, 1e-10).feasible) ++maximal;
        }
    }
    record(5, feasible == sets && maximal == positive && positive > sets / 2,
           fmt("%d/%d feasible at tol 0; %d/%d positive radii violated after +1e-9", feasible, sets, maximal,
               positive));
}

TEST(Acceptance, Criterion6Gradients) {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_oracle = 0.0, worst_library = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Instance inst = oracle::random_instance(gen, 5);
        const std::size_t n = 1 + static_cast<std::size_t>(u(gen) * 10);
        const Layout layout{oracle::random_centers(gen, n), 0.0};
        std::vector<bool> flags(n);
        for (std::size_t i = 0; i < n; ++i) flags[i] = u(gen) > 0.5;
        const double cap = r_overall(inst, n);
        const NlpProblem p = build_nlp(inst, Assignment::from_polar_flags(flags), layout, 2.0 / 3.0 * cap,
                                       PairSets::complete(n, inst.prohibited.size()), cap);
        std::vector<double> v(p.variable_count());
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] = p.lower()[j] + (p.upper()[j] - p.lower()[j]) * (0.01 + 0.98 * u(gen));
        const Evaluation e = evaluate(p, v);
        for (std::size_t c = 0; c < p.constraint_count(); ++c) {
            const auto& con = p.constraints()[c];
            const auto fd = oracle::fd_gradient(
                [&](const std::vector<double>& x) { return p.constraint_value(con, x, nullptr); }, v, p.lower(),
                p.upper());
            std::vector<double> dense(v.size(), 0.0);
            for (std::size_t t = 0; t < e.constraint_gradients[c].size; ++t)
                dense[e.constraint_gradients[c].index[t]] += e.constraint_gradients[c].value[t];
            for (std::size_t j = 0; j < v.size(); ++j)
                worst_oracle = std::max(worst_oracle, std::abs(dense[j] - fd[j]) / std::max(1.0, std::abs(dense[j])));
        }
        worst_library = std::max(worst_library, gradient_check(p, v));
    }
    record(6, worst_oracle < 1e-6 && worst_library < 1e-6,
           fmt("worst relative error %.2e (test oracle), %.2e (gradient_check)", worst_oracle, worst_library));
}

TEST(Acceptance, Criterion7Pruning) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t pruned = 0, unsound = 0;
    for (int k = 0; k < 200; ++k) {
        const Instance inst = oracle::random_instance(gen, 4);
        const std::size_t n = 2 + static_cast<std::size_t>(u(gen) * 14);
        const Layout layout{oracle::random_centers(gen, n), 0.0};
        std::vector<bool> flags(n);
        for (std::size_t i = 0; i < n; ++i) flags[i] = u(gen) > 0.7;
        const auto a = Assignment::from_polar_flags(flags);
        const double r_cap = r_overall(inst, n) * u(gen);
        const double delta = 2.0 / 3.0 * r_overall(inst, n) * u(gen);
        const PairSets kept = prune_pairs(layout, a, delta, r_cap, inst);
        const NlpProblem p = build_nlp(inst, a, layout, delta, {}, r_cap);
        const auto box = [&](std::size_t i) {
            const std::size_t o = p.slots()[i].offset;
            return oracle::Box{p.lower()[o], p.upper()[o], p.lower()[o + 1], p.upper()[o + 1]};
        };
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (std::find(kept.circle_pairs.begin(), kept.circle_pairs.end(), std::pair{i, j}) !=
                    kept.circle_pairs.end())
                    continue;
                ++pruned;
                if (flags[i] || flags[j] || oracle::grid_min_distance(box(i), box(j)) < 2.0 * r_cap) ++unsound;
            }
            for (std::size_t f = 0; f < inst.prohibited.size(); ++f) {
                if (std::find(kept.prohibited_pairs.begin(), kept.prohibited_pairs.end(), std::pair{i, f}) !=
                    kept.prohibited_pairs.end())
                    continue;
                ++pruned;
                const auto& area = inst.prohibited[f];
                if (flags[i] || oracle::grid_min_distance(box(i), area.center) < r_cap + area.radius) ++unsound;
            }
        }
    }

    // pruned and unpruned programs from identical starts
    double worst_gap = 0.0;
    std::size_t solves = 0, pruned_in_solves = 0;
    for (int k = 0; k < 60; ++k) {
        const Instance inst = oracle::random_instance(gen, 3);
        const std::size_t n = 2 + static_cast<std::size_t>(u(gen) * 4);
        const Layout layout{oracle::random_centers(gen, n), 0.0};
        std::vector<bool> flags(n);
        for (std::size_t i = 0; i < n; ++i) flags[i] = u(gen) > 0.7;
        const auto a = Assignment::from_polar_flags(flags);
        const double cap = r_overall(inst, n);
        const double delta = 2.0 / 3.0 * cap * u(gen);
        const PairSets some = prune_pairs(layout, a, delta, cap, inst);
        const PairSets all = PairSets::complete(n, inst.prohibited.size());
        pruned_in_solves += all.circle_pairs.size() + all.prohibited_pairs.size() - some.circle_pairs.size() -
                            some.prohibited_pairs.size();
        const NlpProblem small = build_nlp(inst, a, layout, delta, some, cap);
        const NlpProblem full = build_nlp(inst, a, layout, delta, all, cap);
        const double start_r = cap * u(gen);
        const SolverResult rs = solve(small, small.start_point(layout, start_r));
        const SolverResult rf = solve(full, full.start_point(layout, start_r));
        const double cs = correct_radius(small.to_layout(rs.point).centers, inst);
        const double cf = correct_radius(full.to_layout(rf.point).centers, inst);
        worst_gap = std::max(worst_gap, std::abs(std::min(cs, cap) - std::min(cf, cap)));
        ++solves;
    }
    record(7, unsound == 0 && pruned > 0 && worst_gap <= 1e-9 && pruned_in_solves > 0,
           fmt("%zu pruned pairs, %zu unsound; %zu solve pairs (%zu constraints pruned), worst radius gap %.2e",
               pruned, unsound, solves, pruned_in_solves, worst_gap));
}

TEST(Acceptance, Criterion8Determinism) {
    namespace fs = std::filesystem;
    const auto root = fs::temp_directory_path() / "fsspack_acceptance_determinism";
    fs::remove_all(root);
    std::vector<std::string> results, svgs;
    for (const char* name : {"a", "b"}) {
        const auto dir = root / name;
        const std::string out = dir.string();
        const char* argv[] = {"fsspack", "run", "--problem", "2,6", "--n", "6,8", "--iterations", "10",
                              "--replications", "4", "--seed", "5", "--out", out.c_str()};
        std::ostringstream sink;
        EXPECT_EQ(cli::run_cli(static_cast<int>(std::size(argv)), argv, sink, sink), 0) << sink.str();
        auto doc = nlohmann::json::parse(read_text_file((dir / "results.json").string()));
        for (auto& row : doc) row.erase("total_time_s");
        results.push_back(doc.dump(2));
        std::string pictures;
        for (const char* layout : {"layout_problem2_n6.json", "layout_problem2_n8.json", "layout_problem6_n6.json",
                                   "layout_problem6_n8.json"}) {
            const std::string svg = (dir / (std::string(layout) + ".svg")).string();
            const std::string in = (dir / layout).string();
            const char* rargv[] = {"fsspack", "render", in.c_str(), "--svg", svg.c_str()};
            EXPECT_EQ(cli::run_cli(5, rargv, sink, sink), 0) << sink.str();
            pictures += read_text_file(svg);
        }
        svgs.push_back(pictures);
    }
    const bool same_results = results[0] == results[1];
    const bool same_svgs = svgs[0] == svgs[1];
    record(8, same_results && same_svgs,
           fmt("results.json %s, SVGs %s", same_results ? "identical" : "DIFFER", same_svgs ? "identical" : "DIFFER"));
}

TEST(Acceptance, Criterion9AreaBound) {
    const auto& ledger = bound_ledger();
    record(9, ledger.samples > 0 && ledger.violations == 0 && ledger.infeasible_best == 0,
           fmt("%zu corrected radii from criteria 1-4, %zu above r_overall, %zu infeasible best layouts",
               ledger.samples, ledger.violations, ledger.infeasible_best));
}

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    const int status = RUN_ALL_TESTS();
    std::printf("\n");
    bool all = true;
    for (const auto& [k, v] : verdicts()) {
        all = all && v.pass;
        std::printf("criterion %d: %s  %s\n", k, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    }
    return (status == 0 && all && !verdicts().empty()) ? 0 : 1;
}
