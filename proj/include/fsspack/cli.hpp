#pragma once

// Command-line front end: run / verify / render.
//
// Exit codes: 0 success, 1 infeasible or no result, 2 usage or malformed input.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fsspack/correction.hpp"
#include "fsspack/engine.hpp"
#include "fsspack/instances.hpp"
#include "fsspack/io.hpp"
#include "fsspack/report.hpp"

namespace fsspack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 1;
inline constexpr int kExitUsage = 2;

/// Usage problem detected after flag parsing (bad id, f_count misuse, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

struct RunOptions {
    std::vector<std::string> problems;  // "1".."6" or instance file paths
    std::optional<int> f_count;
    std::vector<std::size_t> n_values{10};
    int iterations{80};
    int replications{25};
    std::uint64_t seed{1};
    std::string out_dir{"."};
    unsigned threads{0};
    bool prune{true};
};

struct VerifyOptions {
    std::string layout_path;
    double tol{1e-10};
    std::string instance_path;  // empty: resolve the layout's instance name from the catalogue
    std::string report_path;    // empty: <layout>.verify.json
};

struct RenderOptions {
    std::string layout_path;
    std::string svg_path;
    std::string instance_path;
};

struct ResolvedProblem {
    std::string label;  // value for the "problem" column
    std::optional<int> f_count;
    Instance instance;
};

inline bool is_integer(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

[[nodiscard]] inline ResolvedProblem resolve_problem(const std::string& arg, std::optional<int> f_count,
                                                     std::ostream& err) {
    if (is_integer(arg)) {
        const int id = std::stoi(arg);
        if (id < 1 || id > kProblemCount) throw UsageError("--problem: unknown test problem " + arg);
        if (f_count && id != 1) throw UsageError("--fcount applies only to test problem 1");
        if (f_count && (*f_count < kMinUnionCount || *f_count > kMaxUnionCount))
            throw UsageError("--fcount must be between 4 and 11");
        ResolvedProblem r{arg, id == 1 ? std::optional<int>(f_count.value_or(kMaxUnionCount)) : std::nullopt,
                          builtin_instance(id, f_count)};
        return r;
    }
    if (f_count) throw UsageError("--fcount applies only to test problem 1");
    std::vector<std::string> warnings;
    Instance instance = load_instance(arg, &warnings);
    for (const auto& w : warnings) err << "warning: " << arg << ": " << w << "\n";
    if (instance.name.empty()) instance.name = std::filesystem::path(arg).stem().string();
    return {instance.name, std::nullopt, std::move(instance)};
}

[[nodiscard]] inline Instance resolve_layout_instance(const LayoutDocument& doc, const std::string& instance_path,
                                                      std::ostream& err) {
    if (!instance_path.empty()) {
        std::vector<std::string> warnings;
        Instance instance = load_instance(instance_path, &warnings);
        for (const auto& w : warnings) err << "warning: " << instance_path << ": " << w << "\n";
        return instance;
    }
    if (auto builtin = find_builtin(doc.instance)) return *builtin;
    throw UsageError("layout names instance \"" + doc.instance +
                     "\" which is not built in; pass --instance <file>");
}

inline std::string file_stem_for(const std::string& name) {
    std::string out;
    for (unsigned char c : name) out += (std::isalnum(c) || c == '-' || c == '_') ? static_cast<char>(c) : '_';
    return out;
}

[[nodiscard]] inline int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    if (opts.problems.empty()) throw UsageError("--problem is required");
    if (opts.n_values.empty()) throw UsageError("--n is required");
    for (auto n : opts.n_values)
        if (n < 1) throw UsageError("--n values must be at least 1");
    if (opts.iterations < 1 || opts.replications < 1)
        throw UsageError("--iterations and --replications must be at least 1");

    std::vector<ResolvedProblem> problems;
    for (const auto& arg : opts.problems) problems.push_back(resolve_problem(arg, opts.f_count, err));

    std::filesystem::create_directories(opts.out_dir);
    const std::filesystem::path dir(opts.out_dir);

    std::vector<ResultRow> rows;
    bool all_feasible = true;
    for (const auto& problem : problems) {
        for (std::size_t n : opts.n_values) {
            FssConfig config;
            config.n = n;
            config.iterations = opts.iterations;
            config.replications = opts.replications;
            config.seed = opts.seed;
            config.threads = opts.threads;
            config.prune = opts.prune;
            const RunReport report = run(problem.instance, config);

            const auto layout_file = dir / ("layout_" + file_stem_for(problem.instance.name) + "_n" +
                                            std::to_string(n) + ".json");
            save_layout(layout_file.string(), problem.instance.name, report.best_layout);

            // check what a reader of the file will see (radius truncated to 8 decimals)
            const LayoutDocument written = load_layout(layout_file.string());
            const FeasibilityReport check = verify_layout(written.layout, problem.instance, 1e-10);
            const bool ok = check.feasible && report.best_radius > 0.0;
            all_feasible = all_feasible && ok;

            ResultRow row;
            row.problem = problem.label;
            row.f_count = problem.f_count;
            row.n = n;
            row.best_radius = report.best_radius;
            row.total_time_s = report.total_elapsed_s;
            row.replication_of_best = report.replication_of_best;
            row.seed = opts.seed;
            row.solver_invocations = report.solver_invocations;
            rows.push_back(row);

            out << problem.instance.name << " n=" << n << " best_radius=" << format_truncated(report.best_radius, 8)
                << " replication=" << report.replication_of_best << " time=" << report.total_elapsed_s << "s"
                << (ok ? "" : " NO FEASIBLE LAYOUT") << "\n";
        }
    }
    write_text_file((dir / "results.csv").string(), results_csv(rows));
    write_text_file((dir / "results.json").string(), results_json(rows).dump(2) + "\n");
    return all_feasible ? kExitOk : kExitInfeasible;
}

[[nodiscard]] inline int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err) {
    if (!(opts.tol >= 0.0)) throw UsageError("--tol must be nonnegative");
    const LayoutDocument doc = load_layout(opts.layout_path);
    const Instance instance = resolve_layout_instance(doc, opts.instance_path, err);
    const FeasibilityReport report = verify_layout(doc.layout, instance, opts.tol);

    out << "layout:     " << opts.layout_path << "\n"
        << "instance:   " << instance.name << " (prohibited areas: " << instance.prohibited.size() << ")\n"
        << "n:          " << doc.layout.size() << "\n"
        << "radius:     " << format_truncated(doc.layout.radius, 8) << "\n"
        << "tolerance:  " << opts.tol << "\n"
        << "containment violation: " << report.worst_containment_violation << "\n"
        << "pairwise violation:    " << report.worst_pairwise_violation << "\n"
        << "prohibited violation:  " << report.worst_prohibited_violation << "\n"
        << "worst constraint:      " << report.worst_constraint() << "\n"
        << (report.feasible ? "FEASIBLE" : "INFEASIBLE") << "\n";

    const std::string report_path = opts.report_path.empty() ? opts.layout_path + ".verify.json" : opts.report_path;
    nlohmann::json doc_json = report_to_json(report);
    doc_json["layout"] = opts.layout_path;
    doc_json["instance"] = instance.name;
    write_text_file(report_path, doc_json.dump(2) + "\n");
    return report.feasible ? kExitOk : kExitInfeasible;
}

[[nodiscard]] inline int cmd_render(const RenderOptions& opts, std::ostream& /*out*/, std::ostream& err) {
    if (opts.svg_path.empty()) throw UsageError("--svg is required");
    const LayoutDocument doc = load_layout(opts.layout_path);
    const Instance instance = resolve_layout_instance(doc, opts.instance_path, err);
    write_text_file(opts.svg_path, render_svg(instance, doc.layout));
    return kExitOk;
}

/// Parses argv (argv[0] is the program name) and dispatches to a subcommand.
[[nodiscard]] inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                                 std::ostream& err = std::cerr) {
    CLI::App app{"Packs identical circles into the unit circle around prohibited areas"};
    app.require_subcommand(1);

    RunOptions run_opts;
    std::optional<int> f_count;
    auto* run_cmd = app.add_subcommand("run", "search for the largest common radius");
    run_cmd->add_option("--problem", run_opts.problems, "built-in test problem 1-6 or an instance file")
        ->required()
        ->delimiter(',');
    run_cmd->add_option("--fcount", f_count, "number of prohibited circles for problem 1 (4-11)");
    run_cmd->add_option("--n", run_opts.n_values, "circle counts, e.g. 10 or 10,20,30")->delimiter(',');
    run_cmd->add_option("--iterations", run_opts.iterations, "search iterations per replication")
        ->capture_default_str();
    run_cmd->add_option("--replications", run_opts.replications, "independent replications")
        ->capture_default_str();
    run_cmd->add_option("--seed", run_opts.seed, "random seed")->capture_default_str();
    run_cmd->add_option("--out", run_opts.out_dir, "output directory")->capture_default_str();
    run_cmd->add_option("--threads", run_opts.threads, "worker threads (0 = all cores)")->capture_default_str();
    bool no_prune = false;
    run_cmd->add_flag("--no-prune", no_prune, "keep every pair constraint");

    VerifyOptions verify_opts;
    auto* verify_cmd = app.add_subcommand("verify", "check a layout file for feasibility");
    verify_cmd->add_option("layout", verify_opts.layout_path, "layout JSON file")->required();
    verify_cmd->add_option("--tol", verify_opts.tol, "violation tolerance")->capture_default_str();
    verify_cmd->add_option("--instance", verify_opts.instance_path, "instance file for non-built-in names");
    verify_cmd->add_option("--report", verify_opts.report_path, "where to write the JSON report");

    RenderOptions render_opts;
    auto* render_cmd = app.add_subcommand("render", "draw a layout as SVG");
    render_cmd->add_option("layout", render_opts.layout_path, "layout JSON file")->required();
    render_cmd->add_option("--svg", render_opts.svg_path, "output SVG path")->required();
    render_cmd->add_option("--instance", render_opts.instance_path, "instance file for non-built-in names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (run_cmd->parsed()) {
            run_opts.f_count = f_count;
            run_opts.prune = !no_prune;
            return cmd_run(run_opts, out, err);
        }
        if (verify_cmd->parsed()) return cmd_verify(verify_opts, out, err);
        if (render_cmd->parsed()) return cmd_render(render_opts, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfeasible;
    }
    return kExitUsage;
}

}  // namespace fsspack::cli
