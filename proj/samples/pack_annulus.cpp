// Packs n circles around the central prohibited circle of test problem 2 and
// prints the best radius with a feasibility check.
//
//   pack_annulus [n] [iterations] [replications]

#include <cstdio>
#include <cstdlib>

#include "fsspack/fsspack.hpp"

int main(int argc, char** argv) {
    fsspack::FssConfig config;
    config.n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 10;
    config.iterations = argc > 2 ? std::atoi(argv[2]) : 20;
    config.replications = argc > 3 ? std::atoi(argv[3]) : 5;

    const fsspack::Instance instance = fsspack::builtin_instance(2);
    const fsspack::RunReport report = fsspack::run(instance, config);
    const auto check = fsspack::verify_layout(report.best_layout, instance, 0.0);

    std::printf("%s n=%zu R=%s (upper bound %.8f) %s, %zu solves in %.1f s\n", instance.name.c_str(),
                config.n, fsspack::format_truncated(report.best_radius).c_str(),
                fsspack::r_overall(instance, config.n), check.feasible ? "feasible" : "INFEASIBLE",
                report.solver_invocations, report.total_elapsed_s);
    return check.feasible ? 0 : 1;
}
