// Command-line driver for the obstacle-constrained benchmark experiments.

#include "nras/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace nras;

    CLI::App app{"Newton-SQP with nonlinear restricted additive Schwarz preconditioning for bound-constrained "
                 "energy minimization"};
    ExperimentConfig cfg;
    std::string method = to_string(cfg.method);
    std::string partition_file;
    std::vector<Index> sweep;

    app.add_option("--problem", cfg.problem, "Benchmark problem")
        ->check(CLI::IsMember({"ignition", "minsurf"}))
        ->capture_default_str();
    app.add_option("--method", method, "Solver")
        ->check(CLI::IsMember({"ssn", "newton-sqp", "nras", "tl-nras", "raspn", "tl-raspn"}))
        ->capture_default_str();
    app.add_option("--mesh", cfg.fine_cells, "Fine mesh cells per side")->capture_default_str();
    app.add_option("--coarse-mesh", cfg.coarse_cells, "Coarse mesh cells per side (two-level methods)")
        ->capture_default_str();
    app.add_option("--subdomains", cfg.subdomains, "Number of subdomains")->capture_default_str();
    app.add_option("--overlap", cfg.overlap, "Overlap in node layers")->capture_default_str();
    app.add_option("--tol", cfg.outer_tol, "Outer tolerance on the projected gradient norm")->capture_default_str();
    app.add_option("--inner-tol", cfg.inner_tol, "Tolerance of local, coarse and QP solves")->capture_default_str();
    app.add_option("--output", cfg.output,
                   "CSV file (single run) or directory (sweep); default: the plot file name in the current directory");
    app.add_option("--partition-file", partition_file, "Explicit 'node subdomain' assignment of the free nodes");
    app.add_option("--sweep", sweep, "Run once per subdomain count (e.g. --sweep 2 4 8 16 32)")->expected(0, -1);
    app.add_option("--seed", cfg.seed, "Recorded in the log; the pipeline is deterministic")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config_error;
    }

    cfg.method = parse_method(method);
    if (!partition_file.empty()) cfg.partition_file = partition_file;

    if (app.count("--sweep") > 0) {
        if (sweep.empty()) sweep = default_sweep();
        const std::string directory = cfg.output.empty() ? "." : cfg.output;
        const auto entries = run_sweep(cfg, sweep, directory);
        write_sweep_summary(std::cout, entries);
        int code = exit_converged;
        for (const auto& e : entries) {
            if (e.exit_code != exit_converged) {
                std::cerr << "subdomains " << e.subdomains << ": " << e.diagnostic << '\n';
                if (code == exit_converged) code = e.exit_code;
            }
        }
        return code;
    }

    if (cfg.output.empty()) cfg.output = default_output_name(cfg);
    const auto result = run_experiment(cfg);
    (result.exit_code == exit_converged ? std::cout : std::cerr) << result.diagnostic << '\n';
    return result.exit_code;
}
