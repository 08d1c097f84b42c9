#pragma once

/** @file
    @brief Benchmark experiments: configuration, solver dispatch, convergence CSV
    output and subdomain sweeps.
*/

#include "nras/schwarz.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace nras {

enum class Method { ssn, newton_sqp, nras, tl_nras, raspn, tl_raspn };

inline std::string to_string(Method m)
{
    switch (m) {
    case Method::ssn: return "ssn";
    case Method::newton_sqp: return "newton-sqp";
    case Method::nras: return "nras";
    case Method::tl_nras: return "tl-nras";
    case Method::raspn: return "raspn";
    case Method::tl_raspn: return "tl-raspn";
    }
    return "unknown";
}

inline Method parse_method(const std::string& name)
{
    for (const Method m : {Method::ssn, Method::newton_sqp, Method::nras, Method::tl_nras, Method::raspn,
                           Method::tl_raspn})
        if (to_string(m) == name) return m;
    throw InvalidArgument("unknown method '" + name + "'");
}

inline bool uses_decomposition(Method m) { return m != Method::ssn && m != Method::newton_sqp; }
inline bool uses_coarse_level(Method m) { return m == Method::tl_nras || m == Method::tl_raspn; }

enum ExitCode : int { exit_converged = 0, exit_config_error = 2, exit_infeasible = 3, exit_not_converged = 4 };

/// Defaults are the benchmark setup: 120x120 fine mesh, 30x30 coarse mesh, 16 subdomains, overlap 3.
struct ExperimentConfig {
    std::string problem = "minsurf"; ///< "ignition" or "minsurf"
    Method method = Method::newton_sqp;
    Index fine_cells = 120;
    Index coarse_cells = 30;
    Index subdomains = 16;
    Index overlap = 3;
    double outer_tol = 1e-8;
    double inner_tol = 1e-11;
    std::string output; ///< CSV path; empty for no file
    std::optional<std::string> partition_file;
    std::uint64_t seed = 0; ///< recorded only; the pipeline is deterministic

    void validate() const
    {
        require(problem == "ignition" || problem == "minsurf", "unknown problem '" + problem + "'");
        require(fine_cells >= 1, "mesh must have at least one cell per side");
        require(outer_tol > 0.0 && inner_tol > 0.0, "tolerances must be positive");
        if (uses_decomposition(method)) {
            require(subdomains >= 1, "subdomain count must be >= 1");
            require(overlap >= 0, "overlap must be nonnegative");
        }
        if (uses_coarse_level(method))
            require(coarse_cells >= 1 && fine_cells % coarse_cells == 0,
                    "coarse mesh must divide the fine mesh (" + std::to_string(fine_cells) + " vs " +
                        std::to_string(coarse_cells) + ")");
    }

    SolverConfig solver() const
    {
        SolverConfig s;
        s.outer_tol = outer_tol;
        s.inner_tol = inner_tol;
        return s;
    }
};

/// File name the benchmark plots use for a run.
inline std::string default_output_name(const ExperimentConfig& cfg)
{
    const std::string sd = "SD_" + std::to_string(cfg.subdomains) + "_OV_" + std::to_string(cfg.overlap) + ".csv";
    switch (cfg.method) {
    case Method::ssn: return "SSN_reduced.csv";
    case Method::newton_sqp: return "NewtonSQP.csv";
    case Method::nras: return "RAS_" + sd;
    case Method::tl_nras: return "RASTL_" + sd;
    case Method::raspn: return "RASPEN_RAS_" + sd;
    case Method::tl_raspn: return "RASPEN_RASTL_" + sd;
    }
    return "run.csv";
}

inline Problem make_problem(const std::string& name, Index cells)
{
    if (name == "ignition") return {ignition_data(), cells};
    if (name == "minsurf") return {minimal_surface_data(), cells};
    throw InvalidArgument("unknown problem '" + name + "'");
}

inline std::string format_prn(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", value);
    return buf;
}

/// `IT,PRN` rows, one per iterate including the initial one.
inline void write_history_csv(std::ostream& out, const ConvergenceRecord& record)
{
    out << "IT,PRN\n";
    for (const auto& row : record.iterations) out << row.iteration << ',' << format_prn(row.projected_gradient_norm) << '\n';
}

struct ExperimentResult {
    int exit_code = exit_not_converged;
    std::string diagnostic;
    SolveResult solve;
    std::string output; ///< path written, empty if none
};

/// Solves the configured problem. Never throws for bad input; the error is reported in the exit code.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    ExperimentResult out;
    try {
        cfg.validate();
        const Problem problem = make_problem(cfg.problem, cfg.fine_cells);
        const auto report = problem.validate_feasibility();
        if (!report.feasible()) {
            const auto& v = report.violations.front();
            out.exit_code = exit_infeasible;
            out.diagnostic = "infeasible problem: " + std::to_string(report.violations.size()) +
                             " bound violations, first at node " + std::to_string(v.node) + " (" +
                             std::to_string(v.point[0]) + ", " + std::to_string(v.point[1]) + ")";
            return out;
        }
        const FeObjective f(problem);
        const Vector v0 = problem.initial_guess();
        const SolverConfig solver = cfg.solver();

        if (cfg.method == Method::ssn) {
            out.solve = semismooth_newton_solve(f, v0, solver.outer());
        } else if (cfg.method == Method::newton_sqp) {
            out.solve = newton_sqp_solve(f, v0, solver.outer());
        } else {
            const Decomposition dd = cfg.partition_file
                                         ? Decomposition(read_partition_file(*cfg.partition_file, problem.space()),
                                                         problem.space().free_graph(), cfg.overlap)
                                         : make_decomposition(problem.space(), cfg.subdomains, cfg.overlap);
            std::optional<CoarseHierarchy> hierarchy;
            if (uses_coarse_level(cfg.method)) hierarchy.emplace(problem, cfg.coarse_cells);
            const CoarseHierarchy* coarse = hierarchy ? &*hierarchy : nullptr;
            switch (cfg.method) {
            case Method::nras:
            case Method::tl_nras: out.solve = run_preconditioner_only(f, dd, coarse, v0, solver); break;
            case Method::raspn: out.solve = raspnb_solve(f, dd, coarse, v0, solver, Preconditioning::one_level); break;
            default: out.solve = raspnb_solve(f, dd, coarse, v0, solver, Preconditioning::two_level); break;
            }
        }
    } catch (const InfeasibleProblem& e) {
        out.exit_code = exit_infeasible;
        out.diagnostic = e.what();
        return out;
    } catch (const Error& e) {
        out.exit_code = exit_config_error;
        out.diagnostic = e.what();
        return out;
    }

    const auto& record = out.solve.record;
    if (!cfg.output.empty()) {
        std::ofstream file(cfg.output);
        if (!file) {
            out.exit_code = exit_config_error;
            out.diagnostic = "cannot write " + cfg.output;
            return out;
        }
        write_history_csv(file, record);
        out.output = cfg.output;
    }
    if (record.converged()) {
        out.exit_code = exit_converged;
        out.diagnostic = "converged in " + std::to_string(record.outer_iterations()) + " iterations, ||[grad f]|| = " +
                         format_prn(record.final_norm());
    } else {
        out.exit_code = exit_not_converged;
        out.diagnostic = "not converged (" + to_string(record.status) + ") after " +
                         std::to_string(record.outer_iterations()) + " iterations, ||[grad f]|| = " +
                         format_prn(record.final_norm());
        if (!record.diagnostic.empty()) out.diagnostic += ": " + record.diagnostic;
    }
    return out;
}

struct SweepEntry {
    Index subdomains = 0;
    Index iterations = 0;
    bool converged = false;
    int exit_code = 0;
    std::string output;
    std::string diagnostic;
};

inline std::vector<Index> default_sweep() { return {2, 4, 8, 16, 32}; }

/**
   @brief One run per subdomain count, each written to directory/<default name>.
   Failed runs are recorded and the sweep continues.
*/
inline std::vector<SweepEntry> run_sweep(const ExperimentConfig& base, const std::vector<Index>& counts,
                                         const std::string& directory = ".")
{
    std::vector<SweepEntry> entries;
    for (const Index n : counts) {
        ExperimentConfig cfg = base;
        cfg.subdomains = n;
        cfg.output = directory.empty() ? std::string() : (std::filesystem::path(directory) / default_output_name(cfg)).string();
        const auto r = run_experiment(cfg);
        entries.push_back({n, r.solve.record.outer_iterations(), r.exit_code == exit_converged, r.exit_code, r.output,
                           r.diagnostic});
    }
    return entries;
}

inline void write_sweep_summary(std::ostream& out, const std::vector<SweepEntry>& entries)
{
    out << "subdomains  iterations  converged\n";
    for (const auto& e : entries) {
        char line[64];
        std::snprintf(line, sizeof line, "%10ld  %10ld  %s\n", long(e.subdomains), long(e.iterations),
                      e.converged ? "yes" : "no");
        out << line;
    }
}

} // namespace nras
