#pragma once

/** @file
    @brief Nonlinear restricted additive Schwarz for bound constraints, its
    two-level variant, and their use as right preconditioners of Newton-SQP.

    One NRAS-B step from a feasible v solves every subdomain problem
    (exterior frozen at v) with Newton-SQP, sums the owned parts of the local
    corrections, and line-searches the aggregate. Owned components of the update
    are convex combinations of feasible values, so the step stays feasible.
*/

#include "nras/coarse.hpp"
#include "nras/decomposition.hpp"
#include "nras/newton.hpp"

#include <optional>

namespace nras {

struct SolverConfig {
    double outer_tol = 1e-8;
    double inner_tol = 1e-11;
    Index max_outer_iterations = 500;
    Index local_max_iterations = 50;
    Index coarse_max_iterations = 100;
    LineSearchConfig line_search{};
    double stagnation_tol = 1e-15;

    void validate() const
    {
        require(outer_tol > 0.0 && inner_tol > 0.0, "SolverConfig: tolerances must be positive");
        require(inner_tol <= outer_tol, "SolverConfig: inner tolerance must not exceed the outer tolerance");
        require(max_outer_iterations >= 0, "SolverConfig: negative iteration cap");
        line_search.validate();
    }

    NewtonOptions outer() const { return options(outer_tol, max_outer_iterations); }
    NewtonOptions local() const { return options(inner_tol, local_max_iterations); }
    NewtonOptions coarse() const { return options(inner_tol, coarse_max_iterations); }

private:
    NewtonOptions options(double tol, Index cap) const
    {
        NewtonOptions o;
        o.tol = tol;
        o.max_iterations = cap;
        o.line_search = line_search;
        o.qp.tol = inner_tol;
        o.stagnation_tol = stagnation_tol;
        return o;
    }
};

struct SchwarzStepResult {
    Vector v;
    double alpha = 0.0;
    double coarse_alpha = 0.0;
    Index local_iterations = 0;
    Index coarse_iterations = 0;
    bool stalled = false;
};

/// Sum_i P~_i (v_i* - R_i v) over all subdomains.
template <DecomposableObjective F>
Vector schwarz_correction(const F& f, const Decomposition& dd, const Vector& v, const SolverConfig& cfg,
                          Index* local_iterations = nullptr)
{
    require(dd.num_unknowns() == f.size(), "schwarz_correction: decomposition does not match the problem");
    Vector d = Vector::Zero(f.size());
    const auto local_opt = cfg.local();
    for (Index i = 0; i < dd.num_subdomains(); ++i) {
        const auto local = extract_local(f, dd, i, v);
        const Vector start = dd.restrict_vector(i, v);
        const auto solved = newton_sqp_solve(local, start, local_opt);
        if (local_iterations) *local_iterations += solved.record.outer_iterations();
        dd.add_restricted_prolonged(i, Vector(solved.x - start), d);
    }
    return d;
}

template <DecomposableObjective F>
SchwarzStepResult nrasb_step(const F& f, const Decomposition& dd, const Vector& v, const SolverConfig& cfg)
{
    SchwarzStepResult out;
    const Vector d = schwarz_correction(f, dd, v, cfg, &out.local_iterations);
    const Vector g = f.gradient(v);
    auto slope_at = [&](const Vector& p) { return f.gradient(p).dot(d); };
    const auto ls =
        armijo([&](const Vector& p) { return f.value(p); }, v, d, g.dot(d), cfg.line_search, std::nullopt, slope_at);
    out.alpha = ls.alpha;
    out.stalled = ls.stalled;
    out.v = ls.stalled ? v : project_box(v + ls.alpha * d, f.bounds());
    return out;
}

/// Coarse correction, then one NRAS-B step from the half-step iterate.
template <DecomposableObjective F, CoarseModel Model>
SchwarzStepResult tl_nrasb_step(const F& f, const Decomposition& dd, const Model& coarse, const Vector& v,
                                const SolverConfig& cfg)
{
    const auto half = coarse_step(f, coarse, v, cfg.coarse(), cfg.line_search);
    auto out = nrasb_step(f, dd, half.v, cfg);
    out.coarse_alpha = half.alpha;
    out.coarse_iterations = half.coarse_iterations;
    out.stalled = out.stalled && (half.stalled || half.v == v);
    return out;
}

enum class Preconditioning { none, one_level, two_level };

namespace detail {
    /// Stand-in coarse model for the one-level paths.
    struct NoCoarseModel {
        const CoarseSpace& space() const { throw InvalidArgument("no coarse level configured"); }
        const QuadraticObjective& objective() const { throw InvalidArgument("no coarse level configured"); }
    };

    template <DecomposableObjective F, class Model>
    SchwarzStepResult schwarz_step(const F& f, const Decomposition& dd, const Model* coarse, const Vector& v,
                                   const SolverConfig& cfg)
    {
        if constexpr (CoarseModel<Model>) {
            if (coarse) return tl_nrasb_step(f, dd, *coarse, v, cfg);
        }
        return nrasb_step(f, dd, v, cfg);
    }
} // namespace detail

/**
   @brief RASPN-B: Newton-SQP right-preconditioned by NRAS-B, or by TL-NRAS-B
   when a coarse model is given. `mode == none` skips the preconditioner and
   reduces to newton_sqp_solve.
*/
template <DecomposableObjective F, class Model = detail::NoCoarseModel>
SolveResult raspnb_solve(const F& f, const Decomposition& dd, const Model* coarse, const Vector& v0,
                         const SolverConfig& cfg, Preconditioning mode = Preconditioning::one_level)
{
    cfg.validate();
    if (mode == Preconditioning::none) return newton_sqp_solve(f, v0, cfg.outer());
    require(mode == Preconditioning::one_level || coarse != nullptr, "raspnb_solve: two-level mode needs a coarse model");
    const Model* used = mode == Preconditioning::two_level ? coarse : nullptr;
    return preconditioned_newton(f, v0, cfg.outer(), [&](const Vector& v, IterationRecord& row) {
        const auto step = detail::schwarz_step(f, dd, used, v, cfg);
        row.schwarz_alpha = step.alpha;
        row.coarse_alpha = step.coarse_alpha;
        row.inner_iterations = step.local_iterations;
        row.coarse_iterations = step.coarse_iterations;
        return step.v;
    });
}

/// Fixed-point iteration v <- G(v) of NRAS-B (or TL-NRAS-B) alone.
template <DecomposableObjective F, class Model = detail::NoCoarseModel>
SolveResult run_preconditioner_only(const F& f, const Decomposition& dd, const Model* coarse, const Vector& v0,
                                    const SolverConfig& cfg)
{
    cfg.validate();
    require(v0.size() == f.size(), "run_preconditioner_only: dimension mismatch");
    require(f.bounds().contains(v0), "run_preconditioner_only: initial guess is not feasible");
    SolveResult out;
    Vector v = v0;
    for (Index k = 0;; ++k) {
        IterationRecord row;
        row.iteration = k;
        row.energy = f.value(v);
        row.projected_gradient_norm = projected_gradient_norm(v, f.gradient(v), f.bounds());
        out.record.iterations.push_back(row);
        if (row.projected_gradient_norm <= cfg.outer_tol) {
            out.record.status = SolverStatus::converged;
            break;
        }
        if (k >= cfg.max_outer_iterations) {
            out.record.status = SolverStatus::max_iterations;
            break;
        }
        auto step = detail::schwarz_step(f, dd, coarse, v, cfg);
        auto& current = out.record.iterations.back();
        current.schwarz_alpha = step.alpha;
        current.coarse_alpha = step.coarse_alpha;
        current.inner_iterations = step.local_iterations;
        current.coarse_iterations = step.coarse_iterations;
        if (detail::stagnant(step.v, v, cfg.stagnation_tol)) {
            out.record.status = SolverStatus::stagnated;
            out.record.diagnostic = "Schwarz iterate unchanged at iteration " + std::to_string(k);
            break;
        }
        v = std::move(step.v);
    }
    out.x = std::move(v);
    return out;
}

} // namespace nras
