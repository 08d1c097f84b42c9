#pragma once

/** @file
    @brief Newton-type solvers for min f(x) s.t. lower <= x <= upper:
    Newton-SQP (box-constrained quadratic model per step) and the reduced-space
    semismooth Newton method on the projected-gradient equation.
*/

#include "nras/linesearch.hpp"
#include "nras/objective.hpp"
#include "nras/qp.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace nras {

enum class SolverStatus { converged, max_iterations, stagnated };

inline std::string to_string(SolverStatus s)
{
    switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iterations: return "max_iterations";
    case SolverStatus::stagnated: return "stagnated";
    }
    return "unknown";
}

/// One row of a convergence history. Step data describe the step taken *from* this iterate.
struct IterationRecord {
    Index iteration = 0;
    double projected_gradient_norm = 0.0;
    double energy = 0.0;
    double alpha = 0.0;         ///< Newton step length
    double schwarz_alpha = 0.0; ///< step length of the subdomain update
    double coarse_alpha = 0.0;  ///< step length of the coarse update
    Index inner_iterations = 0; ///< subdomain Newton iterations, summed over subdomains
    Index coarse_iterations = 0;
    Index qp_cycles = 0;
};

struct ConvergenceRecord {
    std::vector<IterationRecord> iterations;
    SolverStatus status = SolverStatus::max_iterations;
    std::string diagnostic;

    /// Number of outer iterations performed (rows minus the initial one).
    Index outer_iterations() const { return iterations.empty() ? 0 : Index(iterations.size()) - 1; }
    bool converged() const { return status == SolverStatus::converged; }
    double final_norm() const { return iterations.empty() ? 0.0 : iterations.back().projected_gradient_norm; }
};

struct SolveResult {
    Vector x;
    ConvergenceRecord record;
};

struct NewtonOptions {
    double tol = 1e-8;
    Index max_iterations = 100;
    LineSearchConfig line_search{};
    QpOptions qp{.tol = 1e-11};
    double stagnation_tol = 1e-15; ///< max-norm change below which an iteration counts as stagnant
};

namespace detail {

    inline bool stagnant(const Vector& a, const Vector& b, double tol)
    {
        return a.size() == 0 || (a - b).lpNorm<Eigen::Infinity>() < tol;
    }

    /// One Newton-SQP step from x: box QP with shifted bounds, Armijo along its solution.
    template <Objective F>
    Vector sqp_step(const F& f, const Vector& x, const Vector& g, double fx, const NewtonOptions& opt,
                    IterationRecord& row)
    {
        const auto qp = solve_box_qp(f.hessian(x), g, f.bounds().shifted(x), opt.qp);
        row.qp_cycles = qp.cycles;
        const Vector& s = qp.s;
        auto slope_at = [&](const Vector& p) { return f.gradient(p).dot(s); };
        const auto ls = armijo([&](const Vector& p) { return f.value(p); }, x, s, g.dot(s), opt.line_search, fx,
                               slope_at);
        row.alpha = ls.alpha;
        if (ls.stalled) return x;
        return project_box(x + ls.alpha * s, f.bounds());
    }

} // namespace detail

/**
   @brief Right-preconditioned Newton-SQP driver.

   Each iteration maps x to x+ = precondition(x, row) and then takes one
   Newton-SQP step from x+. With the identity preconditioner this is plain
   Newton-SQP. Terminates when ||P(x - grad f(x)) - x|| <= opt.tol.
*/
template <Objective F, class Preconditioner>
SolveResult preconditioned_newton(const F& f, const Vector& x0, const NewtonOptions& opt,
                                  Preconditioner&& precondition)
{
    require(x0.size() == f.size(), "newton: dimension mismatch");
    require(f.bounds().contains(x0), "newton: initial guess is not feasible");
    SolveResult out;
    Vector x = x0;
    for (Index k = 0;; ++k) {
        const Vector g = f.gradient(x);
        IterationRecord row;
        row.iteration = k;
        row.energy = f.value(x);
        row.projected_gradient_norm = projected_gradient_norm(x, g, f.bounds());
        out.record.iterations.push_back(row);
        auto& current = out.record.iterations.back();
        if (row.projected_gradient_norm <= opt.tol) {
            out.record.status = SolverStatus::converged;
            break;
        }
        if (k >= opt.max_iterations) {
            out.record.status = SolverStatus::max_iterations;
            break;
        }

        Vector next;
        const Vector xp = precondition(x, current);
        if (xp == x) {
            next = detail::sqp_step(f, x, g, row.energy, opt, current);
        } else {
            next = detail::sqp_step(f, xp, f.gradient(xp), f.value(xp), opt, current);
        }
        if (detail::stagnant(next, x, opt.stagnation_tol)) {
            out.record.status = SolverStatus::stagnated;
            out.record.diagnostic = "iterate unchanged at iteration " + std::to_string(k);
            break;
        }
        x = std::move(next);
    }
    out.x = std::move(x);
    return out;
}

template <Objective F>
SolveResult newton_sqp_solve(const F& f, const Vector& x0, const NewtonOptions& opt = {})
{
    return preconditioned_newton(f, x0, opt, [](const Vector& x, IterationRecord&) { return x; });
}

/**
   @brief Reduced-space semismooth Newton on x = P(x - grad f(x)).

   Active sets come from the projected-equation residual: lower-active where
   x - g < lower, upper-active where x - g > upper. Active unknowns jump to
   their bound, the Newton system is solved on the rest, the Newton point is
   projected onto the box, and an Armijo search runs along the segment to it.
   A projected gradient step is taken when the Newton direction fails the search.
*/
template <Objective F>
SolveResult semismooth_newton_solve(const F& f, const Vector& x0, const NewtonOptions& opt = {})
{
    require(x0.size() == f.size(), "semismooth_newton: dimension mismatch");
    require(f.bounds().contains(x0), "semismooth_newton: initial guess is not feasible");
    const auto& bounds = f.bounds();
    const Index n = f.size();
    SolveResult out;
    Vector x = x0;
    for (Index k = 0;; ++k) {
        const Vector g = f.gradient(x);
        IterationRecord row;
        row.iteration = k;
        row.energy = f.value(x);
        row.projected_gradient_norm = projected_gradient_norm(x, g, bounds);
        out.record.iterations.push_back(row);
        auto& current = out.record.iterations.back();
        if (row.projected_gradient_norm <= opt.tol) {
            out.record.status = SolverStatus::converged;
            break;
        }
        if (k >= opt.max_iterations) {
            out.record.status = SolverStatus::max_iterations;
            break;
        }

        std::vector<char> active(std::size_t(n), 0);
        Vector target = x;
        for (Index j = 0; j < n; ++j) {
            const double trial = x[j] - g[j];
            if (trial < bounds.lower()[j]) {
                active[std::size_t(j)] = 1;
                target[j] = bounds.lower()[j];
            } else if (trial > bounds.upper()[j]) {
                active[std::size_t(j)] = 1;
                target[j] = bounds.upper()[j];
            }
        }

        // Reduced Newton system H_II d_I = -(g + H (target - x))_I.
        SparseSymMatrix H = f.hessian(x);
        const Vector jump = target - x;
        Vector rhs = -(g + H * jump);
        Vector inv_diag = jacobi_inverse(H.diagonal());
        for (Index j = 0; j < n; ++j)
            if (active[std::size_t(j)]) rhs[j] = inv_diag[j] = 0.0;

        Vector direction = jump;
        double tau = 0.0;
        const double scale = std::max(H.max_abs(), 1e-300);
        for (Index attempt = 0; attempt <= opt.qp.max_regularizations; ++attempt) {
            auto apply = [&](const Vector& p) {
                Vector Hp = H * p;
                if (tau != 0.0) Hp += tau * p;
                for (Index j = 0; j < n; ++j)
                    if (active[std::size_t(j)]) Hp[j] = 0.0;
                return Hp;
            };
            const auto cg = conjugate_gradient(apply, rhs, inv_diag, std::max(0.5 * opt.qp.tol, 1e-12 * rhs.norm()),
                                               10 * n + 10);
            if (!cg.negative_curvature) {
                direction += cg.x;
                break;
            }
            tau = tau == 0.0 ? 1e-8 * scale : 10.0 * tau;
        }

        // Project the Newton point, then search along the feasible segment towards it.
        auto value = [&](const Vector& p) { return f.value(p); };
        auto segment_search = [&](const Vector& trial_direction) {
            const Vector d = project_box(x + trial_direction, bounds) - x;
            auto slope_at = [&](const Vector& p) { return f.gradient(p).dot(d); };
            const auto ls = armijo(value, x, d, g.dot(d), opt.line_search, row.energy, slope_at);
            return std::pair{ls.stalled ? x : Vector(project_box(x + ls.alpha * d, bounds)), ls};
        };
        auto search = segment_search(direction);
        if (search.second.stalled) search = segment_search(Vector(-g));
        current.alpha = search.second.alpha;
        if (search.second.stalled || detail::stagnant(search.first, x, opt.stagnation_tol)) {
            out.record.status = SolverStatus::stagnated;
            out.record.diagnostic = "no decrease along Newton or gradient direction at iteration " + std::to_string(k);
            break;
        }
        x = std::move(search.first);
    }
    out.x = std::move(x);
    return out;
}

} // namespace nras
