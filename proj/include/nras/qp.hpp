#pragma once

/** @file
    @brief Bound-constrained convex quadratic programming,
    min 1/2 s'Hs + g's  s.t.  lower <= s <= upper,
    with a gradient-projection / conjugate-gradient hybrid in the spirit of GPCG.
*/

#include "nras/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace nras {

struct QpOptions {
    double tol = 1e-11;          ///< on ||P(s - (Hs + g)) - s||
    Index max_cycles = 2000;     ///< gradient-projection + CG cycles
    Index max_projection_steps = 50;
    double cg_forcing = 1e-4;    ///< relative CG tolerance within a cycle
    double sufficient_decrease = 1e-4;
    Index max_regularizations = 20;
};

struct QpResult {
    Vector s;
    bool converged = false;
    Index cycles = 0;
    Index cg_iterations = 0;
    double regularization = 0.0; ///< tau of the H + tau I actually solved
    double projected_gradient_norm = 0.0;
};

namespace detail {

    /// Binding components: at a bound with the gradient pushing outward. Ties count as binding.
    inline std::vector<char> binding_set(const Vector& s, const Vector& r, const BoxBounds& bounds)
    {
        std::vector<char> binding(std::size_t(s.size()), 0);
        for (Index j = 0; j < s.size(); ++j) {
            const bool at_lower = s[j] <= bounds.lower()[j];
            const bool at_upper = s[j] >= bounds.upper()[j];
            binding[std::size_t(j)] = (at_lower && r[j] >= 0.0) || (at_upper && r[j] <= 0.0) ||
                                      bounds.lower()[j] == bounds.upper()[j];
        }
        return binding;
    }

    struct QpState {
        Vector s;
        Vector r; // H s + g
    };

    /// Projected Armijo search along d. Decreases are computed as p'(r + Hp/2) to stay accurate near the optimum.
    inline std::optional<double> projected_search(const SparseSymMatrix& H, QpState& state, const Vector& d,
                                                  double alpha, const BoxBounds& bounds, double mu)
    {
        for (int k = 0; k < 60; ++k, alpha *= 0.5) {
            const Vector trial = project_box(state.s + alpha * d, bounds);
            const Vector p = trial - state.s;
            if (p.squaredNorm() == 0.0) return std::nullopt;
            const Vector Hp = H * p;
            const double decrease = p.dot(state.r + 0.5 * Hp);
            if (decrease <= mu * state.r.dot(p) && decrease < 0.0) {
                state.s = trial;
                state.r += Hp;
                return -decrease;
            }
        }
        return std::nullopt;
    }

    enum class QpOutcome { converged, stalled, capped, indefinite };

    inline QpOutcome gpcg(const SparseSymMatrix& H, const Vector& g, const BoxBounds& bounds, const QpOptions& opt,
                          QpResult& result)
    {
        QpState state;
        state.s = project_box(Vector::Zero(g.size()), bounds);
        state.r = H * state.s + g;
        const Vector inv_diag = jacobi_inverse(H.diagonal());
        const Index n = g.size();

        for (result.cycles = 0; result.cycles < opt.max_cycles; ++result.cycles) {
            result.projected_gradient_norm = (project_box(state.s - state.r, bounds) - state.s).norm();
            if (result.projected_gradient_norm <= opt.tol) {
                result.s = state.s;
                return QpOutcome::converged;
            }

            // Gradient projection: identify the active face.
            bool moved = false;
            double best_decrease = 0.0;
            auto binding = binding_set(state.s, state.r, bounds);
            for (Index k = 0; k < opt.max_projection_steps; ++k) {
                Vector d = -state.r;
                for (Index j = 0; j < n; ++j)
                    if (binding[std::size_t(j)]) d[j] = 0.0;
                if (d.squaredNorm() == 0.0) break;
                const double curvature = d.dot(H * d);
                if (!(curvature > 0.0)) return QpOutcome::indefinite;
                const auto decrease = projected_search(H, state, -state.r, d.squaredNorm() / curvature, bounds,
                                                       opt.sufficient_decrease);
                if (!decrease) break;
                moved = true;
                best_decrease = std::max(best_decrease, *decrease);
                auto next = binding_set(state.s, state.r, bounds);
                const bool same_face = next == binding;
                binding = std::move(next);
                if (same_face || *decrease <= 0.25 * best_decrease) break;
            }

            // Conjugate gradients on the free face.
            Vector rhs = -state.r;
            Vector face_inv_diag = inv_diag;
            for (Index j = 0; j < n; ++j)
                if (binding[std::size_t(j)]) {
                    rhs[j] = 0.0;
                    face_inv_diag[j] = 0.0;
                }
            const double rhs_norm = rhs.norm();
            if (rhs_norm > 0.0) {
                auto apply = [&](const Vector& p) {
                    Vector Hp = H * p;
                    for (Index j = 0; j < n; ++j)
                        if (binding[std::size_t(j)]) Hp[j] = 0.0;
                    return Hp;
                };
                const auto cg = conjugate_gradient(apply, rhs, face_inv_diag,
                                                   std::max(0.5 * opt.tol, opt.cg_forcing * rhs_norm), 10 * n + 10);
                result.cg_iterations += cg.iterations;
                if (cg.negative_curvature) return QpOutcome::indefinite;
                if (cg.x.squaredNorm() > 0.0 &&
                    projected_search(H, state, cg.x, 1.0, bounds, opt.sufficient_decrease))
                    moved = true;
            }
            if (!moved) {
                result.s = state.s;
                result.projected_gradient_norm = (project_box(state.s - state.r, bounds) - state.s).norm();
                return result.projected_gradient_norm <= opt.tol ? QpOutcome::converged : QpOutcome::stalled;
            }
        }
        result.s = state.s;
        result.projected_gradient_norm = (project_box(state.s - state.r, bounds) - state.s).norm();
        return result.projected_gradient_norm <= opt.tol ? QpOutcome::converged : QpOutcome::capped;
    }

} // namespace detail

/**
   @brief Minimizes 1/2 s'Hs + g's over a box that must contain 0.

   Non-positive curvature triggers the Levenberg safeguard H + tau I with tau
   starting at 1e-8 max|H| and growing tenfold. The returned s lies in the box
   exactly; if the solve does not reach opt.tol, the best iterate is returned
   with converged = false.
*/
inline QpResult solve_box_qp(const SparseSymMatrix& H, const Vector& g, const BoxBounds& bounds,
                             const QpOptions& opt = {})
{
    require(H.dim() == g.size() && g.size() == bounds.size(), "solve_box_qp: dimension mismatch");
    QpResult result;
    double tau = 0.0;
    const double scale = std::max(H.max_abs(), 1e-300);
    for (Index attempt = 0; attempt <= opt.max_regularizations; ++attempt) {
        result = QpResult{};
        const auto outcome = tau == 0.0 ? detail::gpcg(H, g, bounds, opt, result)
                                        : detail::gpcg(H.shifted(tau), g, bounds, opt, result);
        result.regularization = tau;
        if (outcome != detail::QpOutcome::indefinite) {
            result.converged = outcome == detail::QpOutcome::converged;
            return result;
        }
        tau = tau == 0.0 ? 1e-8 * scale : 10.0 * tau;
    }
    result.s = project_box(Vector::Zero(g.size()), bounds);
    result.converged = false;
    return result;
}

} // namespace nras
