#pragma once

/** @file
    @brief Backtracking Armijo line search.
*/

#include "nras/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <type_traits>

namespace nras {

struct LineSearchConfig {
    double c1 = 1e-4;
    double rho = 0.5;
    double alpha0 = 1.0;
    int max_backtracks = 40;
    /// Relative size of rounding noise in f; below it decrease is judged by the slope instead.
    double value_noise = 1e-12;

    void validate() const
    {
        require(c1 > 0.0 && c1 < 1.0, "LineSearchConfig: c1 must lie in (0,1)");
        require(rho > 0.0 && rho < 1.0, "LineSearchConfig: rho must lie in (0,1)");
        require(alpha0 > 0.0 && alpha0 <= 1.0, "LineSearchConfig: alpha0 must lie in (0,1]");
        require(max_backtracks >= 0, "LineSearchConfig: max_backtracks must be nonnegative");
        require(value_noise >= 0.0, "LineSearchConfig: value_noise must be nonnegative");
    }
};

struct LineSearchResult {
    double alpha = 0.0;
    int backtracks = 0;
    bool stalled = false;
    double value = 0.0; ///< f at the accepted point (f(v) when stalled)
};

namespace detail {
    /// Approximate Armijo test for trials whose value change is lost in rounding:
    /// accept when the slope at the trial is no steeper uphill than (1 - 2 c1)|slope0|.
    template <class Slope>
    bool accept_by_slope(const Slope& slope_at, const Vector& trial_point, double f0, double trial, double slope0,
                         const LineSearchConfig& cfg)
    {
        if constexpr (std::is_null_pointer_v<Slope>) {
            return false;
        } else {
            if (!(slope0 < 0.0) || cfg.c1 >= 0.5) return false;
            if (std::abs(trial - f0) > cfg.value_noise * (1.0 + std::abs(f0))) return false;
            return slope_at(trial_point) <= (1.0 - 2.0 * cfg.c1) * -slope0;
        }
    }
} // namespace detail

/**
   @brief Largest alpha0 rho^m, m <= max_backtracks, with sufficient decrease.

   For descent directions (slope < 0) the test is
   f(v + a d) <= f(v) + c1 a slope. Otherwise simple decrease
   f(v + a d) < f(v) is required. If no trial passes, alpha = 0 and stalled.
   Callers guarantee v + a d is feasible for a in [0, alpha0].

   If slope_at (point -> grad f(point)'d) is supplied, a trial whose change in
   f is within rounding noise is accepted on the slope test instead.
*/
template <class F, class Slope = std::nullptr_t>
LineSearchResult armijo(F&& f, const Vector& v, const Vector& d, double slope, const LineSearchConfig& cfg = {},
                        std::optional<double> f_at_v = std::nullopt, Slope slope_at = nullptr)
{
    cfg.validate();
    LineSearchResult out;
    const double f0 = f_at_v ? *f_at_v : f(v);
    if (d.squaredNorm() == 0.0) {
        out.alpha = cfg.alpha0;
        out.value = f0;
        return out;
    }
    const bool descent = slope < 0.0;
    double alpha = cfg.alpha0;
    for (int m = 0; m <= cfg.max_backtracks; ++m) {
        const Vector point = v + alpha * d;
        const double trial = f(point);
        bool accept = descent ? trial <= f0 + cfg.c1 * alpha * slope : trial < f0;
        if (!accept && std::isfinite(trial)) accept = detail::accept_by_slope(slope_at, point, f0, trial, slope, cfg);
        if (accept && std::isfinite(trial)) {
            out.alpha = alpha;
            out.backtracks = m;
            out.value = trial;
            return out;
        }
        alpha *= cfg.rho;
    }
    out.alpha = 0.0;
    out.backtracks = cfg.max_backtracks;
    out.stalled = true;
    out.value = f0;
    return out;
}

} // namespace nras
