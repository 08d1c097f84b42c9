#pragma once

/** @file
    @brief Coarse level for two-level Schwarz: nested-grid transfers, the
    constraint projection producing coarse bounds from the tightest fine slack in
    each coarse basis support, the first-order consistent coarse objective, and
    the coarse correction step.
*/

#include "nras/decomposition.hpp"
#include "nras/newton.hpp"
#include "nras/problems.hpp"

#include <memory>
#include <vector>

namespace nras {

/**
   @brief Transfers between fine and coarse unknowns.

   prolongation is (fine unknowns x coarse unknowns) with nonnegative entries;
   restriction is its transpose. injection[t] is the fine unknown coinciding
   with coarse unknown t (the primal projection). support[t] lists the fine
   unknowns j with prolongation(j, t) > 0.
*/
struct CoarseSpace {
    SparseStorage prolongation;
    std::vector<Index> injection;
    std::vector<std::vector<Index>> support;

    CoarseSpace() = default;
    CoarseSpace(SparseStorage P, std::vector<Index> inject) : prolongation(std::move(P)), injection(std::move(inject))
    {
        require(Index(injection.size()) == prolongation.cols(), "CoarseSpace: injection size mismatch");
        prolongation.makeCompressed();
        support.resize(injection.size());
        for (Index j = 0; j < prolongation.rows(); ++j)
            for (SparseStorage::InnerIterator it(prolongation, j); it; ++it)
                if (it.value() > 0.0) support[std::size_t(it.col())].push_back(j);
    }

    Index num_fine() const { return prolongation.rows(); }
    Index num_coarse() const { return prolongation.cols(); }

    Vector project(const Vector& fine) const
    {
        Vector c(num_coarse());
        for (Index t = 0; t < num_coarse(); ++t) c[t] = fine[injection[std::size_t(t)]];
        return c;
    }
    Vector prolong(const Vector& coarse) const { return prolongation * coarse; }
    Vector restrict_dual(const Vector& fine) const { return prolongation.transpose() * fine; }
};

/**
   @brief Coarse bounds from fine slack:
   lower0_t = (Pi v)_t + max_{j in supp t} (lower - v)_j,
   upper0_t = (Pi v)_t + min_{j in supp t} (upper - v)_j.
*/
inline BoxBounds project_constraints(const BoxBounds& fine, const Vector& v, const CoarseSpace& space)
{
    require(fine.contains(v), "project_constraints: v is not feasible");
    const Vector v0 = space.project(v);
    Vector lo(space.num_coarse()), hi(space.num_coarse());
    for (Index t = 0; t < space.num_coarse(); ++t) {
        double max_slack = -infinity, min_slack = infinity;
        for (const Index j : space.support[std::size_t(t)]) {
            max_slack = std::max(max_slack, fine.lower()[j] - v[j]);
            min_slack = std::min(min_slack, fine.upper()[j] - v[j]);
        }
        lo[t] = v0[t] + max_slack;
        hi[t] = v0[t] + min_slack;
    }
    return {std::move(lo), std::move(hi)};
}

/// f0(x) + <linear, x> over the projected coarse bounds.
template <Objective Coarse>
class AugmentedCoarseObjective {
public:
    AugmentedCoarseObjective(const Coarse& f0, Vector linear, BoxBounds bounds)
        : f0_(&f0), linear_(std::move(linear)), bounds_(std::move(bounds))
    {
        require(linear_.size() == f0.size() && bounds_.size() == f0.size(),
                "AugmentedCoarseObjective: dimension mismatch");
    }

    Index size() const { return linear_.size(); }
    const BoxBounds& bounds() const { return bounds_; }
    const Vector& linear_term() const { return linear_; }
    double value(const Vector& x) const { return f0_->value(x) + linear_.dot(x); }
    Vector gradient(const Vector& x) const { return f0_->gradient(x) + linear_; }
    SparseSymMatrix hessian(const Vector& x) const { return f0_->hessian(x); }

private:
    const Coarse* f0_;
    Vector linear_;
    BoxBounds bounds_;
};

/// A coarse space plus the coarse-level energy f0 over its unknowns.
template <class T>
concept CoarseModel = requires(const T& m) {
    { m.space() } -> std::convertible_to<const CoarseSpace&>;
    { m.objective() } -> Objective;
};

template <Objective Coarse>
struct CoarseProblem {
    AugmentedCoarseObjective<Coarse> objective;
    Vector initial_guess;
};

/// Augmented problem at fine iterate v: gradient at Pi v equals R0 grad f(v).
template <Objective Fine, CoarseModel Model>
auto make_coarse_problem(const Fine& fine, const Model& model, const Vector& v, const Vector& fine_gradient)
{
    using Coarse = std::remove_cvref_t<decltype(model.objective())>;
    const auto& space = model.space();
    const auto& f0 = model.objective();
    Vector v0 = space.project(v);
    Vector linear = space.restrict_dual(fine_gradient) - f0.gradient(v0);
    return CoarseProblem<Coarse>{
        AugmentedCoarseObjective<Coarse>(f0, std::move(linear), project_constraints(fine.bounds(), v, space)),
        std::move(v0)};
}

template <Objective Fine, CoarseModel Model>
auto make_coarse_problem(const Fine& fine, const Model& model, const Vector& v)
{
    return make_coarse_problem(fine, model, v, fine.gradient(v));
}

struct CoarseStepResult {
    Vector v;                 ///< half-step iterate
    double alpha = 0.0;       ///< coarse line-search step
    Index coarse_iterations = 0;
    double correction_norm = 0.0;
    bool stalled = false;
};

/// v + alpha P0 (v0* - Pi v), with v0* from Newton-SQP on the augmented coarse problem.
template <Objective Fine, CoarseModel Model>
CoarseStepResult coarse_step(const Fine& fine, const Model& model, const Vector& v, const NewtonOptions& coarse_opt,
                             const LineSearchConfig& line_search)
{
    const Vector g = fine.gradient(v);
    const auto cp = make_coarse_problem(fine, model, v, g);
    const auto solved = newton_sqp_solve(cp.objective, cp.initial_guess, coarse_opt);

    CoarseStepResult out;
    out.coarse_iterations = solved.record.outer_iterations();
    const Vector d = model.space().prolong(Vector(solved.x - cp.initial_guess));
    out.correction_norm = d.norm();
    auto slope_at = [&](const Vector& p) { return fine.gradient(p).dot(d); };
    const auto ls =
        armijo([&](const Vector& p) { return fine.value(p); }, v, d, g.dot(d), line_search, std::nullopt, slope_at);
    out.alpha = ls.alpha;
    out.stalled = ls.stalled && d.squaredNorm() > 0.0;
    out.v = ls.stalled ? v : project_box(v + ls.alpha * d, fine.bounds());
    return out;
}

// -----------------------------------------------------------------------------
// Nested structured grids

/**
   @brief Coarse level of a structured-mesh problem.

   The coarse energy is the same functional rediscretized on the coarse mesh.
   Coarse Dirichlet nodes carry no unknowns, so coarse corrections vanish on the
   boundary.
*/
class CoarseHierarchy {
public:
    CoarseHierarchy(const Problem& fine, Index coarse_cells)
    {
        const Index n = fine.mesh().cells_per_side;
        require(coarse_cells >= 1 && n % coarse_cells == 0,
                "build_hierarchy: fine cells per side must be a multiple of the coarse cells per side");
        coarse_ = std::make_unique<Problem>(fine.rediscretized(coarse_cells));
        objective_ = std::make_unique<FeObjective>(*coarse_);

        const Index ratio = n / coarse_cells;
        const auto& fmesh = fine.mesh();
        const auto& cmesh = coarse_->mesh();

        std::vector<Triplet> nodal;
        for (Index row = 0; row <= n; ++row) {
            for (Index col = 0; col <= n; ++col) {
                const Index j = fmesh.node_at(row, col);
                const Index R = std::min(row / ratio, coarse_cells - 1);
                const Index C = std::min(col / ratio, coarse_cells - 1);
                const Index a = col - C * ratio; // 0..ratio
                const Index b = row - R * ratio;
                const Index sw = cmesh.node_at(R, C), se = cmesh.node_at(R, C + 1);
                const Index nw = cmesh.node_at(R + 1, C), ne = cmesh.node_at(R + 1, C + 1);
                const double r = double(ratio);
                auto add = [&](Index t, Index numerator) {
                    if (numerator > 0) nodal.emplace_back(j, t, double(numerator) / r);
                };
                if (a >= b) { // lower triangle (sw, se, ne)
                    add(sw, ratio - a);
                    add(se, a - b);
                    add(ne, b);
                } else {      // upper triangle (sw, ne, nw)
                    add(sw, ratio - b);
                    add(ne, a);
                    add(nw, b - a);
                }
            }
        }
        nodal_prolongation_ = SparseStorage(fmesh.num_nodes(), cmesh.num_nodes());
        nodal_prolongation_.setFromTriplets(nodal.begin(), nodal.end());
        nodal_injection_.resize(std::size_t(cmesh.num_nodes()));
        for (Index R = 0; R <= coarse_cells; ++R)
            for (Index C = 0; C <= coarse_cells; ++C)
                nodal_injection_[std::size_t(cmesh.node_at(R, C))] = fmesh.node_at(R * ratio, C * ratio);

        // Restrict to free unknowns on both levels.
        const auto fine_free = fine.space().node_to_free();
        const auto coarse_free = coarse_->space().node_to_free();
        std::vector<Triplet> free;
        for (Index j = 0; j < nodal_prolongation_.rows(); ++j) {
            if (fine_free[std::size_t(j)] < 0) continue;
            for (SparseStorage::InnerIterator it(nodal_prolongation_, j); it; ++it)
                if (coarse_free[std::size_t(it.col())] >= 0)
                    free.emplace_back(fine_free[std::size_t(j)], coarse_free[std::size_t(it.col())], it.value());
        }
        SparseStorage P(fine.space().num_free(), coarse_->space().num_free());
        P.setFromTriplets(free.begin(), free.end());
        std::vector<Index> injection;
        for (const Index node : coarse_->space().free_nodes())
            injection.push_back(fine_free[std::size_t(nodal_injection_[std::size_t(node)])]);
        space_ = CoarseSpace(std::move(P), std::move(injection));
    }

    const CoarseSpace& space() const { return space_; }
    const FeObjective& objective() const { return *objective_; }
    const Problem& coarse_problem() const { return *coarse_; }
    /// P0 over all nodes (fine nodes x coarse nodes).
    const SparseStorage& nodal_prolongation() const { return nodal_prolongation_; }
    /// Fine node coinciding with each coarse node.
    const std::vector<Index>& nodal_injection() const { return nodal_injection_; }

private:
    std::unique_ptr<Problem> coarse_;
    std::unique_ptr<FeObjective> objective_;
    SparseStorage nodal_prolongation_;
    std::vector<Index> nodal_injection_;
    CoarseSpace space_;
};

inline CoarseHierarchy build_hierarchy(const Problem& fine, Index coarse_cells) { return {fine, coarse_cells}; }

/// Galerkin coarse model for a quadratic objective: A0 = P'AP, b0 = P'b.
class GalerkinCoarseModel {
public:
    GalerkinCoarseModel(const QuadraticObjective& fine, CoarseSpace space)
        : space_(std::move(space)),
          objective_(SparseSymMatrix(SparseStorage(space_.prolongation.transpose() *
                                                   (fine.matrix().storage() * space_.prolongation))),
                     space_.restrict_dual(fine.linear()), BoxBounds::unbounded(space_.num_coarse()))
    {
    }

    const CoarseSpace& space() const { return space_; }
    const QuadraticObjective& objective() const { return objective_; }

private:
    CoarseSpace space_;
    QuadraticObjective objective_;
};

} // namespace nras
