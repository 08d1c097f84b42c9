#pragma once

/** @file
    @brief The ignition (Bratu-type) and minimal-surface energies on P1 elements,
    their bounds and Dirichlet data, and FeObjective, the view of an energy as a
    function of a subset of nodal unknowns with all other nodes frozen.
*/

#include "nras/linalg.hpp"
#include "nras/mesh.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace nras {

enum class ProblemKind {
    ignition,        ///< 1/2 |grad u|^2 - (u e^u - e^u) - f u
    minimal_surface, ///< sqrt(1 + |grad u|^2)
    quadratic,       ///< 1/2 |grad u|^2 - f u, a linear reference model
};

inline std::string to_string(ProblemKind kind)
{
    switch (kind) {
    case ProblemKind::ignition: return "ignition";
    case ProblemKind::minimal_surface: return "minsurf";
    case ProblemKind::quadratic: return "quadratic";
    }
    return "unknown";
}

/// Which form of the minimal-surface upper bound to use.
enum class UpperBoundForm {
    corrected,  ///< 8(x1-0.3)^2 + 8(x2-0.3)^2 - 0.4
    as_printed, ///< 8(x1-0.3)^2 - 8(x2-0.3)^2 - 0.4, empty feasible set
};

/// Analytic description of a benchmark: energy kind plus pointwise data.
struct ProblemData {
    using Field = std::function<double(const Point2&)>;

    ProblemKind kind = ProblemKind::quadratic;
    Field lower = [](const Point2&) { return -infinity; };
    Field upper = [](const Point2&) { return infinity; };
    Field forcing = [](const Point2&) { return 0.0; };
    FeSpace::BoundaryData boundary = [](const Point2&, BoundaryTag) { return 0.0; };
};

inline ProblemData ignition_data()
{
    using std::numbers::pi;
    ProblemData d;
    d.kind = ProblemKind::ignition;
    d.forcing = [](const Point2& x) {
        const double s = x[0] * x[0] - x[0] * x[0] * x[0];
        return (9.0 * pi * pi + std::exp(s * std::sin(3.0 * pi * x[1])) * s + 6.0 * x[0] - 2.0) *
               std::sin(3.0 * pi * x[0]);
    };
    d.lower = [](const Point2& x) {
        const double a = x[0] - 7.0 / 16.0, b = x[1] - 7.0 / 16.0;
        return 0.2 - 8.0 * a * a - 8.0 * b * b;
    };
    d.upper = [](const Point2&) { return 0.5; };
    d.boundary = [](const Point2&, BoundaryTag) { return 0.0; };
    return d;
}

inline ProblemData minimal_surface_data(UpperBoundForm form = UpperBoundForm::corrected)
{
    using std::numbers::pi;
    ProblemData d;
    d.kind = ProblemKind::minimal_surface;
    d.lower = [](const Point2& x) {
        const double a = x[0] - 0.7, b = x[1] - 0.7;
        return 0.25 - 8.0 * a * a - 8.0 * b * b;
    };
    const double sign = form == UpperBoundForm::corrected ? 1.0 : -1.0;
    d.upper = [sign](const Point2& x) {
        const double a = x[0] - 0.3, b = x[1] - 0.3;
        return 8.0 * a * a + sign * 8.0 * b * b - 0.4;
    };
    d.boundary = [](const Point2& x, BoundaryTag tag) {
        switch (tag.owner()) {
        case Side::left: return -0.3 * std::sin(2.0 * pi * x[1]);
        case Side::right: return 0.3 * std::sin(2.0 * pi * x[1]);
        case Side::bottom: return -0.3 * std::sin(2.0 * pi * x[0]);
        case Side::top: return 0.3 * std::sin(2.0 * pi * x[0]);
        }
        return 0.0;
    };
    return d;
}

struct BoundViolation {
    Index node;
    Point2 point;
    double lower;
    double upper;
    double value; ///< Dirichlet value, or NaN for a lower > upper violation
};

struct FeasibilityReport {
    std::vector<BoundViolation> violations;
    bool feasible() const { return violations.empty(); }
};

/**
   @brief A benchmark energy discretized on a structured mesh.

   Energies are evaluated on full nodal vectors; derivatives are assembled for
   an arbitrary node-to-unknown map so the same kernels serve the global,
   subdomain, and coarse problems.
*/
class Problem {
public:
    Problem(ProblemData data, Index cells_per_side)
        : data_(std::move(data)), space_(build_structured_mesh(cells_per_side), data_.boundary)
    {
        const auto& mesh = space_.mesh();
        lower_ = Vector(mesh.num_nodes());
        upper_ = Vector(mesh.num_nodes());
        for (Index i = 0; i < mesh.num_nodes(); ++i) {
            lower_[i] = data_.lower(mesh.nodes[std::size_t(i)]);
            upper_[i] = data_.upper(mesh.nodes[std::size_t(i)]);
        }
        forcing_.resize(mesh.triangles.size());
        for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
            const auto rule = element_quadrature(triangle_vertices(mesh, mesh.triangles[e]));
            for (int q = 0; q < 3; ++q) forcing_[e][q] = data_.forcing(rule[q].point);
        }
        all_elements_.resize(mesh.triangles.size());
        for (std::size_t e = 0; e < all_elements_.size(); ++e) all_elements_[e] = Index(e);
    }

    ProblemKind kind() const { return data_.kind; }
    const ProblemData& data() const { return data_; }
    const FeSpace& space() const { return space_; }
    const Mesh& mesh() const { return space_.mesh(); }

    /// Same energy on another mesh resolution.
    Problem rediscretized(Index cells_per_side) const { return {data_, cells_per_side}; }

    /// Nodal interpolants of the bound functions; throws if they cross.
    BoxBounds evaluate_bounds() const { return {lower_, upper_}; }

    /// Bounds on the free unknowns.
    BoxBounds free_bounds() const
    {
        std::vector<Index> free(space_.free_nodes().begin(), space_.free_nodes().end());
        return evaluate_bounds().gather(free);
    }

    FeasibilityReport validate_feasibility() const
    {
        FeasibilityReport report;
        const auto& mesh = space_.mesh();
        for (Index i = 0; i < mesh.num_nodes(); ++i) {
            const auto& x = mesh.nodes[std::size_t(i)];
            if (!(lower_[i] <= upper_[i])) {
                report.violations.push_back({i, x, lower_[i], upper_[i], std::nan("")});
            } else if (space_.is_dirichlet(i)) {
                const double value = space_.dirichlet_values()[i];
                if (value < lower_[i] || value > upper_[i])
                    report.violations.push_back({i, x, lower_[i], upper_[i], value});
            }
        }
        return report;
    }

    /// Feasible start: the projection of the zero function, Dirichlet data applied.
    Vector initial_guess() const { return project_box(Vector::Zero(space_.num_free()), free_bounds()); }

    // -- element kernels ------------------------------------------------------

    double element_energy(Index e, const Vector& u) const
    {
        const auto& t = mesh().triangles[std::size_t(e)];
        const auto& geo = space_.geometry(e);
        const std::array<double, 3> ue{u[t[0]], u[t[1]], u[t[2]]};
        const Point2 p = gradient_of(geo, ue);
        const double p2 = p[0] * p[0] + p[1] * p[1];

        double energy = 0.0;
        if (kind() == ProblemKind::minimal_surface) {
            energy = geo.area * std::sqrt(1.0 + p2);
        } else {
            energy = 0.5 * geo.area * p2;
            const double w = geo.area / 3.0;
            for (int q = 0; q < 3; ++q) {
                const double uq = at_quadrature(q, ue);
                if (kind() == ProblemKind::ignition) energy -= w * (uq * std::exp(uq) - std::exp(uq));
                energy -= w * forcing_[std::size_t(e)][q] * uq;
            }
        }
        return energy;
    }

    /// Element gradient with respect to the three vertex values.
    std::array<double, 3> element_gradient(Index e, const Vector& u) const
    {
        const auto& t = mesh().triangles[std::size_t(e)];
        const auto& geo = space_.geometry(e);
        const std::array<double, 3> ue{u[t[0]], u[t[1]], u[t[2]]};
        const Point2 p = gradient_of(geo, ue);

        std::array<double, 3> g{};
        const double scale =
            kind() == ProblemKind::minimal_surface ? geo.area / std::sqrt(1.0 + p[0] * p[0] + p[1] * p[1]) : geo.area;
        for (int a = 0; a < 3; ++a) g[a] = scale * (p[0] * geo.grad[a][0] + p[1] * geo.grad[a][1]);

        if (kind() != ProblemKind::minimal_surface) {
            const double w = geo.area / 3.0;
            for (int q = 0; q < 3; ++q) {
                const double uq = at_quadrature(q, ue);
                double dq = -forcing_[std::size_t(e)][q];
                if (kind() == ProblemKind::ignition) dq -= uq * std::exp(uq);
                for (int a = 0; a < 3; ++a) g[a] += w * dq * basis_at(q, a);
            }
        }
        return g;
    }

    /// Symmetric element Hessian; entries (a,b) and (b,a) are bit-identical.
    std::array<std::array<double, 3>, 3> element_hessian(Index e, const Vector& u) const
    {
        const auto& t = mesh().triangles[std::size_t(e)];
        const auto& geo = space_.geometry(e);
        const std::array<double, 3> ue{u[t[0]], u[t[1]], u[t[2]]};
        const Point2 p = gradient_of(geo, ue);

        std::array<std::array<double, 3>, 3> h{};
        for (int a = 0; a < 3; ++a) {
            for (int b = a; b < 3; ++b) {
                const auto& ga = geo.grad[a];
                const auto& gb = geo.grad[b];
                double v = 0.0;
                if (kind() == ProblemKind::minimal_surface) {
                    const double w = std::sqrt(1.0 + p[0] * p[0] + p[1] * p[1]);
                    const double pa = p[0] * ga[0] + p[1] * ga[1];
                    const double pb = p[0] * gb[0] + p[1] * gb[1];
                    v = geo.area * ((ga[0] * gb[0] + ga[1] * gb[1]) / w - pa * pb / (w * w * w));
                } else {
                    v = geo.area * (ga[0] * gb[0] + ga[1] * gb[1]);
                    if (kind() == ProblemKind::ignition) {
                        const double w = geo.area / 3.0;
                        for (int q = 0; q < 3; ++q) {
                            const double uq = at_quadrature(q, ue);
                            v -= w * (1.0 + uq) * std::exp(uq) * basis_at(q, a) * basis_at(q, b);
                        }
                    }
                }
                h[a][b] = v;
                h[b][a] = v;
            }
        }
        return h;
    }

    // -- assembly -------------------------------------------------------------

    double energy(const Vector& u) const
    {
        require(u.size() == mesh().num_nodes(), "Problem::energy: dimension mismatch");
        double sum = 0.0;
        for (Index e = 0; e < mesh().num_triangles(); ++e) sum += element_energy(e, u);
        return sum;
    }

    double energy(const Vector& u, std::span<const Index> elements) const
    {
        require(u.size() == mesh().num_nodes(), "Problem::energy: dimension mismatch");
        double sum = 0.0;
        for (const Index e : elements) sum += element_energy(e, u);
        return sum;
    }

    /// Gradient entries for nodes with node_to_dof >= 0.
    Vector gradient(const Vector& u, std::span<const Index> elements, std::span<const Index> node_to_dof,
                    Index num_dofs) const
    {
        require(u.size() == mesh().num_nodes(), "Problem::gradient: dimension mismatch");
        Vector g = Vector::Zero(num_dofs);
        for (const Index e : elements) {
            const auto& t = mesh().triangles[std::size_t(e)];
            const auto ge = element_gradient(e, u);
            for (int a = 0; a < 3; ++a) {
                const Index dof = node_to_dof[std::size_t(t[a])];
                if (dof >= 0) g[dof] += ge[a];
            }
        }
        return g;
    }

    SparseSymMatrix hessian(const Vector& u, std::span<const Index> elements, std::span<const Index> node_to_dof,
                            Index num_dofs) const
    {
        require(u.size() == mesh().num_nodes(), "Problem::hessian: dimension mismatch");
        std::vector<Triplet> triplets;
        triplets.reserve(elements.size() * 9);
        for (const Index e : elements) {
            const auto& t = mesh().triangles[std::size_t(e)];
            const auto he = element_hessian(e, u);
            for (int a = 0; a < 3; ++a) {
                const Index da = node_to_dof[std::size_t(t[a])];
                if (da < 0) continue;
                for (int b = 0; b < 3; ++b) {
                    const Index db = node_to_dof[std::size_t(t[b])];
                    if (db >= 0) triplets.emplace_back(da, db, he[a][b]);
                }
            }
        }
        return SparseSymMatrix::from_triplets(num_dofs, triplets);
    }

    /// Whole-mesh gradient over the free nodes.
    Vector assemble_gradient(const Vector& u) const
    {
        return gradient(u, all_elements(), space_.node_to_free(), space_.num_free());
    }

    SparseSymMatrix assemble_hessian(const Vector& u) const
    {
        return hessian(u, all_elements(), space_.node_to_free(), space_.num_free());
    }

    std::span<const Index> all_elements() const { return all_elements_; }

    /// Load vector of the forcing term over the free nodes, integrated with the element rule.
    Vector load_vector() const
    {
        Vector b = Vector::Zero(space_.num_free());
        for (Index e = 0; e < mesh().num_triangles(); ++e) {
            const auto& t = mesh().triangles[std::size_t(e)];
            const double w = space_.geometry(e).area / 3.0;
            for (int q = 0; q < 3; ++q)
                for (int a = 0; a < 3; ++a) {
                    const Index dof = space_.node_to_free()[std::size_t(t[a])];
                    if (dof >= 0) b[dof] += w * forcing_[std::size_t(e)][q] * basis_at(q, a);
                }
        }
        return b;
    }

private:
    static Point2 gradient_of(const ElementGeometry& geo, const std::array<double, 3>& ue)
    {
        return {ue[0] * geo.grad[0][0] + ue[1] * geo.grad[1][0] + ue[2] * geo.grad[2][0],
                ue[0] * geo.grad[0][1] + ue[1] * geo.grad[1][1] + ue[2] * geo.grad[2][1]};
    }

    // Edge-midpoint rule: point q sits between vertices q and (q+1)%3.
    static double basis_at(int q, int a) { return (a == q || a == (q + 1) % 3) ? 0.5 : 0.0; }
    static double at_quadrature(int q, const std::array<double, 3>& ue) { return 0.5 * (ue[q] + ue[(q + 1) % 3]); }

    ProblemData data_;
    FeSpace space_;
    Vector lower_;
    Vector upper_;
    std::vector<std::array<double, 3>> forcing_;
    std::vector<Index> all_elements_;
};

// -----------------------------------------------------------------------------

/**
   @brief f restricted to a set of free nodes, every other node frozen.

   value(x) equals the full energy of the composite vector (x on the unknowns,
   frozen values elsewhere). Only elements touching an unknown are visited; the
   energy of the remaining elements enters as a constant offset.
*/
class FeObjective {
public:
    /// Whole problem over all free nodes.
    explicit FeObjective(const Problem& problem)
        : problem_(&problem),
          dof_nodes_(problem.space().free_nodes().begin(), problem.space().free_nodes().end()),
          node_to_dof_(problem.space().node_to_free().begin(), problem.space().node_to_free().end()),
          elements_(problem.all_elements().begin(), problem.all_elements().end()),
          base_(problem.space().dirichlet_values()), bounds_(problem.free_bounds())
    {
    }

    Index size() const { return Index(dof_nodes_.size()); }
    const BoxBounds& bounds() const { return bounds_; }
    const Problem& problem() const { return *problem_; }
    std::span<const Index> dof_nodes() const { return dof_nodes_; }
    std::span<const Index> elements() const { return elements_; }

    Vector nodal(const Vector& x) const
    {
        require(x.size() == size(), "FeObjective: dimension mismatch");
        Vector u = base_;
        for (Index k = 0; k < size(); ++k) u[dof_nodes_[std::size_t(k)]] = x[k];
        return u;
    }

    double value(const Vector& x) const { return problem_->energy(nodal(x), elements_) + offset_; }

    Vector gradient(const Vector& x) const { return problem_->gradient(nodal(x), elements_, node_to_dof_, size()); }

    SparseSymMatrix hessian(const Vector& x) const
    {
        return problem_->hessian(nodal(x), elements_, node_to_dof_, size());
    }

    /// Objective in the unknowns `dofs` (indices into this objective) with the others frozen at x.
    FeObjective restrict_to(const std::vector<Index>& dofs, const Vector& x) const
    {
        FeObjective local;
        local.problem_ = problem_;
        local.base_ = nodal(x);
        local.node_to_dof_.assign(node_to_dof_.size(), -1);
        local.dof_nodes_.reserve(dofs.size());
        for (std::size_t k = 0; k < dofs.size(); ++k) {
            const Index node = dof_nodes_[std::size_t(dofs[k])];
            local.dof_nodes_.push_back(node);
            local.node_to_dof_[std::size_t(node)] = Index(k);
        }
        for (const Index e : elements_) {
            const auto& t = problem_->mesh().triangles[std::size_t(e)];
            if (local.node_to_dof_[std::size_t(t[0])] >= 0 || local.node_to_dof_[std::size_t(t[1])] >= 0 ||
                local.node_to_dof_[std::size_t(t[2])] >= 0)
                local.elements_.push_back(e);
        }
        local.bounds_ = bounds_.gather(dofs);
        local.offset_ = value(x) - problem_->energy(local.base_, local.elements_);
        return local;
    }

private:
    FeObjective() = default;

    const Problem* problem_ = nullptr;
    std::vector<Index> dof_nodes_;
    std::vector<Index> node_to_dof_;
    std::vector<Index> elements_;
    Vector base_;
    BoxBounds bounds_;
    double offset_ = 0.0;
};

} // namespace nras
