#pragma once

/** @file
    @brief Box constraints, the projected-gradient stationarity measure, and
    symmetric sparse matrices with a Jacobi-preconditioned CG solver.
*/

#include "nras/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace nras {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Componentwise bounds lower <= x <= upper. Infinite entries are allowed.
class BoxBounds {
public:
    BoxBounds() = default;

    BoxBounds(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper))
    {
        require(lower_.size() == upper_.size(), "BoxBounds: lower/upper dimension mismatch");
        for (Index i = 0; i < lower_.size(); ++i)
            if (!(lower_[i] <= upper_[i]))
                throw InfeasibleProblem("BoxBounds: lower > upper at component " + std::to_string(i));
    }

    static BoxBounds unbounded(Index n)
    {
        return {Vector::Constant(n, -infinity), Vector::Constant(n, infinity)};
    }

    Index size() const { return lower_.size(); }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }

    bool contains(const Vector& x) const
    {
        if (x.size() != size()) return false;
        for (Index i = 0; i < size(); ++i)
            if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
        return true;
    }

    /// Bounds on a step s from x: [lower - x, upper - x].
    BoxBounds shifted(const Vector& x) const
    {
        require(x.size() == size(), "BoxBounds::shifted: dimension mismatch");
        // Clamp guards against x sitting a rounding error outside the box.
        return {(lower_ - x).cwiseMin(0.0), (upper_ - x).cwiseMax(0.0)};
    }

    BoxBounds gather(const std::vector<Index>& indices) const
    {
        Vector lo(Index(indices.size())), hi(Index(indices.size()));
        for (std::size_t k = 0; k < indices.size(); ++k) {
            lo[Index(k)] = lower_[indices[k]];
            hi[Index(k)] = upper_[indices[k]];
        }
        return {std::move(lo), std::move(hi)};
    }

private:
    Vector lower_;
    Vector upper_;
};

inline Vector project_box(const Vector& x, const BoxBounds& bounds)
{
    require(x.size() == bounds.size(), "project_box: dimension mismatch");
    return x.cwiseMax(bounds.lower()).cwiseMin(bounds.upper());
}

/// P(x - g) - x. Its norm is the termination measure of every solver.
inline Vector projected_gradient(const Vector& x, const Vector& g, const BoxBounds& bounds)
{
    require(x.size() == g.size(), "projected_gradient: dimension mismatch");
    require(bounds.contains(x), "projected_gradient: x is not feasible");
    return project_box(x - g, bounds) - x;
}

inline double projected_gradient_norm(const Vector& x, const Vector& g, const BoxBounds& bounds)
{
    return projected_gradient(x, g, bounds).norm();
}

// -----------------------------------------------------------------------------

using SparseStorage = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;
using Triplet = Eigen::Triplet<double, Index>;

/// Symmetric matrix in compressed row storage.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;
    explicit SparseSymMatrix(SparseStorage m) : m_(std::move(m))
    {
        require(m_.rows() == m_.cols(), "SparseSymMatrix: matrix must be square");
        m_.makeCompressed();
    }

    static SparseSymMatrix from_triplets(Index n, const std::vector<Triplet>& triplets)
    {
        SparseStorage m(n, n);
        m.setFromTriplets(triplets.begin(), triplets.end());
        return SparseSymMatrix(std::move(m));
    }

    static SparseSymMatrix identity(Index n)
    {
        SparseStorage m(n, n);
        m.setIdentity();
        return SparseSymMatrix(std::move(m));
    }

    Index dim() const { return m_.rows(); }
    const SparseStorage& storage() const { return m_; }

    Vector operator*(const Vector& x) const { return m_ * x; }
    Vector diagonal() const { return m_.diagonal(); }

    double max_abs() const
    {
        double r = 0.0;
        for (Index k = 0; k < m_.nonZeros(); ++k) r = std::max(r, std::abs(m_.valuePtr()[k]));
        return r;
    }

    /// this + tau I
    SparseSymMatrix shifted(double tau) const
    {
        SparseStorage id(dim(), dim());
        id.setIdentity();
        return SparseSymMatrix(SparseStorage(m_ + tau * id));
    }

    Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(m_); }

private:
    SparseStorage m_;
};

// -----------------------------------------------------------------------------

struct CgResult {
    Vector x;
    Index iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
    bool negative_curvature = false;
};

/**
   @brief Jacobi-preconditioned conjugate gradients from x = 0.

   apply(p) must return A p. To iterate on a face of a box, apply and b must
   vanish on the frozen components; the iterates then stay zero there. Stops when
   ||b - A x|| <= abs_tol, on non-positive curvature, or after max_iterations.
*/
template <class Apply>
CgResult conjugate_gradient(Apply&& apply, const Vector& b, const Vector& inv_diag, double abs_tol,
                            Index max_iterations)
{
    CgResult out;
    out.x = Vector::Zero(b.size());
    Vector r = b;
    out.residual_norm = r.norm();
    if (out.residual_norm <= abs_tol) {
        out.converged = true;
        return out;
    }
    Vector z = inv_diag.cwiseProduct(r);
    Vector p = z;
    double rz = r.dot(z);
    for (Index it = 0; it < max_iterations; ++it) {
        const Vector Ap = apply(p);
        const double curvature = p.dot(Ap);
        if (!(curvature > 0.0)) {
            out.negative_curvature = true;
            out.iterations = it;
            return out;
        }
        const double step = rz / curvature;
        out.x += step * p;
        r -= step * Ap;
        out.residual_norm = r.norm();
        out.iterations = it + 1;
        if (out.residual_norm <= abs_tol) {
            out.converged = true;
            return out;
        }
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    return out;
}

inline Vector jacobi_inverse(const Vector& diagonal)
{
    Vector inv(diagonal.size());
    for (Index i = 0; i < diagonal.size(); ++i) inv[i] = diagonal[i] > 0.0 ? 1.0 / diagonal[i] : 1.0;
    return inv;
}

/// Solves A x = b to ||A x - b|| <= rtol ||b||; throws IndefiniteMatrix on failure.
inline Vector solve_spd(const SparseSymMatrix& A, const Vector& b, double rtol)
{
    require(A.dim() == b.size(), "solve_spd: dimension mismatch");
    const auto result = conjugate_gradient([&](const Vector& p) { return A * p; }, b, jacobi_inverse(A.diagonal()),
                                           rtol * b.norm(), std::max<Index>(10 * A.dim(), 1));
    if (result.negative_curvature) throw IndefiniteMatrix("solve_spd: non-positive curvature detected");
    if (!result.converged) throw IndefiniteMatrix("solve_spd: conjugate gradients did not converge");
    return result.x;
}

} // namespace nras
