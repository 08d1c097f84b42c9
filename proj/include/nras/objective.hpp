#pragma once

/** @file
    @brief The objective concept consumed by every solver, and a sparse quadratic
    objective used for obstacle-type model problems.
*/

#include "nras/linalg.hpp"

#include <concepts>
#include <vector>

namespace nras {

/// A twice-differentiable function over a box in R^n.
template <class T>
concept Objective = requires(const T& f, const Vector& x) {
    { f.size() } -> std::convertible_to<Index>;
    { f.value(x) } -> std::convertible_to<double>;
    { f.gradient(x) } -> std::convertible_to<Vector>;
    { f.hessian(x) } -> std::convertible_to<SparseSymMatrix>;
    { f.bounds() } -> std::convertible_to<const BoxBounds&>;
};

/// An objective that can be restricted to a subset of its unknowns, freezing the rest.
template <class T>
concept DecomposableObjective = Objective<T> && requires(const T& f, const std::vector<Index>& dofs, const Vector& x) {
    { f.restrict_to(dofs, x) } -> Objective;
};

/// 1/2 x'Ax + b'x + c over a box.
class QuadraticObjective {
public:
    QuadraticObjective(SparseSymMatrix A, Vector b, BoxBounds bounds, double constant = 0.0)
        : A_(std::move(A)), b_(std::move(b)), bounds_(std::move(bounds)), constant_(constant)
    {
        require(A_.dim() == b_.size() && b_.size() == bounds_.size(), "QuadraticObjective: dimension mismatch");
    }

    Index size() const { return b_.size(); }
    const BoxBounds& bounds() const { return bounds_; }
    const SparseSymMatrix& matrix() const { return A_; }
    const Vector& linear() const { return b_; }

    double value(const Vector& x) const { return 0.5 * x.dot(A_ * x) + b_.dot(x) + constant_; }
    Vector gradient(const Vector& x) const { return A_ * x + b_; }
    SparseSymMatrix hessian(const Vector&) const { return A_; }

    QuadraticObjective restrict_to(const std::vector<Index>& dofs, const Vector& x) const
    {
        const Index n = size();
        const Index m = Index(dofs.size());
        std::vector<Index> local(std::size_t(n), -1);
        for (Index k = 0; k < m; ++k) local[std::size_t(dofs[std::size_t(k)])] = k;

        // Frozen part of x: x with the restricted entries zeroed.
        Vector frozen = x;
        for (const Index d : dofs) frozen[d] = 0.0;
        const Vector coupling = A_ * frozen;

        std::vector<Triplet> triplets;
        const auto& S = A_.storage();
        for (Index k = 0; k < m; ++k) {
            const Index row = dofs[std::size_t(k)];
            for (SparseStorage::InnerIterator it(S, row); it; ++it) {
                const Index col = local[std::size_t(it.col())];
                if (col >= 0) triplets.emplace_back(k, col, it.value());
            }
        }
        Vector b(m);
        for (Index k = 0; k < m; ++k) b[k] = b_[dofs[std::size_t(k)]] + coupling[dofs[std::size_t(k)]];
        const double c = 0.5 * frozen.dot(coupling) + b_.dot(frozen) + constant_;
        return {SparseSymMatrix::from_triplets(m, triplets), std::move(b), bounds_.gather(dofs), c};
    }

private:
    SparseSymMatrix A_;
    Vector b_;
    BoxBounds bounds_;
    double constant_ = 0.0;
};

} // namespace nras
