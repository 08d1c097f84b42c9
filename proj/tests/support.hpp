#pragma once

// Shared helpers for the unit and acceptance tests: seeded random data and
// brute-force oracles that do not share code with the library solvers.

#include "nras/nras.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace nras::testing {

class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(engine_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(engine_); }

    Vector vector(Index n, double lo, double hi)
    {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }

    /// Dense SPD matrix B'B + shift I.
    Eigen::MatrixXd spd(Index n, double shift = 0.1)
    {
        Eigen::MatrixXd B(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) B(i, j) = uniform(-1.0, 1.0);
        Eigen::MatrixXd A = B.transpose() * B;
        A.diagonal().array() += shift;
        return 0.5 * (A + A.transpose());
    }

    /// Box with a mix of finite, one-sided and absent bounds containing `inside`.
    BoxBounds box_around(const Vector& inside, double width = 1.0)
    {
        const Index n = inside.size();
        Vector lo(n), hi(n);
        for (Index i = 0; i < n; ++i) {
            lo[i] = coin(0.85) ? inside[i] - uniform(0.0, width) : -infinity;
            hi[i] = coin(0.85) ? inside[i] + uniform(0.0, width) : infinity;
        }
        return {lo, hi};
    }

    /// Uniform point in a box; unbounded sides are replaced by +-span around the finite side or zero.
    Vector point_in(const BoxBounds& b, double span = 1.0)
    {
        Vector x(b.size());
        for (Index i = 0; i < b.size(); ++i) {
            double lo = b.lower()[i], hi = b.upper()[i];
            if (!std::isfinite(lo) && !std::isfinite(hi)) {
                lo = -span;
                hi = span;
            } else if (!std::isfinite(lo)) {
                lo = hi - span;
            } else if (!std::isfinite(hi)) {
                hi = lo + span;
            }
            x[i] = lo == hi ? lo : uniform(lo, hi);
        }
        return x;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline SparseSymMatrix to_sparse(const Eigen::MatrixXd& A)
{
    std::vector<Triplet> t;
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            if (A(i, j) != 0.0) t.emplace_back(i, j, A(i, j));
    return SparseSymMatrix::from_triplets(A.rows(), t);
}

/**
   Minimizer of 1/2 s'Hs + g's over a box by enumerating every assignment of
   each coordinate to {lower, upper, free}. For SPD H the feasible candidate of
   least value is the unique minimizer.
*/
inline Vector enumerate_box_qp(const Eigen::MatrixXd& H, const Vector& g, const BoxBounds& bounds)
{
    const Index n = g.size();
    Index combos = 1;
    for (Index i = 0; i < n; ++i) combos *= 3;
    Vector best;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<int> state(static_cast<std::size_t>(n));
    for (Index c = 0; c < combos; ++c) {
        Index code = c;
        bool usable = true;
        for (Index i = 0; i < n; ++i) {
            state[std::size_t(i)] = int(code % 3);
            code /= 3;
            if (state[std::size_t(i)] == 1 && !std::isfinite(bounds.lower()[i])) usable = false;
            if (state[std::size_t(i)] == 2 && !std::isfinite(bounds.upper()[i])) usable = false;
        }
        if (!usable) continue;
        Vector s = Vector::Zero(n);
        std::vector<Index> free;
        for (Index i = 0; i < n; ++i) {
            if (state[std::size_t(i)] == 1) s[i] = bounds.lower()[i];
            else if (state[std::size_t(i)] == 2) s[i] = bounds.upper()[i];
            else free.push_back(i);
        }
        if (!free.empty()) {
            const Index m = Index(free.size());
            Eigen::MatrixXd Hff(m, m);
            Vector rhs(m);
            for (Index a = 0; a < m; ++a) {
                rhs[a] = -g[free[std::size_t(a)]];
                for (Index i = 0; i < n; ++i)
                    if (state[std::size_t(i)] != 0) rhs[a] -= H(free[std::size_t(a)], i) * s[i];
                for (Index b = 0; b < m; ++b) Hff(a, b) = H(free[std::size_t(a)], free[std::size_t(b)]);
            }
            const Vector sf = Hff.llt().solve(rhs);
            for (Index a = 0; a < m; ++a) s[free[std::size_t(a)]] = sf[a];
        }
        const double tol = 1e-12 * (1.0 + s.lpNorm<Eigen::Infinity>());
        bool feasible = true;
        for (Index i = 0; i < n; ++i)
            if (s[i] < bounds.lower()[i] - tol || s[i] > bounds.upper()[i] + tol) feasible = false;
        if (!feasible) continue;
        const double value = 0.5 * s.dot(H * s) + g.dot(s);
        if (value < best_value) {
            best_value = value;
            best = s;
        }
    }
    return best;
}

/// 1D obstacle toy: tridiagonal (2,-1)/h^2 scaled stiffness with load and lower obstacle.
struct ObstacleToy {
    Eigen::MatrixXd A;
    Vector b;
    BoxBounds bounds;

    QuadraticObjective objective() const { return {to_sparse(A), b, bounds}; }
    Graph chain() const
    {
        Graph g;
        g.neighbors.resize(std::size_t(b.size()));
        for (Index i = 0; i + 1 < b.size(); ++i) {
            g.neighbors[std::size_t(i)].push_back(i + 1);
            g.neighbors[std::size_t(i + 1)].push_back(i);
        }
        return g;
    }
};

/// Membrane pressed down by a load onto an obstacle bump; lower bound active in the middle.
inline ObstacleToy obstacle_toy(Index n)
{
    ObstacleToy toy;
    const double h = 1.0 / double(n + 1);
    toy.A = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        toy.A(i, i) = 2.0 / h;
        if (i + 1 < n) toy.A(i, i + 1) = toy.A(i + 1, i) = -1.0 / h;
    }
    toy.b = Vector::Constant(n, 8.0 * h);
    Vector lo(n), hi(n);
    for (Index i = 0; i < n; ++i) {
        const double x = double(i + 1) * h;
        lo[i] = 0.1 - 2.0 * (x - 0.5) * (x - 0.5);
        hi[i] = infinity;
    }
    toy.bounds = BoxBounds(lo, hi);
    return toy;
}

/// Random strictly convex box QP of dimension n as an objective; optimum checked by enumeration.
inline ObstacleToy random_box_qp(Random& rng, Index n)
{
    ObstacleToy toy;
    toy.A = rng.spd(n, 0.5);
    toy.b = rng.vector(n, -2.0, 2.0);
    toy.bounds = rng.box_around(Vector::Zero(n), 1.0);
    return toy;
}

inline double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

} // namespace nras::testing
