#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nras {

using Index = std::int64_t;
using Vector = Eigen::VectorXd;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The feasible set is empty or the Dirichlet data leave it.
class InfeasibleProblem : public Error {
public:
    using Error::Error;
};

/// Conjugate gradients met non-positive curvature or did not converge.
class IndefiniteMatrix : public Error {
public:
    using Error::Error;
};

class PartitionFailure : public Error {
public:
    using Error::Error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw InvalidArgument(message);
}

} // namespace nras
