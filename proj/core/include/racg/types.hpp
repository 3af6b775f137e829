#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace racg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Constraint violation allowed when testing feasibility, in action units.
inline constexpr double kFeasibilityTol = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Empty strategy set or malformed dimensions.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// A utility argument left the family's domain (e.g. nonpositive log argument).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, int dimension)
      : Error(what + " (dimension " + std::to_string(dimension) + ")"), dimension_(dimension) {}
  int dimension() const { return dimension_; }

 private:
  int dimension_;
};

// A bound whose precondition (positive curvature constant) fails.
class BoundUnavailable : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Queueing network evaluated at or past its stability boundary.
class UnstableError : public Error {
 public:
  UnstableError(int node, int cls)
      : Error("unstable queue at node " + std::to_string(node) + ", class " + std::to_string(cls)),
        node_(node),
        cls_(cls) {}
  int node() const { return node_; }
  int cls() const { return cls_; }

 private:
  int node_;
  int cls_;
};

}  // namespace racg
