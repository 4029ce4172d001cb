#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace hidegl {

struct CgOptions {
  double tol = 1e-8;  // on ||b - A x|| / ||b||
  int max_iters = 1000;
};

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// out = A in; A must be symmetric positive definite.
using LinearOperator = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;
/// Called with the starting iterate (iteration 0) and after every update.
using CgObserver = std::function<void(int iteration, const Eigen::VectorXd& x)>;

/// Conjugate gradients from x0 = 0. Does not throw on non-convergence; callers decide.
CgResult conjugate_gradient(const LinearOperator& A, const Eigen::VectorXd& b, const CgOptions& opts,
                            const CgObserver& observer = {});

/// out = A in, column by column, for an n x m block.
using BlockOperator = std::function<void(const Eigen::MatrixXd& in, Eigen::MatrixXd& out)>;
using ColumnCgObserver = std::function<void(int column, int iteration, const Eigen::VectorXd& x)>;

struct ColumnCgResult {
  Eigen::MatrixXd X;
  std::vector<int> iterations;
  std::vector<double> relative_residuals;
  std::vector<bool> converged;
};

/// Independent CG runs for every column of B that share each operator application, so a
/// memory-bound operator streams its data once per iteration instead of once per column.
/// Columns stop individually; each follows the same iterates as conjugate_gradient.
ColumnCgResult conjugate_gradient_columns(const BlockOperator& A, const Eigen::MatrixXd& B,
                                          const CgOptions& opts, const ColumnCgObserver& observer = {});

}  // namespace hidegl
