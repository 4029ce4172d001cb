#pragma once

#include <string>

#include <Eigen/Dense>

namespace hidegl {

/// Cholesky factor of a symmetric positive definite matrix. Construction throws
/// FactorizationError naming the first non-positive pivot.
class SpdFactor {
 public:
  SpdFactor() = default;
  SpdFactor(const Eigen::MatrixXd& A, const std::string& what);

  Eigen::Index size() const noexcept { return llt_.rows(); }
  /// Smallest pivot of the factorization, i.e. min_i L(i,i)^2.
  double min_pivot() const noexcept { return min_pivot_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const { return llt_.solve(B); }
  /// Dense inverse; diagnostics only.
  Eigen::MatrixXd inverse() const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double min_pivot_ = 0.0;
};

/// LDL^T with symmetric diagonal pivoting for systems that
/// should be positive definite but may be perturbed by roundoff. Throws FactorizationError when
/// a pivot is negligible relative to the largest one.
class SymmetricFactor {
 public:
  SymmetricFactor(const Eigen::MatrixXd& A, const std::string& what, double rel_guard = 1e-13);

  Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const { return ldlt_.solve(B); }

 private:
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

/// Minimum-norm solution of A X = B for symmetric positive semidefinite A, discarding
/// eigenvalues below rel_cut * max eigenvalue. Exact for consistent rank-deficient systems.
Eigen::MatrixXd pseudo_inverse_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double rel_cut = 1e-12);

}  // namespace hidegl
