#include "hidegl/linalg.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "hidegl/error.hpp"

namespace hidegl {
namespace {

// Unblocked left-looking Cholesky that stops at the first bad pivot; error path only.
std::pair<Eigen::Index, double> first_bad_pivot(const Eigen::MatrixXd& A) {
  const Eigen::Index k = A.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double pivot = A(j, j) - L.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return {j, pivot};
    L(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < k; ++i)
      L(i, j) = (A(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
  }
  return {-1, 0.0};
}

}  // namespace

SpdFactor::SpdFactor(const Eigen::MatrixXd& A, const std::string& what) {
  if (A.rows() != A.cols()) throw InvalidArgument(what + ": matrix is not square");
  llt_.compute(A);
  bool ok = llt_.info() == Eigen::Success;
  if (ok) {
    const Eigen::VectorXd diag = llt_.matrixLLT().diagonal();
    min_pivot_ = A.rows() > 0 ? diag.array().square().minCoeff() : 0.0;
    ok = A.rows() == 0 || (min_pivot_ > 0.0 && std::isfinite(min_pivot_));
  }
  if (!ok) {
    auto [idx, value] = first_bad_pivot(A);
    if (idx < 0) {
      idx = 0;
      value = min_pivot_;
    }
    throw FactorizationError(what + ": matrix is not positive definite", idx, value);
  }
}

Eigen::MatrixXd SpdFactor::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(llt_.rows(), llt_.rows()));
}

SymmetricFactor::SymmetricFactor(const Eigen::MatrixXd& A, const std::string& what,
                                 double rel_guard) {
  if (A.rows() != A.cols()) throw InvalidArgument(what + ": matrix is not square");
  ldlt_.compute(A);
  if (ldlt_.info() != Eigen::Success) throw FactorizationError(what + ": LDLT failed", 0, 0.0);
  const Eigen::VectorXd D = ldlt_.vectorD();
  if (D.size() == 0) return;
  const double largest = D.cwiseAbs().maxCoeff();
  Eigen::Index at = 0;
  const double smallest = D.cwiseAbs().minCoeff(&at);
  if (!(largest > 0.0) || !(smallest > rel_guard * largest))
    throw FactorizationError(what + ": system is numerically singular", at, D(at));
}

Eigen::MatrixXd pseudo_inverse_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double rel_cut) {
  if (A.rows() != A.cols() || A.rows() != B.rows()) throw InvalidArgument("pseudo_inverse_solve: shape mismatch");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw FactorizationError("pseudo_inverse_solve: eigensolver failed", 0, 0.0);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double cut = rel_cut * std::max(lam.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Eigen::VectorXd inv(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) inv(i) = lam(i) > cut ? 1.0 / lam(i) : 0.0;
  const Eigen::MatrixXd& V = es.eigenvectors();
  return V * (inv.asDiagonal() * (V.transpose() * B));
}

}  // namespace hidegl
