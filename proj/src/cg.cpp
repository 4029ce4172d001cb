#include "hidegl/cg.hpp"

#include <cmath>
#include <vector>

namespace hidegl {

CgResult conjugate_gradient(const LinearOperator& A, const Eigen::VectorXd& b, const CgOptions& opts,
                            const CgObserver& observer) {
  CgResult res;
  res.x = Eigen::VectorXd::Zero(b.size());
  if (observer) observer(0, res.x);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  Eigen::VectorXd Ap(b.size());
  double rr = r.squaredNorm();
  res.relative_residual = 1.0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    A(p, Ap);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;  // operator is not positive definite along p
    const double step = rr / pAp;
    res.x.noalias() += step * p;
    r.noalias() -= step * Ap;
    const double rr_new = r.squaredNorm();
    res.iterations = it;
    res.relative_residual = std::sqrt(rr_new) / bnorm;
    if (observer) observer(it, res.x);
    if (res.relative_residual <= opts.tol) {
      res.converged = true;
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return res;
}

ColumnCgResult conjugate_gradient_columns(const BlockOperator& A, const Eigen::MatrixXd& B,
                                          const CgOptions& opts, const ColumnCgObserver& observer) {
  const Eigen::Index n = B.rows(), m = B.cols();
  const auto mu = static_cast<std::size_t>(m);
  ColumnCgResult res;
  res.X = Eigen::MatrixXd::Zero(n, m);
  res.iterations.assign(mu, 0);
  res.relative_residuals.assign(mu, 1.0);
  res.converged.assign(mu, false);

  std::vector<double> bnorm(mu), rr(mu);
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (observer) observer(static_cast<int>(j), 0, res.X.col(j));
    bnorm[static_cast<std::size_t>(j)] = B.col(j).norm();
    if (bnorm[static_cast<std::size_t>(j)] == 0.0) {
      res.converged[static_cast<std::size_t>(j)] = true;
      res.relative_residuals[static_cast<std::size_t>(j)] = 0.0;
    } else {
      active.push_back(j);
    }
  }
  Eigen::MatrixXd R = B, P = B;
  for (Eigen::Index j = 0; j < m; ++j) rr[static_cast<std::size_t>(j)] = R.col(j).squaredNorm();

  Eigen::MatrixXd Pa, APa;
  for (int it = 1; it <= opts.max_iters && !active.empty(); ++it) {
    const auto na = static_cast<Eigen::Index>(active.size());
    Pa.resize(n, na);
    for (Eigen::Index a = 0; a < na; ++a) Pa.col(a) = P.col(active[static_cast<std::size_t>(a)]);
    A(Pa, APa);
    std::vector<Eigen::Index> still;
    for (Eigen::Index a = 0; a < na; ++a) {
      const Eigen::Index j = active[static_cast<std::size_t>(a)];
      const auto ju = static_cast<std::size_t>(j);
      const double pAp = Pa.col(a).dot(APa.col(a));
      if (!(pAp > 0.0)) continue;  // not positive definite along p; leave unconverged
      const double step = rr[ju] / pAp;
      res.X.col(j).noalias() += step * Pa.col(a);
      R.col(j).noalias() -= step * APa.col(a);
      const double rr_new = R.col(j).squaredNorm();
      res.iterations[ju] = it;
      res.relative_residuals[ju] = std::sqrt(rr_new) / bnorm[ju];
      if (observer) observer(static_cast<int>(j), it, res.X.col(j));
      if (res.relative_residuals[ju] <= opts.tol) {
        res.converged[ju] = true;
        continue;
      }
      P.col(j) = R.col(j) + (rr_new / rr[ju]) * P.col(j);
      rr[ju] = rr_new;
      still.push_back(j);
    }
    active = std::move(still);
  }
  return res;
}

}  // namespace hidegl
