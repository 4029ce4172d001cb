#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "hidegl/error.hpp"
#include "hidegl/graph.hpp"

namespace hidegl {
namespace {

constexpr Index kSpectralCap = 300;

// Row-normalized bipartite walk over the n points followed by the k high-dense points.
Eigen::MatrixXd transition_matrix(const GraphFactor& f) {
  const Index n = f.n(), k = f.k();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n + k, n + k);
  Q.topRightCorner(n, k) = f.Z();
  Q.bottomLeftCorner(k, n) = f.Z().transpose();
  if (f.eta() > 0.0) Q.bottomRightCorner(k, k) = f.eta() * f.tree().adjacency();
  const Eigen::VectorXd gamma = Q.rowwise().sum();
  return gamma.cwiseInverse().asDiagonal() * Q;
}

}  // namespace

SpectralReport spectral_diagnostics(const GraphFactor& f) {
  const Index n = f.n(), k = f.k();
  if (n + k > kSpectralCap)
    throw CapacityError("spectral_diagnostics: n + k = " + std::to_string(n + k) + " exceeds " +
                        std::to_string(kSpectralCap));
  SpectralReport r;
  r.n = n;
  r.k = k;
  r.alpha = f.alpha();
  r.eta = f.eta();
  r.variant = f.variant();
  const double alpha = f.alpha();

  const Eigen::MatrixXd P = transition_matrix(f);
  {
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(P, false).eigenvalues();
    r.p_max_imag = ev.imag().cwiseAbs().maxCoeff();
    r.p_min_eig = ev.real().minCoeff();
    r.p_max_eig = ev.real().maxCoeff();
    r.p_row_sum_residual = (P.rowwise().sum().array() - 1.0).abs().maxCoeff();
    r.p_ok = r.p_max_imag <= 1e-8 && r.p_min_eig >= -1.0 - 1e-8 && r.p_max_eig <= 1.0 + 1e-8;
  }

  {
    const Eigen::VectorXd Einv = f.E().cwiseInverse();
    Eigen::MatrixXd Pt = alpha * alpha * (Einv.asDiagonal() * f.ZtZ());
    if (f.eta() > 0.0) Pt += alpha * f.eta() * (Einv.asDiagonal() * f.tree().adjacency());
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(Pt, false).eigenvalues();
    r.ptilde_max_imag = ev.imag().cwiseAbs().maxCoeff();
    r.ptilde_min_eig = ev.real().minCoeff();
    r.ptilde_max_eig = ev.real().maxCoeff();
    r.ptilde_margin = 1.0 - ev.cwiseAbs().maxCoeff();
    r.ptilde_ok = r.ptilde_max_imag <= 1e-8 && r.ptilde_margin > 0.0;
  }

  {
    const Index m = n + k;
    const Eigen::MatrixXd IaP = Eigen::MatrixXd::Identity(m, m) - alpha * P;
    const Eigen::MatrixXd P2 = P * P;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(IaP);
    const Eigen::MatrixXd right = P2 * lu.inverse();
    const Eigen::MatrixXd left = lu.solve(P2);
    r.commutation_residual = (right - left).norm() / std::max(right.norm(), 1e-300);
    r.commutation_ok = r.commutation_residual <= 1e-10;
  }

  {
    const Eigen::MatrixXd W = dense_w(f);
    r.w_asymmetry = (W - W.transpose()).cwiseAbs().maxCoeff();
    r.w_min_entry = W.minCoeff();
    const auto rs = row_sums(f);
    r.row_sum_min = rs.min;
    r.row_sum_max = rs.max;
    r.row_sum_bound = rs.upper_bound;
    Eigen::MatrixXd L = -0.5 * (W + W.transpose());
    L.diagonal() += W.rowwise().sum();
    const Eigen::VectorXd lev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(L, Eigen::EigenvaluesOnly).eigenvalues();
    r.laplacian_min_eig = lev.minCoeff();
    r.laplacian_max_eig = lev.maxCoeff();
    r.laplacian_bound = 2.0 * rs.upper_bound;
    r.w_ok = r.w_asymmetry <= 1e-10 && r.w_min_entry >= -1e-12 && rs.within_bounds &&
             r.laplacian_min_eig >= -1e-8 && r.laplacian_max_eig <= r.laplacian_bound + 1e-8;
  }
  return r;
}

}  // namespace hidegl
