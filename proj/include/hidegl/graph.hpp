#pragma once

// Implicit n x n affinity built from the learned assignments Z, the tree G over high-dense
// points and the damping alpha / tree weight eta:
//
//   exact   W  = Z N^{-1} Z^T,  N = E - alpha eta G - alpha^2 Z^T Z,  E = diag(Z^T 1 + eta G 1)
//   approx  W~ = Z M Z^T,       M = E^{-1} + alpha eta E^{-1} G E^{-1} + alpha^2 E^{-1} Z^T Z E^{-1}
//   anchor  W  = Z E^{-1} Z^T   (alpha = 0, eta = 0; the anchor graph)
//
// W is the top-left block of P^2 (I - alpha P)^{-1} for the bipartite random walk P over the
// n points and k high-dense points. Only k x k objects are stored.

#include <memory>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "hidegl/hdp.hpp"
#include "hidegl/linalg.hpp"

namespace hidegl {

enum class GraphVariant { exact, approx, anchor };

const char* variant_name(GraphVariant v) noexcept;

/// Cap on n for every path that materializes an n x n matrix.
inline constexpr Index kDenseCap = 2000;

class GraphFactor {
 public:
  Index n() const noexcept { return Z_->rows(); }
  Index k() const noexcept { return Z_->cols(); }
  GraphVariant variant() const noexcept { return variant_; }
  double alpha() const noexcept { return alpha_; }
  double eta() const noexcept { return eta_; }

  const Eigen::MatrixXd& Z() const noexcept { return *Z_; }
  std::shared_ptr<const Eigen::MatrixXd> Z_ptr() const noexcept { return Z_; }
  const SpanningTree& tree() const noexcept { return tree_; }
  /// Diagonal of E.
  const Eigen::VectorXd& E() const noexcept { return E_; }
  const Eigen::MatrixXd& ZtZ() const noexcept { return ZtZ_; }
  /// W 1, computed once at build time.
  const Eigen::VectorXd& degrees() const noexcept { return degrees_; }
  /// Smallest Cholesky pivot of N (exact variant only, 0 otherwise).
  double core_min_pivot() const noexcept { return N_ ? N_->min_pivot() : 0.0; }

  /// out = W v in O(nk + k^2).
  void apply(std::span<const double> v, std::span<double> out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  /// W V for an n x m block.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& V) const;

  /// core * B where core is N^{-1} (exact) or the explicit M (approx, anchor).
  Eigen::MatrixXd core_times(const Eigen::MatrixXd& B) const;
  /// The k x k core as a dense matrix (N^{-1} is formed explicitly for exact).
  Eigen::MatrixXd core_dense() const;

 private:
  friend GraphFactor build_factor(std::shared_ptr<const Eigen::MatrixXd>, const SpanningTree&,
                                  double, double, GraphVariant);

  std::shared_ptr<const Eigen::MatrixXd> Z_;
  SpanningTree tree_;
  double alpha_ = 0.0;
  double eta_ = 0.0;
  GraphVariant variant_ = GraphVariant::exact;
  Eigen::VectorXd E_;
  Eigen::MatrixXd ZtZ_;
  std::optional<SpdFactor> N_;
  Eigen::MatrixXd M_;
  Eigen::VectorXd degrees_;
};

/// General builder. exact/approx require alpha in (0, 1) and eta >= 0; anchor ignores both.
GraphFactor build_factor(std::shared_ptr<const Eigen::MatrixXd> Z, const SpanningTree& tree,
                         double alpha, double eta, GraphVariant variant);

GraphFactor build_exact_factor(const HdpModel& model, double alpha, double eta);
GraphFactor build_approx_factor(const HdpModel& model, double alpha, double eta);
/// W = Z diag(Z^T 1)^{-1} Z^T from a row-stochastic Z.
GraphFactor build_anchor_factor(std::shared_ptr<const Eigen::MatrixXd> Z);

Eigen::VectorXd apply_w(const GraphFactor& factor, const Eigen::VectorXd& v);

struct RowSumReport {
  Eigen::VectorXd sums;
  double lower_bound = 0.0;
  double upper_bound = 0.0;  // 1/(1-alpha) exact, 1+alpha approx, 1 anchor
  double min = 0.0;
  double max = 0.0;
  bool within_bounds = false;  // with slack 1e-8 above and 1e-10 below
};

/// W 1 checked (not clamped) against the variant's bound.
RowSumReport row_sums(const GraphFactor& factor);

/// Materializes W; refuses n above cap. Diagnostic use only.
Eigen::MatrixXd dense_w(const GraphFactor& factor, Index cap = kDenseCap);

struct AnchorEquivalenceReport {
  double max_abs_diff = 0.0;
};

/// Compares the alpha = 0, eta = 0 construction (through build_factor) with the anchor graph
/// Z Lambda^{-1} Z^T, Lambda = diag(Z^T 1).
AnchorEquivalenceReport anchor_graph_equivalence_check(const Eigen::MatrixXd& Z, Index cap = kDenseCap);

struct SpectralReport {
  Index n = 0, k = 0;
  double alpha = 0.0, eta = 0.0;
  GraphVariant variant = GraphVariant::exact;

  // Transition matrix P over the n + k bipartite vertices.
  double p_max_imag = 0.0;
  double p_min_eig = 0.0, p_max_eig = 0.0;
  double p_row_sum_residual = 0.0;  // ||P 1 - 1||_inf
  bool p_ok = false;

  // P~ = alpha eta E^{-1} G + alpha^2 E^{-1} Z^T Z
  double ptilde_max_imag = 0.0;
  double ptilde_min_eig = 0.0, ptilde_max_eig = 0.0;
  double ptilde_margin = 0.0;  // 1 - max |eig|
  bool ptilde_ok = false;

  // ||P^2 (I - aP)^{-1} - (I - aP)^{-1} P^2||_F / ||P^2 (I - aP)^{-1}||_F
  double commutation_residual = 0.0;
  bool commutation_ok = false;

  double w_asymmetry = 0.0;  // max |W - W^T|
  double w_min_entry = 0.0;
  double row_sum_min = 0.0, row_sum_max = 0.0, row_sum_bound = 0.0;
  double laplacian_min_eig = 0.0, laplacian_max_eig = 0.0, laplacian_bound = 0.0;
  bool w_ok = false;

  bool all_ok() const noexcept { return p_ok && ptilde_ok && commutation_ok && w_ok; }
};

/// Dense eigen-analysis of P, P~, W and L(W); requires n + k <= 300.
SpectralReport spectral_diagnostics(const GraphFactor& factor);

}  // namespace hidegl
