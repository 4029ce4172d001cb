#pragma once

// Reference SSL methods: dense LGC on a K-NN Gaussian graph, and the anchor graph with Z from
// Nadaraya-Watson Gaussian regression or from local anchor embedding (LAE).

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hidegl/dataset.hpp"
#include "hidegl/hdp.hpp"
#include "hidegl/infer.hpp"

namespace hidegl {

struct AnchorSet {
  Eigen::MatrixXd U;  // d x k, k-means centroids
  int s_hat = 3;      // anchors per point
  double h = 1.0;     // Gaussian bandwidth
};

void validate(const AnchorSet& anchors);

AnchorSet make_anchors(const Dataset& ds, Index k, int s_hat, double h, const KMeansOptions& opts);

/// Indices of the s nearest anchors of x, nearest first (ties by index).
std::vector<Index> nearest_anchors(std::span<const double> x, const Eigen::MatrixXd& U, int s);

/// Rows supported on the s_hat nearest anchors with weights exp(-||x - u||^2 / 2h^2),
/// renormalized to sum to one.
Eigen::MatrixXd agr_gauss_z(const Eigen::MatrixXd& X, const AnchorSet& anchors);

struct PgOptions {
  int max_iters = 2000;
  double tol = 1e-12;  // relative objective decrease
};

/// Euclidean projection onto the probability simplex (Michelot's active-set iteration).
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Minimizes 1/2 ||x - U z||^2 over the simplex by projected gradient with step 1/L, L the
/// largest eigenvalue of U^T U. trace, when given, receives the objective at every iterate.
Eigen::VectorXd lae_solve_point(const Eigen::VectorXd& x, const Eigen::MatrixXd& U, const PgOptions& opts,
                                std::vector<double>* trace = nullptr);

/// LAE assignments: each row solves lae_solve_point on its s_hat nearest anchors.
Eigen::MatrixXd agr_lae_z(const Eigen::MatrixXd& X, const AnchorSet& anchors, const PgOptions& opts = {});

/// AGR inference: the anchor-graph factor (alpha = 0, eta = 0) with the closed-form reduced
/// solve, gamma taking the lambda2 slot.
Prediction agr_predict(std::shared_ptr<const Eigen::MatrixXd> Z, const LabelState& labels, double gamma);

inline constexpr Index kLgcDenseCap = 5000;

/// Symmetric K-NN Gaussian affinity (edge when either endpoint lists the other), zero diagonal.
Eigen::MatrixXd knn_affinity(const Eigen::MatrixXd& X, int K, double sigma, Index cap = kLgcDenseCap);

/// D^{-1/2} W D^{-1/2}; throws InvalidArgument naming the first isolated vertex.
Eigen::MatrixXd normalized_affinity(const Eigen::MatrixXd& W);

/// Dense LGC: F = mu ((1 + mu) I - S)^{-1} Y. The factorization is label independent and is
/// reused across label draws.
class LgcDense {
 public:
  LgcDense(const Eigen::MatrixXd& X, int K, double sigma, double mu, Index cap = kLgcDenseCap);

  const Eigen::MatrixXd& S() const noexcept { return S_; }
  double mu() const noexcept { return mu_; }
  /// Full n x c solution.
  Eigen::MatrixXd solve(const LabelState& labels) const;
  Prediction predict(const LabelState& labels) const;

 private:
  Eigen::MatrixXd S_;
  double mu_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

Prediction lgc_dense(const Dataset& ds, const LabelState& labels, int K, double sigma, double mu);

}  // namespace hidegl
