#pragma once

// Transductive label inference on a GraphFactor.
//
// lgc_cg:           (2 L3(W) + lambda2 I) F_u = lambda2 Y_u - 2 L2(W)^T F_l, one CG solve per class,
//                   with L(W) = diag(W 1) - W partitioned into labeled / unlabeled blocks.
// agr_closed_form:  F = Z A,  A* = lambda2 (2 Z^T L(W) Z + lambda2 Z^T Z)^{-1} Z^T Y,  F_u = Z_u A*.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hidegl/cg.hpp"
#include "hidegl/dataset.hpp"
#include "hidegl/graph.hpp"

namespace hidegl {

enum class InferMethod { lgc_cg, agr_closed_form };

struct InferConfig {
  double lambda2 = 0.01;
  CgOptions cg;
  InferMethod method = InferMethod::lgc_cg;
};

void validate(const InferConfig& cfg);

struct SolverStats {
  std::vector<int> iterations;    // per class (CG only)
  std::vector<double> residuals;  // per class final relative residual (CG only)
  bool pseudo_inverse = false;    // closed form fell back to the minimum-norm solve
};

struct Prediction {
  std::vector<Index> indices;  // unlabeled point indices, ascending
  Eigen::MatrixXd F_u;         // (n - l) x c
  std::vector<int> labels_u;   // argmax of each row of F_u
  SolverStats stats;
  Eigen::MatrixXd A;  // k x c coefficients (closed-form paths only)
};

/// Row-wise argmax; ties go to the lowest class index.
std::vector<int> predict_labels(const Eigen::MatrixXd& F_u);

/// Percentage of prediction entries whose label matches the dataset's ground truth.
double accuracy(const Prediction& pred, const Dataset& ds);

/// The unlabeled-block operator Phi = 2 L3(W) + lambda2 I, applied matrix-free.
class LgcSystem {
 public:
  LgcSystem(const GraphFactor& factor, const LabelState& labels, double lambda2);

  Index size() const noexcept { return static_cast<Index>(unlabeled_.size()); }
  /// L3 v = d_u .* v - [W (0; v)]_u
  void apply_l3(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  void apply(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  /// Column-wise apply for a size() x m block; one pass over Z for all columns.
  void apply(const Eigen::MatrixXd& V, Eigen::MatrixXd& out) const;

 private:
  const GraphFactor& factor_;
  const std::vector<Index>& unlabeled_;
  Eigen::VectorXd d_u_;
  double lambda2_;
  mutable Eigen::VectorXd full_in_, full_out_;
};

/// b = lambda2 Y_u - 2 L2(W)^T F_l with F_l = Y_l, computed by applying L(W) to the labeled
/// targets embedded in an n-vector and restricting to unlabeled rows.
Eigen::MatrixXd assemble_rhs(const GraphFactor& factor, const LabelState& labels, double lambda2);

using ClassCgObserver = std::function<void(int cls, int iteration, const Eigen::VectorXd& x)>;

/// The class systems share every W application. Throws ConvergenceError if any class system
/// misses cfg.cg.tol within cfg.cg.max_iters.
Prediction lgc_cg_solve(const GraphFactor& factor, const LabelState& labels, const InferConfig& cfg,
                        const ClassCgObserver& observer = {});

/// Z^T L(W) Z = Z^T diag(W 1) Z - Z^T Z core Z^T Z, a k x k matrix.
Eigen::MatrixXd reduced_laplacian(const GraphFactor& factor);

Prediction agr_closed_form_solve(const GraphFactor& factor, const LabelState& labels,
                                 const InferConfig& cfg);

/// Dispatches on cfg.method.
Prediction infer_labels(const GraphFactor& factor, const LabelState& labels, const InferConfig& cfg);

}  // namespace hidegl
