#include "hidegl/infer.hpp"

#include "hidegl/error.hpp"
#include "hidegl/linalg.hpp"

namespace hidegl {
namespace {

void check_shapes(const GraphFactor& factor, const LabelState& labels) {
  if (labels.n() != factor.n()) throw InvalidArgument("label state and graph disagree on n");
  if (labels.labeled_idx.empty()) throw InvalidArgument("labeled set is empty");
  if (labels.c < 1) throw InvalidArgument("label state has no classes");
}

Prediction make_prediction(const LabelState& labels, Eigen::MatrixXd F_u) {
  Prediction p;
  p.indices = labels.unlabeled_idx;
  p.labels_u = predict_labels(F_u);
  p.F_u = std::move(F_u);
  return p;
}

}  // namespace

void validate(const InferConfig& cfg) {
  if (!(cfg.lambda2 > 0.0)) throw InvalidArgument("lambda2 must be > 0");
  if (!(cfg.cg.tol > 0.0)) throw InvalidArgument("cg tol must be > 0");
  if (cfg.cg.max_iters < 1) throw InvalidArgument("cg max_iters must be >= 1");
}

std::vector<int> predict_labels(const Eigen::MatrixXd& F_u) {
  std::vector<int> out(static_cast<std::size_t>(F_u.rows()));
  for (Index i = 0; i < F_u.rows(); ++i) {
    int best = 0;
    for (Index j = 1; j < F_u.cols(); ++j)
      if (F_u(i, j) > F_u(i, best)) best = static_cast<int>(j);
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

double accuracy(const Prediction& pred, const Dataset& ds) {
  if (pred.indices.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.indices.size(); ++i)
    hits += ds.labels[static_cast<std::size_t>(pred.indices[i])] == pred.labels_u[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.indices.size());
}

LgcSystem::LgcSystem(const GraphFactor& factor, const LabelState& labels, double lambda2)
    : factor_(factor), unlabeled_(labels.unlabeled_idx), lambda2_(lambda2) {
  d_u_.resize(size());
  for (Index i = 0; i < size(); ++i) d_u_(i) = factor.degrees()(unlabeled_[static_cast<std::size_t>(i)]);
  full_in_ = Eigen::VectorXd::Zero(factor.n());
  full_out_.resize(factor.n());
}

void LgcSystem::apply_l3(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  for (Index i = 0; i < size(); ++i) full_in_(unlabeled_[static_cast<std::size_t>(i)]) = v(i);
  factor_.apply({full_in_.data(), static_cast<std::size_t>(full_in_.size())},
                {full_out_.data(), static_cast<std::size_t>(full_out_.size())});
  out.resize(size());
  for (Index i = 0; i < size(); ++i) out(i) = d_u_(i) * v(i) - full_out_(unlabeled_[static_cast<std::size_t>(i)]);
}

void LgcSystem::apply(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  apply_l3(v, out);
  out = 2.0 * out + lambda2_ * v;
}

void LgcSystem::apply(const Eigen::MatrixXd& V, Eigen::MatrixXd& out) const {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(factor_.n(), V.cols());
  for (Index i = 0; i < size(); ++i) full.row(unlabeled_[static_cast<std::size_t>(i)]) = V.row(i);
  const Eigen::MatrixXd WV = factor_.apply(full);
  out.resize(size(), V.cols());
  for (Index i = 0; i < size(); ++i)
    out.row(i) = (2.0 * d_u_(i) + lambda2_) * V.row(i) - 2.0 * WV.row(unlabeled_[static_cast<std::size_t>(i)]);
}

Eigen::MatrixXd assemble_rhs(const GraphFactor& factor, const LabelState& labels, double lambda2) {
  check_shapes(factor, labels);
  const Index n = factor.n();
  Eigen::MatrixXd Fl = Eigen::MatrixXd::Zero(n, labels.c);
  for (Index i : labels.labeled_idx) Fl.row(i) = labels.Y.row(i);
  // L(W) Fl = diag(d) Fl - W Fl
  const Eigen::MatrixXd LFl = factor.degrees().asDiagonal() * Fl - factor.apply(Fl);
  const auto nu = static_cast<Index>(labels.unlabeled_idx.size());
  Eigen::MatrixXd b(nu, labels.c);
  for (Index i = 0; i < nu; ++i) {
    const Index row = labels.unlabeled_idx[static_cast<std::size_t>(i)];
    b.row(i) = lambda2 * labels.Y.row(row) - 2.0 * LFl.row(row);
  }
  return b;
}

Prediction lgc_cg_solve(const GraphFactor& factor, const LabelState& labels, const InferConfig& cfg,
                        const ClassCgObserver& observer) {
  validate(cfg);
  const Eigen::MatrixXd b = assemble_rhs(factor, labels, cfg.lambda2);
  const LgcSystem system(factor, labels, cfg.lambda2);
  const BlockOperator op = [&system](const Eigen::MatrixXd& in, Eigen::MatrixXd& out) { system.apply(in, out); };

  const ColumnCgResult res = conjugate_gradient_columns(op, b, cfg.cg, observer);
  for (int cls = 0; cls < labels.c; ++cls) {
    const auto c = static_cast<std::size_t>(cls);
    if (!res.converged[c])
      throw ConvergenceError("lgc_cg_solve: class " + std::to_string(cls) + " did not converge in " +
                                 std::to_string(res.iterations[c]) + " iterations",
                             res.relative_residuals[c]);
  }
  Eigen::MatrixXd F_u = res.X;
  SolverStats stats;
  stats.iterations = res.iterations;
  stats.residuals = res.relative_residuals;
  Prediction p = make_prediction(labels, std::move(F_u));
  p.stats = std::move(stats);
  return p;
}

Eigen::MatrixXd reduced_laplacian(const GraphFactor& factor) {
  const Eigen::MatrixXd& Z = factor.Z();
  const Eigen::MatrixXd& ZtZ = factor.ZtZ();
  const Eigen::MatrixXd DZ = factor.degrees().asDiagonal() * Z;
  Eigen::MatrixXd R = Z.transpose() * DZ;
  R.noalias() -= ZtZ * factor.core_times(ZtZ);
  return 0.5 * (R + R.transpose());
}

Prediction agr_closed_form_solve(const GraphFactor& factor, const LabelState& labels,
                                 const InferConfig& cfg) {
  validate(cfg);
  check_shapes(factor, labels);
  const Eigen::MatrixXd& Z = factor.Z();
  Eigen::MatrixXd S = 2.0 * reduced_laplacian(factor) + cfg.lambda2 * factor.ZtZ();
  S = 0.5 * (S + S.transpose());
  Eigen::MatrixXd ZtY = Eigen::MatrixXd::Zero(factor.k(), labels.c);
  for (Index i : labels.labeled_idx) ZtY.noalias() += Z.row(i).transpose() * labels.Y.row(i);
  // Coincident high-dense points (or unused anchors) make S singular. The system stays
  // consistent and F_u = Z_u A is unique, so the minimum-norm solution is used then.
  Eigen::MatrixXd A;
  bool pseudo = false;
  try {
    const SymmetricFactor fac(S, "agr_closed_form_solve: 2 Z^T L Z + lambda2 Z^T Z");
    A = cfg.lambda2 * fac.solve(ZtY);
  } catch (const FactorizationError&) {
    A = cfg.lambda2 * pseudo_inverse_solve(S, ZtY);
    pseudo = true;
  }

  const auto nu = static_cast<Index>(labels.unlabeled_idx.size());
  Eigen::MatrixXd F_u(nu, labels.c);
  for (Index i = 0; i < nu; ++i) F_u.row(i) = Z.row(labels.unlabeled_idx[static_cast<std::size_t>(i)]) * A;
  Prediction p = make_prediction(labels, std::move(F_u));
  p.A = std::move(A);
  p.stats.pseudo_inverse = pseudo;
  return p;
}

Prediction infer_labels(const GraphFactor& factor, const LabelState& labels, const InferConfig& cfg) {
  return cfg.method == InferMethod::lgc_cg ? lgc_cg_solve(factor, labels, cfg)
                                           : agr_closed_form_solve(factor, labels, cfg);
}

}  // namespace hidegl
