#include "hidegl/graph.hpp"

#include <cmath>
#include <vector>

#include "hidegl/error.hpp"
#include "hidegl/kernels.hpp"

namespace hidegl {
namespace {

constexpr double kMinE = 1e-300;

Eigen::MatrixXd gram(const Eigen::MatrixXd& Z) {
  const Index k = Z.cols();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k, k);
  G.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
  return G.selfadjointView<Eigen::Lower>();
}

}  // namespace

const char* variant_name(GraphVariant v) noexcept {
  switch (v) {
    case GraphVariant::exact:
      return "exact";
    case GraphVariant::approx:
      return "approx";
    case GraphVariant::anchor:
      return "anchor";
  }
  return "unknown";
}

GraphFactor build_factor(std::shared_ptr<const Eigen::MatrixXd> Z, const SpanningTree& tree,
                         double alpha, double eta, GraphVariant variant) {
  if (!Z || Z->rows() < 1 || Z->cols() < 1) throw InvalidArgument("build_factor: empty Z");
  if (variant == GraphVariant::anchor) {
    alpha = 0.0;
    eta = 0.0;
  } else {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("build_factor: alpha must lie in (0, 1)");
    if (!(eta >= 0.0)) throw InvalidArgument("build_factor: eta must be >= 0");
    if (tree.k != Z->cols()) throw InvalidArgument("build_factor: tree size does not match Z");
  }
  if ((Z->array() < 0.0).any()) throw InvalidArgument("build_factor: Z has negative entries");

  GraphFactor f;
  f.Z_ = std::move(Z);
  f.tree_ = variant == GraphVariant::anchor ? SpanningTree{f.k(), {}} : tree;
  f.alpha_ = alpha;
  f.eta_ = eta;
  f.variant_ = variant;

  const Eigen::MatrixXd& Zm = *f.Z_;
  f.E_ = Zm.colwise().sum().transpose();
  if (eta > 0.0) f.E_ += eta * f.tree_.degrees();
  Eigen::VectorXd Einv(f.k());
  for (Index r = 0; r < f.k(); ++r) {
    if (f.E_(r) >= kMinE) {
      Einv(r) = 1.0 / f.E_(r);
    } else if (variant == GraphVariant::anchor && f.E_(r) == 0.0) {
      Einv(r) = 0.0;  // anchor that no point uses; its column of Z is zero
    } else {
      throw InvalidArgument("build_factor: E(" + std::to_string(r) + ") is not positive");
    }
  }
  f.ZtZ_ = gram(Zm);

  switch (variant) {
    case GraphVariant::exact: {
      Eigen::MatrixXd N = -alpha * alpha * f.ZtZ_;
      N.diagonal() += f.E_;
      if (eta > 0.0) N -= alpha * eta * f.tree_.adjacency();
      f.N_.emplace(N, "build_exact_factor: N = E - alpha eta G - alpha^2 Z^T Z");
      break;
    }
    case GraphVariant::approx: {
      // E^{-1} + alpha eta E^{-1} G E^{-1} + alpha^2 E^{-1} Z^T Z E^{-1}
      Eigen::MatrixXd inner = alpha * alpha * f.ZtZ_;
      if (eta > 0.0) inner += alpha * eta * f.tree_.adjacency();
      Eigen::MatrixXd M = Einv.asDiagonal() * inner * Einv.asDiagonal();
      M.diagonal() += Einv;
      f.M_ = 0.5 * (M + M.transpose());
      break;
    }
    case GraphVariant::anchor:
      f.M_ = Einv.asDiagonal();
      break;
  }
  f.degrees_ = f.apply(Eigen::VectorXd(Eigen::VectorXd::Ones(f.n())));
  return f;
}

GraphFactor build_exact_factor(const HdpModel& model, double alpha, double eta) {
  return build_factor(model.Z, model.tree, alpha, eta, GraphVariant::exact);
}

GraphFactor build_approx_factor(const HdpModel& model, double alpha, double eta) {
  return build_factor(model.Z, model.tree, alpha, eta, GraphVariant::approx);
}

GraphFactor build_anchor_factor(std::shared_ptr<const Eigen::MatrixXd> Z) {
  const Index k = Z ? Z->cols() : 0;
  return build_factor(std::move(Z), SpanningTree{k, {}}, 0.0, 0.0, GraphVariant::anchor);
}

Eigen::MatrixXd GraphFactor::core_times(const Eigen::MatrixXd& B) const {
  if (N_) return N_->solve(B);
  return M_ * B;
}

Eigen::MatrixXd GraphFactor::core_dense() const {
  if (N_) return N_->inverse();
  return M_;
}

void GraphFactor::apply(std::span<const double> v, std::span<double> out) const {
  if (static_cast<Index>(v.size()) != n() || static_cast<Index>(out.size()) != n())
    throw InvalidArgument("apply_w: vector length does not match n");
  Eigen::VectorXd u(k());
  kernels::gemv_transposed(*Z_, v, {u.data(), static_cast<std::size_t>(u.size())});
  const Eigen::VectorXd s = N_ ? N_->solve(u) : Eigen::VectorXd(M_ * u);
  kernels::gemv(*Z_, {s.data(), static_cast<std::size_t>(s.size())}, out);
}

Eigen::VectorXd GraphFactor::apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(n());
  apply({v.data(), static_cast<std::size_t>(v.size())}, {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Eigen::MatrixXd GraphFactor::apply(const Eigen::MatrixXd& V) const {
  if (V.rows() != n()) throw InvalidArgument("apply_w: block row count does not match n");
  const Eigen::MatrixXd U = Z_->transpose() * V;
  return *Z_ * core_times(U);
}

Eigen::VectorXd apply_w(const GraphFactor& factor, const Eigen::VectorXd& v) { return factor.apply(v); }

RowSumReport row_sums(const GraphFactor& factor) {
  RowSumReport r;
  r.sums = factor.degrees();
  switch (factor.variant()) {
    case GraphVariant::exact:
      r.upper_bound = 1.0 / (1.0 - factor.alpha());
      break;
    case GraphVariant::approx:
      r.upper_bound = 1.0 + factor.alpha();
      break;
    case GraphVariant::anchor:
      r.upper_bound = 1.0;
      break;
  }
  r.min = r.sums.minCoeff();
  r.max = r.sums.maxCoeff();
  r.within_bounds = r.min >= r.lower_bound - 1e-10 && r.max <= r.upper_bound + 1e-8;
  return r;
}

Eigen::MatrixXd dense_w(const GraphFactor& factor, Index cap) {
  if (factor.n() > cap)
    throw CapacityError("dense_w: n = " + std::to_string(factor.n()) + " exceeds the dense cap " +
                        std::to_string(cap));
  const Eigen::MatrixXd& Z = factor.Z();
  const Eigen::MatrixXd CZt = factor.core_times(Eigen::MatrixXd(Z.transpose()));
  return Z * CZt;
}

AnchorEquivalenceReport anchor_graph_equivalence_check(const Eigen::MatrixXd& Z, Index cap) {
  const auto Zp = std::make_shared<const Eigen::MatrixXd>(Z);
  const Eigen::MatrixXd W = dense_w(build_anchor_factor(Zp), cap);
  // Anchor graph: W_ij = sum_r Z_ir Z_jr / Lambda_rr.
  const Eigen::VectorXd lambda = Z.colwise().sum().transpose();
  Eigen::MatrixXd W_agr = Eigen::MatrixXd::Zero(Z.rows(), Z.rows());
  for (Index r = 0; r < Z.cols(); ++r) {
    if (lambda(r) > 0.0) W_agr.noalias() += (Z.col(r) / lambda(r)) * Z.col(r).transpose();
  }
  return {(W - W_agr).cwiseAbs().maxCoeff()};
}

}  // namespace hidegl
