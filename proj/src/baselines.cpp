#include "hidegl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "hidegl/error.hpp"
#include "hidegl/graph.hpp"
#include "hidegl/kernels.hpp"

namespace hidegl {

void validate(const AnchorSet& a) {
  if (a.U.cols() < 1) throw InvalidArgument("anchor set is empty");
  if (a.s_hat < 1 || a.s_hat > a.U.cols()) throw InvalidArgument("s_hat must lie in [1, k]");
  if (!(a.h > 0.0)) throw InvalidArgument("anchor bandwidth h must be > 0");
}

AnchorSet make_anchors(const Dataset& ds, Index k, int s_hat, double h, const KMeansOptions& opts) {
  AnchorSet a{kmeans(ds.features, k, opts).centers, s_hat, h};
  validate(a);
  return a;
}

std::vector<Index> nearest_anchors(std::span<const double> x, const Eigen::MatrixXd& U, int s) {
  const Index k = U.cols();
  std::vector<double> dist(static_cast<std::size_t>(k));
  kernels::active().distances_to_columns(x.data(), U.data(), x.size(), static_cast<std::size_t>(k), dist.data());
  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + s, order.end(), [&](Index a, Index b) {
    const double da = dist[static_cast<std::size_t>(a)], db = dist[static_cast<std::size_t>(b)];
    return da < db || (da == db && a < b);
  });
  order.resize(static_cast<std::size_t>(s));
  return order;
}

Eigen::MatrixXd agr_gauss_z(const Eigen::MatrixXd& X, const AnchorSet& anchors) {
  validate(anchors);
  const Index n = X.cols();
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, anchors.U.cols());
  const double scale = -1.0 / (2.0 * anchors.h * anchors.h);
  const auto d = static_cast<std::size_t>(X.rows());
  for (Index i = 0; i < n; ++i) {
    const auto nb = nearest_anchors({X.col(i).data(), d}, anchors.U, anchors.s_hat);
    Eigen::VectorXd logw(anchors.s_hat);
    for (int j = 0; j < anchors.s_hat; ++j)
      logw(j) = scale * (X.col(i) - anchors.U.col(nb[static_cast<std::size_t>(j)])).squaredNorm();
    const Eigen::VectorXd w = (logw.array() - logw.maxCoeff()).exp().matrix();
    const double total = w.sum();
    for (int j = 0; j < anchors.s_hat; ++j) Z(i, nb[static_cast<std::size_t>(j)]) = w(j) / total;
  }
  return Z;
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Index m = v.size();
  std::vector<char> active(static_cast<std::size_t>(m), 1);
  Index count = m;
  double tau = 0.0;
  while (true) {
    double sum = 0.0;
    for (Index i = 0; i < m; ++i)
      if (active[static_cast<std::size_t>(i)]) sum += v(i);
    tau = (sum - 1.0) / static_cast<double>(count);
    Index dropped = 0;
    for (Index i = 0; i < m; ++i) {
      if (active[static_cast<std::size_t>(i)] && v(i) <= tau) {
        active[static_cast<std::size_t>(i)] = 0;
        ++dropped;
      }
    }
    if (dropped == 0) break;
    count -= dropped;
  }
  return (v.array() - tau).max(0.0).matrix();
}

Eigen::VectorXd lae_solve_point(const Eigen::VectorXd& x, const Eigen::MatrixXd& U, const PgOptions& opts,
                                std::vector<double>* trace) {
  const Index s = U.cols();
  const Eigen::MatrixXd H = U.transpose() * U;
  const Eigen::VectorXd Utx = U.transpose() * x;
  const double half_xx = 0.5 * x.squaredNorm();
  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();

  auto objective = [&](const Eigen::VectorXd& z) { return std::max(0.0, 0.5 * z.dot(H * z) - z.dot(Utx) + half_xx); };

  Eigen::VectorXd z = Eigen::VectorXd::Constant(s, 1.0 / static_cast<double>(s));
  double f = objective(z);
  if (trace) trace->assign(1, f);
  if (!(L > 0.0)) return z;  // all neighbor anchors at the origin; every z is optimal
  const double floor = 1e-14 * std::max(f, half_xx);
  for (int it = 0; it < opts.max_iters && f > floor; ++it) {
    const Eigen::VectorXd grad = H * z - Utx;
    Eigen::VectorXd next = project_to_simplex(z - grad / L);
    const double f_next = objective(next);
    if (f_next > f) break;  // roundoff; keep the better iterate
    z = std::move(next);
    const double decrease = f - f_next;
    f = f_next;
    if (trace) trace->push_back(f);
    if (decrease <= opts.tol * std::max(f + decrease, floor)) break;
  }
  return z;
}

Eigen::MatrixXd agr_lae_z(const Eigen::MatrixXd& X, const AnchorSet& anchors, const PgOptions& opts) {
  validate(anchors);
  const Index n = X.cols();
  const auto d = static_cast<std::size_t>(X.rows());
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, anchors.U.cols());
  Eigen::MatrixXd Unb(X.rows(), anchors.s_hat);
  for (Index i = 0; i < n; ++i) {
    const auto nb = nearest_anchors({X.col(i).data(), d}, anchors.U, anchors.s_hat);
    for (int j = 0; j < anchors.s_hat; ++j) Unb.col(j) = anchors.U.col(nb[static_cast<std::size_t>(j)]);
    const Eigen::VectorXd z = lae_solve_point(X.col(i), Unb, opts);
    for (int j = 0; j < anchors.s_hat; ++j) Z(i, nb[static_cast<std::size_t>(j)]) = z(j);
  }
  return Z;
}

Prediction agr_predict(std::shared_ptr<const Eigen::MatrixXd> Z, const LabelState& labels, double gamma) {
  if (!Z) throw InvalidArgument("agr_predict: null Z");
  const Eigen::VectorXd rs = Z->rowwise().sum();
  if ((rs.array() - 1.0).abs().maxCoeff() > 1e-10) throw InvalidArgument("agr_predict: Z rows must sum to 1");
  const GraphFactor factor = build_anchor_factor(std::move(Z));
  InferConfig cfg;
  cfg.lambda2 = gamma;
  cfg.method = InferMethod::agr_closed_form;
  return agr_closed_form_solve(factor, labels, cfg);
}

Eigen::MatrixXd knn_affinity(const Eigen::MatrixXd& X, int K, double sigma, Index cap) {
  const Index n = X.cols();
  if (n > cap) throw CapacityError("knn_affinity: n = " + std::to_string(n) + " exceeds the dense cap");
  if (K < 1 || K >= n) throw InvalidArgument("knn_affinity: K must lie in [1, n)");
  if (!(sigma > 0.0)) throw InvalidArgument("knn_affinity: sigma must be > 0");
  kernels::RowMatrix D;
  kernels::pairwise_squared_distances(X, X, D);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  const double scale = -1.0 / (2.0 * sigma * sigma);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    std::swap(order[0], order[static_cast<std::size_t>(i)]);  // exclude self from the candidates
    std::partial_sort(order.begin() + 1, order.begin() + 1 + K, order.end(), [&](Index a, Index b) {
      return D(i, a) < D(i, b) || (D(i, a) == D(i, b) && a < b);
    });
    for (int t = 1; t <= K; ++t) {
      const Index j = order[static_cast<std::size_t>(t)];
      const double w = std::exp(scale * D(i, j));
      W(i, j) = w;
      W(j, i) = w;
    }
  }
  W.diagonal().setZero();
  return W;
}

Eigen::MatrixXd normalized_affinity(const Eigen::MatrixXd& W) {
  const Eigen::VectorXd deg = W.rowwise().sum();
  for (Index i = 0; i < deg.size(); ++i)
    if (!(deg(i) > 0.0)) throw InvalidArgument("lgc: vertex " + std::to_string(i) + " is isolated (zero degree)");
  const Eigen::VectorXd s = deg.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd S = s.asDiagonal() * W * s.asDiagonal();
  return 0.5 * (S + S.transpose());  // bitwise symmetric, so LLT sees the same matrix either way
}

LgcDense::LgcDense(const Eigen::MatrixXd& X, int K, double sigma, double mu, Index cap)
    : S_(normalized_affinity(knn_affinity(X, K, sigma, cap))), mu_(mu) {
  if (!(mu > 0.0)) throw InvalidArgument("lgc: mu must be > 0");
  Eigen::MatrixXd A = -S_;
  A.diagonal().array() += 1.0 + mu;
  llt_.compute(A);
  if (llt_.info() != Eigen::Success) throw FactorizationError("lgc: (1 + mu) I - S is not positive definite", 0, 0.0);
}

Eigen::MatrixXd LgcDense::solve(const LabelState& labels) const {
  if (labels.n() != S_.rows()) throw InvalidArgument("lgc: label state and graph disagree on n");
  return mu_ * llt_.solve(labels.Y);
}

Prediction LgcDense::predict(const LabelState& labels) const {
  const Eigen::MatrixXd F = solve(labels);
  Prediction p;
  p.indices = labels.unlabeled_idx;
  p.F_u.resize(static_cast<Index>(p.indices.size()), F.cols());
  for (std::size_t i = 0; i < p.indices.size(); ++i) p.F_u.row(static_cast<Index>(i)) = F.row(p.indices[i]);
  p.labels_u = predict_labels(p.F_u);
  return p;
}

Prediction lgc_dense(const Dataset& ds, const LabelState& labels, int K, double sigma, double mu) {
  return LgcDense(ds.features, K, sigma, mu).predict(labels);
}

}  // namespace hidegl
