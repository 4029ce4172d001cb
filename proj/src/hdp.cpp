#include "hidegl/hdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <tuple>

#include "hidegl/error.hpp"
#include "hidegl/kernels.hpp"
#include "hidegl/linalg.hpp"

namespace hidegl {
namespace {

constexpr double kMinLogGap = -700.0;
constexpr Index kAssignBlock = 256;

struct DisjointSets {
  std::vector<Index> parent;
  std::vector<int> rank;
  explicit DisjointSets(Index n) : parent(static_cast<std::size_t>(n)), rank(static_cast<std::size_t>(n), 0) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }
  Index find(Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    auto& ra = rank[static_cast<std::size_t>(a)];
    auto& rb = rank[static_cast<std::size_t>(b)];
    if (ra < rb) std::swap(a, b);
    parent[static_cast<std::size_t>(b)] = a;
    if (ra == rb) ++rank[static_cast<std::size_t>(a)];
    return true;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void validate(const HdpConfig& cfg) {
  if (cfg.k < 1) throw InvalidArgument("k must be >= 1");
  if (!(cfg.sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
  if (!(cfg.lambda1 >= 0.0)) throw InvalidArgument("lambda1 must be >= 0");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("tol must be > 0");
  if (cfg.max_outer_iters < 0) throw InvalidArgument("max_outer_iters must be >= 0");
}

Eigen::MatrixXd SpanningTree::adjacency() const {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [r, s] : edges) {
    G(r, s) = 1.0;
    G(s, r) = 1.0;
  }
  return G;
}

Eigen::VectorXd SpanningTree::degrees() const {
  Eigen::VectorXd deg = Eigen::VectorXd::Zero(k);
  for (const auto& [r, s] : edges) {
    deg(r) += 1.0;
    deg(s) += 1.0;
  }
  return deg;
}

Eigen::MatrixXd SpanningTree::laplacian() const {
  Eigen::MatrixXd L = -adjacency();
  L.diagonal() += degrees();
  return L;
}

void SpanningTree::apply_adjacency(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  out.setZero(k);
  for (const auto& [r, s] : edges) {
    out(r) += v(s);
    out(s) += v(r);
  }
}

double SpanningTree::cost(const Eigen::MatrixXd& C) const {
  double total = 0.0;
  for (const auto& [r, s] : edges) total += (C.col(r) - C.col(s)).squaredNorm();
  return total;
}

bool SpanningTree::is_spanning_tree() const {
  if (k < 1 || static_cast<Index>(edges.size()) != k - 1) return false;
  DisjointSets sets(k);
  for (const auto& [r, s] : edges) {
    if (r < 0 || s < 0 || r >= k || s >= k || r == s) return false;
    if (!sets.unite(r, s)) return false;  // cycle or duplicate
  }
  return true;
}

Eigen::MatrixXd update_assignments(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, double sigma,
                                   double* log_likelihood) {
  if (X.rows() != C.rows()) throw InvalidArgument("update_assignments: dimension mismatch");
  if (!(sigma > 0.0)) throw InvalidArgument("update_assignments: sigma must be > 0");
  const Index n = X.cols(), k = C.cols();
  const auto d = static_cast<std::size_t>(X.rows());
  const double scale = -1.0 / (2.0 * sigma * sigma);
  const auto& kt = kernels::active();
  Eigen::MatrixXd Z(n, k);
  kernels::RowMatrix block;
  double f = 0.0;
  // Row blocks keep the distance scratch in cache instead of a second n x k array.
  for (Index i0 = 0; i0 < n; i0 += kAssignBlock) {
    const Index rows = std::min(kAssignBlock, n - i0);
    block.resize(rows, k);
    for (Index r = 0; r < rows; ++r) {
      kt.distances_to_columns(X.col(i0 + r).data(), C.data(), d, static_cast<std::size_t>(k), block.row(r).data());
      auto row = block.row(r);
      row *= scale;
      const double m = row.maxCoeff();
      row = (row.array() - m).max(kMinLogGap).exp();
      const double sum = row.sum();
      f += m + std::log(sum);  // the floor changes sum by < k e^-700, below rounding
      row /= sum;
    }
    Z.middleRows(i0, rows) = block;
  }
  if (log_likelihood) *log_likelihood = f;
  return Z;
}

SpanningTree fit_spanning_tree(const Eigen::MatrixXd& C) {
  const Index k = C.cols();
  SpanningTree tree;
  tree.k = k;
  if (k <= 1) return tree;

  struct Edge {
    double cost;
    Index r, s;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(k * (k - 1) / 2));
  const auto d = static_cast<std::size_t>(C.rows());
  const auto& kt = kernels::active();
  for (Index r = 0; r < k; ++r)
    for (Index s = r + 1; s < k; ++s)
      edges.push_back({kt.squared_distance(C.col(r).data(), C.col(s).data(), d), r, s});
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.cost, a.r, a.s) < std::tie(b.cost, b.r, b.s);
  });

  DisjointSets sets(k);
  tree.edges.reserve(static_cast<std::size_t>(k - 1));
  for (const auto& e : edges) {
    if (sets.unite(e.r, e.s)) {
      tree.edges.emplace_back(e.r, e.s);
      if (static_cast<Index>(tree.edges.size()) == k - 1) break;
    }
  }
  return tree;
}

Eigen::MatrixXd update_centers(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                               const SpanningTree& tree, double lambda1, double* min_pivot) {
  if (X.cols() != Z.rows() || Z.cols() != tree.k)
    throw InvalidArgument("update_centers: shape mismatch");
  Eigen::MatrixXd A = lambda1 * tree.laplacian();
  A.diagonal() += Z.colwise().sum().transpose();
  const SpdFactor factor(A, "update_centers: Xi + lambda1 L");
  if (min_pivot) *min_pivot = factor.min_pivot();
  const Eigen::MatrixXd XZ = X * Z;
  return factor.solve(Eigen::MatrixXd(XZ.transpose())).transpose();
}

double kde_log_likelihood(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, double sigma) {
  double f = 0.0;
  update_assignments(X, C, sigma, &f);
  return f;
}

double joint_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                       const SpanningTree& tree, double sigma, double lambda1) {
  // sum_{r,s} G_rs counts each tree edge twice.
  return kde_log_likelihood(X, C, sigma) - 0.5 * lambda1 * tree.cost(C);
}

HdpModel fit_hdp(const Dataset& ds, const HdpConfig& cfg, const HdpObserver& observer) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  Eigen::MatrixXd C0 = kmeans_init(ds, cfg);
  const double init_seconds = seconds_since(t0);
  HdpModel model = fit_hdp_from(ds, cfg, std::move(C0), observer);
  model.init_seconds = init_seconds;
  return model;
}

HdpModel fit_hdp_from(const Dataset& ds, const HdpConfig& cfg, Eigen::MatrixXd initial_centers,
                      const HdpObserver& observer) {
  validate(cfg);
  const Eigen::MatrixXd& X = ds.features;
  if (initial_centers.rows() != X.rows() || initial_centers.cols() != cfg.k)
    throw InvalidArgument("fit_hdp: initial centers have the wrong shape");
  const auto t0 = std::chrono::steady_clock::now();

  HdpModel model;
  model.config = cfg;
  model.C = std::move(initial_centers);
  double loglik = 0.0;
  Eigen::MatrixXd Z = update_assignments(X, model.C, cfg.sigma, &loglik);
  model.tree = fit_spanning_tree(model.C);
  // sum_{r,s} G_rs counts each tree edge twice.
  model.objective_trace.push_back(loglik - 0.5 * cfg.lambda1 * model.tree.cost(model.C));

  for (int it = 0; it < cfg.max_outer_iters; ++it) {
    double min_pivot = 0.0;
    Eigen::MatrixXd C_new = update_centers(X, Z, model.tree, cfg.lambda1, &min_pivot);
    const double base = model.C.norm();
    const double change = (C_new - model.C).norm() / (base > 0.0 ? base : 1.0);
    model.C = std::move(C_new);
    Z = update_assignments(X, model.C, cfg.sigma, &loglik);
    model.tree = fit_spanning_tree(model.C);
    const double obj = loglik - 0.5 * cfg.lambda1 * model.tree.cost(model.C);
    model.objective_trace.push_back(obj);
    model.iterations = it + 1;
    if (observer) observer(HdpIterate{it + 1, model.C, Z, model.tree, obj, min_pivot, change});
    if (change < cfg.tol) {
      model.converged = true;
      break;
    }
  }
  model.Z = std::make_shared<const Eigen::MatrixXd>(std::move(Z));
  model.fit_seconds = seconds_since(t0);
  return model;
}

}  // namespace hidegl
