#pragma once

// High-dense point learning: a Gaussian KDE over k learned centers whose log-likelihood is
// maximized jointly with a minimum spanning tree penalty over the centers.
//
//   maximize  sum_i log sum_s exp(-||x_i - c_s||^2 / 2 sigma^2)
//             - lambda1/4 sum_{r,s} G_rs ||c_r - c_s||^2
//
// solved by alternating Kruskal for G, the soft-assignment fixed point for Z and the closed-form
// center update C = X Z (Xi + lambda1 L)^{-1}.

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hidegl/dataset.hpp"

namespace hidegl {

struct KMeansOptions {
  int max_iters = 100;
  int n_restarts = 3;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  Eigen::MatrixXd centers;  // d x k
  std::vector<int> assignment;
  double sse = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding; best of n_restarts by SSE. Empty clusters are
/// re-seeded with the point farthest from its current center.
KMeansResult kmeans(const Eigen::MatrixXd& X, Index k, const KMeansOptions& opts);

struct HdpConfig {
  Index k = 200;
  double sigma = 0.1;
  double lambda1 = 1.0;
  int max_outer_iters = 50;
  double tol = 1e-4;
  KMeansOptions kmeans;
};

void validate(const HdpConfig& cfg);

/// Undirected tree over k vertices stored as an edge list with r < s.
struct SpanningTree {
  Index k = 0;
  std::vector<std::pair<Index, Index>> edges;

  Eigen::MatrixXd adjacency() const;
  Eigen::VectorXd degrees() const;
  /// diag(G 1) - G
  Eigen::MatrixXd laplacian() const;
  /// out = G v
  void apply_adjacency(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  /// sum over edges of ||c_r - c_s||^2
  double cost(const Eigen::MatrixXd& C) const;
  /// k - 1 distinct edges that connect all vertices.
  bool is_spanning_tree() const;
};

struct HdpModel {
  Eigen::MatrixXd C;                       // d x k high-dense points
  std::shared_ptr<const Eigen::MatrixXd> Z;  // n x k, rows strictly positive, sum to 1
  SpanningTree tree;                       // minimum spanning tree of C
  std::vector<double> objective_trace;     // joint objective at init and after each iteration
  int iterations = 0;
  bool converged = false;
  HdpConfig config;
  double init_seconds = 0.0;  // k-means
  double fit_seconds = 0.0;   // alternating loop only

  Index n() const noexcept { return Z ? Z->rows() : 0; }
  Index k() const noexcept { return C.cols(); }
};

/// k-means centers used to start the alternating loop.
Eigen::MatrixXd kmeans_init(const Dataset& ds, const HdpConfig& cfg);

/// Row-stochastic Z(i, s) proportional to exp(-||x_i - c_s||^2 / 2 sigma^2), stabilized by
/// subtracting the row maximum. Exponent gaps are floored at -700 so every entry stays a
/// positive normal double. log_likelihood, when given, receives the KDE log-likelihood of C.
Eigen::MatrixXd update_assignments(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, double sigma,
                                   double* log_likelihood = nullptr);

/// Kruskal on the complete graph with squared Euclidean edge costs; ties go to the
/// lexicographically smaller (r, s).
SpanningTree fit_spanning_tree(const Eigen::MatrixXd& C);

/// C = X Z (Xi + lambda1 L)^{-1}, Xi = diag(Z^T 1), L the tree Laplacian, through a Cholesky
/// factorization. min_pivot, when given, receives the smallest pivot.
Eigen::MatrixXd update_centers(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                               const SpanningTree& tree, double lambda1,
                               double* min_pivot = nullptr);

/// sum_i log sum_s exp(-||x_i - c_s||^2 / 2 sigma^2)
double kde_log_likelihood(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, double sigma);

double joint_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                       const SpanningTree& tree, double sigma, double lambda1);

/// State after each outer iteration, for monitoring.
struct HdpIterate {
  int iteration;
  const Eigen::MatrixXd& C;
  const Eigen::MatrixXd& Z;
  const SpanningTree& tree;
  double objective;
  double min_pivot;
  double relative_change;
};
using HdpObserver = std::function<void(const HdpIterate&)>;

HdpModel fit_hdp(const Dataset& ds, const HdpConfig& cfg, const HdpObserver& observer = {});

/// Same loop from caller-supplied initial centers (e.g. a cached k-means result).
HdpModel fit_hdp_from(const Dataset& ds, const HdpConfig& cfg, Eigen::MatrixXd initial_centers,
                      const HdpObserver& observer = {});

}  // namespace hidegl
