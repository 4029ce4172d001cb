#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "hidegl/error.hpp"
#include "hidegl/hdp.hpp"
#include "hidegl/kernels.hpp"

namespace hidegl {
namespace {

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& X, Index k, std::mt19937_64& rng) {
  const Index n = X.cols();
  const auto d = static_cast<std::size_t>(X.rows());
  const auto& kt = kernels::active();
  Eigen::MatrixXd centers(X.rows(), k);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);

  std::uniform_int_distribution<Index> first(0, n - 1);
  Index pick = first(rng);
  centers.col(0) = X.col(pick);
  chosen[static_cast<std::size_t>(pick)] = 1;

  Eigen::VectorXd dist2(n);
  for (Index i = 0; i < n; ++i) dist2(i) = kt.squared_distance(X.col(i).data(), X.col(pick).data(), d);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index c = 1; c < k; ++c) {
    const double total = dist2.sum();
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += dist2(i);
        if (acc > target && dist2(i) > 0.0) {
          pick = i;
          break;
        }
      }
      while (dist2(pick) == 0.0 && pick > 0) --pick;  // roundoff at the tail
    } else {
      // Every remaining point duplicates a center; take the first unused one.
      pick = 0;
      while (pick < n && chosen[static_cast<std::size_t>(pick)]) ++pick;
      if (pick == n) pick = 0;
    }
    chosen[static_cast<std::size_t>(pick)] = 1;
    centers.col(c) = X.col(pick);
    for (Index i = 0; i < n; ++i)
      dist2(i) = std::min(dist2(i), kt.squared_distance(X.col(i).data(), X.col(pick).data(), d));
  }
  return centers;
}

KMeansResult lloyd(const Eigen::MatrixXd& X, Eigen::MatrixXd centers, int max_iters) {
  const Index n = X.cols();
  const Index k = centers.cols();
  KMeansResult res;
  res.assignment.assign(static_cast<std::size_t>(n), -1);
  kernels::RowMatrix D;
  Eigen::VectorXd best(n);

  auto assign = [&]() {
    kernels::pairwise_squared_distances(X, centers, D);
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index arg = 0;
      best(i) = D.row(i).minCoeff(&arg);
      if (res.assignment[static_cast<std::size_t>(i)] != static_cast<int>(arg)) {
        res.assignment[static_cast<std::size_t>(i)] = static_cast<int>(arg);
        changed = true;
      }
    }
    return changed;
  };

  assign();
  for (int it = 0; it < max_iters; ++it) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(X.rows(), k);
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const int a = res.assignment[static_cast<std::size_t>(i)];
      sums.col(a) += X.col(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Index far = 0;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (!taken[static_cast<std::size_t>(i)] && best(i) > far_d) {
          far_d = best(i);
          far = i;
        }
      }
      taken[static_cast<std::size_t>(far)] = 1;
      best(far) = 0.0;
      centers.col(c) = X.col(far);
    }
    if (!assign()) break;
  }
  res.sse = best.sum();
  res.centers = std::move(centers);
  return res;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& X, Index k, const KMeansOptions& opts) {
  const Index n = X.cols();
  if (k < 1) throw InvalidArgument("k-means: k must be >= 1");
  if (k > n) throw InvalidArgument("k-means: k must not exceed n");
  std::mt19937_64 rng(opts.seed);
  KMeansResult best;
  best.sse = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, opts.n_restarts);
  for (int r = 0; r < restarts; ++r) {
    auto res = lloyd(X, seed_plus_plus(X, k, rng), opts.max_iters);
    if (res.sse < best.sse) best = std::move(res);
  }
  return best;
}

Eigen::MatrixXd kmeans_init(const Dataset& ds, const HdpConfig& cfg) {
  if (cfg.k > ds.n()) throw InvalidArgument("kmeans_init: k must not exceed n");
  return kmeans(ds.features, cfg.k, cfg.kmeans).centers;
}

}  // namespace hidegl
