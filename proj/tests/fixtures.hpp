#pragma once

// Shared random fixtures for graph and solver checks.

#include <memory>
#include <random>
#include <vector>

#include "hidegl/dataset.hpp"
#include "hidegl/graph.hpp"
#include "hidegl/hdp.hpp"
#include "oracles.hpp"

namespace fixture {

struct GraphCase {
  std::shared_ptr<const Eigen::MatrixXd> Z;
  hidegl::SpanningTree tree;
  double alpha = 0.5;
  double eta = 0.1;
};

/// count cases with n <= 50, k <= 8, alpha in {0.1, 0.5, 0.9}, eta in {0, 0.1, 1}.
inline std::vector<GraphCase> graph_cases(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double alphas[] = {0.1, 0.5, 0.9};
  const double etas[] = {0.0, 0.1, 1.0};
  std::vector<GraphCase> out;
  for (int t = 0; t < count; ++t) {
    std::uniform_int_distribution<Eigen::Index> pn(10, 50), pk(2, 8);
    const Eigen::Index n = pn(rng), k = pk(rng);
    GraphCase c;
    c.Z = std::make_shared<const Eigen::MatrixXd>(oracle::random_stochastic(n, k, rng));
    c.tree.k = k;
    for (auto [r, s] : oracle::random_tree(k, rng)) c.tree.edges.emplace_back(std::min(r, s), std::max(r, s));
    c.alpha = alphas[t % 3];
    c.eta = etas[(t / 3) % 3];
    out.push_back(std::move(c));
  }
  return out;
}

/// Small labeled problem: Z from soft assignment of three-moon points to k-means centers.
struct SolverCase {
  hidegl::Dataset ds;
  std::shared_ptr<const Eigen::MatrixXd> Z;
  hidegl::SpanningTree tree;
  hidegl::LabelState labels;
};

inline SolverCase solver_case(Eigen::Index n_per_class, Eigen::Index k, Eigen::Index l, std::uint64_t seed) {
  SolverCase c;
  c.ds = hidegl::gen_three_moon({n_per_class, 4, 0.1, seed});
  hidegl::KMeansOptions opts{50, 1, seed};
  const Eigen::MatrixXd C = hidegl::kmeans(c.ds.features, k, opts).centers;
  c.Z = std::make_shared<const Eigen::MatrixXd>(hidegl::update_assignments(c.ds.features, C, 0.5));
  c.tree = hidegl::fit_spanning_tree(C);
  c.labels = hidegl::draw_label_set(c.ds, l, seed + 1);
  return c;
}

}  // namespace fixture
