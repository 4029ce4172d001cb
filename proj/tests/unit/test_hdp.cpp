#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "hidegl/error.hpp"
#include "hidegl/hdp.hpp"
#include "oracles.hpp"

using namespace hidegl;

TEST_CASE("k-means finds two separated blobs") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.1);
  Eigen::MatrixXd X(2, 200);
  for (Index i = 0; i < 200; ++i) {
    const double cx = i < 100 ? -3.0 : 3.0;
    X(0, i) = cx + g(rng);
    X(1, i) = g(rng);
  }
  const KMeansResult r = kmeans(X, 2, {100, 3, 9});
  Eigen::Vector2d a = r.centers.col(0), b = r.centers.col(1);
  if (a(0) > b(0)) std::swap(a, b);
  CHECK((a - Eigen::Vector2d(-3, 0)).norm() < 0.3);
  CHECK((b - Eigen::Vector2d(3, 0)).norm() < 0.3);
  const KMeansResult again = kmeans(X, 2, {100, 3, 9});
  CHECK(again.centers == r.centers);
  CHECK_THROWS_AS(kmeans(X, 201, {}), InvalidArgument);
}

TEST_CASE("k-means tolerates duplicate points") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(3, 10);
  X.col(9).setConstant(1.0);
  const KMeansResult r = kmeans(X, 3, {20, 2, 0});
  CHECK(r.centers.allFinite());
  CHECK(r.sse == doctest::Approx(0.0));
}

TEST_CASE("assignments are row-stochastic, positive and match the naive formula") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(3, 30), C = Eigen::MatrixXd::Random(3, 5);
  const Eigen::MatrixXd Z = update_assignments(X, C, 0.7);
  CHECK((Z.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK((Z - oracle::assignments_naive(X, C, 0.7)).cwiseAbs().maxCoeff() <= 1e-13);

  // tiny sigma: naive exponentials underflow, the stabilized ones stay positive
  const Eigen::MatrixXd Zs = update_assignments(X * 100.0, C * 100.0, 1e-3);
  CHECK(Zs.minCoeff() > 0.0);
  CHECK((Zs.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("Kruskal matches exhaustive enumeration") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) {
    const Index k = 3 + t % 5;
    const Eigen::MatrixXd C = Eigen::MatrixXd::Random(2, k);
    const SpanningTree tree = fit_spanning_tree(C);
    CHECK(tree.is_spanning_tree());
    CHECK(oracle::edge_cost(C, tree.edges) == oracle::brute_force_mst_cost(C));
  }
}

TEST_CASE("Kruskal breaks ties lexicographically") {
  // unit square: four edges of cost 1, diagonals cost 2
  Eigen::MatrixXd C(2, 4);
  C << 0, 1, 0, 1, 0, 0, 1, 1;
  const SpanningTree t = fit_spanning_tree(C);
  const std::vector<std::pair<Index, Index>> expect{{0, 1}, {0, 2}, {1, 3}};
  CHECK(t.edges == expect);
}

TEST_CASE("tree helpers") {
  SpanningTree t{4, {{0, 1}, {1, 2}, {1, 3}}};
  CHECK(t.is_spanning_tree());
  CHECK(t.degrees() == Eigen::Vector4d(1, 3, 1, 1));
  CHECK(t.laplacian().rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
  Eigen::VectorXd out;
  t.apply_adjacency(Eigen::Vector4d(1, 2, 3, 4), out);
  CHECK(out == Eigen::Vector4d(2, 8, 2, 2));
  SpanningTree cyc{4, {{0, 1}, {1, 2}, {0, 2}}};
  CHECK_FALSE(cyc.is_spanning_tree());
}

TEST_CASE("center update matches the dense inverse and reduces to the weighted mean") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 40);
  const Eigen::MatrixXd C0 = Eigen::MatrixXd::Random(4, 6);
  const Eigen::MatrixXd Z = update_assignments(X, C0, 0.8);
  const SpanningTree tree = fit_spanning_tree(C0);
  for (double lambda1 : {0.0, 0.1, 1.0, 100.0}) {
    double pivot = 0.0;
    const Eigen::MatrixXd C = update_centers(X, Z, tree, lambda1, &pivot);
    const Eigen::MatrixXd ref = oracle::centers_dense(X, Z, oracle::tree_adjacency(tree.k, tree.edges), lambda1);
    CHECK((C - ref).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(pivot > 0.0);
  }
  const Eigen::MatrixXd C = update_centers(X, Z, tree, 0.0);
  for (Index s = 0; s < 6; ++s) {
    const Eigen::VectorXd mean = X * Z.col(s) / Z.col(s).sum();
    CHECK((C.col(s) - mean).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("fit_hdp invariants on three-moon") {
  const Dataset ds = gen_three_moon({100, 2, 0.05, 3});
  HdpConfig cfg;
  cfg.k = 30;
  cfg.sigma = 0.2;
  cfg.lambda1 = 1.0;
  cfg.max_outer_iters = 30;
  int calls = 0;
  const HdpModel m = fit_hdp(ds, cfg, [&](const HdpIterate& it) {
    ++calls;
    CHECK(it.iteration == calls);
    CHECK((it.Z.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(it.tree.is_spanning_tree());
    CHECK(it.min_pivot > 0.0);
  });
  CHECK(calls == m.iterations);
  CHECK(m.objective_trace.size() == static_cast<std::size_t>(m.iterations) + 1);
  for (std::size_t t = 1; t < m.objective_trace.size(); ++t)
    CHECK(m.objective_trace[t] >= m.objective_trace[t - 1] - 1e-8 * std::abs(m.objective_trace[t - 1]));
  CHECK(m.tree.is_spanning_tree());
  CHECK(m.Z->minCoeff() > 0.0);

  if (m.converged) {
    // one more outer step moves C by less than tol ||C||
    const Eigen::MatrixXd C1 = update_centers(ds.features, *m.Z, m.tree, cfg.lambda1);
    CHECK((C1 - m.C).norm() < cfg.tol * m.C.norm());
  }
}

TEST_CASE("max_outer_iters = 0 returns the k-means start") {
  const Dataset ds = gen_three_moon({30, 2, 0.05, 1});
  HdpConfig cfg;
  cfg.k = 8;
  cfg.max_outer_iters = 0;
  const HdpModel m = fit_hdp(ds, cfg);
  CHECK(m.iterations == 0);
  CHECK(m.C == kmeans_init(ds, cfg));
  CHECK(m.objective_trace.size() == 1);
  CHECK(m.tree.is_spanning_tree());
}

TEST_CASE("invalid configurations are rejected") {
  HdpConfig cfg;
  cfg.sigma = 0.0;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  cfg = {};
  cfg.lambda1 = -1.0;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
}

TEST_CASE("three-moon high-dense points form a tree along the arcs") {
  const Dataset ds = gen_three_moon({});
  HdpConfig cfg;
  cfg.k = 100;
  cfg.sigma = 0.2;
  cfg.lambda1 = 10.0;
  const HdpModel m = fit_hdp(ds, cfg);
  REQUIRE(m.tree.is_spanning_tree());
  for (auto [r, s] : m.tree.edges) {
    CAPTURE(r);
    CAPTURE(s);
    CHECK((m.C.col(r).head(2) - m.C.col(s).head(2)).norm() < 1.0);
  }
}
