#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "hidegl/error.hpp"
#include "hidegl/graph.hpp"
#include "oracles.hpp"

using namespace hidegl;

namespace {

double rel_frob(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("exact and approximate W match the dense constructions") {
  for (const auto& c : fixture::graph_cases(20, 101)) {
    const Eigen::MatrixXd G = oracle::tree_adjacency(c.tree.k, c.tree.edges);
    const Eigen::MatrixXd We = dense_w(build_factor(c.Z, c.tree, c.alpha, c.eta, GraphVariant::exact));
    CHECK(rel_frob(We, oracle::exact_w(*c.Z, G, c.alpha, c.eta)) <= 1e-10);
    const Eigen::MatrixXd Wa = dense_w(build_factor(c.Z, c.tree, c.alpha, c.eta, GraphVariant::approx));
    CHECK((Wa - oracle::approx_w(*c.Z, G, c.alpha, c.eta)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("operator-level symmetry, nonnegativity and row-sum bounds") {
  std::mt19937_64 rng(8);
  for (const auto& c : fixture::graph_cases(12, 55)) {
    for (auto variant : {GraphVariant::exact, GraphVariant::approx}) {
      const GraphFactor f = build_factor(c.Z, c.tree, c.alpha, c.eta, variant);
      const Eigen::MatrixXd W = dense_w(f);
      const double wnorm = W.norm();
      for (int t = 0; t < 5; ++t) {
        std::uniform_int_distribution<Index> pick(0, f.n() - 1);
        const Index i = pick(rng), j = pick(rng);
        const Eigen::VectorXd wi = apply_w(f, Eigen::VectorXd::Unit(f.n(), i));
        const Eigen::VectorXd wj = apply_w(f, Eigen::VectorXd::Unit(f.n(), j));
        CHECK(std::abs(wi(j) - wj(i)) <= 1e-10 * wnorm);
      }
      const Eigen::VectorXd v = Eigen::VectorXd::Random(f.n()).cwiseAbs();
      CHECK(apply_w(f, v).minCoeff() >= -1e-10);

      const RowSumReport rs = row_sums(f);
      CHECK(rs.within_bounds);
      CHECK(rs.min >= -1e-10);
      const double bound = variant == GraphVariant::exact ? 1.0 / (1.0 - c.alpha) : 1.0 + c.alpha;
      CHECK(rs.upper_bound == doctest::Approx(bound));
      CHECK(rs.max <= bound + 1e-8);
      CHECK((f.degrees() - W.rowwise().sum()).cwiseAbs().maxCoeff() <= 1e-12);

      // block apply agrees with column-by-column apply
      const Eigen::MatrixXd V = Eigen::MatrixXd::Random(f.n(), 3);
      CHECK((f.apply(V) - W * V).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("alpha = 0, eta = 0 is the anchor graph") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd Z = oracle::random_stochastic(30, 6, rng);
    CHECK(anchor_graph_equivalence_check(Z).max_abs_diff <= 1e-13);
    const GraphFactor f = build_anchor_factor(std::make_shared<const Eigen::MatrixXd>(Z));
    const Eigen::MatrixXd W = dense_w(f);
    CHECK((W.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    // the anchor Laplacian is I - W
    Eigen::MatrixXd L = -W;
    L.diagonal() += f.degrees();
    Eigen::MatrixXd IW = -W;
    IW.diagonal().array() += 1.0;
    CHECK((L - IW).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("spectral diagnostics pass on random fixtures") {
  for (const auto& c : fixture::graph_cases(9, 303)) {
    for (auto variant : {GraphVariant::exact, GraphVariant::approx}) {
      const SpectralReport r = spectral_diagnostics(build_factor(c.Z, c.tree, c.alpha, c.eta, variant));
      CHECK(r.p_ok);
      CHECK(r.ptilde_ok);
      CHECK(r.commutation_ok);
      CHECK(r.w_ok);
      CHECK(r.p_max_imag <= 1e-8);
      CHECK(r.p_min_eig >= -1 - 1e-8);
      CHECK(r.p_max_eig <= 1 + 1e-8);
      CHECK(r.ptilde_margin > 0.0);
      CHECK(r.laplacian_min_eig >= -1e-10);
      CHECK(r.laplacian_max_eig <= r.laplacian_bound + 1e-8);
    }
  }
}

TEST_CASE("builders validate their inputs") {
  std::mt19937_64 rng(1);
  auto Z = std::make_shared<const Eigen::MatrixXd>(oracle::random_stochastic(10, 3, rng));
  SpanningTree tree{3, {{0, 1}, {1, 2}}};
  CHECK_THROWS_AS(build_factor(Z, tree, 0.0, 0.1, GraphVariant::exact), InvalidArgument);
  CHECK_THROWS_AS(build_factor(Z, tree, 1.0, 0.1, GraphVariant::approx), InvalidArgument);
  CHECK_THROWS_AS(build_factor(Z, tree, 0.5, -1.0, GraphVariant::exact), InvalidArgument);
  SpanningTree wrong{4, {{0, 1}, {1, 2}, {2, 3}}};
  CHECK_THROWS_AS(build_factor(Z, wrong, 0.5, 0.1, GraphVariant::exact), InvalidArgument);
  Eigen::MatrixXd dead = *Z;
  dead.col(2).setZero();
  CHECK_THROWS_AS(build_factor(std::make_shared<const Eigen::MatrixXd>(dead), tree, 0.5, 0.0, GraphVariant::exact),
                  InvalidArgument);
}

TEST_CASE("dense paths respect the cap") {
  std::mt19937_64 rng(3);
  auto Z = std::make_shared<const Eigen::MatrixXd>(oracle::random_stochastic(kDenseCap + 1, 2, rng));
  const GraphFactor f = build_factor(Z, SpanningTree{2, {{0, 1}}}, 0.5, 0.1, GraphVariant::approx);
  CHECK_THROWS_AS(dense_w(f), CapacityError);
  CHECK_THROWS_AS(spectral_diagnostics(f), CapacityError);
  CHECK(apply_w(f, Eigen::VectorXd::Ones(f.n())).size() == f.n());
}
