#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "hidegl/bench.hpp"
#include "hidegl/config.hpp"
#include "hidegl/error.hpp"
#include "hidegl/serialize.hpp"

using namespace hidegl;

namespace {

KeyValueConfig kv_from(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in);
}

RunConfig small_run(Method m) {
  RunConfig cfg;
  cfg.data.threemoon = {40, 4, 0.1, 3};
  cfg.method = m;
  cfg.label_counts = {3, 6};
  cfg.repeats = 3;
  cfg.master_seed = 17;
  cfg.record_timing = false;
  cfg.hp.k = 20;
  cfg.hp.sigma = 0.3;
  cfg.hp.hdp_iters = 10;
  cfg.hp.knn = 5;
  return cfg;
}

// Reference splitmix64 finalizer, written out independently of the library.
std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

TEST_CASE("config parsing, comments and overrides") {
  KeyValueConfig kv = kv_from("# comment\nmethod = lgc  # trailing\n\nsigma=0.5, 1.0\nrepeats = 4\n");
  CHECK(kv.get_string("method", "") == "lgc");
  CHECK(kv.get_doubles("sigma", {}) == std::vector<double>{0.5, 1.0});
  CHECK(kv.get_int("repeats", 0) == 4);
  kv.set("repeats", "7");
  CHECK(kv.get_int("repeats", 0) == 7);
  CHECK_THROWS_AS(kv.get_double("method", 0.0), InvalidArgument);
  CHECK_THROWS_AS(kv_from("novalue\n"), ParseError);
  try {
    kv_from("a = 1\n\nbroken\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("run configs from key-value files") {
  ParamGrid grid;
  const RunConfig cfg =
      run_config_from(kv_from("method = hidegl-a-approx\nlabels = 3, 10\nk = 50\nalpha = 0.1,0.5\n"), &grid);
  CHECK(cfg.method == Method::hidegl_a_approx);
  CHECK(cfg.label_counts == std::vector<Index>{3, 10});
  CHECK(cfg.hp.k == 50);
  REQUIRE(grid.size() == 1);
  CHECK(grid[0].key == "alpha");
  CHECK(grid[0].values == std::vector<double>{0.1, 0.5});
  CHECK_THROWS_AS(run_config_from(kv_from("alpha = 0.1,0.5\n")), UsageError);
  CHECK_THROWS_AS(run_config_from(kv_from("alhpa = 0.1\n")), UsageError);
  CHECK_THROWS_AS(run_config_from(kv_from("method = svm\n")), UsageError);
  CHECK_THROWS_AS(run_config_from(kv_from("k = 2.5\n")), InvalidArgument);
}

TEST_CASE("method and hyperparameter mismatches are usage errors") {
  RunConfig cfg = small_run(Method::hidegl_l_approx);
  cfg.set_keys = {"mu"};
  CHECK_THROWS_AS(validate(cfg), UsageError);
  cfg.method = Method::hidegl_a_approx;
  cfg.set_keys = {"cg_tol"};
  CHECK_THROWS_AS(validate(cfg), UsageError);
  cfg.set_keys = {"alpha"};
  cfg.hp.alpha = 1.0;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  cfg.hp.alpha = 0.5;
  CHECK_NOTHROW(validate(cfg));
  cfg.repeats = 0;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  // rejected before any data is generated or fitted
  RunConfig lgc = small_run(Method::lgc);
  lgc.set_keys = {"lambda1"};
  CHECK_THROWS_AS(run_bench(lgc), UsageError);
}

TEST_CASE("seed derivation is a stable hash of (master, l, r)") {
  const std::uint64_t expect = splitmix(splitmix(splitmix(splitmix(5) ^ splitmix(0x6c6162656cULL)) ^ splitmix(3)) ^
                                        splitmix(2));
  CHECK(label_seed(5, 3, 2) == expect);
  CHECK(label_seed(5, 3, 2) != label_seed(5, 3, 1));
  CHECK(label_seed(5, 3, 2) != label_seed(5, 10, 2));
  CHECK(init_seed(5) != init_seed(6));
}

TEST_CASE("bench runs are deterministic for every method") {
  for (Method m : {Method::hidegl_l_accurate, Method::hidegl_l_approx, Method::hidegl_a_accurate,
                   Method::hidegl_a_approx, Method::lgc, Method::agr_gauss, Method::agr_lae}) {
    CAPTURE(method_id(m));
    const RunConfig cfg = small_run(m);
    const BenchReport a = run_bench(cfg), b = run_bench(cfg);
    CHECK(report_to_json(a) == report_to_json(b));
    REQUIRE(a.entries.size() == 2);
    for (const auto& e : a.entries) {
      CHECK(e.accuracies.size() == 3);
      CHECK(e.sd >= 0.0);
      for (double acc : e.accuracies) CHECK((acc >= 0.0 && acc <= 100.0));
    }
    CHECK(a.entries[0].seeds[1] == label_seed(17, 3, 1));
  }
}

TEST_CASE("timing fields are positive and exclude nothing but initialization") {
  RunConfig cfg = small_run(Method::hidegl_l_approx);
  cfg.record_timing = true;
  const BenchReport r = run_bench(cfg);
  CHECK(r.graph_seconds > 0.0);
  for (const auto& e : r.entries)
    for (double s : e.seconds) CHECK(s >= r.graph_seconds);
}

TEST_CASE("single test point gives 0 or 100") {
  Dataset ds;
  ds.features.resize(2, 4);
  ds.features << 0, 0.1, 5, 5.1, 0, 0, 0, 0;
  ds.labels = {0, 0, 1, 1};
  ds.class_names = {"a", "b"};
  BenchSession session(ds, "four");
  RunConfig cfg = small_run(Method::agr_gauss);
  cfg.label_counts = {3};
  cfg.repeats = 1;
  cfg.hp.k = 2;
  cfg.hp.s_hat = 1;
  const BenchReport r = session.run(cfg);
  const double acc = r.entries[0].accuracies[0];
  CHECK((acc == 0.0 || acc == 100.0));
}

TEST_CASE("reports round-trip through JSON and render as CSV") {
  RunConfig cfg = small_run(Method::agr_gauss);
  cfg.record_timing = true;
  const BenchReport r = run_bench(cfg);
  CHECK(report_from_json(report_to_json(r)) == r);
  std::ostringstream csv;
  write_report_csv(r, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("method,l,mean,sd,time_mean,time_sd\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK_THROWS_AS(report_from_json("{\"method\": 1}"), ParseError);
}

TEST_CASE("grid search semantics") {
  BenchSession session(load_run_dataset(small_run(Method::hidegl_l_approx).data), "tm");
  const RunConfig base = small_run(Method::hidegl_l_approx);

  const GridResult single = grid_search(session, base, {{"alpha", {0.3}}});
  CHECK(single.best.hp.alpha == 0.3);
  CHECK(single.cells.size() == 1);

  // a degenerate bandwidth collapses every assignment row onto its nearest center
  const GridResult two = grid_search(session, base, {{"sigma", {1e-3, 0.3}}});
  CHECK(two.best.hp.sigma == 0.3);
  CHECK(two.cells[1].mean_accuracy > two.cells[0].mean_accuracy);

  const GridResult multi = grid_search(session, base, {{"alpha", {0.2, 0.8}}, {"eta", {0.1, 1.0}}});
  REQUIRE(multi.cells.size() == 4);
  CHECK(multi.cells[1].values == std::vector<double>{0.2, 1.0});
  CHECK(run_bench(multi.best).mean_accuracy() == multi.report.mean_accuracy());
  double best = -1;
  std::size_t first = 0;
  for (std::size_t i = 0; i < multi.cells.size(); ++i)
    if (multi.cells[i].mean_accuracy > best) best = multi.cells[i].mean_accuracy, first = i;
  CHECK(get_hyper(multi.best.hp, "alpha") == multi.cells[first].values[0]);
  CHECK(get_hyper(multi.best.hp, "eta") == multi.cells[first].values[1]);

  CHECK_THROWS_AS(grid_search(session, base, {{"alpha", {}}}), UsageError);
  CHECK_THROWS_AS(grid_search(session, base, {{"mu", {0.1}}}), UsageError);
  CHECK_THROWS_AS(grid_search(session, base, {{"alpha", {0.5, 1.5}}}), InvalidArgument);
}

TEST_CASE("model and factor bundles round-trip") {
  const Dataset ds = gen_three_moon({20, 3, 0.1, 1});
  HdpConfig cfg;
  cfg.k = 6;
  cfg.max_outer_iters = 5;
  const HdpModel m = fit_hdp(ds, cfg);
  std::stringstream buf;
  write_model(m, buf);
  const HdpModel back = read_model(buf);
  CHECK(back.C == m.C);
  CHECK(*back.Z == *m.Z);
  CHECK(back.tree.edges == m.tree.edges);
  CHECK(back.objective_trace == m.objective_trace);
  CHECK(back.config.sigma == m.config.sigma);

  std::stringstream fb;
  write_factor_bundle({m, 0.4, 0.2, GraphVariant::approx}, fb);
  const FactorBundle f = read_factor_bundle(fb);
  const GraphFactor g1 = f.build(), g2 = build_approx_factor(m, 0.4, 0.2);
  const Eigen::VectorXd v = Eigen::VectorXd::Random(ds.n());
  CHECK(g1.apply(v) == g2.apply(v));

  std::stringstream junk("not a bundle");
  CHECK_THROWS_AS(read_model(junk), ParseError);
  std::stringstream truncated(buf.str().substr(0, 40));
  CHECK_THROWS_AS(read_model(truncated), ParseError);
}

TEST_CASE("prediction serialization") {
  Prediction p;
  p.indices = {1, 4};
  p.F_u.resize(2, 2);
  p.F_u << 0.2, 0.7, 0.9, 0.1;
  p.labels_u = {1, 0};
  std::ostringstream out;
  write_prediction_csv(p, out);
  CHECK(out.str() == "index,predicted_class,max_score\n1,1,0.69999999999999996\n4,0,0.90000000000000002\n");
  CHECK(prediction_to_json(p).find("solver_stats") != std::string::npos);
}
