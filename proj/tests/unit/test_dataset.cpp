#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "hidegl/dataset.hpp"
#include "hidegl/error.hpp"

using namespace hidegl;

#ifndef HIDEGL_FIXTURE_DIR
#error "HIDEGL_FIXTURE_DIR must be defined"
#endif

TEST_CASE("LIBSVM fixture with classes 1, 2, 7") {
  const Dataset ds = load_libsvm(std::string(HIDEGL_FIXTURE_DIR) + "/three_class.libsvm");
  CHECK(ds.n() == 6);
  CHECK(ds.d() == 4);
  REQUIRE(ds.c() == 3);
  CHECK(ds.class_names == std::vector<std::string>{"1", "2", "7"});
  CHECK(ds.labels == std::vector<int>{2, 0, 1, 0, 2, 1});
  CHECK(ds.features(0, 0) == 0.5);
  CHECK(ds.features(2, 0) == -1.25);
  CHECK(ds.features(1, 0) == 0.0);
  CHECK(ds.features(3, 3) == 3.5);
  CHECK(ds.features(1, 5) == -0.2);
}

TEST_CASE("LIBSVM errors carry line numbers") {
  std::istringstream bad("1 1:0.5\n2 1:x\n");
  try {
    parse_libsvm(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream unsorted("1 2:1 1:1\n");
  CHECK_THROWS_AS(parse_libsvm(unsorted), ParseError);
  std::istringstream empty("# nothing\n\n");
  try {
    parse_libsvm(empty);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 0);
  }
}

TEST_CASE("LIBSVM and CSV round trips preserve numeric content") {
  const Dataset ds = gen_three_moon({7, 5, 0.3, 11});
  std::stringstream s1;
  write_libsvm(ds, s1);
  const Dataset back = parse_libsvm(s1);
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  std::stringstream s2;
  write_libsvm(back, s2);
  CHECK(s2.str() == s1.str());

  std::stringstream c1;
  write_csv(ds, c1, true);
  const Dataset csv = parse_csv(c1);
  CHECK(csv.features == ds.features);
  CHECK(csv.labels == ds.labels);
}

TEST_CASE("CSV rejects ragged rows") {
  std::istringstream in("0,1,2\n1,3\n");
  CHECK_THROWS_AS(parse_csv(in), ParseError);
}

TEST_CASE("three-moon geometry without noise") {
  const Dataset ds = gen_three_moon({200, 6, 0.0, 5});
  REQUIRE(ds.n() == 600);
  REQUIRE(ds.d() == 6);
  for (Index i = 0; i < ds.n(); ++i) {
    const double x = ds.features(0, i), y = ds.features(1, i);
    CHECK(ds.features.col(i).tail(4).norm() == 0.0);
    switch (ds.labels[static_cast<std::size_t>(i)]) {
      case 0:
        CHECK(std::hypot(x - 1.5, y - 0.4) == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(y >= 0.4 - 1e-12);
        break;
      case 1:
        CHECK(std::hypot(x, y) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(y <= 1e-12);
        break;
      default:
        CHECK(std::hypot(x - 3.0, y) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(y <= 1e-12);
    }
  }
}

TEST_CASE("three-moon defaults, noise level and determinism") {
  const ThreeMoonSpec spec;
  CHECK(spec.n_per_class == 500);
  CHECK(spec.ambient_dim == 100);
  CHECK(spec.noise_sd == 0.14);
  const Dataset a = gen_three_moon(spec), b = gen_three_moon(spec);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.n() == 1500);
  // padded dimensions hold pure noise
  const Eigen::MatrixXd pad = a.features.bottomRows(98);
  const double sd = std::sqrt(pad.array().square().mean());
  CHECK(sd == doctest::Approx(0.14).epsilon(0.02));
  ThreeMoonSpec other = spec;
  other.seed = 1;
  CHECK(gen_three_moon(other).features != a.features);
}

TEST_CASE("label draws cover every class and are deterministic") {
  const Dataset ds = gen_three_moon({40, 3, 0.1, 2});
  std::set<std::vector<Index>> distinct;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const LabelState s = draw_label_set(ds, 3, seed);
    REQUIRE(s.l() == 3);
    std::set<int> classes;
    for (Index i : s.labeled_idx) classes.insert(ds.labels[static_cast<std::size_t>(i)]);
    CHECK(classes.size() == 3);
    CHECK(std::is_sorted(s.labeled_idx.begin(), s.labeled_idx.end()));
    CHECK(s.labeled_idx.size() + s.unlabeled_idx.size() == static_cast<std::size_t>(ds.n()));
    CHECK(s.Y.sum() == 3.0);
    distinct.insert(s.labeled_idx);
  }
  CHECK(distinct.size() > 90);
  CHECK(draw_label_set(ds, 10, 4).labeled_idx == draw_label_set(ds, 10, 4).labeled_idx);
  CHECK_THROWS_AS(draw_label_set(ds, 2, 0), InvalidArgument);
}

TEST_CASE("make_label_state builds one-hot targets") {
  const Dataset ds = gen_three_moon({5, 2, 0.1, 0});
  const LabelState s = make_label_state(ds, {7, 0, 12});
  CHECK(s.labeled_idx == std::vector<Index>{0, 7, 12});
  CHECK(s.Y(7, ds.labels[7]) == 1.0);
  CHECK(s.Y.row(1).sum() == 0.0);
  CHECK_THROWS_AS(make_label_state(ds, {1, 1}), InvalidArgument);
}
