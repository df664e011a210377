#include <algorithm>
#include <cmath>
#include <random>

#include "core/models.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace omh;

TEST_CASE("catalog lists the seven models with their knobs") {
  auto cat = catalog();
  REQUIRE(cat.size() == 7);
  std::vector<std::string> ids;
  for (const auto& m : cat) ids.push_back(m.id);
  for (const char* want : {"constant-b", "undulator", "cyl-case1", "cyl-case2",
                           "cyl-case3", "family-a", "family-b"})
    CHECK(std::find(ids.begin(), ids.end(), want) != ids.end());
  CHECK(cat[0].gauges.size() == 3);
  CHECK(cat[1].params.size() == 2);
  CHECK(cat[5].slots.size() == 6);
}

TEST_CASE("configuration errors are specific and early") {
  CHECK_THROWS_AS(make_model("nope"), ConfigError);
  CHECK_THROWS_AS(make_model("constant-b", {{"zz", 1.0}}), ConfigError);
  CHECK_THROWS_AS(make_model("constant-b", {}, {{"Aphi", "r"}}), ConfigError);
  CHECK_THROWS_AS(make_model("constant-b", {}, {}, "coulomb"), ConfigError);
  CHECK_THROWS_AS(make_model("cyl-case1", {}, {}, "symmetric"), ConfigError);
  CHECK_THROWS_AS(make_model("cyl-case1", {}, {{"Qx", "r^2"}}), ConfigError);
  CHECK_THROWS_AS(make_model("cyl-case1", {}, {{"Aphi", "r*(("}}), ConfigError);
  CHECK_THROWS_AS(make_model("cyl-case1", {}, {{"Aphi", "z^2"}}), ConfigError);
  CHECK_THROWS_AS(make_model("undulator", {{"a", 0.0}}), ConfigError);
  CHECK_THROWS_AS(make_model("undulator", {{"b3", 0.0}}), ConfigError);
  CHECK_THROWS_AS(make_model("family-a", {{"b", 0.0}}), ConfigError);
}

TEST_CASE("all three constant-field gauges declare the same field") {
  for (const char* g : {"symmetric", "landau_x", "landau_y"}) {
    ModelSpec m = make_model("constant-b", {{"b", 1.7}}, {}, g);
    std::array<double, 3> q{0.8, -0.4, 0.3};
    auto b = curl(m.sys.chart, m.sys.A, q);
    CHECK(b[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(b[1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(b[2] == doctest::Approx(1.7).epsilon(1e-13));
    Vec6 x{0.8, -0.4, 0.3, 0.2, 0.5, 0.9};
    CHECK(m.b_declared[2]->value(x) == doctest::Approx(1.7));
  }
}

TEST_CASE("zero field degenerates to a free particle and is flagged") {
  ModelSpec m = make_model("constant-b", {{"b", 0.0}});
  CHECK(m.degenerate);
  Vec6 x{0.4, 0.1, -0.2, 0.6, 0.8, 1.0};
  double h = m.sys.H->value(x);
  CHECK(h == doctest::Approx((0.36 + 0.64 + 1.0) / 2).epsilon(1e-14));
}

TEST_CASE("momentum-linear family specializes to the uniform field in a flat slice") {
  std::map<std::string, std::string> fns{{"lam1", "2*y"}, {"lam2", "1"},
                                         {"mu1", "1"},    {"mu2", "1"},
                                         {"mu3", "1"},    {"mu4", "y^2"}};
  ModelSpec fam = make_model("family-a", {{"b", 1.0}}, fns);
  ModelSpec cb = make_model("constant-b", {{"b", 1.0}}, {}, "landau_x");
  std::mt19937_64 rng(41);
  for (int i = 0; i < 20; ++i) {
    Vec6 x = omh::testing::random_state(rng);
    CHECK(fam.sys.H->value(x) ==
          doctest::Approx(2.0 * cb.sys.H->value(x)).epsilon(1e-12));
  }
}

TEST_CASE("named lookups resolve and reject") {
  ModelSpec m = make_model("constant-b");
  CHECK(model_field(m, "H") == m.sys.H);
  CHECK(model_field(m, "H4") != nullptr);
  CHECK_THROWS_AS(model_field(m, "H9"), ConfigError);
  CHECK(model_operator(m, m.operators[0].name).op != nullptr);
  CHECK_THROWS_AS(model_operator(m, "K9"), ConfigError);
}

TEST_CASE("separated momenta reconstruct a phase point from its constants") {
  ModelSpec m = make_model("cyl-case1");
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int accepted = 0;
  for (int i = 0; i < 40 && accepted < 10; ++i) {
    Vec6 x0;
    for (int k = 0; k < 6; ++k) {
      double lo = m.box.lo[static_cast<std::size_t>(k)];
      double hi = m.box.hi[static_cast<std::size_t>(k)];
      x0[static_cast<std::size_t>(k)] = lo + (hi - lo) * u(rng);
    }
    std::array<double, 3> q{x0[0], x0[1], x0[2]};
    std::array<double, 3> h{m.sys.H->value(x0),
                            model_field(m, "H2")->value(x0),
                            model_field(m, "H3")->value(x0)};
    std::array<int, 3> signs{x0[3] < 0 ? -1 : 1, 1, 1};
    Vec6 back = hj_point(m, q, h, signs);
    for (int k = 0; k < 6; ++k)
      CHECK(back[static_cast<std::size_t>(k)] ==
            doctest::Approx(x0[static_cast<std::size_t>(k)]).epsilon(1e-9));
    CHECK(hj_residual(m, q, h, signs) < 1e-10);
    ++accepted;
  }
  CHECK(accepted == 10);
}

TEST_CASE("inaccessible constants are refused") {
  ModelSpec m = make_model("cyl-case1");
  std::array<double, 3> q{1.0, 0.3, 0.2};
  std::array<double, 3> h{-50.0, 0.8, 0.9};  // energy far below reach
  CHECK_THROWS_AS(hj_point(m, q, h, {1, 1, 1}), ForbiddenRegion);
}

TEST_CASE("models without a separated form say so") {
  ModelSpec m = make_model("constant-b");
  if (!m.hj) {
    CHECK_THROWS_AS(hj_point(m, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}), ConfigError);
  }
}

TEST_CASE("models carry consistent wiring") {
  for (const auto& info : catalog()) {
    ModelSpec m = make_model(info.id);
    CHECK(m.id == info.id);
    // every chain target and involution name resolves
    for (const auto& ch : m.chains) {
      CHECK(model_operator(m, ch.op).op != nullptr);
      CHECK(model_field(m, ch.target) != nullptr);
    }
    for (const auto& pr : m.involution) {
      CHECK(model_field(m, pr.a) != nullptr);
      CHECK(model_field(m, pr.b) != nullptr);
    }
    for (const auto& pr : m.algebra_pairs) {
      CHECK(model_operator(m, pr.a).op != nullptr);
      CHECK(model_operator(m, pr.b).op != nullptr);
    }
    // the sampling box is nonempty and ordered
    for (int k = 0; k < 6; ++k)
      CHECK(m.box.lo[static_cast<std::size_t>(k)] <
            m.box.hi[static_cast<std::size_t>(k)]);
  }
}
