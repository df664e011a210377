#include <cmath>
#include <random>

#include "core/errors.hpp"
#include "core/geometry.hpp"
#include "doctest.h"

using namespace omh;

TEST_CASE("cartesian curl matches the hand-computed formula") {
  Chart cart = cartesian_chart();
  VectorPotential f;
  f.comp = {parse("y^2*z"), parse("x*z^3"), parse("x^2*y")};
  std::array<double, 3> q{1.2, -0.7, 0.4};
  auto c = curl(cart, f, q);
  // curl = (x^2 - 3 x z^2, y^2 - 2 x y, z^3 - 2 y z)
  CHECK(c[0] == doctest::Approx(q[0] * q[0] - 3 * q[0] * q[2] * q[2]).epsilon(1e-13));
  CHECK(c[1] == doctest::Approx(q[1] * q[1] - 2 * q[0] * q[1]).epsilon(1e-13));
  CHECK(c[2] == doctest::Approx(q[2] * q[2] * q[2] - 2 * q[1] * q[2]).epsilon(1e-13));
}

TEST_CASE("cylindrical curl of the covariant symmetric gauge is a uniform field") {
  Chart cyl = cylindrical_chart();
  VectorPotential a;
  a.comp = {parse("0"), parse("r^2/2"), parse("0")};  // covariant A_phi
  for (double r : {0.6, 1.3, 2.4}) {
    std::array<double, 3> q{r, 0.7, -0.2};
    auto b = curl(cyl, a, q);
    CHECK(b[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(b[1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(b[2] == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("computed fields are divergence-free in both charts") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.4, 1.8);
  Chart cart = cartesian_chart();
  Chart cyl = cylindrical_chart();
  VectorPotential ac, ay;
  ac.comp = {parse("y^2*z + cos(z)"), parse("x*z^3"), parse("x^2*y + sin(x)")};
  ay.comp = {parse("z*sin(phi)"), parse("r^2/2 + r*z"), parse("cos(phi)/r")};
  for (int i = 0; i < 25; ++i) {
    std::array<double, 3> q{u(rng), u(rng), u(rng)};
    CHECK(std::fabs(divergence_of_curl(cart, ac, q)) < 1e-10);
    CHECK(std::fabs(divergence_of_curl(cyl, ay, q)) < 1e-10);
  }
}

TEST_CASE("gauge shifts leave the field untouched") {
  Chart cyl = cylindrical_chart();
  VectorPotential a;
  a.comp = {parse("0"), parse("r^2/2"), parse("r*cos(phi)")};
  ExprPtr chi = parse("r^2*sin(phi) + z^2/3 + r*z");
  VectorPotential shifted = gauge_shift(cyl, a, chi);
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int i = 0; i < 25; ++i) {
    std::array<double, 3> q{u(rng), u(rng), u(rng)};
    auto b0 = curl(cyl, a, q);
    auto b1 = curl(cyl, shifted, q);
    for (int k = 0; k < 3; ++k)
      CHECK(b1[k] == doctest::Approx(b0[k]).epsilon(1e-11));
  }
}

TEST_CASE("coordinate partials differentiate expressions exactly") {
  Chart cyl = cylindrical_chart();
  auto e = parse("r^2*phi");
  std::array<double, 3> q{1.4, 0.8, 0.1};
  CHECK(coord_partial(cyl, *e, q, 0) == doctest::Approx(2 * 1.4 * 0.8).epsilon(1e-14));
  CHECK(coord_partial(cyl, *e, q, 1) == doctest::Approx(1.4 * 1.4).epsilon(1e-14));
  CHECK(coord_partial(cyl, *e, q, 2) == doctest::Approx(0.0));
}

TEST_CASE("domain membership respects chart positivity margins") {
  Chart cyl = cylindrical_chart();
  CHECK(in_domain(cyl, {1.0, 0.0, 0.0}, 1e-3));
  CHECK(!in_domain(cyl, {5e-4, 0.0, 0.0}, 1e-3));
  CHECK(!in_domain(cyl, {-0.3, 0.0, 0.0}, 1e-3));
  Chart cart = cartesian_chart();
  CHECK(in_domain(cart, {-100.0, 0.0, 3.0}, 1e-3));
}

TEST_CASE("metric helpers expose the cylindrical scale factors") {
  Chart cyl = cylindrical_chart();
  std::array<double, 3> q{1.7, 0.3, -0.4};
  auto h = scale_factors(cyl, q);
  CHECK(h[0] == doctest::Approx(1.0));
  CHECK(h[1] == doctest::Approx(1.7));
  CHECK(h[2] == doctest::Approx(1.0));
}

TEST_CASE("phase space naming follows the chart coordinates") {
  auto names = phase_names(cylindrical_chart());
  CHECK(names[0] == "r");
  CHECK(names[1] == "phi");
  CHECK(names[3] == "pr");
}
