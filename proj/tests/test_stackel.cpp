#include <array>
#include <cmath>
#include <random>

#include "core/hamiltonian.hpp"
#include "core/stackel.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace omh;

namespace {

const std::array<std::string, 3> Q{"q1", "q2", "q3"};
const std::array<std::string, 3> P{"p1", "p2", "p3"};

// bidiagonal constant matrix: inverse is the upper unitriangular all-ones
StackelSpec ladder_spec() {
  return make_stackel(Q, P,
                      {{{"1", "-1", "0"}, {"0", "1", "-1"}, {"0", "0", "1"}}},
                      {"p1^2/2 + q1", "p2^2/2 + q2", "p3^2/2 + q3"});
}

StackelSpec curved_spec() {
  return make_stackel(Q, P,
                      {{{"q1^2", "-1", "0"}, {"0", "1", "-1"}, {"0", "0", "1"}}},
                      {"p1^2/2 + q1^4", "p2^2/2", "p3^2/2 + q3^2"});
}

double fval(const Vec6& x, int k) {
  double q = x[static_cast<std::size_t>(k)], p = x[static_cast<std::size_t>(k + 3)];
  switch (k) {
    case 0: return p * p / 2 + q;
    case 1: return p * p / 2 + q;
    default: return p * p / 2 + q;
  }
}

}  // namespace

TEST_CASE("matrix, adjugate, and induced hamiltonians match the hand inverse") {
  StackelSpec spec = ladder_spec();
  std::array<double, 3> q{0.7, -0.3, 1.2};
  auto m = stackel_matrix<double>(spec, q);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(0, 1) == -1.0);
  CHECK(m.determinant() == doctest::Approx(1.0));
  auto adj = stackel_adjugate(m);
  // inverse of the ladder is all-ones upper triangular
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(adj(i, j) == doctest::Approx(j >= i ? 1.0 : 0.0));

  auto h = akn_hamiltonians(spec);
  Vec6 x{0.7, -0.3, 1.2, 0.4, 1.1, -0.6};
  double f0 = fval(x, 0), f1 = fval(x, 1), f2 = fval(x, 2);
  CHECK(h[0]->value(x) == doctest::Approx(f0 + f1 + f2).epsilon(1e-14));
  CHECK(h[1]->value(x) == doctest::Approx(f1 + f2).epsilon(1e-14));
  CHECK(h[2]->value(x) == doctest::Approx(f2).epsilon(1e-14));
}

TEST_CASE("induced hamiltonians are in involution and separate") {
  StackelSpec spec = curved_spec();
  auto h = akn_hamiltonians(spec);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 15; ++i) {
    Vec6 x = omh::testing::random_state(rng, 0.4, 1.6);
    CHECK(std::fabs(poisson_bracket(*h[0], *h[1], x)) < 1e-11);
    CHECK(std::fabs(poisson_bracket(*h[0], *h[2], x)) < 1e-11);
    CHECK(std::fabs(poisson_bracket(*h[1], *h[2], x)) < 1e-11);
    CHECK(separation_residual(spec, h, x) < 1e-12);
  }
}

TEST_CASE("variable discipline is enforced") {
  CHECK_THROWS_AS(
      make_stackel(Q, P, {{{"q2", "-1", "0"}, {"0", "1", "-1"}, {"0", "0", "1"}}},
                   {"p1^2/2", "p2^2/2", "p3^2/2"}),
      ConfigError);
  CHECK_THROWS_AS(
      make_stackel(Q, P, {{{"1", "-1", "0"}, {"0", "1", "-1"}, {"0", "0", "1"}}},
                   {"p1^2/2 + p2", "p2^2/2", "p3^2/2"}),
      ConfigError);
}

TEST_CASE("recursion operator eigenvalues are cofactor quotients") {
  StackelSpec spec = curved_spec();
  Vec6 x{0.8, 0.5, 1.1, 0.2, 0.3, 0.4};
  auto m = stackel_matrix<double>(spec, {0.8, 0.5, 1.1});
  auto k0 = stackel_haantjes(spec, 0);
  Mat i6 = operator_value(*k0, x);
  for (int r = 0; r < 6; ++r) CHECK(i6(r, r) == doctest::Approx(1.0));
  auto k1 = stackel_haantjes(spec, 1);
  Mat v = operator_value(*k1, x);
  for (int r = 0; r < 3; ++r) {
    double rho = m.cofactor(r, 1) / m.cofactor(r, 0);
    CHECK(v(r, r) == doctest::Approx(rho).epsilon(1e-13));
    CHECK(v(r + 3, r + 3) == doctest::Approx(rho).epsilon(1e-13));
  }
  CHECK_THROWS_AS(stackel_haantjes(spec, 3), ConfigError);
}

TEST_CASE("identity matrix makes the nontrivial operators singular") {
  StackelSpec spec = make_stackel(
      Q, P, {{{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}}},
      {"p1^2/2", "p2^2/2", "p3^2/2"});
  auto k1 = stackel_haantjes(spec, 1);
  Vec6 x{0.5, 0.5, 0.5, 0.1, 0.1, 0.1};
  CHECK_THROWS_AS(operator_value(*k1, x), SingularStackel);
}

TEST_CASE("matrix times adjugate is det times identity") {
  StackelSpec spec = curved_spec();
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.4, 1.6);
  for (int i = 0; i < 25; ++i) {
    std::array<double, 3> q{u(rng), u(rng), u(rng)};
    CHECK(cofactor_identity_residual(spec, q) < 1e-14);
  }
}

TEST_CASE("a perturbed matrix shows up as a separation residual of matching size") {
  StackelSpec good = curved_spec();
  StackelSpec bent = make_stackel(
      Q, P,
      {{{"q1^2 + q1/1000", "-1", "0"}, {"0", "1", "-1"}, {"0", "0", "1"}}},
      {"p1^2/2 + q1^4", "p2^2/2", "p3^2/2 + q3^2"});
  auto h = akn_hamiltonians(good);
  std::mt19937_64 rng(33);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Vec6 x = omh::testing::random_state(rng, 0.5, 1.5);
    CHECK(separation_residual(good, h, x) < 1e-12);
    double r = separation_residual(bent, h, x);
    // residual = |q1/1000 * h0|, well above tolerance noise but still small
    double predict = std::fabs(x[0] / 1000.0 * h[0]->value(x));
    CHECK(r == doctest::Approx(predict).epsilon(1e-9));
    worst = std::max(worst, r);
  }
  CHECK(worst > 1e-6);
  CHECK(worst < 1e-1);
}

TEST_CASE("classical reduction recovers metric and potential") {
  StackelSpec spec = curved_spec();
  auto red = classical_stackel_metric(spec);
  std::mt19937_64 rng(34);
  for (int i = 0; i < 10; ++i) {
    Vec6 x = omh::testing::random_state(rng, 0.5, 1.5);
    double a = x[0] * x[0];
    for (int j = 0; j < 3; ++j)
      CHECK(red.ginv[static_cast<std::size_t>(j)]->value(x) ==
            doctest::Approx(1.0 / a).epsilon(1e-12));
    double v = (std::pow(x[0], 4) + x[2] * x[2]) / a;
    CHECK(red.potential->value(x) == doctest::Approx(v).epsilon(1e-12));
    // H_0 assembled from the reduction agrees with the induced one
    auto h = akn_hamiltonians(spec);
    double hk = 0.0;
    for (int j = 0; j < 3; ++j)
      hk += red.ginv[static_cast<std::size_t>(j)]->value(x) *
            x[static_cast<std::size_t>(3 + j)] * x[static_cast<std::size_t>(3 + j)] / 2;
    CHECK(h[0]->value(x) == doctest::Approx(hk + red.potential->value(x)).epsilon(1e-11));
  }
}

TEST_CASE("non-quadratic separated functions are rejected") {
  StackelSpec spec = make_stackel(
      Q, P, {{{"q1^2", "-1", "0"}, {"0", "1", "-1"}, {"0", "0", "1"}}},
      {"p1^3", "p2^2/2", "p3^2/2"});
  CHECK_THROWS_AS(classical_stackel_metric(spec), NotClassicalForm);
}

TEST_CASE("projection to the configuration block") {
  Mat k(6, 6);
  for (int i = 0; i < 3; ++i) {
    k(i, i) = 1.0 + i;
    k(i + 3, i + 3) = 1.0 + i;
  }
  k(0, 1) = 0.25;
  k(3, 4) = 0.25;
  Mat b = project_to_base(k, 1e-12);
  CHECK(b.rows() == 3);
  CHECK(b(0, 1) == doctest::Approx(0.25));
  CHECK(b(2, 2) == doctest::Approx(3.0));

  Mat bad = k;
  bad(0, 4) = 0.5;  // mixed block
  CHECK_THROWS_AS(project_to_base(bad, 1e-12), NotProjectable);
  Mat uneq = k;
  uneq(3, 4) = 0.5;  // blocks differ
  CHECK_THROWS_AS(project_to_base(uneq, 1e-12), NotProjectable);
}
