#include <cmath>
#include <random>

#include "core/fields.hpp"
#include "core/phasespace.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace omh;
using omh::testing::random_state;

namespace {

// smooth non-diagonal test operator with closed-form entries
OperatorFieldPtr wavy_operator() {
  return make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    using std::cos;
    using std::exp;
    using std::sin;
    SmallMatrix<S> m(6, 6);
    m(0, 1) = sin(x[0]);
    m(1, 0) = x[2] * x[2];
    m(2, 4) = exp(x[1] / 4.0);
    m(3, 3) = x[0] * x[1];
    m(4, 5) = S(1.0);
    m(5, 2) = cos(x[3]);
    return m;
  });
}

Mat op_at(const OperatorField& k, const Vec6& x) { return operator_value(k, x); }

// directional derivative of K columns by central differences
Mat op_dir_fd(const OperatorField& k, Vec6 x, int dir, double h = 1e-5) {
  Vec6 xp = x, xm = x;
  xp[static_cast<std::size_t>(dir)] += h;
  xm[static_cast<std::size_t>(dir)] -= h;
  Mat a = op_at(k, xp), b = op_at(k, xm);
  Mat out(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) out(i, j) = (a(i, j) - b(i, j)) / (2 * h);
  return out;
}

// N_K(e_a, e_b) from the coordinate formula, all derivatives by finite
// differences: an oracle fully independent of the hyper-dual pipeline
std::array<double, 6> nijenhuis_fd(const OperatorField& k, const Vec6& x,
                                   int a, int b) {
  Mat K = op_at(k, x);
  std::array<Mat, 6> dK;
  for (int d = 0; d < 6; ++d) dK[static_cast<std::size_t>(d)] = op_dir_fd(k, x, d);
  std::array<double, 6> n{};
  for (int i = 0; i < 6; ++i) {
    double v = 0.0;
    for (int m = 0; m < 6; ++m) {
      v += K(m, a) * dK[static_cast<std::size_t>(m)](i, b);
      v -= K(m, b) * dK[static_cast<std::size_t>(m)](i, a);
      v -= K(i, m) * dK[static_cast<std::size_t>(a)](m, b);
      v += K(i, m) * dK[static_cast<std::size_t>(b)](m, a);
    }
    n[static_cast<std::size_t>(i)] = v;
  }
  return n;
}

}  // namespace

TEST_CASE("nijenhuis torsion agrees with a finite-difference oracle") {
  auto k = wavy_operator();
  std::mt19937_64 rng(5);
  Vec6 x = random_state(rng);
  auto t = nijenhuis_torsion(*k, x);
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b) {
      auto n = nijenhuis_fd(*k, x, a, b);
      for (int i = 0; i < 6; ++i)
        CHECK(t.tensor.t[i][a][b] == doctest::Approx(n[static_cast<std::size_t>(i)]).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("constant operators and function multiples of the identity are torsion-free") {
  std::mt19937_64 rng(6);
  auto cst = make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    double v = 0.3;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) m(i, j) = S(v += 0.7);
    return m;
  });
  auto fid = make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    using std::exp;
    using std::sin;
    SmallMatrix<S> m(6, 6);
    S f = sin(x[0]) * x[4] + exp(x[2]);
    for (int i = 0; i < 6; ++i) m(i, i) = f;
    return m;
  });
  for (int i = 0; i < 10; ++i) {
    Vec6 x = random_state(rng);
    CHECK(nijenhuis_torsion(*cst, x).max_abs < 1e-12);
    CHECK(nijenhuis_torsion(*fid, x).scaled() < 1e-12);
    CHECK(haantjes_torsion(*fid, x).scaled() < 1e-12);
  }
}

TEST_CASE("pointwise diagonal operators have vanishing Haantjes torsion") {
  // entries paired across the two 3-blocks, arbitrary smooth dependence
  std::mt19937_64 rng(7);
  for (std::uint64_t s = 0; s < 6; ++s) {
    auto d0 = random_polynomial_field(100 + s, 2);
    auto d1 = random_polynomial_field(200 + s, 2);
    auto d2 = random_polynomial_field(300 + s, 2);
    auto k = make_operator_field([d0, d1, d2](const auto& x) {
      using S = std::decay_t<decltype(x[0])>;
      SmallMatrix<S> m(6, 6);
      m(0, 0) = m(3, 3) = d0->value(x);
      m(1, 1) = m(4, 4) = d1->value(x);
      m(2, 2) = m(5, 5) = d2->value(x);
      return m;
    });
    for (int i = 0; i < 5; ++i) {
      Vec6 x = random_state(rng);
      CHECK(haantjes_torsion(*k, x).scaled() < 1e-10);
    }
  }
}

TEST_CASE("a diagonal operator with generic entries still has Nijenhuis torsion") {
  // same lemma does not hold one level down: N_K != 0 when entries mix slots
  auto k = make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    m(0, 0) = m(3, 3) = x[1] * x[1];
    m(1, 1) = m(4, 4) = x[0] + x[2];
    m(2, 2) = m(5, 5) = S(1.0);
    return m;
  });
  std::mt19937_64 rng(8);
  Vec6 x = random_state(rng, 0.5, 1.5);
  CHECK(nijenhuis_torsion(*k, x).scaled() > 1e-3);
  CHECK(haantjes_torsion(*k, x).scaled() < 1e-11);
}

TEST_CASE("compatibility residual separates symplectic from generic operators") {
  auto good = make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    // block-paired diagonal commutes with J
    m(0, 0) = m(3, 3) = x[1];
    m(1, 1) = m(4, 4) = S(2.0);
    m(2, 2) = m(5, 5) = x[0] * x[0];
    return m;
  });
  auto bad = make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    for (int i = 0; i < 6; ++i) m(i, i) = S(1.0);
    m(0, 1) = S(1.0);  // breaks omega(KX,Y) = omega(X,KY)
    return m;
  });
  std::mt19937_64 rng(9);
  Vec6 x = random_state(rng);
  CHECK(compatibility_residual(*good, x) < 1e-13);
  CHECK(compatibility_residual(*bad, x) > 1e-4);
}

TEST_CASE("algebra axioms hold for commuting pairs and flag noncommuting ones") {
  auto d = [](double a, double b, double c) {
    return make_operator_field([a, b, c](const auto& x) {
      using S = std::decay_t<decltype(x[0])>;
      SmallMatrix<S> m(6, 6);
      m(0, 0) = m(3, 3) = a * x[0];
      m(1, 1) = m(4, 4) = S(b);
      m(2, 2) = m(5, 5) = c * x[2] * x[2];
      return m;
    });
  };
  auto k1 = d(1.0, 2.0, 0.5);
  auto k2 = d(-0.3, 1.0, 2.0);
  std::mt19937_64 rng(10);
  Vec6 x = random_state(rng, 0.4, 1.4);
  auto r = algebra_axioms(*k1, *k2, x, 99, 2);
  CHECK(r.max() < 1e-9);

  auto rot = make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    m(0, 1) = S(1.0);
    m(1, 0) = S(-1.0);
    return m;
  });
  CHECK(commutator_residual(*k1, *rot, x) > 1e-3);
}

TEST_CASE("operator composition and function-linear combinations evaluate pointwise") {
  auto k1 = make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    for (int i = 0; i < 6; ++i) m(i, i) = x[0];
    return m;
  });
  auto k2 = make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    for (int i = 0; i < 6; ++i) m(i, i) = S(2.0);
    m(0, 5) = x[1];
    return m;
  });
  Vec6 x{1.5, -0.7, 0.2, 0.1, 0.4, 0.9};
  auto combo = combo_field(constant_field(3.0), k1, constant_field(1.0), k2);
  Mat c = operator_value(*combo, x);
  CHECK(c(1, 1) == doctest::Approx(3.0 * 1.5 + 2.0));
  CHECK(c(0, 5) == doctest::Approx(-0.7));
  auto prod = product_field(k1, k2);
  Mat p = operator_value(*prod, x);
  CHECK(p(0, 0) == doctest::Approx(3.0));
  CHECK(p(0, 5) == doctest::Approx(1.5 * -0.7));
}

TEST_CASE("eigen clustering reports multiplicities and the Riesz index") {
  auto diag = make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    m(0, 0) = m(3, 3) = S(2.0);
    m(1, 1) = m(4, 4) = S(2.0);
    m(2, 2) = m(5, 5) = S(3.0);
    return m;
  });
  Vec6 x{};
  auto er = eigen_spectrum(*diag, x, 1e-6);
  REQUIRE(er.clusters.size() == 2);
  CHECK(er.clusters[0].value == doctest::Approx(2.0));
  CHECK(er.clusters[0].multiplicity == 4);
  CHECK(er.clusters[0].riesz_index_one);
  CHECK(er.clusters[1].value == doctest::Approx(3.0));
  CHECK(er.clusters[1].multiplicity == 2);

  auto jordan = make_operator_field([](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    for (int i = 0; i < 6; ++i) m(i, i) = S(1.0);
    m(0, 1) = S(1.0);  // one 2-block
    return m;
  });
  auto ej = eigen_spectrum(*jordan, x, 1e-6);
  REQUIRE(ej.clusters.size() == 1);
  CHECK(!ej.clusters[0].riesz_index_one);
}

TEST_CASE("seeded polynomial fields are reproducible") {
  auto f1 = random_polynomial_field(42, 2);
  auto f2 = random_polynomial_field(42, 2);
  auto f3 = random_polynomial_field(43, 2);
  Vec6 x{0.3, 0.8, -0.2, 0.5, 0.1, 0.9};
  CHECK(f1->value(x) == f2->value(x));
  CHECK(f1->value(x) != f3->value(x));
}
