#include "phasespace.hpp"

#include <algorithm>
#include <random>

namespace omh {

Mat symplectic_matrix() {
  Mat j(6, 6);
  for (int i = 0; i < 3; ++i) {
    j(i, i + 3) = 1.0;
    j(i + 3, i) = -1.0;
  }
  return j;
}

double Tensor3::max_abs() const {
  double m = 0.0;
  for (const auto& plane : t)
    for (const auto& row : plane)
      for (double v : row) m = std::max(m, std::fabs(v));
  return m;
}

Vec6 lie_bracket(const VectorFunction& x, const VectorFunction& y,
                 const Vec6& pt) {
  Vec6 xv = vector_value(x, pt), yv = vector_value(y, pt);
  Mat dx = jacobian6(x, pt), dy = jacobian6(y, pt);
  Vec6 out{};
  for (int i = 0; i < 6; ++i) {
    double s = 0.0;
    for (int j = 0; j < 6; ++j)
      s += xv[static_cast<std::size_t>(j)] * dy(i, j) -
           yv[static_cast<std::size_t>(j)] * dx(i, j);
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

namespace {

struct OpData {
  Mat k;
  std::array<Mat, 6> dk;
  double kscale, dkscale;
};

OpData op_data(const OperatorField& k, const Vec6& pt) {
  OpData d{operator_value(k, pt), operator_partials(k, pt), 1.0, 1.0};
  d.kscale = std::max(1.0, d.k.max_abs());
  double dm = 0.0;
  for (const auto& m : d.dk) dm = std::max(dm, m.max_abs());
  d.dkscale = std::max(1.0, dm);
  return d;
}

Tensor3 nijenhuis_from(const OpData& d) {
  Tensor3 n;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int kk = j + 1; kk < 6; ++kk) {
        double s = 0.0;
        for (int m = 0; m < 6; ++m) {
          s += d.k(m, j) * d.dk[static_cast<std::size_t>(m)](i, kk);
          s -= d.k(m, kk) * d.dk[static_cast<std::size_t>(m)](i, j);
          s -= d.k(i, m) * (d.dk[static_cast<std::size_t>(j)](m, kk) -
                            d.dk[static_cast<std::size_t>(kk)](m, j));
        }
        n.t[i][j][kk] = s;
        n.t[i][kk][j] = -s;
      }
  return n;
}

}  // namespace

TorsionResult nijenhuis_torsion(const OperatorField& k, const Vec6& pt) {
  OpData d = op_data(k, pt);
  TorsionResult r;
  r.tensor = nijenhuis_from(d);
  r.max_abs = r.tensor.max_abs();
  r.scale = std::max(1.0, d.kscale * d.kscale * d.dkscale);
  return r;
}

TorsionResult haantjes_torsion(const OperatorField& k, const Vec6& pt) {
  OpData d = op_data(k, pt);
  Tensor3 n = nijenhuis_from(d);
  Mat k2 = d.k * d.k;
  TorsionResult r;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int kk = j + 1; kk < 6; ++kk) {
        double s = 0.0;
        for (int a = 0; a < 6; ++a) {
          s += k2(i, a) * n.t[a][j][kk];
          for (int b = 0; b < 6; ++b) {
            s += d.k(a, j) * d.k(b, kk) * n.t[i][a][b];
            s -= d.k(i, a) * (d.k(b, kk) * n.t[a][j][b] +
                              d.k(b, j) * n.t[a][b][kk]);
          }
        }
        r.tensor.t[i][j][kk] = s;
        r.tensor.t[i][kk][j] = -s;
      }
  r.max_abs = r.tensor.max_abs();
  double ks = d.kscale;
  r.scale = std::max(1.0, ks * ks * ks * d.dkscale);
  return r;
}

double compatibility_residual(const OperatorField& k, const Vec6& pt) {
  Mat kv = operator_value(k, pt);
  Mat j = symplectic_matrix();
  Mat resid = j * kv - kv.transpose() * j;
  return resid.max_abs();
}

double commutator_residual(const OperatorField& k1, const OperatorField& k2,
                           const Vec6& pt) {
  Mat a = operator_value(k1, pt), b = operator_value(k2, pt);
  return (a * b - b * a).max_abs();
}

OperatorFieldPtr combo_field(ScalarFieldPtr f, OperatorFieldPtr k1,
                             ScalarFieldPtr g, OperatorFieldPtr k2) {
  return make_operator_field([f, k1, g, k2](const auto& x) {
    auto m1 = k1->mat(x);
    auto m2 = k2->mat(x);
    return f->value(x) * m1 + g->value(x) * m2;
  });
}

OperatorFieldPtr product_field(OperatorFieldPtr k1, OperatorFieldPtr k2) {
  return make_operator_field(
      [k1, k2](const auto& x) { return k1->mat(x) * k2->mat(x); });
}

ScalarFieldPtr constant_field(double c) {
  return make_scalar_field([c](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    (void)x;
    return S(c);
  });
}

ScalarFieldPtr random_polynomial_field(std::uint64_t seed, int degree) {
  // sparse polynomial: a handful of monomials with coefficients in [-1, 1]
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 5);
  std::uniform_int_distribution<int> npick(1, degree);
  struct Monomial {
    double c;
    std::array<int, 6> e{};
  };
  std::vector<Monomial> monos;
  monos.push_back({coeff(eng), {}});  // constant term
  for (int t = 0; t < 4; ++t) {
    Monomial m;
    m.c = coeff(eng);
    int total = npick(eng);
    for (int d = 0; d < total; ++d) ++m.e[static_cast<std::size_t>(pick(eng))];
    monos.push_back(m);
  }
  return make_scalar_field([monos](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    S sum(0.0);
    for (const auto& m : monos) {
      S term(m.c);
      for (int i = 0; i < 6; ++i)
        if (m.e[static_cast<std::size_t>(i)] > 0)
          term = term * pow_int(x[static_cast<std::size_t>(i)], m.e[static_cast<std::size_t>(i)]);
      sum = sum + term;
    }
    return sum;
  });
}

double AlgebraResidual::max() const {
  return std::max({module_constant, module_poly, ring, commutator});
}

AlgebraResidual algebra_axioms(const OperatorField& k1,
                               const OperatorField& k2, const Vec6& pt,
                               std::uint64_t seed, int poly_trials) {
  AlgebraResidual out;
  // the operator fields are shared as borrowed pointers for the combinations
  auto k1p = make_operator_field([&k1](const auto& x) { return k1.mat(x); });
  auto k2p = make_operator_field([&k2](const auto& x) { return k2.mat(x); });

  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto cc = combo_field(constant_field(u(eng)), k1p, constant_field(u(eng)), k2p);
  out.module_constant = haantjes_torsion(*cc, pt).scaled();

  for (int t = 0; t < poly_trials; ++t) {
    auto f = random_polynomial_field(eng(), 2);
    auto g = random_polynomial_field(eng(), 2);
    auto c = combo_field(f, k1p, g, k2p);
    out.module_poly = std::max(out.module_poly, haantjes_torsion(*c, pt).scaled());
  }

  out.ring = haantjes_torsion(*product_field(k1p, k2p), pt).scaled();
  out.commutator = commutator_residual(k1, k2, pt);
  return out;
}

EigenResult eigen_spectrum(const OperatorField& k, const Vec6& pt, double tol) {
  return eig_real(operator_value(k, pt), tol);
}

}  // namespace omh
