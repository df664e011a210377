#include "core/stackel.hpp"

#include <cmath>
#include <set>
#include <string>

namespace omh {

namespace {

void check_vars(const FunctionDef& fn, const std::set<std::string>& allowed,
                const std::string& what) {
  for (const auto& v : free_variables(*fn.body))
    if (!allowed.count(v))
      throw ConfigError(what + " may not depend on '" + v + "'");
}

}  // namespace

void validate_stackel(const StackelSpec& spec) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      check_vars(spec.entry[i][j], {spec.qnames[i]},
                 "matrix row " + std::to_string(i + 1));
  for (int k = 0; k < 3; ++k)
    check_vars(spec.f[k], {spec.qnames[k], spec.pnames[k]},
               "separated function " + std::to_string(k + 1));
}

StackelSpec make_stackel(const std::array<std::string, 3>& qnames,
                         const std::array<std::string, 3>& pnames,
                         const std::array<std::array<std::string, 3>, 3>& matrix_text,
                         const std::array<std::string, 3>& f_text) {
  StackelSpec spec;
  spec.qnames = qnames;
  spec.pnames = pnames;
  try {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        spec.entry[i][j] = parse_function("S" + std::to_string(i + 1) + std::to_string(j + 1),
                                          {qnames[i]}, matrix_text[i][j]);
    for (int k = 0; k < 3; ++k)
      spec.f[k] = parse_function("f" + std::to_string(k + 1), {qnames[k], pnames[k]},
                                 f_text[k]);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  validate_stackel(spec);
  return spec;
}

std::array<ScalarFieldPtr, 3> akn_hamiltonians(const StackelSpec& spec) {
  std::array<ScalarFieldPtr, 3> out;
  for (int j = 0; j < 3; ++j) {
    out[j] = make_scalar_field([spec, j](const auto& x) {
      using S = std::decay_t<decltype(x[0])>;
      std::array<S, 3> q{x[0], x[1], x[2]};
      auto m = stackel_matrix<S>(spec, q);
      S det = m.determinant();
      if (scalar_value(det) == 0.0) throw SingularStackel("matrix is singular");
      S acc(0.0);
      for (int k = 0; k < 3; ++k) {
        std::array<S, 2> qp{x[k], x[3 + k]};
        acc = acc + m.cofactor(k, j) * eval_function<S>(spec.f[k], {qp.data(), 2});
      }
      return acc / det;
    });
  }
  return out;
}

OperatorFieldPtr stackel_haantjes(const StackelSpec& spec, int j) {
  if (j < 0 || j > 2) throw ConfigError("operator index out of range");
  return make_operator_field([spec, j](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    std::array<S, 3> q{x[0], x[1], x[2]};
    auto m = stackel_matrix<S>(spec, q);
    SmallMatrix<S> k(6, 6);
    for (int r = 0; r < 3; ++r) {
      S num = m.cofactor(r, j);
      S den = m.cofactor(r, 0);
      S rho(0.0);
      if (scalar_value(den) == 0.0) {
        if (scalar_value(num) != 0.0)
          throw SingularStackel("reference cofactor vanishes");
      } else {
        rho = num / den;
      }
      k(r, r) = rho;
      k(r + 3, r + 3) = rho;
    }
    return k;
  });
}

double separation_residual(const StackelSpec& spec,
                           const std::array<ScalarFieldPtr, 3>& h, const Vec6& x) {
  std::array<double, 3> q{x[0], x[1], x[2]};
  auto m = stackel_matrix<double>(spec, q);
  double hv[3];
  for (int j = 0; j < 3; ++j) hv[j] = h[j]->value(x);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    std::array<double, 2> qp{x[i], x[3 + i]};
    double lhs = 0.0;
    for (int j = 0; j < 3; ++j) lhs += m(i, j) * hv[j];
    worst = std::max(worst, std::fabs(lhs - eval_function<double>(spec.f[i], {qp.data(), 2})));
  }
  return worst;
}

double cofactor_identity_residual(const StackelSpec& spec, const std::array<double, 3>& q) {
  auto m = stackel_matrix<double>(spec, q);
  auto adj = stackel_adjugate(m);
  double det = m.determinant();
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) sum += m(i, k) * adj(k, j);
      worst = std::max(worst, std::fabs(sum - (i == j ? det : 0.0)));
    }
  return worst / std::max(1.0, std::fabs(det));
}

Mat project_to_base(const Mat& k, double tol) {
  double scale = tol * std::max(1.0, k.max_abs());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (std::fabs(k(i, j + 3)) > scale || std::fabs(k(i + 3, j)) > scale)
        throw NotProjectable("mixed blocks do not vanish");
      if (std::fabs(k(i, j) - k(i + 3, j + 3)) > scale)
        throw NotProjectable("diagonal blocks differ");
    }
  Mat out(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = k(i, j);
  return out;
}

ClassicalReduction classical_stackel_metric(const StackelSpec& spec) {
  const double probes_q[] = {0.7, 1.3, 2.1};
  const double probes_p[] = {0.5, -1.1, 1.7};
  for (int k = 0; k < 3; ++k) {
    for (double q : probes_q)
      for (double p : probes_p) {
        // outer dual slots both seed p (d12 -> d^2/dp^2); the inner dual of
        // the q argument rides along, so d1.d1 is the mixed q,p derivative
        HDual2 qq(q);
        qq.v.d1 = 1.0;
        HDual2 pp(p);
        pp.d1 = HDual(1.0);
        pp.d2 = HDual(1.0);
        std::array<HDual2, 2> args{qq, pp};
        HDual2 v = eval_function<HDual2>(spec.f[k], {args.data(), 2});
        if (std::fabs(v.d12.v - 1.0) > 1e-9 || std::fabs(v.d1.d1) > 1e-9 ||
            std::fabs(v.d1.v - p) > 1e-9)
          throw NotClassicalForm("separated function " + std::to_string(k + 1) +
                                 " is not p^2/2 + W(q)");
      }
  }
  ClassicalReduction red;
  for (int j = 0; j < 3; ++j) {
    red.ginv[j] = make_scalar_field([spec, j](const auto& x) {
      using S = std::decay_t<decltype(x[0])>;
      std::array<S, 3> q{x[0], x[1], x[2]};
      auto m = stackel_matrix<S>(spec, q);
      S det = m.determinant();
      if (scalar_value(det) == 0.0) throw SingularStackel("matrix is singular");
      return m.cofactor(j, 0) / det;
    });
  }
  red.potential = make_scalar_field([spec](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    std::array<S, 3> q{x[0], x[1], x[2]};
    auto m = stackel_matrix<S>(spec, q);
    S det = m.determinant();
    if (scalar_value(det) == 0.0) throw SingularStackel("matrix is singular");
    S acc(0.0);
    for (int j = 0; j < 3; ++j) {
      std::array<S, 2> qp{x[j], S(0.0)};
      acc = acc + (m.cofactor(j, 0) / det) * eval_function<S>(spec.f[j], {qp.data(), 2});
    }
    return acc;
  });
  return red;
}

}  // namespace omh
