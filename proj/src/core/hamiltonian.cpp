#include "hamiltonian.hpp"

namespace omh {

HamiltonianSystem make_system(Chart chart, VectorPotential a, ExprPtr v,
                              double kinetic) {
  HamiltonianSystem sys;
  sys.chart = std::move(chart);
  sys.A = std::move(a);
  sys.V = std::move(v);
  sys.kinetic = kinetic;

  Chart ch = sys.chart;
  VectorPotential ap = sys.A;
  ExprPtr vp = sys.V;
  double kin = kinetic;

  sys.H = make_scalar_field([ch, ap, vp, kin](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    std::array<S, 3> q{x[0], x[1], x[2]};
    std::array<S, 3> g = metric_covariant(ch, q);
    std::array<S, 3> av = potential_covariant(ch, ap, q);
    S sum(0.0);
    for (int i = 0; i < 3; ++i) {
      S pi = x[static_cast<std::size_t>(3 + i)] + av[static_cast<std::size_t>(i)];
      sum = sum + pi * pi / g[static_cast<std::size_t>(i)];
    }
    std::span<const std::string> names(ch.coords);
    std::span<const S> qs(q);
    return kin * sum + eval(*vp, names, qs);
  });

  sys.H_expanded = make_scalar_field([ch, ap, vp, kin](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    std::array<S, 3> q{x[0], x[1], x[2]};
    std::array<S, 3> g = metric_covariant(ch, q);
    std::array<S, 3> av = potential_covariant(ch, ap, q);
    S quad(0.0), lin(0.0), zero(0.0);
    for (int i = 0; i < 3; ++i) {
      S ginv = 1.0 / g[static_cast<std::size_t>(i)];
      S p = x[static_cast<std::size_t>(3 + i)];
      S ai = av[static_cast<std::size_t>(i)];
      quad = quad + p * p * ginv;
      lin = lin + ai * p * ginv;
      zero = zero + ai * ai * ginv;
    }
    std::span<const std::string> names(ch.coords);
    std::span<const S> qs(q);
    return kin * quad + 2.0 * kin * lin + kin * zero + eval(*vp, names, qs);
  });

  return sys;
}

double poisson_bracket(const ScalarField& f, const ScalarField& g,
                       const Vec6& pt) {
  Vec6 df = gradient6(f, pt), dg = gradient6(g, pt);
  double s = 0.0;
  for (int k = 0; k < 3; ++k)
    s += df[static_cast<std::size_t>(k)] * dg[static_cast<std::size_t>(k + 3)] -
         df[static_cast<std::size_t>(k + 3)] * dg[static_cast<std::size_t>(k)];
  return s;
}

std::array<double, 3> separable_involution(const ScalarField& f,
                                           const ScalarField& g,
                                           const Vec6& pt) {
  Vec6 df = gradient6(f, pt), dg = gradient6(g, pt);
  std::array<double, 3> out;
  for (int k = 0; k < 3; ++k)
    out[static_cast<std::size_t>(k)] =
        df[static_cast<std::size_t>(k)] * dg[static_cast<std::size_t>(k + 3)] -
        df[static_cast<std::size_t>(k + 3)] * dg[static_cast<std::size_t>(k)];
  return out;
}

VectorFunctionPtr hamiltonian_vector_field(ScalarFieldPtr h) {
  return make_vector_function([h](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    C6<S> out;
    for (int i = 0; i < 3; ++i) {
      out[static_cast<std::size_t>(i)] = field_partial(*h, x, 3 + i);
      out[static_cast<std::size_t>(3 + i)] = -field_partial(*h, x, i);
    }
    return out;
  });
}

Vec6 chain_one_form(const OperatorField& k, const ScalarField& h,
                    const Vec6& pt) {
  Mat kv = operator_value(k, pt);
  Vec6 dh = gradient6(h, pt);
  Vec6 alpha{};
  for (int j = 0; j < 6; ++j) {
    double s = 0.0;
    for (int i = 0; i < 6; ++i) s += kv(i, j) * dh[static_cast<std::size_t>(i)];
    alpha[static_cast<std::size_t>(j)] = s;
  }
  return alpha;
}

double chain_closedness(const OperatorField& k, const ScalarField& h,
                        const Vec6& pt) {
  std::array<Mat, 6> dk = operator_partials(k, pt);
  Mat kv = operator_value(k, pt);
  Vec6 dh = gradient6(h, pt);
  Mat hess = hessian6(h, pt);
  // dalpha(i, j) = d_i alpha_j
  Mat dalpha(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      double s = 0.0;
      for (int m = 0; m < 6; ++m)
        s += dk[static_cast<std::size_t>(i)](m, j) * dh[static_cast<std::size_t>(m)] +
             kv(m, j) * hess(i, m);
      dalpha(i, j) = s;
    }
  double worst = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      worst = std::max(worst, std::fabs(dalpha(i, j) - dalpha(j, i)));
  return worst;
}

double chain_exactness(const OperatorField& k, const ScalarField& h,
                       const ScalarField& target, const Vec6& pt) {
  Vec6 alpha = chain_one_form(k, h, pt);
  Vec6 dt = gradient6(target, pt);
  double worst = 0.0;
  for (int j = 0; j < 6; ++j)
    worst = std::max(worst, std::fabs(alpha[static_cast<std::size_t>(j)] -
                                      dt[static_cast<std::size_t>(j)]));
  return worst;
}

OperatorFieldPtr build_K_separable(ScalarFieldPtr h, ScalarFieldPtr h_alpha) {
  return make_operator_field([h, h_alpha](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    for (int i = 0; i < 3; ++i) {
      S den = field_partial(*h, x, 3 + i);
      if (scalar_value(den) == 0.0)
        throw SingularPoint("dH/dp vanishes in momentum slot " +
                            std::to_string(i + 1));
      S lam = field_partial(*h_alpha, x, 3 + i) / den;
      m(i, i) = lam;
      m(i + 3, i + 3) = lam;
    }
    return m;
  });
}

OperatorFieldPtr build_K_ignorable(const HamiltonianSystem& sys, int a,
                                   const std::vector<Vec6>& samples,
                                   double tol) {
  double worst = 0.0;
  for (const Vec6& pt : samples)
    worst = std::max(worst, std::fabs(gradient6(*sys.H, pt)[static_cast<std::size_t>(a)]));
  if (worst > tol)
    throw NotIgnorable("coordinate '" + sys.chart.coords[static_cast<std::size_t>(a)] +
                       "' is not ignorable (max |dH/dq| = " +
                       std::to_string(worst) + ")");
  Chart ch = sys.chart;
  VectorPotential ap = sys.A;
  return make_operator_field([ch, ap, a](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    std::array<S, 3> q{x[0], x[1], x[2]};
    std::array<S, 3> g = metric_covariant(ch, q);
    std::array<S, 3> av = potential_covariant(ch, ap, q);
    S pi = x[static_cast<std::size_t>(3 + a)] + av[static_cast<std::size_t>(a)];
    if (scalar_value(pi) == 0.0)
      throw SingularPoint("shifted momentum vanishes in ignorable slot");
    S lam = g[static_cast<std::size_t>(a)] / pi;  // 1 / (g^aa Pi_a)
    SmallMatrix<S> m(6, 6);
    m(a, a) = lam;
    m(a + 3, a + 3) = lam;
    return m;
  });
}

}  // namespace omh
