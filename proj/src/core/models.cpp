#include "models.hpp"

#include <cmath>
#include <cstdio>

namespace omh {

namespace {

// ---- small builders --------------------------------------------------------

ExprPtr num(double v) { return enum_number(v); }

std::string num_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%.17g)", v);
  return buf;
}

ExprPtr P(const std::string& text) { return parse(text); }

FunctionDef fn_of(const std::string& name, std::vector<std::string> vars,
                  ExprPtr body) {
  FunctionDef d;
  d.name = name;
  d.vars = std::move(vars);
  d.source = print(*body);
  d.body = std::move(body);
  return d;
}

template <class S>
S eval1(const FunctionDef& f, const S& v) {
  std::array<S, 1> a{v};
  return eval_function<S>(f, std::span<const S>(a.data(), 1));
}

std::array<std::string, 6> hatted_names() {
  return {"q1", "q2", "q3", "p1", "p2", "p3"};
}

// field backed by an expression over the six given names
ScalarFieldPtr expr_field(const std::array<std::string, 6>& names, ExprPtr e) {
  return make_scalar_field([names, e](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    return eval<S>(*e, std::span<const std::string>(names.data(), 6),
                   std::span<const S>(x.data(), 6));
  });
}

ScalarFieldPtr hatted_field(const std::string& text) {
  return expr_field(hatted_names(), P(text));
}

// kinetic momentum component Pi_i
ScalarFieldPtr pi_field(const Chart& chart, const VectorPotential& a, int i) {
  return make_scalar_field([chart, a, i](const auto& x) {
    return kinetic_momenta(chart, a, x)[static_cast<std::size_t>(i)];
  });
}

// canonical momentum component p_i (i in 0..2)
ScalarFieldPtr p_field(int i) {
  return make_scalar_field(
      [i](const auto& x) { return x[static_cast<std::size_t>(i) + 3]; });
}

// z-component of the kinetic angular momentum on a Cartesian chart
ScalarFieldPtr lz_field(const Chart& chart, const VectorPotential& a) {
  return make_scalar_field([chart, a](const auto& x) {
    auto pi = kinetic_momenta(chart, a, x);
    return x[0] * pi[1] - x[1] * pi[0];
  });
}

ScalarFieldPtr const_field_of(double v) {
  return make_scalar_field([v](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    return S(v);
  });
}

// K_a of the shared pattern: prefactor * (E_aa + E_{a+3,a+3}
//   + sum_{j != a} d_a A_j (E_{a+3,j} - E_{j+3,a}))
OperatorFieldPtr r_pattern_op(const Chart& chart, const VectorPotential& a,
                              int slot, ScalarFieldPtr prefactor) {
  return make_operator_field([chart, a, slot, prefactor](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    std::array<S, 3> q{x[0], x[1], x[2]};
    SmallMatrix<S> m(6, 6);
    m(slot, slot) = S(1.0);
    m(slot + 3, slot + 3) = S(1.0);
    for (int j = 0; j < 3; ++j) {
      if (j == slot) continue;
      S d = coord_partial(chart, *a.comp[static_cast<std::size_t>(j)], q, slot);
      m(slot + 3, j) = d;
      m(j + 3, slot) = -d;
    }
    return prefactor->value(x) * m;
  });
}

// diagonal operator sum_k f_k (E_kk + E_{k+3,k+3}) from (slot, field) pairs
OperatorFieldPtr diag_op(std::vector<std::pair<int, ScalarFieldPtr>> parts) {
  return make_operator_field([parts](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    SmallMatrix<S> m(6, 6);
    for (const auto& [slot, f] : parts) {
      S v = f->value(x);
      m(slot, slot) = v;
      m(slot + 3, slot + 3) = m(slot, slot);
    }
    return m;
  });
}

std::vector<SpectrumPart> rank2_spectrum(ScalarFieldPtr nonzero) {
  return {{const_field_of(0.0), 4}, {std::move(nonzero), 2}};
}

// ---- parameter / slot plumbing ---------------------------------------------

std::map<std::string, double> merge_params(
    const std::map<std::string, double>& defaults,
    const std::map<std::string, double>& given) {
  std::map<std::string, double> out = defaults;
  for (const auto& [k, v] : given) {
    auto it = out.find(k);
    if (it == out.end())
      throw ConfigError("unknown parameter '" + k + "'");
    it->second = v;
  }
  return out;
}

FunctionDef resolve_slot(const SlotInfo& slot,
                         const std::map<std::string, std::string>& given) {
  auto it = given.find(slot.name);
  const std::string& text = it == given.end() ? slot.fallback : it->second;
  try {
    return parse_function(slot.name, {slot.var}, text);
  } catch (const Error& e) {
    throw ConfigError("function slot '" + slot.name + "': " + e.what());
  }
}

void reject_unknown_slots(const std::vector<SlotInfo>& slots,
                          const std::map<std::string, std::string>& given) {
  for (const auto& [name, text] : given) {
    bool known = false;
    for (const auto& s : slots)
      if (s.name == name) known = true;
    if (!known) throw ConfigError("unknown function slot '" + name + "'");
  }
}

Box make_box(double qlo, double qhi, double plo, double phi) {
  return {{qlo, qlo, qlo, plo, plo, plo}, {qhi, qhi, qhi, phi, phi, phi}};
}

// ---- catalog descriptions ---------------------------------------------------

const std::vector<ModelInfo>& catalog_infos() {
  static const std::vector<ModelInfo> infos = {
      {"constant-b",
       "uniform magnetic field b e_z on a Cartesian chart",
       {{"b", 1.0}},
       {},
       {"symmetric", "landau_x", "landau_y"}},
      {"undulator",
       "helical field of constant magnitude b3 with pitch a",
       {{"a", 2.0}, {"b3", 0.5}},
       {},
       {}},
      {"cyl-case1",
       "cylindrical chart, field tangent to the coordinate cylinders",
       {},
       {{"Aphi", "r", "r^2/2"},
        {"Az", "r", "cos(r)"},
        {"V", "r", "r^2/4"}},
       {}},
      {"cyl-case2",
       "cylindrical chart, angular potential split between r and z",
       {},
       {{"f2", "r", "r^2/2"},
        {"f3", "z", "cos(z)/4"},
        {"f4", "z", "sin(z)/2"},
        {"f5", "r", "r^2/4"}},
       {}},
      {"cyl-case3",
       "cylindrical chart, axial potential split between r and phi",
       {},
       {{"f1", "r", "r^2+3"},
        {"f2", "phi", "cos(phi)/2"},
        {"f3", "r", "r^2/8"},
        {"f4", "phi", "sin(phi)/2"}},
       {}},
      {"family-a",
       "integrable family with a momentum-linear integral (diagonal metric)",
       {{"b", 1.0}},
       {{"lam1", "y", "y/2 + 1/5"},
        {"lam2", "y", "1 + sin(y)^2/7"},
        {"mu1", "x", "1 + sin(x)/4"},
        {"mu2", "y", "1 + cos(y)^2/5"},
        {"mu3", "z", "1 + sin(z)^2/6"},
        {"mu4", "y", "y^2/3"}},
       {}},
      {"family-b",
       "integrable family with a momentum-quadratic integral (diagonal metric)",
       {},
       {{"psi1", "x", "1 + cos(x)^2/2"},
        {"psi2", "x", "2 + sin(x)"},
        {"nu1", "x", "1 + sin(x)^2/2"},
        {"nu2", "y", "1 + cos(y)^2/3"},
        {"nu3", "z", "1 + sin(z)^2/4"},
        {"nu4", "x", "x^2/2"}},
       {}},
  };
  return infos;
}

const ModelInfo& info_for(const std::string& id) {
  for (const auto& m : catalog_infos())
    if (m.id == id) return m;
  throw ConfigError("unknown model '" + id + "'");
}

// ---- constant-b -------------------------------------------------------------

ModelSpec build_constant_b(const std::map<std::string, double>& params,
                           std::string gauge) {
  const double b = params.at("b");
  if (gauge.empty()) gauge = "symmetric";

  Chart chart = cartesian_chart();
  const std::string bs = num_text(b);
  VectorPotential A;
  if (gauge == "symmetric")
    A.comp = {P("-" + bs + "*y/2"), P(bs + "*x/2"), num(0.0)};
  else if (gauge == "landau_x")
    A.comp = {P("-" + bs + "*y"), num(0.0), num(0.0)};
  else if (gauge == "landau_y")
    A.comp = {num(0.0), P(bs + "*x"), num(0.0)};
  else
    throw ConfigError("unknown gauge '" + gauge + "'");

  ModelSpec m;
  m.id = "constant-b";
  m.title = info_for(m.id).title;
  m.gauge = gauge;
  m.degenerate = b == 0.0;
  m.params = params;
  m.sys = make_system(chart, A, num(0.0), 0.5);
  m.b_declared = {const_field_of(0.0), const_field_of(0.0), const_field_of(b)};

  ScalarFieldPtr pix = pi_field(chart, A, 0);
  ScalarFieldPtr piy = pi_field(chart, A, 1);
  ScalarFieldPtr piz = pi_field(chart, A, 2);
  ScalarFieldPtr lz = lz_field(chart, A);

  auto h1 = make_scalar_field([chart, A, b](const auto& x) {
    return kinetic_momenta(chart, A, x)[0] + b * x[1];
  });
  auto h2 = make_scalar_field([chart, A, b](const auto& x) {
    return kinetic_momenta(chart, A, x)[1] - b * x[0];
  });
  auto h4 = make_scalar_field([chart, A, b](const auto& x) {
    auto pi = kinetic_momenta(chart, A, x);
    return x[0] * pi[1] - x[1] * pi[0] - (b / 2.0) * (x[0] * x[0] + x[1] * x[1]);
  });
  auto h5 = make_scalar_field([chart, A, b](const auto& x) {
    auto pi = kinetic_momenta(chart, A, x);
    auto ph = b * x[2] / pi[2];
    return -pi[0] * cos(ph) - pi[1] * sin(ph);
  });
  m.integrals = {
      {"H1", "Pi_x + b y", h1, {}},
      {"H2", "Pi_y - b x", h2, {}},
      {"H3", "Pi_z", piz, {}},
      {"H4", "L_z - (b/2) r^2", h4, {}},
      {"H5", "-Pi_x cos(b z/Pi_z) - Pi_y sin(b z/Pi_z)", h5, {piz}},
  };

  auto inv_of = [](ScalarFieldPtr f) {
    return make_scalar_field([f](const auto& x) { return 1.0 / f->value(x); });
  };
  ScalarFieldPtr r2_over_lz = make_scalar_field([chart, A](const auto& x) {
    auto pi = kinetic_momenta(chart, A, x);
    return (x[0] * x[0] + x[1] * x[1]) / (x[0] * pi[1] - x[1] * pi[0]);
  });

  auto k4 = make_operator_field([chart, A](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    std::array<S, 3> q{x[0], x[1], x[2]};
    auto pi = kinetic_momenta(chart, A, x);
    S X = x[0], Y = x[1];
    S lzv = X * pi[1] - Y * pi[0];
    auto d = [&](int i, int j) {
      return coord_partial(chart, *A.comp[static_cast<std::size_t>(j)], q, i);
    };
    S dxAx = d(0, 0), dyAx = d(1, 0), dxAy = d(0, 1), dyAy = d(1, 1),
      dxAz = d(0, 2), dyAz = d(1, 2);
    S f4 = -lzv + X * Y * (dxAx - dyAy) - X * X * dyAx + Y * Y * dxAy;
    S g4 = Y * (Y * dxAz - X * dyAz);
    S h4v = X * (X * dyAz - Y * dxAz);
    SmallMatrix<S> w(6, 6);
    w(0, 0) = Y * Y;
    w(0, 1) = -X * Y;
    w(1, 0) = -X * Y;
    w(1, 1) = X * X;
    w(3, 3) = Y * Y;
    w(3, 4) = -X * Y;
    w(4, 3) = -X * Y;
    w(4, 4) = X * X;
    w(3, 1) = f4;
    w(3, 2) = g4;
    w(4, 0) = -f4;
    w(4, 2) = h4v;
    w(5, 0) = -g4;
    w(5, 1) = -h4v;
    return inv(lzv) * w;
  });

  m.operators = {
      {"K1", "R-pattern on x scaled by 1/Pi_x",
       r_pattern_op(chart, A, 0, inv_of(pix)), {pix},
       rank2_spectrum(inv_of(pix)), false},
      {"K2", "R-pattern on y scaled by 1/Pi_y",
       r_pattern_op(chart, A, 1, inv_of(piy)), {piy},
       rank2_spectrum(inv_of(piy)), false},
      {"K3", "R-pattern on z scaled by 1/Pi_z",
       r_pattern_op(chart, A, 2, inv_of(piz)), {piz},
       rank2_spectrum(inv_of(piz)), false},
      {"K4", "angular operator scaled by 1/L_z", k4, {lz},
       rank2_spectrum(r2_over_lz), true},
  };

  m.chains = {{"K1", "H1"}, {"K2", "H2"}, {"K3", "H3"}, {"K4", "H4"}};
  m.algebra_pairs = {{"K1", "K3"}, {"K2", "K3"}, {"K3", "K4"}};
  m.involution = {{"H", "H1"}, {"H", "H2"}, {"H", "H3"}, {"H", "H4"},
                  {"H", "H5"}, {"H1", "H3"}, {"H2", "H3"}, {"H3", "H4"},
                  {"H1", "H5"}, {"H2", "H5"}};
  m.relations = {{"H1", "H2", b, ""}};
  m.sepinv = {{"H", "H3"}, {"H1", "H3"}, {"H2", "H3"}};

  // -- charts ---------------------------------------------------------------
  auto fwd1 = make_vector_function([chart, A, b](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    auto pi = kinetic_momenta(chart, A, x);
    return C6<S>{x[0], x[1], x[2], pi[0] + b * x[1], pi[1], pi[2]};
  });
  auto fwd2 = make_vector_function([chart, A, b](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    auto pi = kinetic_momenta(chart, A, x);
    return C6<S>{x[0], x[1], x[2], pi[0], pi[1] - b * x[0], pi[2]};
  });
  auto fwd3 = make_vector_function([chart, A, b](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    auto pi = kinetic_momenta(chart, A, x);
    S X = x[0], Y = x[1];
    S r2 = X * X + Y * Y;
    S r = sqrt(r2);
    return C6<S>{r,
                 atan2s(Y, X),
                 x[2],
                 (X * pi[0] + Y * pi[1]) / r,
                 X * pi[1] - Y * pi[0] - (b / 2.0) * r2,
                 pi[2]};
  });
  ScalarFieldPtr r2f = make_scalar_field(
      [](const auto& x) { return x[0] * x[0] + x[1] * x[1]; });

  ChartMapSpec c1;
  c1.name = "cartesian-x";
  c1.forward = fwd1;
  c1.avoid = {pix, piz};
  c1.field_match = {
      {"H", hatted_field("((p1-" + bs + "*q2)^2 + p2^2 + p3^2)/2")},
      {"H1", hatted_field("p1")},
      {"H3", hatted_field("p3")}};
  c1.diag_ops = {{"K1", 0, hatted_field("1/(p1-" + bs + "*q2)")},
                 {"K3", 2, hatted_field("1/p3")}};
  c1.sepinv = {{"H", "H1"}, {"H", "H3"}, {"H1", "H3"}};

  ChartMapSpec c2;
  c2.name = "cartesian-y";
  c2.forward = fwd2;
  c2.avoid = {piy, piz};
  c2.field_match = {
      {"H", hatted_field("(p1^2 + (p2+" + bs + "*q1)^2 + p3^2)/2")},
      {"H2", hatted_field("p2")},
      {"H3", hatted_field("p3")}};
  c2.diag_ops = {{"K2", 1, hatted_field("1/(p2+" + bs + "*q1)")},
                 {"K3", 2, hatted_field("1/p3")}};
  c2.sepinv = {{"H", "H2"}, {"H", "H3"}, {"H2", "H3"}};

  ChartMapSpec c3;
  c3.name = "cylindrical";
  c3.forward = fwd3;
  c3.avoid = {r2f, lz, piz};
  c3.field_match = {
      {"H",
       hatted_field("(p1^2 + (p2+" + bs + "/2*q1^2)^2/q1^2 + p3^2)/2")},
      {"H3", hatted_field("p3")},
      {"H4", hatted_field("p2")}};
  c3.diag_ops = {{"K3", 2, hatted_field("1/p3")},
                 {"K4", 1, hatted_field("2*q1^2/(2*p2+" + bs + "*q1^2)")}};
  c3.sepinv = {{"H", "H3"}, {"H", "H4"}, {"H3", "H4"}};
  m.charts = {c1, c2, c3};

  // -- Staeckel attachments ---------------------------------------------------
  const std::array<std::string, 3> qn{"q1", "q2", "q3"};
  const std::array<std::string, 3> pn{"p1", "p2", "p3"};

  if (b != 0.0) {
    StackelAttachment s1;
    s1.name = "sm1";
    s1.spec = make_stackel(
        qn, pn,
        {{{"0", "1", "0"}, {"1", "2*" + bs + "*q2", "-1"}, {"0", "0", "1"}}},
        {"p1", "p2^2 + " + bs + "^2*q2^2", "p3^2"});
    s1.to_chart = fwd1;
    s1.avoid = {hatted_field("2*" + bs + "*q2")};
    s1.declared = {hatted_field("(p1-" + bs + "*q2)^2 + p2^2 + p3^2 - p1^2"),
                   hatted_field("p1"), hatted_field("p3^2")};
    s1.declared_names = {"Ht1", "Ht2", "Ht3"};
    m.stackels.push_back(std::move(s1));

    StackelAttachment s2;
    s2.name = "sm2";
    s2.spec = make_stackel(
        qn, pn,
        {{{"1", "-2*" + bs + "*q1", "-1"}, {"0", "1", "0"}, {"0", "0", "1"}}},
        {"p1^2 + " + bs + "^2*q1^2", "p2", "p3"});
    s2.to_chart = fwd2;
    s2.avoid = {hatted_field("2*" + bs + "*q1")};
    s2.declared = {hatted_field("p1^2 + 2*" + bs + "*q1*p2 + p3 + " + bs +
                                "^2*q1^2"),
                   hatted_field("p2"), hatted_field("p3")};
    s2.declared_names = {"Ht1", "Ht2", "Ht3"};
    m.stackels.push_back(std::move(s2));
  }

  StackelAttachment s3;
  s3.name = "sm3";
  s3.spec = make_stackel(
      qn, pn, {{{"1", "-1/q1^2", "-1"}, {"0", "1", "0"}, {"0", "0", "1"}}},
      {"p1^2 + " + bs + "^2*q1^2/4", "p2^2", "p3^2"});
  s3.to_chart = fwd3;
  s3.avoid = {hatted_field("q1")};
  s3.declared = {
      hatted_field("p1^2 + (p2+" + bs + "/2*q1^2)^2/q1^2 + p3^2 - " + bs +
                   "*p2"),
      hatted_field("p2^2"), hatted_field("p3^2")};
  s3.declared_names = {"Ht1", "Ht2", "Ht3"};
  m.stackels.push_back(std::move(s3));

  m.box = make_box(-1.1, 1.1, 0.55, 1.65);
  m.sim_x0 = {0.8, 0.2, 0.3, 0.3, 0.2, 1.2};
  return m;
}

// ---- undulator ---------------------------------------------------------------

ModelSpec build_undulator(const std::map<std::string, double>& params) {
  const double a = params.at("a");
  const double b3 = params.at("b3");
  if (a == 0.0) throw ConfigError("parameter a must be nonzero");
  if (b3 == 0.0)
    throw ConfigError("parameter b3 must be nonzero (attachments singular)");

  Chart chart = cartesian_chart();
  const std::string as = num_text(a), b3s = num_text(b3);
  VectorPotential A;
  A.comp = {P("-" + as + "*" + b3s + "/2*cos(2*z/" + as + ")"),
            P(as + "*" + b3s + "/2*sin(2*z/" + as + ")"), num(0.0)};

  ModelSpec m;
  m.id = "undulator";
  m.title = info_for(m.id).title;
  m.params = params;
  m.sys = make_system(chart, A, num(0.0), 0.5);
  m.b_declared = {
      make_scalar_field([a, b3](const auto& x) {
        return -b3 * cos(2.0 * x[2] / a);
      }),
      make_scalar_field([a, b3](const auto& x) {
        return b3 * sin(2.0 * x[2] / a);
      }),
      const_field_of(0.0)};

  ScalarFieldPtr pix = pi_field(chart, A, 0);
  ScalarFieldPtr piy = pi_field(chart, A, 1);
  ScalarFieldPtr piz = pi_field(chart, A, 2);

  auto h1 = make_scalar_field([chart, A, a, b3](const auto& x) {
    return kinetic_momenta(chart, A, x)[0] + (a * b3 / 2.0) * cos(2.0 * x[2] / a);
  });
  auto h2 = make_scalar_field([chart, A, a, b3](const auto& x) {
    return kinetic_momenta(chart, A, x)[1] - (a * b3 / 2.0) * sin(2.0 * x[2] / a);
  });
  auto h3 = make_scalar_field([chart, A, a, b3](const auto& x) {
    auto pi = kinetic_momenta(chart, A, x);
    auto w = x[1] * cos(2.0 * x[2] / a) + x[0] * sin(2.0 * x[2] / a);
    return x[0] * pi[1] - x[1] * pi[0] - (a / 2.0) * pi[2] - (a * b3 / 2.0) * w;
  });
  m.integrals = {
      {"H1", "Pi_x + (a b3/2) cos(2z/a)", h1, {}},
      {"H2", "Pi_y - (a b3/2) sin(2z/a)", h2, {}},
      {"H3", "L_z - (a/2) Pi_z - (a b3/2) r sin(phi+2z/a)", h3, {}},
  };

  auto inv_of = [](ScalarFieldPtr f) {
    return make_scalar_field([f](const auto& x) { return 1.0 / f->value(x); });
  };
  ScalarFieldPtr dfield = make_scalar_field([chart, A, a](const auto& x) {
    auto pi = kinetic_momenta(chart, A, x);
    auto lz = x[0] * pi[1] - x[1] * pi[0];
    auto r2 = x[0] * x[0] + x[1] * x[1];
    return a * lz - 2.0 * r2 * pi[2];
  });
  ScalarFieldPtr k5_eigen = make_scalar_field([chart, A, a](const auto& x) {
    auto pi = kinetic_momenta(chart, A, x);
    auto lz = x[0] * pi[1] - x[1] * pi[0];
    auto r2 = x[0] * x[0] + x[1] * x[1];
    return 2.0 * a * r2 / (a * lz - 2.0 * r2 * pi[2]);
  });

  auto k5 = make_operator_field([chart, A, a](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    std::array<S, 3> q{x[0], x[1], x[2]};
    auto pi = kinetic_momenta(chart, A, x);
    S X = x[0], Y = x[1];
    S r2 = X * X + Y * Y;
    S lzv = X * pi[1] - Y * pi[0];
    S D = a * lzv - 2.0 * r2 * pi[2];
    auto d = [&](int i, int j) {
      return coord_partial(chart, *A.comp[static_cast<std::size_t>(j)], q, i);
    };
    S dxAx = d(0, 0), dxAy = d(0, 1), dyAy = d(1, 1), dxAz = d(0, 2),
      dyAz = d(1, 2), dzAx = d(2, 0), dzAy = d(2, 1), dzAz = d(2, 2);
    S f5 = (a / 2.0) * (a * X * dzAx + a * Y * dzAy +
                        2.0 * (X * Y * (dxAx - dyAy) + (Y * Y - X * X) * dxAy -
                               lzv));
    S g5 = (a * a / 2.0) * Y * dzAz - a * r2 * dzAx + a * Y * Y * dxAz -
           a * X * Y * dyAz - 2.0 * Y * r2 * dxAx + 2.0 * X * r2 * dxAy +
           2.0 * r2 * pi[1];
    S h5 = -(a * a / 2.0) * X * dzAz - a * r2 * dzAy + a * X * X * dyAz -
           a * X * Y * dxAz + 2.0 * X * r2 * dyAy - 2.0 * Y * r2 * dxAy -
           2.0 * r2 * pi[0];
    SmallMatrix<S> w(6, 6);
    w(0, 0) = a * Y * Y;
    w(0, 1) = -a * X * Y;
    w(0, 2) = 2.0 * Y * r2;
    w(1, 0) = -a * X * Y;
    w(1, 1) = a * X * X;
    w(1, 2) = -2.0 * X * r2;
    w(2, 0) = (a * a / 2.0) * Y;
    w(2, 1) = -(a * a / 2.0) * X;
    w(2, 2) = a * r2;
    w(3, 1) = f5;
    w(3, 2) = g5;
    w(3, 3) = a * Y * Y;
    w(3, 4) = -a * X * Y;
    w(3, 5) = (a * a / 2.0) * Y;
    w(4, 0) = -f5;
    w(4, 2) = h5;
    w(4, 3) = -a * X * Y;
    w(4, 4) = a * X * X;
    w(4, 5) = -(a * a / 2.0) * X;
    w(5, 0) = -g5;
    w(5, 1) = -h5;
    w(5, 3) = 2.0 * Y * r2;
    w(5, 4) = -2.0 * X * r2;
    w(5, 5) = a * r2;
    return inv(D) * w;
  });

  ScalarFieldPtr r2f = make_scalar_field(
      [](const auto& x) { return x[0] * x[0] + x[1] * x[1]; });

  m.operators = {
      {"K1", "R-pattern on x scaled by 1/Pi_x",
       r_pattern_op(chart, A, 0, inv_of(pix)), {pix},
       rank2_spectrum(inv_of(pix)), false},
      {"K2", "R-pattern on y scaled by 1/Pi_y",
       r_pattern_op(chart, A, 1, inv_of(piy)), {piy},
       rank2_spectrum(inv_of(piy)), false},
      {"K5", "helical operator scaled by 1/(a L_z - 2 r^2 Pi_z)", k5,
       {dfield, r2f}, rank2_spectrum(k5_eigen), true},
  };

  m.chains = {{"K1", "H1"}, {"K2", "H2"}, {"K5", "H3"}};
  m.algebra_pairs = {{"K1", "K2"}};
  m.involution = {{"H", "H1"}, {"H", "H2"}, {"H", "H3"}, {"H1", "H2"}};
  m.relations = {{"H1", "H3", -1.0, "H2"}, {"H2", "H3", 1.0, "H1"}};

  // -- charts ---------------------------------------------------------------
  auto fwd_dh = make_vector_function([chart, A, a, b3](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    auto pi = kinetic_momenta(chart, A, x);
    S c = (a * b3 / 2.0) * cos(2.0 * x[2] / a);
    S s = (a * b3 / 2.0) * sin(2.0 * x[2] / a);
    return C6<S>{x[0], x[1], x[2], pi[0] + c, pi[1] - s, pi[2]};
  });
  auto fwd_partial = make_vector_function([chart, A, a, b3](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    auto pi = kinetic_momenta(chart, A, x);
    S X = x[0], Y = x[1], Z = x[2];
    S r2 = X * X + Y * Y;
    S r = sqrt(r2);
    S phi = atan2s(Y, X);
    S pr = (X * pi[0] + Y * pi[1]) / r;
    S pphi = X * pi[1] - Y * pi[0];
    S w = Y * cos(2.0 * Z / a) + X * sin(2.0 * Z / a);
    S half = pi[2] / 2.0 + (b3 / 2.0) * w;
    return C6<S>{r, (a / 2.0) * phi + Z, (a / 2.0) * phi - Z, pr,
                 pphi / a + half, pphi / a - half};
  });

  const std::string cz = as + "*" + b3s + "/2*cos(2*q3/" + as + ")";
  const std::string sz = as + "*" + b3s + "/2*sin(2*q3/" + as + ")";
  ChartMapSpec cdh;
  cdh.name = "dh";
  cdh.forward = fwd_dh;
  cdh.avoid = {pix, piy};
  cdh.field_match = {
      {"H", hatted_field("((p1-" + cz + ")^2 + (p2+" + sz + ")^2 + p3^2)/2")},
      {"H1", hatted_field("p1")},
      {"H2", hatted_field("p2")}};
  cdh.diag_ops = {{"K1", 0, hatted_field("1/(p1-" + cz + ")")},
                  {"K2", 1, hatted_field("1/(p2+" + sz + ")")}};
  cdh.sepinv = {{"H", "H1"}, {"H", "H2"}, {"H1", "H2"}};

  ChartMapSpec cpart;
  cpart.name = "partial";
  cpart.forward = fwd_partial;
  cpart.avoid = {r2f, dfield};
  cpart.field_match = {
      {"H", hatted_field("(" + as + "^2*(p2+p3)^2 + 4*" + b3s +
                         "*q1^3*sin(2*q2/" + as + ")*(" + b3s +
                         "*q1*sin(2*q2/" + as +
                         ") - 2*p2 + 2*p3) + 4*q1^2*(p1^2 + (p2-p3)^2))/(8*q1^2)")},
      {"H3", hatted_field(as + "*p3")}};
  cpart.offdiag_ops = {"K5"};
  cpart.sepinv = {{"H", "H3"}};
  cpart.ignorable_coord = 2;
  m.charts = {cdh, cpart};

  // -- Staeckel attachment ----------------------------------------------------
  StackelAttachment s4;
  s4.name = "sm4";
  s4.spec = make_stackel(
      {"q1", "q2", "q3"}, {"p1", "p2", "p3"},
      {{{"0", "1", "0"},
        {"0", "0", "1"},
        {"1", as + "*" + b3s + "*cos(2*q3/" + as + ")",
         "-" + as + "*" + b3s + "*sin(2*q3/" + as + ")"}}},
      {"p1", "p2", "p3^2"});
  s4.to_chart = fwd_dh;
  s4.avoid = {hatted_field(as + "*" + b3s + "*cos(2*q3/" + as + ")"),
              hatted_field(as + "*" + b3s + "*sin(2*q3/" + as + ")")};
  s4.declared = {
      hatted_field("p3^2 - " + as + "*" + b3s + "*cos(2*q3/" + as +
                   ")*p1 + " + as + "*" + b3s + "*sin(2*q3/" + as + ")*p2"),
      hatted_field("p1"), hatted_field("p2")};
  s4.declared_names = {"Ht1", "Ht2", "Ht3"};
  m.stackels = {std::move(s4)};

  m.box = make_box(-1.1, 1.1, 0.6, 1.6);
  m.sim_x0 = {0.4, 0.3, 0.1, 0.8, 0.7, 1.2};
  return m;
}

// ---- cylindrical case 1 -------------------------------------------------------

ModelSpec build_case1(const std::map<std::string, std::string>& fns) {
  const ModelInfo& info = info_for("cyl-case1");
  reject_unknown_slots(info.slots, fns);
  FunctionDef aphi = resolve_slot(info.slots[0], fns);
  FunctionDef az = resolve_slot(info.slots[1], fns);
  FunctionDef vv = resolve_slot(info.slots[2], fns);

  Chart chart = cylindrical_chart();
  VectorPotential A;
  A.comp = {num(0.0), aphi.body, az.body};

  ModelSpec m;
  m.id = "cyl-case1";
  m.title = info.title;
  m.functions = {aphi, az, vv};
  m.sys = make_system(chart, A, vv.body, 0.5);
  m.b_declared = {
      const_field_of(0.0),
      make_scalar_field([az](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        std::array<HyperDual<S>, 1> r{HyperDual<S>::seeded(x[0], 1)};
        return -eval_function<HyperDual<S>>(az, {r.data(), 1}).d1;
      }),
      make_scalar_field([aphi](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        std::array<HyperDual<S>, 1> r{HyperDual<S>::seeded(x[0], 1)};
        return eval_function<HyperDual<S>>(aphi, {r.data(), 1}).d1 / x[0];
      })};

  ScalarFieldPtr piphi = pi_field(chart, A, 1);
  ScalarFieldPtr piz = pi_field(chart, A, 2);
  m.integrals = {{"H2", "p_phi", p_field(1), {}},
                 {"H3", "p_z", p_field(2), {}}};

  ScalarFieldPtr k2_eigen = make_scalar_field([piphi](const auto& x) {
    return x[0] * x[0] / piphi->value(x);
  });
  ScalarFieldPtr k3_eigen = make_scalar_field(
      [piz](const auto& x) { return 1.0 / piz->value(x); });
  m.operators = {
      {"K2", "(r^2/Pi_phi) projector onto the phi pair",
       diag_op({{1, k2_eigen}}), {piphi}, rank2_spectrum(k2_eigen), true},
      {"K3", "(1/Pi_z) projector onto the z pair", diag_op({{2, k3_eigen}}),
       {piz}, rank2_spectrum(k3_eigen), true},
  };
  m.chains = {{"K2", "H2"}, {"K3", "H3"}};
  m.algebra_pairs = {{"K2", "K3"}};
  m.involution = {{"H", "H2"}, {"H", "H3"}, {"H2", "H3"}};
  m.sepinv = m.involution;

  HJSpec hj;
  hj.h_names = {"H", "H2", "H3"};
  hj.slot[0].radicand = [aphi, az, vv](double r,
                                       const std::array<double, 3>& h) {
    double ap = eval1(aphi, r), a3 = eval1(az, r), v = eval1(vv, r);
    double t = (h[1] + ap) / r;
    return 2.0 * h[0] - t * t - (h[2] + a3) * (h[2] + a3) - 2.0 * v;
  };
  hj.slot[1] = {true, 1, {}};
  hj.slot[2] = {true, 2, {}};
  m.hj = hj;

  m.box = {{0.6, -2.5, -1.2, 0.55, 0.55, 0.55}, {1.9, 2.5, 1.2, 1.65, 1.65, 1.65}};
  m.sim_x0 = {1.2, 0.3, 0.2, 0.7, 0.9, 1.1};
  return m;
}

// ---- cylindrical case 2 -------------------------------------------------------

ModelSpec build_case2(const std::map<std::string, std::string>& fns) {
  const ModelInfo& info = info_for("cyl-case2");
  reject_unknown_slots(info.slots, fns);
  FunctionDef f2 = resolve_slot(info.slots[0], fns);
  FunctionDef f3 = resolve_slot(info.slots[1], fns);
  FunctionDef f4 = resolve_slot(info.slots[2], fns);
  FunctionDef f5 = resolve_slot(info.slots[3], fns);

  Chart chart = cylindrical_chart();
  VectorPotential A;
  A.comp = {num(0.0), eadd(f2.body, emul(P("r^2"), f3.body)), num(0.0)};
  // V = f5(r) + f4(z) - r^2 f3(z)^2/2 - f2(r) f3(z)
  ExprPtr V = esub(esub(eadd(f5.body, f4.body),
                        ediv(emul(P("r^2"), epow(f3.body, num(2.0))), num(2.0))),
                   emul(f2.body, f3.body));

  ModelSpec m;
  m.id = "cyl-case2";
  m.title = info.title;
  m.functions = {f2, f3, f4, f5};
  m.sys = make_system(chart, A, V, 0.5);

  auto d1 = [](const FunctionDef& f) {
    return [f](const auto& v) {
      using S = std::decay_t<decltype(v)>;
      std::array<HyperDual<S>, 1> r{HyperDual<S>::seeded(v, 1)};
      return eval_function<HyperDual<S>>(f, {r.data(), 1}).d1;
    };
  };
  m.b_declared = {
      make_scalar_field([df3 = d1(f3)](const auto& x) {
        return -x[0] * df3(x[2]);
      }),
      const_field_of(0.0),
      make_scalar_field([df2 = d1(f2), f3](const auto& x) {
        return df2(x[0]) / x[0] + 2.0 * eval1(f3, x[2]);
      })};

  ScalarFieldPtr piphi = pi_field(chart, A, 1);
  auto h3 = make_scalar_field([f3, f4](const auto& x) {
    return x[5] * x[5] / 2.0 + eval1(f3, x[2]) * x[4] + eval1(f4, x[2]);
  });
  m.integrals = {{"H2", "p_phi", p_field(1), {}},
                 {"H3", "p_z^2/2 + f3 p_phi + f4", h3, {}}};

  ScalarFieldPtr k2_eigen = make_scalar_field([piphi](const auto& x) {
    return x[0] * x[0] / piphi->value(x);
  });
  ScalarFieldPtr k3_eigen = make_scalar_field([piphi, f3](const auto& x) {
    return x[0] * x[0] * eval1(f3, x[2]) / piphi->value(x);
  });
  ScalarFieldPtr k3_gap = make_scalar_field([k3_eigen](const auto& x) {
    return k3_eigen->value(x) - 1.0;
  });
  m.operators = {
      {"K2", "(r^2/Pi_phi) projector onto the phi pair",
       diag_op({{1, k2_eigen}}), {piphi}, rank2_spectrum(k2_eigen), true},
      {"K3", "(r^2 f3/Pi_phi) phi-pair + z-pair projector",
       diag_op({{1, k3_eigen}, {2, const_field_of(1.0)}}),
       {piphi, k3_eigen, k3_gap},
       {{const_field_of(0.0), 2}, {k3_eigen, 2}, {const_field_of(1.0), 2}},
       true},
  };
  m.chains = {{"K2", "H2"}, {"K3", "H3"}};
  m.algebra_pairs = {{"K2", "K3"}};
  m.involution = {{"H", "H2"}, {"H", "H3"}, {"H2", "H3"}};
  m.sepinv = m.involution;

  HJSpec hj;
  hj.h_names = {"H", "H2", "H3"};
  hj.slot[0].radicand = [f2, f5](double r, const std::array<double, 3>& h) {
    double t = (h[1] + eval1(f2, r)) / r;
    return 2.0 * h[0] - 2.0 * h[2] - t * t - 2.0 * eval1(f5, r);
  };
  hj.slot[1] = {true, 1, {}};
  hj.slot[2].radicand = [f3, f4](double z, const std::array<double, 3>& h) {
    return 2.0 * (h[2] - eval1(f3, z) * h[1] - eval1(f4, z));
  };
  m.hj = hj;

  m.box = {{0.6, -2.5, -1.0, 0.55, 0.55, 0.55}, {1.8, 2.5, 1.0, 1.65, 1.65, 1.65}};
  m.sim_x0 = {1.1, 0.2, 0.3, 0.8, 0.9, 1.0};
  return m;
}

// ---- cylindrical case 3 -------------------------------------------------------

ModelSpec build_case3(const std::map<std::string, std::string>& fns) {
  const ModelInfo& info = info_for("cyl-case3");
  reject_unknown_slots(info.slots, fns);
  FunctionDef f1 = resolve_slot(info.slots[0], fns);
  FunctionDef f2 = resolve_slot(info.slots[1], fns);
  FunctionDef f3 = resolve_slot(info.slots[2], fns);
  FunctionDef f4 = resolve_slot(info.slots[3], fns);

  Chart chart = cylindrical_chart();
  VectorPotential A;
  A.comp = {num(0.0), num(0.0), eadd(f1.body, ediv(f2.body, P("r^2")))};
  // V = f3(r) - f1 f2/r^2 - f2^2/(2 r^4) + f4(phi)/r^2
  ExprPtr V = eadd(esub(esub(f3.body, ediv(emul(f1.body, f2.body), P("r^2"))),
                        ediv(epow(f2.body, num(2.0)), emul(num(2.0), P("r^4")))),
                   ediv(f4.body, P("r^2")));

  ModelSpec m;
  m.id = "cyl-case3";
  m.title = info.title;
  m.functions = {f1, f2, f3, f4};
  m.sys = make_system(chart, A, V, 0.5);

  auto d1 = [](const FunctionDef& f) {
    return [f](const auto& v) {
      using S = std::decay_t<decltype(v)>;
      std::array<HyperDual<S>, 1> r{HyperDual<S>::seeded(v, 1)};
      return eval_function<HyperDual<S>>(f, {r.data(), 1}).d1;
    };
  };
  m.b_declared = {
      make_scalar_field([df2 = d1(f2)](const auto& x) {
        return df2(x[1]) / (x[0] * x[0] * x[0]);
      }),
      make_scalar_field([df1 = d1(f1), f2](const auto& x) {
        return -df1(x[0]) + 2.0 * eval1(f2, x[1]) / (x[0] * x[0] * x[0]);
      }),
      const_field_of(0.0)};

  ScalarFieldPtr piz = pi_field(chart, A, 2);
  auto h2 = make_scalar_field([f2, f4](const auto& x) {
    return x[4] * x[4] / 2.0 + eval1(f2, x[1]) * x[5] + eval1(f4, x[1]);
  });
  m.integrals = {{"H2", "p_phi^2/2 + f2 p_z + f4", h2, {}},
                 {"H3", "p_z", p_field(2), {}}};

  ScalarFieldPtr r2f = make_scalar_field(
      [](const auto& x) { return x[0] * x[0]; });
  ScalarFieldPtr k2_zeigen = make_scalar_field([piz, f2](const auto& x) {
    return eval1(f2, x[1]) / piz->value(x);
  });
  ScalarFieldPtr k2_gap = make_scalar_field([k2_zeigen](const auto& x) {
    return x[0] * x[0] - k2_zeigen->value(x);
  });
  ScalarFieldPtr k3_eigen = make_scalar_field(
      [piz](const auto& x) { return 1.0 / piz->value(x); });
  m.operators = {
      {"K2", "r^2 phi-pair + (f2/Pi_z) z-pair projector",
       diag_op({{1, r2f}, {2, k2_zeigen}}), {piz, k2_zeigen, k2_gap},
       {{const_field_of(0.0), 2}, {r2f, 2}, {k2_zeigen, 2}}, true},
      {"K3", "(1/Pi_z) projector onto the z pair", diag_op({{2, k3_eigen}}),
       {piz}, rank2_spectrum(k3_eigen), true},
  };
  m.chains = {{"K2", "H2"}, {"K3", "H3"}};
  m.algebra_pairs = {{"K2", "K3"}};
  m.involution = {{"H", "H2"}, {"H", "H3"}, {"H2", "H3"}};
  m.sepinv = m.involution;

  // Staeckel form on the native chart avoiding division by A_z
  ScalarFieldPtr azf = make_scalar_field([f1, f2](const auto& x) {
    return eval1(f1, x[0]) + eval1(f2, x[1]) / (x[0] * x[0]);
  });
  StackelAttachment rem;
  rem.name = "remark";
  StackelSpec sp;
  sp.qnames = {"q1", "q2", "q3"};
  sp.pnames = {"p1", "p2", "p3"};
  sp.entry[0][0] = fn_of("S11", {"q1"}, num(1.0));
  sp.entry[0][1] = fn_of("S12", {"q1"}, P("-1/q1^2"));
  sp.entry[0][2] = fn_of("S13", {"q1"}, eneg(subst_var(f1.body, "r", "q1")));
  sp.entry[1][0] = fn_of("S21", {"q2"}, num(0.0));
  sp.entry[1][1] = fn_of("S22", {"q2"}, num(1.0));
  sp.entry[1][2] = fn_of("S23", {"q2"}, eneg(subst_var(f2.body, "phi", "q2")));
  sp.entry[2][0] = fn_of("S31", {"q3"}, num(0.0));
  sp.entry[2][1] = fn_of("S32", {"q3"}, num(0.0));
  sp.entry[2][2] = fn_of("S33", {"q3"}, num(1.0));
  sp.f[0] = fn_of("F1", {"q1", "p1"},
                  eadd(P("p1^2/2"),
                       eadd(ediv(epow(subst_var(f1.body, "r", "q1"), num(2.0)),
                                 num(2.0)),
                            subst_var(f3.body, "r", "q1"))));
  sp.f[1] = fn_of("F2", {"q2", "p2"},
                  eadd(P("p2^2/2"), subst_var(f4.body, "phi", "q2")));
  sp.f[2] = fn_of("F3", {"q3", "p3"}, P("p3"));
  validate_stackel(sp);
  rem.spec = sp;
  rem.to_chart = make_vector_function([](const auto& x) { return x; });
  rem.avoid = {make_scalar_field([](const auto& x) { return x[0]; }), azf};
  rem.declared = {
      make_scalar_field([f1, f2, f3, f4](const auto& x) {
        auto a3 = eval1(f1, x[0]) + eval1(f2, x[1]) / (x[0] * x[0]);
        auto v = eval1(f3, x[0]) -
                 eval1(f1, x[0]) * eval1(f2, x[1]) / (x[0] * x[0]) -
                 eval1(f2, x[1]) * eval1(f2, x[1]) /
                     (2.0 * x[0] * x[0] * x[0] * x[0]) +
                 eval1(f4, x[1]) / (x[0] * x[0]);
        return x[3] * x[3] / 2.0 + x[4] * x[4] / (2.0 * x[0] * x[0]) +
               x[5] * a3 + a3 * a3 / 2.0 + v;
      }),
      h2, p_field(2)};
  rem.declared_names = {"Ht1", "Ht2", "Ht3"};
  m.stackels = {std::move(rem)};

  m.periodic = {{"f2", f2, 2.0 * std::acos(-1.0)},
                {"f4", f4, 2.0 * std::acos(-1.0)}};

  HJSpec hj;
  hj.h_names = {"H", "H2", "H3"};
  hj.slot[0].radicand = [f1, f3](double r, const std::array<double, 3>& h) {
    double v1 = eval1(f1, r);
    return 2.0 * h[0] - 2.0 * h[1] / (r * r) - h[2] * h[2] -
           2.0 * h[2] * v1 - v1 * v1 - 2.0 * eval1(f3, r);
  };
  hj.slot[1].radicand = [f2, f4](double phi, const std::array<double, 3>& h) {
    return 2.0 * (h[1] - eval1(f2, phi) * h[2] - eval1(f4, phi));
  };
  hj.slot[2] = {true, 2, {}};
  m.hj = hj;

  m.box = {{0.5, -2.5, -1.2, 0.55, 0.55, 0.55}, {1.8, 2.5, 1.2, 1.65, 1.65, 1.65}};
  m.sim_x0 = {1.0, 0.4, 0.1, 0.8, 1.0, 0.9};
  return m;
}

// ---- family A ----------------------------------------------------------------

ModelSpec build_family_a(const std::map<std::string, double>& params,
                         const std::map<std::string, std::string>& fns) {
  const ModelInfo& info = info_for("family-a");
  reject_unknown_slots(info.slots, fns);
  const double b = params.at("b");
  if (b == 0.0)
    throw ConfigError("parameter b must be nonzero (attachment singular)");
  FunctionDef lam1 = resolve_slot(info.slots[0], fns);
  FunctionDef lam2 = resolve_slot(info.slots[1], fns);
  FunctionDef mu1 = resolve_slot(info.slots[2], fns);
  FunctionDef mu2 = resolve_slot(info.slots[3], fns);
  FunctionDef mu3 = resolve_slot(info.slots[4], fns);
  FunctionDef mu4 = resolve_slot(info.slots[5], fns);

  Chart chart = cartesian_chart();
  chart.metric[0] = ediv(num(1.0), epow(mu1.body, num(2.0)));
  chart.metric[1] = ediv(num(1.0), mu2.body);
  chart.metric[2] = ediv(num(1.0), emul(lam2.body, mu3.body));
  chart.positivity = {epow(mu1.body, num(2.0)), mu2.body,
                      emul(lam2.body, mu3.body)};
  VectorPotential A;
  A.comp = {eneg(ediv(emul(num(b), lam1.body), emul(num(2.0), mu1.body))),
            num(0.0), num(0.0)};
  // V = b^2 (mu4 - lam1^2/4)
  ExprPtr V = emul(num(b * b),
                   esub(mu4.body, ediv(epow(lam1.body, num(2.0)), num(4.0))));

  ModelSpec m;
  m.id = "family-a";
  m.title = info.title;
  m.params = params;
  m.functions = {lam1, lam2, mu1, mu2, mu3, mu4};
  m.sys = make_system(chart, A, V, 1.0);

  auto d1 = [](const FunctionDef& f) {
    return [f](const auto& v) {
      using S = std::decay_t<decltype(v)>;
      std::array<HyperDual<S>, 1> r{HyperDual<S>::seeded(v, 1)};
      return eval_function<HyperDual<S>>(f, {r.data(), 1}).d1;
    };
  };
  m.b_declared = {const_field_of(0.0), const_field_of(0.0),
                  make_scalar_field([b, dl1 = d1(lam1), mu2](const auto& x) {
                    return (b / 2.0) * dl1(x[1]) * sqrt(eval1(mu2, x[1]));
                  })};

  ScalarFieldPtr pix = pi_field(chart, A, 0);
  auto h1 = make_scalar_field([chart, A, b, mu1, lam1](const auto& x) {
    return eval1(mu1, x[0]) * kinetic_momenta(chart, A, x)[0] +
           (b / 2.0) * eval1(lam1, x[1]);
  });
  auto h2 = make_scalar_field([chart, A, mu3](const auto& x) {
    auto piz = kinetic_momenta(chart, A, x)[2];
    return eval1(mu3, x[2]) * piz * piz;
  });
  m.integrals = {{"H1", "mu1 Pi_x + (b/2) lam1", h1, {}},
                 {"H2", "mu3 Pi_z^2", h2, {}}};

  ScalarFieldPtr k1_eigen = make_scalar_field([chart, A, mu1](const auto& x) {
    return 1.0 / (2.0 * eval1(mu1, x[0]) * kinetic_momenta(chart, A, x)[0]);
  });
  ScalarFieldPtr lam2f = make_scalar_field(
      [lam2](const auto& x) { return eval1(lam2, x[1]); });
  ScalarFieldPtr k2_eigen = make_scalar_field(
      [lam2](const auto& x) { return 1.0 / eval1(lam2, x[1]); });
  m.operators = {
      {"K1", "R-pattern on x scaled by 1/(2 mu1 Pi_x)",
       r_pattern_op(chart, A, 0, k1_eigen), {pix},
       rank2_spectrum(k1_eigen), true},
      {"K2", "R-pattern on z scaled by 1/lam2",
       r_pattern_op(chart, A, 2, k2_eigen), {lam2f},
       rank2_spectrum(k2_eigen), true},
  };
  m.chains = {{"K1", "H1"}, {"K2", "H2"}};
  m.algebra_pairs = {{"K1", "K2"}};
  m.involution = {{"H", "H1"}, {"H", "H2"}, {"H1", "H2"}};

  // hatted chart: p1 picks up the shift b lam1/(2 mu1)
  auto fwd = make_vector_function([chart, A, b, lam1, mu1](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    auto pi = kinetic_momenta(chart, A, x);
    S sh = b * eval1(lam1, x[1]) / (2.0 * eval1(mu1, x[0]));
    return C6<S>{x[0], x[1], x[2], pi[0] + sh, pi[1], pi[2]};
  });

  auto hat1 = make_scalar_field([b, lam1, mu1, mu2, mu3, lam2, mu4](
                                    const auto& x) {
    auto l1 = eval1(lam1, x[1]);
    return -b * l1 * eval1(mu1, x[0]) * x[3] + eval1(mu2, x[1]) * x[4] * x[4] +
           eval1(lam2, x[1]) * eval1(mu3, x[2]) * x[5] * x[5] +
           b * b * eval1(mu4, x[1]);
  });
  auto hat2 = make_scalar_field(
      [mu1](const auto& x) { return eval1(mu1, x[0]) * x[3]; });
  auto hat3 = make_scalar_field(
      [mu3](const auto& x) { return eval1(mu3, x[2]) * x[5] * x[5]; });

  ChartMapSpec aux;
  aux.name = "aux";
  aux.forward = fwd;
  aux.avoid = {pix,
               make_scalar_field([lam2](const auto& x) {
                 return eval1(lam2, x[1]);
               })};
  aux.field_match = {
      {"H", make_scalar_field([hat1, hat2](const auto& x) {
         auto v = hat2->value(x);
         return hat1->value(x) + v * v;
       })},
      {"H1", hat2},
      {"H2", hat3}};
  aux.diag_ops = {
      {"K1", 0, make_scalar_field([b, mu1, lam1](const auto& x) {
         return 1.0 /
                (2.0 * eval1(mu1, x[0]) * x[3] - b * eval1(lam1, x[1]));
       })},
      {"K2", 2, make_scalar_field([lam2](const auto& x) {
         return 1.0 / eval1(lam2, x[1]);
       })}};
  m.charts = {aux};

  StackelAttachment g1;
  g1.name = "gsm1";
  StackelSpec sp;
  sp.qnames = {"q1", "q2", "q3"};
  sp.pnames = {"p1", "p2", "p3"};
  sp.entry[0][0] = fn_of("S11", {"q1"}, num(0.0));
  sp.entry[0][1] = fn_of("S12", {"q1"}, num(1.0));
  sp.entry[0][2] = fn_of("S13", {"q1"}, num(0.0));
  sp.entry[1][0] = fn_of("S21", {"q2"}, num(1.0));
  sp.entry[1][1] =
      fn_of("S22", {"q2"}, emul(num(b), subst_var(lam1.body, "y", "q2")));
  sp.entry[1][2] = fn_of("S23", {"q2"}, eneg(subst_var(lam2.body, "y", "q2")));
  sp.entry[2][0] = fn_of("S31", {"q3"}, num(0.0));
  sp.entry[2][1] = fn_of("S32", {"q3"}, num(0.0));
  sp.entry[2][2] = fn_of("S33", {"q3"}, num(1.0));
  sp.f[0] = fn_of("F1", {"q1", "p1"},
                  emul(subst_var(mu1.body, "x", "q1"), evar("p1")));
  sp.f[1] = fn_of(
      "F2", {"q2", "p2"},
      eadd(emul(subst_var(mu2.body, "y", "q2"), epow(evar("p2"), num(2.0))),
           emul(num(b * b), subst_var(mu4.body, "y", "q2"))));
  sp.f[2] = fn_of("F3", {"q3", "p3"},
                  emul(subst_var(mu3.body, "z", "q3"), epow(evar("p3"), num(2.0))));
  validate_stackel(sp);
  g1.spec = sp;
  g1.to_chart = fwd;
  g1.avoid = {make_scalar_field([b, lam1](const auto& x) {
                return b * eval1(lam1, x[1]);
              }),
              make_scalar_field([lam2](const auto& x) {
                return eval1(lam2, x[1]);
              })};
  g1.declared = {hat1, hat2, hat3};
  g1.declared_names = {"Ht1", "Ht2", "Ht3"};
  m.stackels = {std::move(g1)};

  m.constraints = {
      {"mu1-nonzero", "mu1(x) != 0",
       make_scalar_field([mu1](const auto& x) { return eval1(mu1, x[0]); }),
       ConstraintKind::NonZero},
      {"mu2-positive", "mu2(y) > 0",
       make_scalar_field([mu2](const auto& x) { return eval1(mu2, x[1]); }),
       ConstraintKind::Positive},
      {"lam2mu3-sign", "lam2(y)*mu3(z) of one sign",
       make_scalar_field([lam2, mu3](const auto& x) {
         return eval1(lam2, x[1]) * eval1(mu3, x[2]);
       }),
       ConstraintKind::OneSign},
      {"lam2-nonzero", "lam2(y) != 0",
       make_scalar_field([lam2](const auto& x) { return eval1(lam2, x[1]); }),
       ConstraintKind::NonZero},
  };

  m.box = make_box(-1.2, 1.2, 0.5, 1.5);
  m.sim_x0 = {0.3, 0.4, 0.2, 0.9, 0.8, 1.1};
  return m;
}

// ---- family B ----------------------------------------------------------------

ModelSpec build_family_b(const std::map<std::string, std::string>& fns) {
  const ModelInfo& info = info_for("family-b");
  reject_unknown_slots(info.slots, fns);
  FunctionDef psi1 = resolve_slot(info.slots[0], fns);
  FunctionDef psi2 = resolve_slot(info.slots[1], fns);
  FunctionDef nu1 = resolve_slot(info.slots[2], fns);
  FunctionDef nu2 = resolve_slot(info.slots[3], fns);
  FunctionDef nu3 = resolve_slot(info.slots[4], fns);
  FunctionDef nu4 = resolve_slot(info.slots[5], fns);

  Chart chart = cartesian_chart();
  chart.metric[0] = ediv(num(1.0), nu1.body);
  chart.metric[1] = ediv(num(1.0), emul(psi1.body, epow(nu2.body, num(2.0))));
  chart.metric[2] = ediv(num(1.0), emul(psi2.body, nu3.body));
  chart.positivity = {nu1.body, emul(psi1.body, epow(nu2.body, num(2.0))),
                      emul(psi2.body, nu3.body)};
  VectorPotential A;
  A.comp = {num(0.0),
            ediv(num(1.0), emul(num(2.0), emul(psi1.body, nu2.body))),
            num(0.0)};
  // V = nu4(x) - 1/(4 psi1(x))
  ExprPtr V = esub(nu4.body, ediv(num(1.0), emul(num(4.0), psi1.body)));

  ModelSpec m;
  m.id = "family-b";
  m.title = info.title;
  m.functions = {psi1, psi2, nu1, nu2, nu3, nu4};
  m.sys = make_system(chart, A, V, 1.0);

  auto d1 = [](const FunctionDef& f) {
    return [f](const auto& v) {
      using S = std::decay_t<decltype(v)>;
      std::array<HyperDual<S>, 1> r{HyperDual<S>::seeded(v, 1)};
      return eval_function<HyperDual<S>>(f, {r.data(), 1}).d1;
    };
  };
  m.b_declared = {const_field_of(0.0), const_field_of(0.0),
                  make_scalar_field([dp1 = d1(psi1), psi1, nu1](const auto& x) {
                    auto p = eval1(psi1, x[0]);
                    return -dp1(x[0]) * sqrt(eval1(nu1, x[0])) /
                           (2.0 * p * sqrt(p));
                  })};

  ScalarFieldPtr piy = pi_field(chart, A, 1);
  auto h1 = make_scalar_field([chart, A, psi1, nu2](const auto& x) {
    auto n2 = eval1(nu2, x[1]);
    auto w = kinetic_momenta(chart, A, x)[1] -
             1.0 / (2.0 * eval1(psi1, x[0]) * n2);
    return n2 * n2 * w * w;
  });
  auto h2 = make_scalar_field([chart, A, nu3](const auto& x) {
    auto piz = kinetic_momenta(chart, A, x)[2];
    return eval1(nu3, x[2]) * piz * piz;
  });
  m.integrals = {{"H1", "nu2^2 (Pi_y - 1/(2 psi1 nu2))^2", h1, {}},
                 {"H2", "nu3 Pi_z^2", h2, {}}};

  ScalarFieldPtr k2_eigen = make_scalar_field([chart, A, psi1, nu2](
                                                  const auto& x) {
    auto p = eval1(psi1, x[0]);
    auto w = 2.0 * p * eval1(nu2, x[1]) * kinetic_momenta(chart, A, x)[1];
    return (w - 1.0) / (p * w);
  });
  ScalarFieldPtr k2_num = make_scalar_field([chart, A, psi1, nu2](
                                                const auto& x) {
    return 2.0 * eval1(psi1, x[0]) * eval1(nu2, x[1]) *
               kinetic_momenta(chart, A, x)[1] -
           1.0;
  });
  ScalarFieldPtr psi2f = make_scalar_field(
      [psi2](const auto& x) { return eval1(psi2, x[0]); });
  ScalarFieldPtr k3_eigen = make_scalar_field(
      [psi2](const auto& x) { return 1.0 / eval1(psi2, x[0]); });
  m.operators = {
      {"K2", "R-pattern on y scaled by (2 psi1 nu2 Pi_y - 1)/(2 psi1^2 nu2 Pi_y)",
       r_pattern_op(chart, A, 1, k2_eigen), {piy, k2_num},
       rank2_spectrum(k2_eigen), true},
      {"K3", "R-pattern on z scaled by 1/psi2",
       r_pattern_op(chart, A, 2, k3_eigen), {psi2f},
       rank2_spectrum(k3_eigen), true},
  };
  m.chains = {{"K2", "H1"}, {"K3", "H2"}};
  m.algebra_pairs = {{"K2", "K3"}};
  m.involution = {{"H", "H1"}, {"H", "H2"}, {"H1", "H2"}};

  auto fwd = make_vector_function([chart, A, psi1, nu2](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    auto pi = kinetic_momenta(chart, A, x);
    S sh = 1.0 / (2.0 * eval1(psi1, x[0]) * eval1(nu2, x[1]));
    return C6<S>{x[0], x[1], x[2], pi[0], pi[1] - sh, pi[2]};
  });

  auto hat1 = make_scalar_field([psi1, psi2, nu1, nu2, nu3, nu4](
                                    const auto& x) {
    auto n2 = eval1(nu2, x[1]);
    return eval1(nu1, x[0]) * x[3] * x[3] + eval1(nu4, x[0]) +
           eval1(psi1, x[0]) * n2 * n2 * x[4] * x[4] +
           eval1(psi2, x[0]) * eval1(nu3, x[2]) * x[5] * x[5];
  });
  auto hat2 = make_scalar_field([nu2](const auto& x) {
    auto n2 = eval1(nu2, x[1]);
    return n2 * n2 * x[4] * x[4];
  });
  auto hat3 = make_scalar_field(
      [nu3](const auto& x) { return eval1(nu3, x[2]) * x[5] * x[5]; });
  auto hat4 = make_scalar_field(
      [nu2](const auto& x) { return eval1(nu2, x[1]) * x[4]; });

  ChartMapSpec aux;
  aux.name = "aux";
  aux.forward = fwd;
  aux.avoid = {piy, k2_num};
  aux.field_match = {
      {"H", make_scalar_field([hat1, hat4](const auto& x) {
         return hat1->value(x) + hat4->value(x);
       })},
      {"H1", hat2},
      {"H2", hat3}};
  aux.diag_ops = {
      {"K2", 1, make_scalar_field([psi1, nu2](const auto& x) {
         auto t = eval1(nu2, x[1]) * x[4];
         return 2.0 * t / (2.0 * eval1(psi1, x[0]) * t + 1.0);
       })},
      {"K3", 2, make_scalar_field([psi2](const auto& x) {
         return 1.0 / eval1(psi2, x[0]);
       })}};
  m.charts = {aux};

  StackelAttachment sb;
  sb.name = "sm3";
  StackelSpec sp;
  sp.qnames = {"q1", "q2", "q3"};
  sp.pnames = {"p1", "p2", "p3"};
  sp.entry[0][0] = fn_of("S11", {"q1"}, num(1.0));
  sp.entry[0][1] = fn_of("S12", {"q1"}, eneg(subst_var(psi1.body, "x", "q1")));
  sp.entry[0][2] = fn_of("S13", {"q1"}, eneg(subst_var(psi2.body, "x", "q1")));
  sp.entry[1][0] = fn_of("S21", {"q2"}, num(0.0));
  sp.entry[1][1] = fn_of("S22", {"q2"}, num(1.0));
  sp.entry[1][2] = fn_of("S23", {"q2"}, num(0.0));
  sp.entry[2][0] = fn_of("S31", {"q3"}, num(0.0));
  sp.entry[2][1] = fn_of("S32", {"q3"}, num(0.0));
  sp.entry[2][2] = fn_of("S33", {"q3"}, num(1.0));
  sp.f[0] = fn_of(
      "F1", {"q1", "p1"},
      eadd(emul(subst_var(nu1.body, "x", "q1"), epow(evar("p1"), num(2.0))),
           subst_var(nu4.body, "x", "q1")));
  sp.f[1] =
      fn_of("F2", {"q2", "p2"},
            emul(epow(subst_var(nu2.body, "y", "q2"), num(2.0)),
                 epow(evar("p2"), num(2.0))));
  sp.f[2] = fn_of("F3", {"q3", "p3"},
                  emul(subst_var(nu3.body, "z", "q3"), epow(evar("p3"), num(2.0))));
  validate_stackel(sp);
  sb.spec = sp;
  sb.to_chart = fwd;
  sb.avoid = {make_scalar_field([psi1](const auto& x) {
                return eval1(psi1, x[0]);
              }),
              make_scalar_field([psi2](const auto& x) {
                return eval1(psi2, x[0]);
              })};
  sb.declared = {hat1, hat2, hat3};
  sb.declared_names = {"Ht1", "Ht2", "Ht3"};
  sb.extra_fields = {{"H4", "nu2(q2) p2", hat4, {}}};
  sb.extra_involution = {{"Ht1", "H4"}, {"Ht2", "H4"}, {"Ht3", "H4"}};
  m.stackels = {std::move(sb)};

  m.constraints = {
      {"psi1-positive", "psi1(x) > 0",
       make_scalar_field([psi1](const auto& x) { return eval1(psi1, x[0]); }),
       ConstraintKind::Positive},
      {"nu1-positive", "nu1(x) > 0",
       make_scalar_field([nu1](const auto& x) { return eval1(nu1, x[0]); }),
       ConstraintKind::Positive},
      {"nu2-nonzero", "nu2(y) != 0",
       make_scalar_field([nu2](const auto& x) { return eval1(nu2, x[1]); }),
       ConstraintKind::NonZero},
      {"nu3psi2-sign", "nu3(z)*psi2(x) of one sign",
       make_scalar_field([nu3, psi2](const auto& x) {
         return eval1(nu3, x[2]) * eval1(psi2, x[0]);
       }),
       ConstraintKind::OneSign},
  };

  m.box = make_box(-1.2, 1.2, 0.5, 1.5);
  m.sim_x0 = {0.3, 0.4, 0.2, 0.5, 0.4, 0.3};
  return m;
}

}  // namespace

// ---- public surface ----------------------------------------------------------

std::vector<ModelInfo> catalog() { return catalog_infos(); }

ModelSpec make_model(const std::string& id,
                     const std::map<std::string, double>& params,
                     const std::map<std::string, std::string>& fns,
                     const std::string& gauge) {
  const ModelInfo& info = info_for(id);
  std::map<std::string, double> defaults(info.params.begin(),
                                         info.params.end());
  std::map<std::string, double> p = merge_params(defaults, params);
  if (!gauge.empty() && info.gauges.empty())
    throw ConfigError("model '" + id + "' has no gauge menu");
  if (!fns.empty() && info.slots.empty())
    throw ConfigError("model '" + id + "' has no function slots");

  if (id == "constant-b") return build_constant_b(p, gauge);
  if (id == "undulator") return build_undulator(p);
  if (id == "cyl-case1") return build_case1(fns);
  if (id == "cyl-case2") return build_case2(fns);
  if (id == "cyl-case3") return build_case3(fns);
  if (id == "family-a") return build_family_a(p, fns);
  return build_family_b(fns);
}

ScalarFieldPtr model_field(const ModelSpec& m, const std::string& name) {
  if (name == "H") return m.sys.H;
  for (const auto& f : m.integrals)
    if (f.name == name) return f.field;
  throw ConfigError("model '" + m.id + "' has no field '" + name + "'");
}

const NamedOperator& model_operator(const ModelSpec& m,
                                    const std::string& name) {
  for (const auto& k : m.operators)
    if (k.name == name) return k;
  throw ConfigError("model '" + m.id + "' has no operator '" + name + "'");
}

Vec6 hj_point(const ModelSpec& m, const std::array<double, 3>& q,
              const std::array<double, 3>& h,
              const std::array<int, 3>& signs) {
  if (!m.hj) throw ConfigError("model '" + m.id + "' has no separated form");
  Vec6 x{q[0], q[1], q[2], 0.0, 0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    const HJSlot& s = m.hj->slot[static_cast<std::size_t>(k)];
    if (s.direct) {
      x[static_cast<std::size_t>(k) + 3] =
          h[static_cast<std::size_t>(s.h_index)];
      continue;
    }
    double rad = s.radicand(q[static_cast<std::size_t>(k)], h);
    if (rad < -1e-10)
      throw ForbiddenRegion("negative squared momentum in slot " +
                            std::to_string(k + 1));
    if (rad < 0.0) rad = 0.0;
    x[static_cast<std::size_t>(k) + 3] =
        (signs[static_cast<std::size_t>(k)] < 0 ? -1.0 : 1.0) *
        std::sqrt(rad);
  }
  return x;
}

double hj_residual(const ModelSpec& m, const std::array<double, 3>& q,
                   const std::array<double, 3>& h,
                   const std::array<int, 3>& signs) {
  Vec6 x = hj_point(m, q, h, signs);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    ScalarFieldPtr f = model_field(m, m.hj->h_names[static_cast<std::size_t>(i)]);
    worst = std::max(worst,
                     std::fabs(f->value(x) - h[static_cast<std::size_t>(i)]));
  }
  return worst;
}

}  // namespace omh
