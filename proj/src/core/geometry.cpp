#include "geometry.hpp"

namespace omh {

Chart cartesian_chart() {
  Chart c;
  c.name = "cartesian";
  c.coords = {"x", "y", "z"};
  c.metric = {enum_number(1.0), enum_number(1.0), enum_number(1.0)};
  return c;
}

Chart cylindrical_chart() {
  Chart c;
  c.name = "cylindrical";
  c.coords = {"r", "phi", "z"};
  c.metric = {enum_number(1.0), epow(evar("r"), enum_number(2.0)),
              enum_number(1.0)};
  c.positivity = {evar("r")};
  return c;
}

std::array<std::string, 6> phase_names(const Chart& chart) {
  return {chart.coords[0],       chart.coords[1],       chart.coords[2],
          "p" + chart.coords[0], "p" + chart.coords[1], "p" + chart.coords[2]};
}

double divergence_of_curl(const Chart& chart, const VectorPotential& a,
                          const std::array<double, 3>& q) {
  // scalar functions q -> (h1 h2 h3 / h_i) B_i, differentiated one dual level
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    std::array<HDual, 3> qq;
    for (int j = 0; j < 3; ++j) qq[static_cast<std::size_t>(j)].v = q[static_cast<std::size_t>(j)];
    qq[static_cast<std::size_t>(i)].d1 = 1.0;
    std::array<HDual, 3> h = scale_factors(chart, qq);
    std::array<HDual, 3> b = curl(chart, a, qq);
    HDual term = h[0] * h[1] * h[2] / h[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
    sum += term.d1;
  }
  std::array<double, 3> h = scale_factors(chart, q);
  return sum / (h[0] * h[1] * h[2]);
}

VectorPotential gauge_shift(const Chart& chart, const VectorPotential& a,
                            const ExprPtr& chi) {
  check_variables(*chi, chart.coords);
  // build d_i chi as an AST by structural differentiation, so the shifted
  // potential stays an ordinary expression triple
  struct Diff {
    static ExprPtr d(const ExprPtr& e, const std::string& var) {
      switch (e->kind) {
        case Expr::Kind::Number:
          return enum_number(0.0);
        case Expr::Kind::Var:
          return enum_number(e->name == var ? 1.0 : 0.0);
        case Expr::Kind::Add:
          return eadd(d(e->a, var), d(e->b, var));
        case Expr::Kind::Sub:
          return esub(d(e->a, var), d(e->b, var));
        case Expr::Kind::Mul:
          return eadd(emul(d(e->a, var), e->b), emul(e->a, d(e->b, var)));
        case Expr::Kind::Div:
          return ediv(esub(emul(d(e->a, var), e->b), emul(e->a, d(e->b, var))),
                      emul(e->b, e->b));
        case Expr::Kind::Pow: {
          // general a^b: d = a^b * (db * log a + b * da / a)
          ExprPtr da = d(e->a, var), db = d(e->b, var);
          if (e->b->kind == Expr::Kind::Number) {
            double n = e->b->number;
            return emul(emul(enum_number(n), epow(e->a, enum_number(n - 1.0))), da);
          }
          return emul(epow(e->a, e->b),
                      eadd(emul(db, ecall(Expr::Fn::Log, e->a)),
                           ediv(emul(e->b, da), e->a)));
        }
        case Expr::Kind::Neg:
          return eneg(d(e->a, var));
        case Expr::Kind::Call: {
          ExprPtr da = d(e->a, var);
          ExprPtr inner;
          switch (e->fn) {
            case Expr::Fn::Sin:
              inner = ecall(Expr::Fn::Cos, e->a);
              break;
            case Expr::Fn::Cos:
              inner = eneg(ecall(Expr::Fn::Sin, e->a));
              break;
            case Expr::Fn::Tan: {
              ExprPtr c = ecall(Expr::Fn::Cos, e->a);
              inner = ediv(enum_number(1.0), emul(c, c));
              break;
            }
            case Expr::Fn::Exp:
              inner = ecall(Expr::Fn::Exp, e->a);
              break;
            case Expr::Fn::Log:
              inner = ediv(enum_number(1.0), e->a);
              break;
            case Expr::Fn::Sqrt:
              inner = ediv(enum_number(0.5), ecall(Expr::Fn::Sqrt, e->a));
              break;
            case Expr::Fn::Abs:
              inner = ediv(e->a, ecall(Expr::Fn::Abs, e->a));
              break;
          }
          return emul(inner, da);
        }
      }
      throw Error("unreachable expression tag");
    }
  };
  VectorPotential out;
  for (int i = 0; i < 3; ++i)
    out.comp[static_cast<std::size_t>(i)] =
        eadd(a.comp[static_cast<std::size_t>(i)], Diff::d(chi, chart.coords[static_cast<std::size_t>(i)]));
  return out;
}

bool in_domain(const Chart& chart, const std::array<double, 3>& q,
               double margin) {
  std::span<const std::string> names(chart.coords);
  std::span<const double> vals(q);
  for (const auto& c : chart.positivity)
    if (eval(*c, names, vals) <= margin) return false;
  return true;
}

}  // namespace omh
