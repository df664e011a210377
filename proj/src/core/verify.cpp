#include "verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "linalg.hpp"

namespace omh {

namespace {

constexpr double kDomainMargin = 1e-3;
constexpr double kSingularMargin = 1e-2;
constexpr double kClusterTol = 1e-6;
constexpr int kMaxRejects = 200000;

double rel(double resid, double scale) {
  return std::fabs(resid) / std::max(1.0, std::fabs(scale));
}

// rejection sampler over the model box: chart positivity with a margin plus
// a nonzero margin on every listed denominator-type field
class PointSampler {
 public:
  PointSampler(const ModelSpec& m, std::vector<ScalarFieldPtr> avoid,
               std::uint64_t seed)
      : m_(m), avoid_(std::move(avoid)), rng_(seed) {}

  std::mt19937_64& rng() { return rng_; }

  Vec6 operator()() {
    for (int tries = 0; tries < kMaxRejects; ++tries) {
      Vec6 x;
      for (int i = 0; i < 6; ++i) {
        std::uniform_real_distribution<double> u(
            m_.box.lo[static_cast<std::size_t>(i)],
            m_.box.hi[static_cast<std::size_t>(i)]);
        x[static_cast<std::size_t>(i)] = u(rng_);
      }
      std::array<double, 3> q{x[0], x[1], x[2]};
      if (!in_domain(m_.sys.chart, q, kDomainMargin)) continue;
      bool ok = true;
      for (const auto& a : avoid_)
        if (std::fabs(a->value(x)) < kSingularMargin) ok = false;
      if (ok) return x;
    }
    throw ForbiddenRegion("sampler could not find an admissible point");
  }

  // a point together with its image, rejecting on |avoid_y| at the image
  std::pair<Vec6, Vec6> mapped(const VectorFunction& fwd,
                               const std::vector<ScalarFieldPtr>& avoid_y) {
    for (int tries = 0; tries < kMaxRejects; ++tries) {
      Vec6 x = (*this)();
      Vec6 y = vector_value(fwd, x);
      bool ok = true;
      for (const auto& a : avoid_y)
        if (std::fabs(a->value(y)) < kSingularMargin) ok = false;
      if (ok) return {x, y};
    }
    throw ForbiddenRegion("sampler could not find an admissible mapped point");
  }

 private:
  const ModelSpec& m_;
  std::vector<ScalarFieldPtr> avoid_;
  std::mt19937_64 rng_;
};

std::vector<ScalarFieldPtr> join(std::vector<ScalarFieldPtr> a,
                                 const std::vector<ScalarFieldPtr>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

struct FieldRef {
  ScalarFieldPtr field;
  std::vector<ScalarFieldPtr> avoid;
};

FieldRef field_ref(const ModelSpec& m, const std::string& name) {
  if (name == "H") return {m.sys.H, {}};
  for (const auto& f : m.integrals)
    if (f.name == name) return {f.field, f.avoid};
  throw ConfigError("model '" + m.id + "' has no field '" + name + "'");
}

double symplectic_defect(const Mat& jac) {
  Mat j6 = symplectic_matrix();
  return (jac.transpose() * j6 * jac - j6).max_abs();
}

Eigen::Matrix<double, 6, 6> to_eigen6(const Mat& m) {
  Eigen::Matrix<double, 6, 6> e;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) e(i, j) = m(i, j);
  return e;
}

// conjugation of an operator value into the image chart: M K M^{-1}
Mat conjugate(const Mat& jac, const Mat& k) {
  Eigen::Matrix<double, 6, 6> mj = to_eigen6(jac);
  Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(mj);
  if (!lu.isInvertible())
    throw SingularPoint("chart jacobian is not invertible");
  Eigen::Matrix<double, 6, 6> r = mj * to_eigen6(k) * lu.inverse();
  Mat out(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) out(i, j) = r(i, j);
  return out;
}

double offdiag_max(const Mat& k) {
  double w = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) w = std::max(w, std::fabs(k(i, j)));
  return w / std::max(1.0, k.max_abs());
}

// declared spectrum vs computed clusters at one point
double spectrum_residual(const NamedOperator& op, const Vec6& x,
                         std::string* note) {
  EigenResult er = eigen_spectrum(*op.op, x, kClusterTol);
  double worst = 0.0;
  std::vector<bool> taken(er.clusters.size(), false);
  for (const auto& part : op.spectrum) {
    double v = part.value->value(x);
    int best = -1;
    double gap = 0.0;
    for (std::size_t c = 0; c < er.clusters.size(); ++c) {
      double g = std::fabs(er.clusters[c].value - v);
      if (best < 0 || g < gap) {
        best = static_cast<int>(c);
        gap = g;
      }
    }
    if (best < 0 || taken[static_cast<std::size_t>(best)]) {
      if (note->empty()) *note = "declared eigenvalue has no free cluster";
      return 1.0;
    }
    taken[static_cast<std::size_t>(best)] = true;
    const EigenCluster& cl = er.clusters[static_cast<std::size_t>(best)];
    if (cl.multiplicity != part.multiplicity) {
      if (note->empty())
        *note = "multiplicity " + std::to_string(cl.multiplicity) +
                " != declared " + std::to_string(part.multiplicity) + " at " +
                std::to_string(cl.value);
      return 1.0;
    }
    if (!cl.riesz_index_one) {
      if (note->empty())
        *note = "Riesz index > 1 at eigenvalue " + std::to_string(cl.value);
      return 1.0;
    }
    worst = std::max(worst, rel(gap, v));
  }
  return worst;
}

using CheckFn = std::function<CheckOutcome(std::uint64_t, int, double)>;

struct PendingCheck {
  std::string name;
  std::string klass;
  std::string anchor;
  CheckFn run;
};

// shared shell: residual statistics over samples with uniform error capture
CheckOutcome run_sampled(
    const ModelSpec& m, const std::string& name, const std::string& klass,
    std::uint64_t seed, int samples, double tol,
    const std::vector<ScalarFieldPtr>& avoid,
    const std::function<double(PointSampler&, std::string&)>& one) {
  CheckOutcome out;
  out.name = name;
  out.klass = klass;
  out.tol = tol;
  PointSampler sampler(m, avoid, seed);
  try {
    std::string note;
    double sum = 0.0;
    for (int i = 0; i < samples; ++i) {
      double r = one(sampler, note);
      out.worst = std::max(out.worst, r);
      sum += r;
      ++out.samples;
    }
    out.mean = sum / static_cast<double>(samples);
    out.note = note;
    out.passed = out.worst <= tol;
  } catch (const Error& e) {
    out.passed = false;
    out.note = e.what();
    out.worst = std::numeric_limits<double>::infinity();
    out.mean = out.worst;
  }
  return out;
}

ExprPtr random_gauge_expr(const Chart& chart, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ExprPtr sum = enum_number(0.0);
  for (int i = 0; i < 3; ++i) {
    ExprPtr vi = evar(chart.coords[static_cast<std::size_t>(i)]);
    sum = eadd(sum, emul(enum_number(u(rng)), vi));
    sum = eadd(sum, emul(enum_number(u(rng)), epow(vi, enum_number(2.0))));
    ExprPtr vj = evar(chart.coords[static_cast<std::size_t>((i + 1) % 3)]);
    sum = eadd(sum, emul(enum_number(u(rng)), emul(vi, vj)));
  }
  return sum;
}

void add_geometry_checks(std::vector<PendingCheck>& list, const ModelSpec& m) {
  list.push_back(
      {"ham/two-path", "two-path",
       "H agrees between shifted-momentum and expanded-polynomial evaluation",
       [&m](std::uint64_t seed, int n, double tol) {
         return run_sampled(m, "ham/two-path", "two-path", seed, n, tol, {},
                            [&m](PointSampler& s, std::string&) {
                              Vec6 x = s();
                              double a = m.sys.H->value(x);
                              double b = m.sys.H_expanded->value(x);
                              return rel(a - b, a);
                            });
       }});
  list.push_back(
      {"geometry/curl", "curl",
       "declared field components equal curl(A) on the chart",
       [&m](std::uint64_t seed, int n, double tol) {
         return run_sampled(
             m, "geometry/curl", "curl", seed, n, tol, {},
             [&m](PointSampler& s, std::string&) {
               Vec6 x = s();
               std::array<double, 3> q{x[0], x[1], x[2]};
               auto b = curl(m.sys.chart, m.sys.A, q);
               double w = 0.0;
               for (int i = 0; i < 3; ++i)
                 w = std::max(
                     w, std::fabs(b[static_cast<std::size_t>(i)] -
                                  m.b_declared[static_cast<std::size_t>(i)]
                                      ->value(x)));
               return w;
             });
       }});
  list.push_back(
      {"geometry/div-b", "div-b", "curl(A) is divergence-free",
       [&m](std::uint64_t seed, int n, double tol) {
         return run_sampled(m, "geometry/div-b", "div-b", seed, n, tol, {},
                            [&m](PointSampler& s, std::string&) {
                              Vec6 x = s();
                              std::array<double, 3> q{x[0], x[1], x[2]};
                              return std::fabs(
                                  divergence_of_curl(m.sys.chart, m.sys.A, q));
                            });
       }});
  list.push_back(
      {"geometry/gauge", "gauge",
       "curl(A) unchanged by random gradient shifts of A",
       [&m](std::uint64_t seed, int n, double tol) {
         return run_sampled(
             m, "geometry/gauge", "gauge", seed, n, tol, {},
             [&m](PointSampler& s, std::string&) {
               ExprPtr chi = random_gauge_expr(m.sys.chart, s.rng());
               VectorPotential shifted = gauge_shift(m.sys.chart, m.sys.A, chi);
               Vec6 x = s();
               std::array<double, 3> q{x[0], x[1], x[2]};
               auto b0 = curl(m.sys.chart, m.sys.A, q);
               auto b1 = curl(m.sys.chart, shifted, q);
               double w = 0.0;
               for (int i = 0; i < 3; ++i)
                 w = std::max(w, std::fabs(b1[static_cast<std::size_t>(i)] -
                                           b0[static_cast<std::size_t>(i)]));
               return w;
             });
       }});
}

void add_operator_checks(std::vector<PendingCheck>& list, const ModelSpec& m) {
  for (const auto& op : m.operators) {
    list.push_back(
        {"torsion/" + op.name, "torsion",
         "vanishing Haantjes torsion: " + op.label,
         [&m, &op](std::uint64_t seed, int n, double tol) {
           return run_sampled(m, "torsion/" + op.name, "torsion", seed, n, tol,
                              op.avoid, [&op](PointSampler& s, std::string&) {
                                return haantjes_torsion(*op.op, s()).scaled();
                              });
         }});
    list.push_back(
        {"compat/" + op.name, "compat",
         "symplectic compatibility of " + op.name,
         [&m, &op](std::uint64_t seed, int n, double tol) {
           return run_sampled(m, "compat/" + op.name, "compat", seed, n, tol,
                              op.avoid, [&op](PointSampler& s, std::string&) {
                                return compatibility_residual(*op.op, s());
                              });
         }});
    list.push_back(
        {"spectrum/" + op.name, "spectrum",
         "closed-form spectrum of " + op.name + " with Riesz index one",
         [&m, &op](std::uint64_t seed, int n, double tol) {
           return run_sampled(m, "spectrum/" + op.name, "spectrum", seed, n,
                              tol, op.avoid,
                              [&op](PointSampler& s, std::string& note) {
                                return spectrum_residual(op, s(), &note);
                              });
         }});
  }
  for (const auto& pr : m.algebra_pairs) {
    const NamedOperator& a = model_operator(m, pr.a);
    const NamedOperator& b = model_operator(m, pr.b);
    std::string nm = "algebra/" + pr.a + "-" + pr.b;
    list.push_back(
        {nm, "algebra",
         "Abelian algebra axioms for the pair " + pr.a + ", " + pr.b,
         [&m, &a, &b, nm](std::uint64_t seed, int n, double tol) {
           return run_sampled(m, nm, "algebra", seed, n, tol,
                              join(a.avoid, b.avoid),
                              [&a, &b](PointSampler& s, std::string&) {
                                std::uint64_t sub = s.rng()();
                                return algebra_axioms(*a.op, *b.op, s(), sub, 2)
                                    .max();
                              });
         }});
  }
  for (const auto& ch : m.chains) {
    const NamedOperator& op = model_operator(m, ch.op);
    FieldRef target = field_ref(m, ch.target);
    std::string nm = "chain/" + ch.op + "-" + ch.target;
    list.push_back(
        {nm, "chain",
         ch.op + "^T dH closes and equals d" + ch.target,
         [&m, &op, target, nm](std::uint64_t seed, int n, double tol) {
           return run_sampled(
               m, nm, "chain", seed, n, tol, join(op.avoid, target.avoid),
               [&m, &op, target](PointSampler& s, std::string&) {
                 Vec6 x = s();
                 double closed = chain_closedness(*op.op, *m.sys.H, x);
                 double exact =
                     chain_exactness(*op.op, *m.sys.H, *target.field, x);
                 return std::max(closed, exact);
               });
         }});
  }
}

void add_bracket_checks(std::vector<PendingCheck>& list, const ModelSpec& m) {
  for (const auto& pr : m.involution) {
    FieldRef a = field_ref(m, pr.a);
    FieldRef b = field_ref(m, pr.b);
    std::string nm = "involution/" + pr.a + "-" + pr.b;
    list.push_back(
        {nm, "involution", "{" + pr.a + ", " + pr.b + "} = 0",
         [&m, a, b, nm](std::uint64_t seed, int n, double tol) {
           return run_sampled(m, nm, "involution", seed, n, tol,
                              join(a.avoid, b.avoid),
                              [a, b](PointSampler& s, std::string&) {
                                return std::fabs(
                                    poisson_bracket(*a.field, *b.field, s()));
                              });
         }});
  }
  for (const auto& r : m.relations) {
    FieldRef a = field_ref(m, r.a);
    FieldRef b = field_ref(m, r.b);
    FieldRef rhs{nullptr, {}};
    if (!r.rhs.empty()) rhs = field_ref(m, r.rhs);
    std::string nm = "relation/" + r.a + "-" + r.b;
    std::string want = r.rhs.empty() ? std::to_string(r.coeff)
                                     : (r.coeff < 0 ? "-" : "") + r.rhs;
    list.push_back(
        {nm, "relation", "{" + r.a + ", " + r.b + "} = " + want,
         [&m, a, b, rhs, r, nm](std::uint64_t seed, int n, double tol) {
           auto avoid = join(join(a.avoid, b.avoid), rhs.avoid);
           return run_sampled(
               m, nm, "relation", seed, n, tol, avoid,
               [a, b, rhs, r](PointSampler& s, std::string&) {
                 Vec6 x = s();
                 double pb = poisson_bracket(*a.field, *b.field, x);
                 double want =
                     r.coeff * (rhs.field ? rhs.field->value(x) : 1.0);
                 return std::fabs(pb - want);
               });
         }});
  }
  for (const auto& pr : m.sepinv) {
    FieldRef a = field_ref(m, pr.a);
    FieldRef b = field_ref(m, pr.b);
    std::string nm = "sepinv/" + pr.a + "-" + pr.b;
    list.push_back(
        {nm, "sepinv",
         "per-coordinate involution of " + pr.a + ", " + pr.b,
         [&m, a, b, nm](std::uint64_t seed, int n, double tol) {
           return run_sampled(
               m, nm, "sepinv", seed, n, tol, join(a.avoid, b.avoid),
               [a, b](PointSampler& s, std::string&) {
                 auto parts = separable_involution(*a.field, *b.field, s());
                 return std::max({std::fabs(parts[0]), std::fabs(parts[1]),
                                  std::fabs(parts[2])});
               });
         }});
  }
}

void add_chart_checks(std::vector<PendingCheck>& list, const ModelSpec& m) {
  for (const auto& c : m.charts) {
    std::string base = "chart/" + c.name + "/";
    list.push_back(
        {base + "canonical", "chart-canonical",
         "chart " + c.name + " preserves the symplectic form",
         [&m, &c, base](std::uint64_t seed, int n, double tol) {
           return run_sampled(m, base + "canonical", "chart-canonical", seed,
                              n, tol, c.avoid,
                              [&c](PointSampler& s, std::string&) {
                                return symplectic_defect(
                                    jacobian6(*c.forward, s()));
                              });
         }});
    for (const auto& fm : c.field_match) {
      FieldRef f = field_ref(m, fm.first);
      std::string klass = fm.first == "H" ? "chart-ham" : "chart-match";
      std::string nm = base + "match-" + fm.first;
      ScalarFieldPtr decl = fm.second;
      list.push_back(
          {nm, klass,
           fm.first + " takes its declared closed form on chart " + c.name,
           [&m, &c, f, decl, nm, klass](std::uint64_t seed, int n, double tol) {
             return run_sampled(
                 m, nm, klass, seed, n, tol, join(c.avoid, f.avoid),
                 [&c, f, decl](PointSampler& s, std::string&) {
                   Vec6 x = s();
                   Vec6 y = vector_value(*c.forward, x);
                   double v = f.field->value(x);
                   return rel(v - decl->value(y), v);
                 });
           }});
    }
    for (const auto& dm : c.diag_ops) {
      const NamedOperator& op = model_operator(m, dm.op);
      std::string nm = base + "diag-" + dm.op;
      list.push_back(
          {nm, "chart-diag",
           dm.op + " diagonalizes on chart " + c.name +
               " with the declared entries",
           [&m, &c, &op, dm, nm](std::uint64_t seed, int n, double tol) {
             return run_sampled(
                 m, nm, "chart-diag", seed, n, tol, join(c.avoid, op.avoid),
                 [&c, &op, dm](PointSampler& s, std::string&) {
                   Vec6 x = s();
                   Vec6 y = vector_value(*c.forward, x);
                   Mat knew = conjugate(jacobian6(*c.forward, x),
                                        operator_value(*op.op, x));
                   double want = dm.entry->value(y);
                   double w = offdiag_max(knew);
                   w = std::max(w, rel(knew(dm.slot, dm.slot) - want, want));
                   w = std::max(
                       w, rel(knew(dm.slot + 3, dm.slot + 3) - want, want));
                   return w;
                 });
           }});
    }
    for (const auto& od : c.offdiag_ops) {
      const NamedOperator& op = model_operator(m, od);
      std::string nm = base + "offdiag-" + od;
      list.push_back(
          {nm, "chart-offdiag", od + " diagonalizes on chart " + c.name,
           [&m, &c, &op, nm](std::uint64_t seed, int n, double tol) {
             return run_sampled(
                 m, nm, "chart-offdiag", seed, n, tol, join(c.avoid, op.avoid),
                 [&c, &op](PointSampler& s, std::string&) {
                   Vec6 x = s();
                   return offdiag_max(conjugate(jacobian6(*c.forward, x),
                                                operator_value(*op.op, x)));
                 });
           }});
    }
    for (const auto& pr : c.sepinv) {
      ScalarFieldPtr fa, fb;
      for (const auto& fm : c.field_match) {
        if (fm.first == pr.a) fa = fm.second;
        if (fm.first == pr.b) fb = fm.second;
      }
      if (!fa || !fb)
        throw ConfigError("chart sepinv names missing from field_match");
      std::string nm = base + "sepinv-" + pr.a + "-" + pr.b;
      list.push_back(
          {nm, "chart-sepinv",
           "per-coordinate involution of " + pr.a + ", " + pr.b + " on chart " +
               c.name,
           [&m, &c, fa, fb, nm](std::uint64_t seed, int n, double tol) {
             return run_sampled(
                 m, nm, "chart-sepinv", seed, n, tol, c.avoid,
                 [&c, fa, fb](PointSampler& s, std::string&) {
                   Vec6 y = vector_value(*c.forward, s());
                   auto parts = separable_involution(*fa, *fb, y);
                   return std::max({std::fabs(parts[0]), std::fabs(parts[1]),
                                    std::fabs(parts[2])});
                 });
           }});
    }
    if (c.ignorable_coord >= 0) {
      ScalarFieldPtr hnew;
      for (const auto& fm : c.field_match)
        if (fm.first == "H") hnew = fm.second;
      if (!hnew) throw ConfigError("ignorable check needs a declared H");
      std::string nm =
          base + "ignorable-q" + std::to_string(c.ignorable_coord + 1);
      int dir = c.ignorable_coord;
      list.push_back(
          {nm, "chart-ignorable",
           "H independent of coordinate " + std::to_string(dir + 1) +
               " on chart " + c.name,
           [&m, &c, hnew, dir, nm](std::uint64_t seed, int n, double tol) {
             return run_sampled(
                 m, nm, "chart-ignorable", seed, n, tol, c.avoid,
                 [&c, hnew, dir](PointSampler& s, std::string&) {
                   Vec6 y = vector_value(*c.forward, s());
                   return std::fabs(
                       field_partial(*hnew, promote6<double>(y), dir));
                 });
           }});
    }
  }
}

void add_stackel_checks(std::vector<PendingCheck>& list, const ModelSpec& m) {
  for (const auto& st : m.stackels) {
    std::string base = "stackel/" + st.name + "/";
    list.push_back(
        {base + "map-canonical", "map-canonical",
         "attachment map " + st.name + " preserves the symplectic form",
         [&m, &st, base](std::uint64_t seed, int n, double tol) {
           return run_sampled(m, base + "map-canonical", "map-canonical", seed,
                              n, tol, {},
                              [&st](PointSampler& s, std::string&) {
                                return symplectic_defect(
                                    jacobian6(*st.to_chart, s()));
                              });
         }});
    list.push_back(
        {base + "separation", "separation",
         "separation identity: matrix times declared basis equals the rhs",
         [&m, &st, base](std::uint64_t seed, int n, double tol) {
           return run_sampled(
               m, base + "separation", "separation", seed, n, tol, {},
               [&st](PointSampler& s, std::string&) {
                 auto [x, y] = s.mapped(*st.to_chart, st.avoid);
                 return separation_residual(st.spec, st.declared, y);
               });
         }});
    list.push_back(
        {base + "cofactor", "cofactor",
         "adjugate identity: S times adj(S) equals det(S) times I",
         [&m, &st, base](std::uint64_t seed, int n, double tol) {
           return run_sampled(
               m, base + "cofactor", "cofactor", seed, n, tol, {},
               [&st](PointSampler& s, std::string&) {
                 auto [x, y] = s.mapped(*st.to_chart, st.avoid);
                 return cofactor_identity_residual(st.spec, {y[0], y[1], y[2]});
               });
         }});
    list.push_back(
        {base + "akn", "akn",
         "declared basis equals the induced commuting basis",
         [&m, &st, base](std::uint64_t seed, int n, double tol) {
           auto akn = akn_hamiltonians(st.spec);
           return run_sampled(
               m, base + "akn", "akn", seed, n, tol, {},
               [&st, akn](PointSampler& s, std::string&) {
                 auto [x, y] = s.mapped(*st.to_chart, st.avoid);
                 double w = 0.0;
                 for (int j = 0; j < 3; ++j) {
                   double want =
                       st.declared[static_cast<std::size_t>(j)]->value(y);
                   double got = akn[static_cast<std::size_t>(j)]->value(y);
                   w = std::max(w, rel(got - want, want));
                 }
                 return w;
               });
         }});
    list.push_back(
        {base + "akn-involution", "akn-involution",
         "induced commuting basis is pairwise in involution",
         [&m, &st, base](std::uint64_t seed, int n, double tol) {
           auto akn = akn_hamiltonians(st.spec);
           return run_sampled(
               m, base + "akn-involution", "akn-involution", seed, n, tol, {},
               [&st, akn](PointSampler& s, std::string&) {
                 auto [x, y] = s.mapped(*st.to_chart, st.avoid);
                 double w = 0.0;
                 for (int i = 0; i < 3; ++i)
                   for (int j = i + 1; j < 3; ++j)
                     w = std::max(
                         w, std::fabs(poisson_bracket(
                                *akn[static_cast<std::size_t>(i)],
                                *akn[static_cast<std::size_t>(j)], y)));
                 return w;
               });
         }});
    for (int j = 1; j <= 2; ++j) {
      OperatorFieldPtr kj = stackel_haantjes(st.spec, j);
      std::string kn = "Kh" + std::to_string(j + 1);
      ScalarFieldPtr gen = st.declared[0];
      ScalarFieldPtr target = st.declared[static_cast<std::size_t>(j)];
      list.push_back(
          {base + "haantjes-" + kn, "torsion",
           "derived eigenvalue-quotient operator " + kn + " is torsion-free",
           [&m, &st, kj, base, kn](std::uint64_t seed, int n, double tol) {
             return run_sampled(
                 m, base + "haantjes-" + kn, "torsion", seed, n, tol, {},
                 [&st, kj](PointSampler& s, std::string&) {
                   auto [x, y] = s.mapped(*st.to_chart, st.avoid);
                   return haantjes_torsion(*kj, y).scaled();
                 });
           }});
      list.push_back(
          {base + "compat-" + kn, "compat",
           "symplectic compatibility of derived operator " + kn,
           [&m, &st, kj, base, kn](std::uint64_t seed, int n, double tol) {
             return run_sampled(
                 m, base + "compat-" + kn, "compat", seed, n, tol, {},
                 [&st, kj](PointSampler& s, std::string&) {
                   auto [x, y] = s.mapped(*st.to_chart, st.avoid);
                   return compatibility_residual(*kj, y);
                 });
           }});
      list.push_back(
          {base + "chain-" + kn, "chain",
           kn + "^T d(" + st.declared_names[0] + ") closes and equals d(" +
               st.declared_names[static_cast<std::size_t>(j)] + ")",
           [&m, &st, kj, gen, target, base, kn](std::uint64_t seed, int n,
                                                double tol) {
             return run_sampled(
                 m, base + "chain-" + kn, "chain", seed, n, tol, {},
                 [&st, kj, gen, target](PointSampler& s, std::string&) {
                   auto [x, y] = s.mapped(*st.to_chart, st.avoid);
                   double closed = chain_closedness(*kj, *gen, y);
                   double exact = chain_exactness(*kj, *gen, *target, y);
                   return std::max(closed, exact);
                 });
           }});
    }
    {
      OperatorFieldPtr k2 = stackel_haantjes(st.spec, 1);
      OperatorFieldPtr k3 = stackel_haantjes(st.spec, 2);
      list.push_back(
          {base + "algebra-Kh2-Kh3", "algebra",
           "Abelian algebra axioms for the derived operator pair",
           [&m, &st, k2, k3, base](std::uint64_t seed, int n, double tol) {
             return run_sampled(
                 m, base + "algebra-Kh2-Kh3", "algebra", seed, n, tol, {},
                 [&st, k2, k3](PointSampler& s, std::string&) {
                   auto [x, y] = s.mapped(*st.to_chart, st.avoid);
                   std::uint64_t sub = s.rng()();
                   return algebra_axioms(*k2, *k3, y, sub, 2).max();
                 });
           }});
    }
    if (!st.extra_involution.empty()) {
      auto resolve = [&st](const std::string& name) -> ScalarFieldPtr {
        for (int i = 0; i < 3; ++i)
          if (st.declared_names[static_cast<std::size_t>(i)] == name)
            return st.declared[static_cast<std::size_t>(i)];
        for (const auto& f : st.extra_fields)
          if (f.name == name) return f.field;
        throw ConfigError("unknown attachment field '" + name + "'");
      };
      for (const auto& pr : st.extra_involution) {
        ScalarFieldPtr fa = resolve(pr.a);
        ScalarFieldPtr fb = resolve(pr.b);
        std::string nm = base + "involution-" + pr.a + "-" + pr.b;
        list.push_back(
            {nm, "extra-involution",
             "{" + pr.a + ", " + pr.b + "} = 0 on the attachment chart",
             [&m, &st, fa, fb, nm](std::uint64_t seed, int n, double tol) {
               return run_sampled(
                   m, nm, "extra-involution", seed, n, tol, {},
                   [&st, fa, fb](PointSampler& s, std::string&) {
                     auto [x, y] = s.mapped(*st.to_chart, st.avoid);
                     return std::fabs(poisson_bracket(*fa, *fb, y));
                   });
             }});
      }
    }
  }
}

void add_constraint_checks(std::vector<PendingCheck>& list,
                           const ModelSpec& m) {
  for (const auto& c : m.constraints) {
    std::string nm = "constraint/" + c.name;
    list.push_back({nm, "constraint", c.desc,
                    [&m, &c, nm](std::uint64_t seed, int n, double) {
                      CheckOutcome out;
                      out.name = nm;
                      out.klass = "constraint";
                      out.tol = 0.0;
                      PointSampler s(m, {}, seed);
                      double lo = 0.0, hi = 0.0, sum = 0.0;
                      for (int i = 0; i < n; ++i) {
                        double v = c.value->value(s());
                        if (i == 0) lo = hi = v;
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                        sum += std::fabs(v);
                        ++out.samples;
                      }
                      out.mean = sum / static_cast<double>(n);
                      switch (c.kind) {
                        case ConstraintKind::Positive:
                          out.passed = lo > 0.0;
                          out.worst = lo;
                          break;
                        case ConstraintKind::NonZero:
                        case ConstraintKind::OneSign:
                          out.passed = lo > 0.0 || hi < 0.0;
                          out.worst = std::min(std::fabs(lo), std::fabs(hi));
                          break;
                      }
                      if (!out.passed) out.note = "violated: " + c.desc;
                      return out;
                    }});
  }
  for (const auto& p : m.periodic) {
    std::string nm = "periodic/" + p.name;
    list.push_back(
        {nm, "periodic",
         "slot " + p.name + " is periodic with the declared period",
         [&m, &p, nm](std::uint64_t seed, int n, double tol) {
           return run_sampled(
               m, nm, "periodic", seed, n, tol, {},
               [&p](PointSampler& s, std::string&) {
                 std::uniform_real_distribution<double> u(-p.period, p.period);
                 double v = u(s.rng());
                 double a = eval_function<double>(p.fn, {&v, 1});
                 double vp = v + p.period;
                 double b = eval_function<double>(p.fn, {&vp, 1});
                 return rel(a - b, a);
               });
         }});
  }
}

void add_hj_check(std::vector<PendingCheck>& list, const ModelSpec& m) {
  if (!m.hj) return;
  list.push_back(
      {"hj/residual", "hj",
       "separated momentum branches reproduce the pinned integral values",
       [&m](std::uint64_t seed, int n, double tol) {
         return run_sampled(
             m, "hj/residual", "hj", seed, n, tol, {},
             [&m](PointSampler& s, std::string&) {
               const HJSpec& hj = *m.hj;
               for (int tries = 0; tries < kMaxRejects; ++tries) {
                 Vec6 x = s();
                 std::uniform_int_distribution<int> coin(0, 1);
                 std::array<int, 3> signs{1, 1, 1};
                 bool ok = true;
                 for (int k = 0; k < 3; ++k) {
                   if (coin(s.rng()))
                     x[static_cast<std::size_t>(k) + 3] *= -1.0;
                   signs[static_cast<std::size_t>(k)] =
                       x[static_cast<std::size_t>(k) + 3] < 0.0 ? -1 : 1;
                   if (std::fabs(x[static_cast<std::size_t>(k) + 3]) <
                       hj.momentum_floor)
                     ok = false;
                 }
                 if (!ok) continue;
                 std::array<double, 3> q{x[0], x[1], x[2]};
                 std::array<double, 3> h;
                 for (int i = 0; i < 3; ++i)
                   h[static_cast<std::size_t>(i)] =
                       model_field(m, hj.h_names[static_cast<std::size_t>(i)])
                           ->value(x);
                 return hj_residual(m, q, h, signs);
               }
               throw ForbiddenRegion("no admissible separated draw found");
             });
       }});
}

}  // namespace

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> tols = {
      {"torsion", 1e-8},        {"compat", 1e-10},
      {"spectrum", 1e-10},      {"algebra", 1e-8},
      {"chain", 1e-9},          {"involution", 1e-10},
      {"relation", 1e-10},      {"sepinv", 1e-10},
      {"two-path", 1e-12},      {"curl", 1e-10},
      {"div-b", 1e-9},          {"gauge", 1e-10},
      {"chart-canonical", 1e-10}, {"chart-ham", 1e-12},
      {"chart-match", 1e-10},   {"chart-diag", 1e-8},
      {"chart-offdiag", 1e-8},  {"chart-sepinv", 1e-10},
      {"chart-ignorable", 1e-10}, {"separation", 1e-10},
      {"cofactor", 1e-12},      {"akn", 1e-10},
      {"akn-involution", 1e-10}, {"map-canonical", 1e-10},
      {"extra-involution", 1e-10}, {"periodic", 1e-10},
      {"hj", 1e-8},             {"constraint", 0.0},
  };
  return tols;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Report verify_model(const ModelSpec& m, const RunOptions& opt) {
  std::map<std::string, double> tols = default_tolerances();
  for (const auto& [k, v] : opt.tol) {
    auto it = tols.find(k);
    if (it == tols.end())
      throw ConfigError("unknown tolerance class '" + k + "'");
    it->second = v;
  }

  std::vector<PendingCheck> list;
  add_geometry_checks(list, m);
  add_operator_checks(list, m);
  add_bracket_checks(list, m);
  add_chart_checks(list, m);
  add_stackel_checks(list, m);
  add_constraint_checks(list, m);
  add_hj_check(list, m);

  Report rep;
  rep.model_id = m.id;
  rep.title = m.title;
  rep.gauge = m.gauge;
  rep.degenerate = m.degenerate;
  rep.params = m.params;
  for (const auto& f : m.functions) rep.functions.push_back({f.name, f.source});
  rep.options = opt;
  rep.options.tol = tols;
  rep.checks.resize(list.size());

  auto run_one = [&](std::size_t i) {
    const PendingCheck& c = list[i];
    double tol = tols.at(c.klass);
    rep.checks[i] = c.run(opt.seed ^ fnv1a(c.name), opt.samples, tol);
    rep.checks[i].anchor = c.anchor;
  };

  if (opt.threads <= 1) {
    for (std::size_t i = 0; i < list.size(); ++i) run_one(i);
  } else {
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (std::size_t i = next++; i < list.size(); i = next++) run_one(i);
    };
    for (int t = 0; t < opt.threads; ++t)
      futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }

  rep.passed = true;
  for (const auto& c : rep.checks)
    if (!c.passed) rep.passed = false;
  return rep;
}

std::string report_json(const Report& r, const std::string& stamp) {
  nlohmann::ordered_json j;
  j["model"] = r.model_id;
  j["title"] = r.title;
  j["gauge"] = r.gauge;
  j["degenerate"] = r.degenerate;
  j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.params) j["params"][k] = v;
  j["functions"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.functions) j["functions"][k] = v;
  j["options"]["seed"] = r.options.seed;
  j["options"]["samples"] = r.options.samples;
  j["options"]["threads"] = r.options.threads;
  j["options"]["tolerances"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.options.tol) j["options"]["tolerances"][k] = v;
  int failed = 0;
  for (const auto& c : r.checks)
    if (!c.passed) ++failed;
  j["summary"]["checks"] = r.checks.size();
  j["summary"]["failed"] = failed;
  j["summary"]["passed"] = r.passed;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["class"] = c.klass;
    e["anchor"] = c.anchor;
    e["tol"] = c.tol;
    e["samples"] = c.samples;
    e["max"] = c.worst;
    e["mean"] = c.mean;
    e["passed"] = c.passed;
    if (!c.note.empty()) e["note"] = c.note;
    j["checks"].push_back(std::move(e));
  }
  if (!stamp.empty()) j["timestamp"] = stamp;
  return j.dump(2) + "\n";
}

}  // namespace omh
