// End-to-end acceptance gate.  Prints one PASS/FAIL line per criterion and
// exits nonzero if any gate fails.  Everything runs from fixed seeds.

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "core/dynamics.hpp"
#include "core/stackel.hpp"
#include "core/verify.hpp"

using namespace omh;

namespace {

struct Entry {
  std::string label;
  ModelSpec spec;
  Report rep;
};

int g_failures = 0;

void gate(int idx, const std::string& text, bool ok) {
  std::printf("%s %2d/10  %s\n", ok ? "PASS" : "FAIL", idx, text.c_str());
  if (!ok) ++g_failures;
}

// all checks of the given classes pass, and at least `floor` of them exist
bool classes_pass(const std::vector<Entry>& entries,
                  const std::set<std::string>& classes, int floor,
                  std::string& detail) {
  int seen = 0, failed = 0;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& e : entries)
    for (const auto& c : e.rep.checks) {
      if (!classes.count(c.klass)) continue;
      ++seen;
      if (!c.passed) {
        ++failed;
        if (c.worst > worst) {
          worst = c.worst;
          worst_name = e.label + ":" + c.name;
        }
      }
    }
  char buf[160];
  if (failed)
    std::snprintf(buf, sizeof buf, "%d/%d checks failed (worst %s = %.2e)",
                  failed, seen, worst_name.c_str(), worst);
  else
    std::snprintf(buf, sizeof buf, "%d checks", seen);
  detail = buf;
  return failed == 0 && seen >= floor;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double max_drift(const ModelSpec& m, double t_final, double dt,
                 std::string& worst_name) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.t_final = t_final;
  Trajectory tr = integrate(m.sys, m.sim_x0, cfg, m.integrals);
  double worst = 0.0;
  for (const auto& d : conservation_report(tr)) {
    if (d.used == 0) continue;
    if (d.max_drift > worst) {
      worst = d.max_drift;
      worst_name = d.name;
    }
  }
  return worst;
}

}  // namespace

int main() {
  RunOptions opt;
  opt.samples = 100;
  opt.seed = 12345;
  opt.threads = 4;

  std::vector<Entry> entries;
  for (const char* g : {"symmetric", "landau_x", "landau_y"}) {
    ModelSpec m = make_model("constant-b", {}, {}, g);
    entries.push_back({std::string("constant-b/") + g, std::move(m), {}});
  }
  for (const char* id :
       {"undulator", "cyl-case1", "cyl-case2", "cyl-case3", "family-a",
        "family-b"})
    entries.push_back({id, make_model(id), {}});
  for (auto& e : entries) e.rep = verify_model(e.spec, opt);

  std::string d;

  // 1: every declared operator is certified torsion-free by sampling
  bool c1 = classes_pass(entries, {"torsion"}, 20, d);
  gate(1, "vanishing torsion for all declared operators, 100 samples, "
          "all gauges (" + d + ")", c1);

  // 2: the operator families close under the module/ring operations and are
  // compatible with the symplectic form
  bool c2a = classes_pass(entries, {"algebra"}, 5, d);
  std::string d2 = d;
  bool c2b = classes_pass(entries, {"compat"}, 20, d);
  gate(2, "operator algebras close and stay symplectically compatible (" +
          d2 + " algebra, " + d + " compat)", c2a && c2b);

  // 3: chain one-forms are closed and exact against the declared integrals
  bool c3 = classes_pass(entries, {"chain"}, 10, d);
  gate(3, "chains K^T dH close and integrate to the declared targets (" + d +
          ")", c3);

  // 4: involution tables, per-coordinate splits, and the declared bracket
  // relations, including the oscillator-type triple of the helical model
  bool c4 = classes_pass(entries, {"involution", "sepinv", "relation"}, 30, d);
  int undulator_relations = 0;
  for (const auto& e : entries)
    if (e.label == "undulator")
      for (const auto& c : e.rep.checks)
        if (c.klass == "relation" && c.passed) ++undulator_relations;
  gate(4, "involution and bracket relations hold (" + d + "; " +
          std::to_string(undulator_relations) +
          " helical-model bracket relations)", c4 && undulator_relations >= 2);

  // 5: closed-form spectra with semisimple eigenvalue clusters
  bool c5 = classes_pass(entries, {"spectrum"}, 10, d);
  gate(5, "declared spectra match with Riesz index one everywhere (" + d + ")",
       c5);

  // 6: chart maps are canonical and produce the declared normal forms
  bool c6 = classes_pass(entries,
                         {"chart-canonical", "chart-ham", "chart-match",
                          "chart-diag", "chart-offdiag", "chart-sepinv",
                          "chart-ignorable"},
                         10, d);
  gate(6, "separation charts are canonical with the declared diagonal forms (" +
          d + ")", c6);

  // 7: separation matrices solve their linear systems, adjugate identities
  // hold, and the induced bases agree with the declared ones
  bool c7 = classes_pass(entries,
                         {"map-canonical", "separation", "cofactor", "akn",
                          "akn-involution", "extra-involution"},
                         10, d);
  gate(7, "separation-matrix structure certified end to end (" + d + ")", c7);

  // 8: separated momentum branches reproduce the constants of motion
  bool c8 = classes_pass(entries, {"hj"}, 3, d);
  gate(8, "separated-solution residuals vanish over admissible draws (" + d +
          ")", c8);

  // 9: integrator order, long-run conservation, and reversibility
  bool c9 = true;
  std::string c9_note;
  {
    // order: midpoint end-state error must shrink 4x when dt halves
    ModelSpec und = make_model("undulator");
    IntegratorConfig ref_cfg;
    ref_cfg.dt = 1e-4;
    ref_cfg.t_final = 1.0;
    Vec6 ref = integrate(und.sys, und.sim_x0, ref_cfg).states.back();
    auto err_at = [&](double dt) {
      IntegratorConfig cfg;
      cfg.dt = dt;
      cfg.t_final = 1.0;
      Vec6 end = integrate(und.sys, und.sim_x0, cfg).states.back();
      double e = 0.0;
      for (int k = 0; k < 6; ++k)
        e = std::max(e, std::fabs(end[static_cast<std::size_t>(k)] -
                                  ref[static_cast<std::size_t>(k)]));
      return e;
    };
    double ratio = err_at(2e-2) / err_at(1e-2);
    bool order_ok = ratio > 3.2 && ratio < 4.8;
    c9 = c9 && order_ok;
    c9_note += "dt-halving ratio " + fmt(ratio);

    // drift systems: the uniform field in all gauges, the helical field, and
    // one seeded random instance of each slot family
    std::mt19937_64 rng(2468);
    auto draw = [&rng](double lo, double hi) {
      return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
    };
    std::map<std::string, std::string> fa{
        {"lam1", "y/" + fmt(draw(2.0, 4.0)) + " + " + fmt(draw(0.1, 0.3))},
        {"lam2", "1 + sin(y)^2/" + fmt(draw(5.0, 9.0))},
        {"mu1", "1 + sin(x)/" + fmt(draw(3.0, 6.0))},
        {"mu2", "1 + cos(y)^2/" + fmt(draw(4.0, 8.0))},
        {"mu3", "1 + sin(z)^2/" + fmt(draw(4.0, 8.0))},
        {"mu4", "y^2/" + fmt(draw(2.0, 5.0))}};
    std::map<std::string, std::string> fb{
        {"psi1", "1 + cos(x)^2/" + fmt(draw(1.5, 3.0))},
        {"psi2", "2 + sin(x)/" + fmt(draw(1.0, 2.0))},
        {"nu1", "1 + sin(x)^2/" + fmt(draw(1.5, 3.0))},
        {"nu2", "1 + cos(y)^2/" + fmt(draw(2.5, 4.0))},
        {"nu3", "1 + sin(z)^2/" + fmt(draw(3.0, 5.0))},
        {"nu4", "x^2/" + fmt(draw(1.5, 3.0))}};
    std::vector<std::pair<std::string, ModelSpec>> systems;
    for (const char* g : {"symmetric", "landau_x", "landau_y"})
      systems.push_back({std::string("constant-b/") + g,
                         make_model("constant-b", {}, {}, g)});
    systems.push_back({"undulator", std::move(und)});
    systems.push_back({"family-a(random)", make_model("family-a", {}, fa)});
    systems.push_back({"family-b(random)", make_model("family-b", {}, fb)});

    double worst_drift = 0.0;
    std::string worst_sys;
    for (const auto& [label, m] : systems) {
      std::string mon;
      double w = max_drift(m, 10.0, 1e-3, mon);
      if (w > worst_drift) {
        worst_drift = w;
        worst_sys = label + ":" + mon;
      }
    }
    bool drift_ok = worst_drift < 1e-6;
    c9 = c9 && drift_ok;
    c9_note += ", worst drift " + fmt(worst_drift) + " (" + worst_sys + ")";

    double worst_rev = 0.0;
    for (const auto& [label, m] : systems) {
      IntegratorConfig cfg;
      cfg.dt = 1e-3;
      cfg.t_final = 2.0;
      cfg.newton_tol = 1e-12;
      worst_rev = std::max(worst_rev,
                           reversibility_defect(m.sys, m.sim_x0, cfg));
    }
    bool rev_ok = worst_rev <= 10 * 1e-12;
    c9 = c9 && rev_ok;
    c9_note += ", worst reversibility " + fmt(worst_rev);
  }
  gate(9, "integrator: order two, drift < 1e-6 over t=10, reversible (" +
          c9_note + ")", c9);

  // 10: the detectors must flag deliberately broken inputs
  bool c10 = true;
  std::string c10_note;
  {
    const std::array<std::string, 3> Q{"q1", "q2", "q3"};
    const std::array<std::string, 3> P{"p1", "p2", "p3"};
    std::array<std::string, 3> f_text{"p1^2/2 + q1^4", "p2^2/2",
                                      "p3^2/2 + q3^2"};
    StackelSpec good = make_stackel(
        Q, P, {{{"q1^2", "-1", "0"}, {"0", "1", "-1"}, {"0", "0", "1"}}},
        f_text);
    StackelSpec bent = make_stackel(
        Q, P,
        {{{"q1^2 + q1/1000", "-1", "0"}, {"0", "1", "-1"}, {"0", "0", "1"}}},
        f_text);
    auto h = akn_hamiltonians(good);
    std::mt19937_64 rng(97);
    auto draw = [&rng] {
      Vec6 x;
      for (auto& v : x) v = 0.5 + std::generate_canonical<double, 53>(rng);
      return x;
    };
    double clean = 0.0, broken = 0.0;
    for (int i = 0; i < 20; ++i) {
      Vec6 x = draw();
      clean = std::max(clean, separation_residual(good, h, x));
      broken = std::max(broken, separation_residual(bent, h, x));
    }
    bool stackel_flagged = clean < 1e-12 && broken > 1e-5 && broken < 1e-1;
    c10 = c10 && stackel_flagged;
    c10_note += "perturbed matrix residual " + fmt(broken);

    auto skew = make_operator_field([](const auto& x) {
      using S = std::decay_t<decltype(x[0])>;
      SmallMatrix<S> m = SmallMatrix<S>::identity(6);
      m(0, 1) = S(1.0);
      return m;
    });
    double compat = 0.0;
    for (int i = 0; i < 20; ++i)
      compat = std::max(compat, compatibility_residual(*skew, draw()));
    bool compat_flagged = compat > 1e-4;
    c10 = c10 && compat_flagged;
    c10_note += ", incompatible operator residual " + fmt(compat);

    ModelSpec cb = make_model("constant-b");
    NamedField q1{"Q1", "first coordinate (not conserved)",
                  make_scalar_field([](const auto& x) { return x[0]; }), {}};
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 1.0;
    Trajectory tr = integrate(cb.sys, cb.sim_x0, cfg, {q1});
    double coord_drift = 0.0;
    for (const auto& s : conservation_report(tr))
      if (s.name == "Q1") coord_drift = s.max_drift;
    bool drift_flagged = coord_drift > 1e-2;
    c10 = c10 && drift_flagged;
    c10_note += ", non-integral drift " + fmt(coord_drift);
  }
  gate(10, "negative controls are caught (" + c10_note + ")", c10);

  if (g_failures) {
    std::printf("%d acceptance gate(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 10 acceptance gates passed\n");
  return 0;
}
