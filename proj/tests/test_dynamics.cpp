#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "core/dynamics.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace omh;

namespace {

HamiltonianSystem harmonic() {
  Chart cart = cartesian_chart();
  VectorPotential a;
  a.comp = {parse("0"), parse("0"), parse("0")};
  return make_system(cart, a, parse("(x^2 + y^2 + z^2)/2"));
}

HamiltonianSystem quartic() {
  Chart cart = cartesian_chart();
  VectorPotential a;
  a.comp = {parse("0"), parse("0"), parse("0")};
  return make_system(cart, a, parse("(x^4 + y^4 + z^2)/4 + x^2*y^2/2"));
}

double final_h_error(const HamiltonianSystem& sys, const Vec6& x0, double dt,
                     double t_final) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.t_final = t_final;
  Trajectory tr = integrate(sys, x0, cfg);
  double h0 = sys.H->value(tr.states.front());
  double h1 = sys.H->value(tr.states.back());
  return std::fabs(h1 - h0);
}

}  // namespace

TEST_CASE("implicit midpoint conserves quadratic hamiltonians to solver precision") {
  HamiltonianSystem sys = harmonic();
  Vec6 x0{0.7, -0.3, 0.5, 0.4, 0.9, -0.6};
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_final = 20.0;
  Trajectory tr = integrate(sys, x0, cfg);
  auto report = conservation_report(tr);
  REQUIRE(!report.empty());
  CHECK(report[0].name == "H");
  CHECK(report[0].max_drift < 1e-11);
  CHECK(tr.fallback_steps == 0);
}

TEST_CASE("step count and time grid follow the configuration") {
  HamiltonianSystem sys = harmonic();
  Vec6 x0{0.5, 0.1, -0.2, 0.3, 0.2, 0.1};
  IntegratorConfig cfg;
  cfg.dt = 0.125;
  cfg.t_final = 1.0;
  Trajectory tr = integrate(sys, x0, cfg);
  REQUIRE(tr.times.size() == 9);  // 8 steps + initial record
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tr.states.size() == tr.times.size());
  CHECK(tr.integral_values.size() == tr.times.size());
}

TEST_CASE("halving the step divides the error by about four") {
  HamiltonianSystem sys = quartic();
  Vec6 x0{0.9, 0.4, -0.3, 0.2, 0.7, 0.5};
  // compare against a fine reference at a fixed end time
  IntegratorConfig ref_cfg;
  ref_cfg.dt = 1e-4;
  ref_cfg.t_final = 1.0;
  Vec6 ref = integrate(sys, x0, ref_cfg).states.back();
  auto err_at = [&](double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t_final = 1.0;
    Vec6 end = integrate(sys, x0, cfg).states.back();
    double e = 0.0;
    for (int k = 0; k < 6; ++k)
      e = std::max(e, std::fabs(end[static_cast<std::size_t>(k)] -
                                ref[static_cast<std::size_t>(k)]));
    return e;
  };
  double e1 = err_at(2e-2), e2 = err_at(1e-2);
  double ratio = e1 / e2;
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);
}

TEST_CASE("the flow map is numerically symplectic") {
  HamiltonianSystem sys = quartic();
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  std::mt19937_64 rng(51);
  for (int i = 0; i < 5; ++i) {
    Vec6 x = omh::testing::random_state(rng);
    CHECK(symplecticity_residual(*sys.H, x, cfg) < 1e-8);
  }
}

TEST_CASE("integration is time reversible up to solver tolerance") {
  HamiltonianSystem sys = quartic();
  Vec6 x0{0.6, -0.2, 0.4, 0.5, 0.3, -0.7};
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_final = 2.0;
  cfg.newton_tol = 1e-12;
  CHECK(reversibility_defect(sys, x0, cfg) < 10 * cfg.newton_tol * 200);
}

TEST_CASE("csv output carries the full grid at 17 significant digits") {
  HamiltonianSystem sys = harmonic();
  Vec6 x0{0.3, 0.2, 0.1, -0.4, 0.5, 0.6};
  IntegratorConfig cfg;
  cfg.dt = 0.25;
  cfg.t_final = 0.5;
  NamedField extra{"J", "x momentum", make_scalar_field([](const auto& x) {
                     return x[3];
                   }), {}};
  Trajectory tr = integrate(sys, x0, cfg, {extra});
  std::string text = csv_text(tr);
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,q1,q2,q3,p1,p2,p3,H,J");
  // first data row round-trips the initial state exactly
  std::string row;
  std::getline(in, row);
  std::replace(row.begin(), row.end(), ',', ' ');
  std::istringstream cells(row);
  double t, v;
  cells >> t;
  CHECK(t == 0.0);
  for (int k = 0; k < 6; ++k) {
    cells >> v;
    CHECK(v == x0[static_cast<std::size_t>(k)]);
  }
  cells >> v;
  CHECK(v == sys.H->value(x0));
}

TEST_CASE("monitors inside a singular margin are recorded as missing") {
  HamiltonianSystem sys = harmonic();
  Vec6 x0{0.3, 0.2, 0.1, 0.005, 0.5, 0.6};  // p1 starts inside the margin
  IntegratorConfig cfg;
  cfg.dt = 0.05;
  cfg.t_final = 0.1;
  auto p1 = make_scalar_field([](const auto& x) { return x[3]; });
  NamedField risky{"R", "1/p1", make_scalar_field([](const auto& x) {
                     return 1.0 / x[3];
                   }), {p1}};
  Trajectory tr = integrate(sys, x0, cfg, {risky});
  CHECK(std::isnan(tr.integral_values.front().back()));
  auto report = conservation_report(tr);
  const DriftStat* r = nullptr;
  for (const auto& d : report)
    if (d.name == "R") r = &d;
  REQUIRE(r != nullptr);
  CHECK(r->excluded > 0);
  CHECK(!std::isnan(r->max_drift));
}

TEST_CASE("leaving the chart domain raises an indexed exit") {
  Chart cyl = cylindrical_chart();
  VectorPotential a;
  a.comp = {parse("0"), parse("0"), parse("0")};
  HamiltonianSystem sys = make_system(cyl, a, parse("0"));
  // radial momentum drives r through zero quickly
  Vec6 x0{0.3, 0.1, 0.0, -2.0, 0.0, 0.0};
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_final = 5.0;
  try {
    integrate(sys, x0, cfg);
    FAIL("expected a domain exit");
  } catch (const DomainExit& e) {
    CHECK(e.step > 0);
  }
  // a start point already outside fails at step 0
  Vec6 bad{-0.3, 0.1, 0.0, 0.0, 0.0, 0.0};
  try {
    integrate(sys, bad, cfg);
    FAIL("expected a domain exit");
  } catch (const DomainExit& e) {
    CHECK(e.step == 0);
  }
}

TEST_CASE("nonpositive step sizes are refused") {
  HamiltonianSystem sys = harmonic();
  Vec6 x0{0.3, 0.2, 0.1, 0.4, 0.5, 0.6};
  IntegratorConfig cfg;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(integrate(sys, x0, cfg), ConfigError);
  cfg.dt = -1e-3;
  CHECK_THROWS_AS(integrate(sys, x0, cfg), ConfigError);
  cfg.dt = 1e-3;
  cfg.t_final = -1.0;
  CHECK_THROWS_AS(integrate(sys, x0, cfg), ConfigError);
}

TEST_CASE("a single midpoint step matches the exact rotation to second order") {
  HamiltonianSystem sys = harmonic();
  // 1-dof slice: (x, p_x) rotates with unit frequency
  Vec6 x{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  IntegratorConfig cfg;
  double dt = 1e-3;
  Vec6 y = midpoint_step(*sys.H, x, dt, cfg);
  // the midpoint rule rotates by 2*atan(dt/2): off the exact angle by dt^3/12
  CHECK(std::fabs(y[0] - std::cos(dt)) < 1e-9);
  CHECK(std::fabs(y[3] + std::sin(dt)) < 1e-9);
}
