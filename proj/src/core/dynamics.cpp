#include "dynamics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "errors.hpp"

namespace omh {

namespace {

// canonical vector field J grad H
Vec6 canonical_field(const ScalarField& h, const Vec6& x) {
  Vec6 g = gradient6(h, x);
  return {g[3], g[4], g[5], -g[0], -g[1], -g[2]};
}

Vec6 midpoint(const Vec6& a, const Vec6& b) {
  Vec6 m;
  for (int i = 0; i < 6; ++i)
    m[static_cast<std::size_t>(i)] =
        0.5 * (a[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(i)]);
  return m;
}

double max_abs_diff(const Vec6& a, const Vec6& b) {
  double w = 0.0;
  for (int i = 0; i < 6; ++i)
    w = std::max(w, std::fabs(a[static_cast<std::size_t>(i)] -
                              b[static_cast<std::size_t>(i)]));
  return w;
}

// residual of the implicit step: G(y) = y - x - dt f((x+y)/2)
Vec6 step_residual(const ScalarField& h, const Vec6& x, const Vec6& y,
                   double dt) {
  Vec6 f = canonical_field(h, midpoint(x, y));
  Vec6 g;
  for (int i = 0; i < 6; ++i)
    g[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] -
                                     x[static_cast<std::size_t>(i)] -
                                     dt * f[static_cast<std::size_t>(i)];
  return g;
}

double inf_norm(const Vec6& v) {
  double w = 0.0;
  for (double c : v) w = std::max(w, std::fabs(c));
  return w;
}

}  // namespace

Vec6 midpoint_step(const ScalarField& h, const Vec6& x, double dt,
                   const IntegratorConfig& cfg, bool* used_fallback) {
  if (used_fallback) *used_fallback = false;

  // explicit predictor
  Vec6 f0 = canonical_field(h, x);
  Vec6 y = x;
  for (int i = 0; i < 6; ++i)
    y[static_cast<std::size_t>(i)] += dt * f0[static_cast<std::size_t>(i)];

  bool newton_ok = false;
  for (int it = 0; it < cfg.max_newton_iters; ++it) {
    Vec6 g = step_residual(h, x, y, dt);
    if (inf_norm(g) <= cfg.newton_tol) {
      newton_ok = true;
      break;
    }
    Mat hess = hessian6(h, midpoint(x, y));
    // dG/dy = I - (dt/2) J Hess
    Eigen::Matrix<double, 6, 6> jac;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 6; ++c) {
        jac(r, c) = -(dt / 2.0) * hess(r + 3, c);
        jac(r + 3, c) = (dt / 2.0) * hess(r, c);
      }
    for (int i = 0; i < 6; ++i) jac(i, i) += 1.0;
    Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(jac);
    if (!lu.isInvertible()) break;  // degenerate linearization: fall back
    Eigen::Matrix<double, 6, 1> rhs;
    for (int i = 0; i < 6; ++i) rhs(i) = -g[static_cast<std::size_t>(i)];
    Eigen::Matrix<double, 6, 1> delta = lu.solve(rhs);
    for (int i = 0; i < 6; ++i) y[static_cast<std::size_t>(i)] += delta(i);
  }
  if (newton_ok) return y;

  // fixed-point fallback: y <- x + dt f((x+y)/2)
  y = x;
  for (int i = 0; i < 6; ++i)
    y[static_cast<std::size_t>(i)] += dt * f0[static_cast<std::size_t>(i)];
  for (int it = 0; it < cfg.max_fixed_point_iters; ++it) {
    Vec6 f = canonical_field(h, midpoint(x, y));
    Vec6 next = x;
    for (int i = 0; i < 6; ++i)
      next[static_cast<std::size_t>(i)] += dt * f[static_cast<std::size_t>(i)];
    double moved = max_abs_diff(next, y);
    y = next;
    if (moved <= cfg.newton_tol) {
      if (used_fallback) *used_fallback = true;
      return y;
    }
  }
  throw NewtonDivergence("implicit midpoint solve diverged", 0);
}

Trajectory integrate(const HamiltonianSystem& sys, const Vec6& x0,
                     const IntegratorConfig& cfg,
                     const std::vector<NamedField>& integrals) {
  if (cfg.dt <= 0.0) throw ConfigError("dt must be positive");
  if (cfg.t_final <= cfg.t0) throw ConfigError("t_final must exceed t0");
  const auto steps =
      static_cast<std::size_t>(std::llround((cfg.t_final - cfg.t0) / cfg.dt));

  Trajectory traj;
  traj.integral_names.push_back("H");
  for (const auto& f : integrals) traj.integral_names.push_back(f.name);
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.integral_values.reserve(steps + 1);

  auto record = [&](double t, const Vec6& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    std::vector<double> row;
    row.reserve(1 + integrals.size());
    row.push_back(sys.H->value(x));
    for (const auto& f : integrals) {
      bool singular = false;
      for (const auto& a : f.avoid)
        if (std::fabs(a->value(x)) < cfg.singular_margin) singular = true;
      row.push_back(singular ? std::numeric_limits<double>::quiet_NaN()
                             : f.field->value(x));
    }
    traj.integral_values.push_back(std::move(row));
  };

  std::array<double, 3> q0{x0[0], x0[1], x0[2]};
  if (!in_domain(sys.chart, q0, cfg.domain_margin))
    throw DomainExit("initial state outside the chart domain", 0);
  record(cfg.t0, x0);

  Vec6 x = x0;
  for (std::size_t n = 0; n < steps; ++n) {
    bool fb = false;
    Vec6 y;
    try {
      y = midpoint_step(*sys.H, x, cfg.dt, cfg, &fb);
    } catch (const NewtonDivergence&) {
      throw NewtonDivergence("implicit midpoint solve diverged", n + 1);
    }
    if (fb) ++traj.fallback_steps;
    std::array<double, 3> q{y[0], y[1], y[2]};
    if (!in_domain(sys.chart, q, cfg.domain_margin))
      throw DomainExit("state left the chart domain", n + 1);
    x = y;
    record(cfg.t0 + static_cast<double>(n + 1) * cfg.dt, x);
  }
  return traj;
}

std::vector<DriftStat> conservation_report(const Trajectory& traj) {
  if (traj.times.empty()) throw ConfigError("empty trajectory");
  std::vector<DriftStat> out;
  for (std::size_t k = 0; k < traj.integral_names.size(); ++k) {
    DriftStat s;
    s.name = traj.integral_names[k];
    double base = std::numeric_limits<double>::quiet_NaN();
    double st = 0.0, sd = 0.0, stt = 0.0, std_ = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      double v = traj.integral_values[i][k];
      if (!std::isfinite(v)) {
        ++s.excluded;
        continue;
      }
      if (!std::isfinite(base)) base = v;
      double d = v - base;
      s.max_drift = std::max(s.max_drift, std::fabs(d));
      double t = traj.times[i];
      st += t;
      sd += d;
      stt += t * t;
      std_ += t * d;
      ++s.used;
    }
    if (s.used >= 2) {
      double n = static_cast<double>(s.used);
      double denom = n * stt - st * st;
      if (denom != 0.0) s.slope = (n * std_ - st * sd) / denom;
    }
    out.push_back(std::move(s));
  }
  return out;
}

double reversibility_defect(const HamiltonianSystem& sys, const Vec6& x0,
                            const IntegratorConfig& cfg) {
  auto flip = [](Vec6 v) {
    for (int i = 3; i < 6; ++i) v[static_cast<std::size_t>(i)] *= -1.0;
    return v;
  };
  Trajectory fwd = integrate(sys, x0, cfg);
  Trajectory bwd = integrate(sys, flip(fwd.states.back()), cfg);
  return max_abs_diff(flip(bwd.states.back()), x0);
}

double symplecticity_residual(const ScalarField& h, const Vec6& x,
                              const IntegratorConfig& cfg) {
  const double eps = 1e-4;
  Mat m(6, 6);
  for (int j = 0; j < 6; ++j) {
    Vec6 xp = x, xm = x;
    xp[static_cast<std::size_t>(j)] += eps;
    xm[static_cast<std::size_t>(j)] -= eps;
    Vec6 yp = midpoint_step(h, xp, cfg.dt, cfg);
    Vec6 ym = midpoint_step(h, xm, cfg.dt, cfg);
    for (int i = 0; i < 6; ++i)
      m(i, j) = (yp[static_cast<std::size_t>(i)] -
                 ym[static_cast<std::size_t>(i)]) /
                (2.0 * eps);
  }
  Mat j6 = symplectic_matrix();
  Mat resid = m.transpose() * j6 * m - j6;
  return resid.max_abs();
}

std::string csv_text(const Trajectory& traj) {
  std::string out = "t,q1,q2,q3,p1,p2,p3";
  for (const auto& n : traj.integral_names) out += "," + n;
  out += "\n";
  char buf[64];
  auto put = [&](double v, bool lead_comma) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (lead_comma) out += ",";
    out += buf;
  };
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    put(traj.times[i], false);
    for (double c : traj.states[i]) put(c, true);
    for (double v : traj.integral_values[i]) put(v, true);
    out += "\n";
  }
  return out;
}

void write_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << csv_text(traj);
}

}  // namespace omh
