// Symplectic integration of the canonical flow with conservation monitoring.
#pragma once

#include <string>
#include <vector>

#include "models.hpp"

namespace omh {

struct IntegratorConfig {
  double dt = 1e-3;
  double t_final = 10.0;
  double t0 = 0.0;
  double newton_tol = 1e-12;
  int max_newton_iters = 25;
  int max_fixed_point_iters = 400;
  double domain_margin = 1e-3;    // chart positivity margin before DomainExit
  double singular_margin = 1e-2;  // |avoid| below this excludes a monitor value
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec6> states;
  std::vector<std::string> integral_names;  // "H" first, then the model's list
  // one row per recorded state; NaN where a monitor sits inside the singular
  // margin of one of its avoid fields
  std::vector<std::vector<double>> integral_values;
  int fallback_steps = 0;  // steps solved by fixed-point after Newton stalled
};

struct DriftStat {
  std::string name;
  double max_drift = 0.0;   // max |F(x_t) - F(x_0)| over included records
  double slope = 0.0;       // least-squares slope of the drift vs t
  std::size_t used = 0;     // records included
  std::size_t excluded = 0; // records skipped inside a singular margin
};

// One implicit-midpoint step of the canonical flow of H.  Newton with a
// hyper-dual Jacobian; falls back to fixed-point iteration when the Newton
// update stalls or the linear solve degenerates.  Throws NewtonDivergence
// (step index filled by the caller) when neither converges.
Vec6 midpoint_step(const ScalarField& h, const Vec6& x, double dt,
                   const IntegratorConfig& cfg, bool* used_fallback = nullptr);

// Integrates sys.H from x0 and records every state with monitor values.
// Throws DomainExit when a state leaves the chart domain and NewtonDivergence
// when a step cannot be solved; both carry the failing step index.
Trajectory integrate(const HamiltonianSystem& sys, const Vec6& x0,
                     const IntegratorConfig& cfg,
                     const std::vector<NamedField>& integrals = {});

std::vector<DriftStat> conservation_report(const Trajectory& traj);

// forward over [t0, t_final], momenta flipped, same span again: max |x - x0|
double reversibility_defect(const HamiltonianSystem& sys, const Vec6& x0,
                            const IntegratorConfig& cfg);

// residual max |M^T J M - J| of the numerically differentiated one-step map
double symplecticity_residual(const ScalarField& h, const Vec6& x,
                              const IntegratorConfig& cfg);

// header t,q1,q2,q3,p1,p2,p3,<integral names>; 17 significant digits
void write_csv(const std::string& path, const Trajectory& traj);
std::string csv_text(const Trajectory& traj);

}  // namespace omh
