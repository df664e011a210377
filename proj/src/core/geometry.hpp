#pragma once

// Orthogonal curvilinear charts on 3-space.  The metric is stored through its
// covariant diagonal entries g_ii as expressions in the chart coordinates;
// vector potentials and magnetic fields are handled through components so no
// global frame is ever needed.  Conventions:
//   * A is given by covariant (gradient-basis) components A_i, so the momentum
//     shift is p_i -> p_i + A_i directly.
//   * curl and the declared B use the orthonormal (unit) basis e_i = (1/h_i) d_i.

#include <array>
#include <string>
#include <vector>

#include "expr.hpp"
#include "fields.hpp"

namespace omh {

struct Chart {
  std::string name;
  std::array<std::string, 3> coords;
  std::array<ExprPtr, 3> metric;     // covariant diagonal entries g_ii
  std::vector<ExprPtr> positivity;   // domain constraints: expr > 0
};

Chart cartesian_chart();
Chart cylindrical_chart();  // coords (r, phi, z), g = diag[1, r^2, 1], r > 0

// canonical momentum names: "p" + coordinate name
std::array<std::string, 6> phase_names(const Chart& chart);

// covariant components A_i as expressions in the chart coordinates
struct VectorPotential {
  std::array<ExprPtr, 3> comp;
};

template <class S>
std::array<S, 3> metric_covariant(const Chart& chart, const std::array<S, 3>& q) {
  std::span<const std::string> names(chart.coords);
  std::span<const S> vals(q);
  std::array<S, 3> g;
  for (int i = 0; i < 3; ++i) {
    g[static_cast<std::size_t>(i)] = eval(*chart.metric[static_cast<std::size_t>(i)], names, vals);
    if (scalar_value(g[static_cast<std::size_t>(i)]) <= 0.0)
      throw DomainError("metric entry g_" + std::to_string(i + 1) +
                        std::to_string(i + 1) + " not positive");
  }
  return g;
}

template <class S>
std::array<S, 3> scale_factors(const Chart& chart, const std::array<S, 3>& q) {
  std::array<S, 3> g = metric_covariant(chart, q);
  return {sqrt(g[0]), sqrt(g[1]), sqrt(g[2])};
}

template <class S>
std::array<S, 3> potential_covariant(const Chart& chart,
                                     const VectorPotential& a,
                                     const std::array<S, 3>& q) {
  std::span<const std::string> names(chart.coords);
  std::span<const S> vals(q);
  std::array<S, 3> out;
  for (int i = 0; i < 3; ++i)
    out[static_cast<std::size_t>(i)] = eval(*a.comp[static_cast<std::size_t>(i)], names, vals);
  return out;
}

// partial of a 3-space expression in a coordinate direction, one dual level up
template <class S>
S coord_partial(const Chart& chart, const Expr& e, const std::array<S, 3>& q,
                int dir) {
  std::array<HyperDual<S>, 3> qq;
  for (int j = 0; j < 3; ++j) qq[static_cast<std::size_t>(j)].v = q[static_cast<std::size_t>(j)];
  qq[static_cast<std::size_t>(dir)].d1 = S(1.0);
  std::span<const std::string> names(chart.coords);
  std::span<const HyperDual<S>> vals(qq);
  return eval(e, names, vals).d1;
}

// unit-basis components of curl(A):
//   B_1 = (d2 A_3 - d3 A_2)/(h2 h3), cyclic
template <class S>
std::array<S, 3> curl(const Chart& chart, const VectorPotential& a,
                      const std::array<S, 3>& q) {
  std::array<S, 3> h = scale_factors(chart, q);
  auto d = [&](int i, int j) {  // d_i A_j
    return coord_partial(chart, *a.comp[static_cast<std::size_t>(j)], q, i);
  };
  std::array<S, 3> b;
  b[0] = (d(1, 2) - d(2, 1)) / (h[1] * h[2]);
  b[1] = (d(2, 0) - d(0, 2)) / (h[2] * h[0]);
  b[2] = (d(0, 1) - d(1, 0)) / (h[0] * h[1]);
  return b;
}

// divergence of the field B = curl(A), unit-basis components:
//   div = (1/(h1 h2 h3)) sum_i d_i (h1 h2 h3 B_i / h_i)
double divergence_of_curl(const Chart& chart, const VectorPotential& a,
                          const std::array<double, 3>& q);

// A + grad(chi): covariant components shift by d_i chi
VectorPotential gauge_shift(const Chart& chart, const VectorPotential& a,
                            const ExprPtr& chi);

// all positivity constraints satisfied with the given margin
bool in_domain(const Chart& chart, const std::array<double, 3>& q,
               double margin);

}  // namespace omh
