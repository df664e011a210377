#pragma once

// Natural Hamiltonians with magnetic terms on an orthogonal chart:
//   H = kinetic * sum_i g^ii (p_i + A_i)^2 + V
// (kinetic = 1/2 for the standard normalization; some model families absorb
// the 1/2 into the metric functions and use kinetic = 1).  Poisson brackets,
// separable involution, Haantjes chains, and the two constructive operator
// recipes (eigenvalue quotients of a separable pair, ignorable coordinates).

#include "geometry.hpp"
#include "phasespace.hpp"

namespace omh {

struct HamiltonianSystem {
  Chart chart;
  VectorPotential A;
  ExprPtr V;
  double kinetic = 0.5;
  ScalarFieldPtr H;           // evaluated through the shifted momenta
  ScalarFieldPtr H_expanded;  // evaluated through the expanded p-polynomial
};

HamiltonianSystem make_system(Chart chart, VectorPotential A, ExprPtr V,
                              double kinetic = 0.5);

// {F, G} = sum_k dF/dq^k dG/dp_k - dF/dp_k dG/dq^k
double poisson_bracket(const ScalarField& f, const ScalarField& g,
                       const Vec6& pt);

// the three per-coordinate summands of {F, G}; total separable involution
// means each vanishes on its own
std::array<double, 3> separable_involution(const ScalarField& f,
                                           const ScalarField& g,
                                           const Vec6& pt);

// X_H = J grad H, as a vector function usable at dual points
VectorFunctionPtr hamiltonian_vector_field(ScalarFieldPtr h);

// chain one-form alpha = K^T dH: alpha_j = sum_i K(i,j) d_i H
Vec6 chain_one_form(const OperatorField& k, const ScalarField& h,
                    const Vec6& pt);
// max |d_i alpha_j - d_j alpha_i|: zero iff the chain one-form is closed
double chain_closedness(const OperatorField& k, const ScalarField& h,
                        const Vec6& pt);
// max_j |alpha_j - d_j target|: zero iff K^T dH = d(target)
double chain_exactness(const OperatorField& k, const ScalarField& h,
                       const ScalarField& target, const Vec6& pt);

// diagonal operator with eigenvalue quotients
//   lambda_i = (dH_alpha/dp_i) / (dH/dp_i),
// duplicated over the q/p blocks; SingularPoint where some dH/dp_i vanishes
OperatorFieldPtr build_K_separable(ScalarFieldPtr h, ScalarFieldPtr h_alpha);

// operator attached to an ignorable coordinate q^a (0-based index):
//   K_a = (g_aa / (p_a + A_a)) (E_aa + E_{a+3,a+3});
// ignorability is verified numerically over the given sample set
OperatorFieldPtr build_K_ignorable(const HamiltonianSystem& sys, int a,
                                   const std::vector<Vec6>& samples,
                                   double tol = 1e-10);

// shifted (kinetic) momenta Pi_i = p_i + A_i(q)
template <class S>
std::array<S, 3> kinetic_momenta(const Chart& chart, const VectorPotential& a,
                                 const C6<S>& x) {
  std::array<S, 3> q{x[0], x[1], x[2]};
  std::array<S, 3> av = potential_covariant(chart, a, q);
  return {x[3] + av[0], x[4] + av[1], x[5] + av[2]};
}

}  // namespace omh
