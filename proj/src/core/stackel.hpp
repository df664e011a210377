#pragma once

// Generalized Stackel systems: a lower-triangular-ish 3x3 matrix S whose row i
// depends only on the coordinate q^i, together with one-degree-of-freedom
// "separated" functions f_k(q^k, p_k).  The induced commuting Hamiltonians are
//   H_j = sum_k adj(S)_{jk} f_k / det S
// and the associated diagonal recursion operators have eigenvalue
// adj(S)_{jr} / adj(S)_{1r} on the r-th coordinate/momentum pair.

#include <array>
#include <memory>

#include "core/errors.hpp"
#include "core/expr.hpp"
#include "core/fields.hpp"
#include "core/smallmat.hpp"

namespace omh {

struct StackelSpec {
  std::array<std::string, 3> qnames;
  std::array<std::string, 3> pnames;
  // entry[i][j]: matrix element S_ij, a function of qnames[i] only.
  std::array<std::array<FunctionDef, 3>, 3> entry;
  // f[k]: function of (qnames[k], pnames[k]).
  std::array<FunctionDef, 3> f;
};

// Builds a spec from expression text and validates the variable discipline:
// row i of the matrix may reference qnames[i] only, f[k] only (q^k, p_k).
StackelSpec make_stackel(const std::array<std::string, 3>& qnames,
                         const std::array<std::string, 3>& pnames,
                         const std::array<std::array<std::string, 3>, 3>& matrix_text,
                         const std::array<std::string, 3>& f_text);

// Same validation for specs assembled directly from parsed pieces.
void validate_stackel(const StackelSpec& spec);

template <class S>
SmallMatrix<S> stackel_matrix(const StackelSpec& spec, const std::array<S, 3>& q) {
  SmallMatrix<S> m(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m(i, j) = eval_function<S>(spec.entry[i][j], {&q[i], 1});
  return m;
}

// adj(j,k) = cofactor of S_kj, so that S * adj = det(S) * I.
template <class S>
SmallMatrix<S> stackel_adjugate(const SmallMatrix<S>& m) {
  SmallMatrix<S> a(3, 3);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      a(j, k) = m.cofactor(k, j);
  return a;
}

// The three commuting Hamiltonians induced by the spec, as phase-space fields
// over (q1,q2,q3,p1,p2,p3) in the spec's own chart ordering.
std::array<ScalarFieldPtr, 3> akn_hamiltonians(const StackelSpec& spec);

// Diagonal operator diag[rho_1,rho_2,rho_3,rho_1,rho_2,rho_3] with
// rho_r = adj_{jr}/adj_{1r}; index j is 0-based (j = 0 gives the identity).
// Throws SingularStackel where an adj_{1r} vanishes with adj_{jr} != 0; a
// common zero is resolved as 0.
OperatorFieldPtr stackel_haantjes(const StackelSpec& spec, int j);

// max_i | sum_j S_ij(q^i) h_j(x) - f_i(q^i, p_i) | at the phase point x.
double separation_residual(const StackelSpec& spec,
                           const std::array<ScalarFieldPtr, 3>& h, const Vec6& x);

// max_{i,j} | sum_k S_ik adj_{jk} - delta_ij det | / max(1, |det|).
double cofactor_identity_residual(const StackelSpec& spec, const std::array<double, 3>& q);

// Restriction of a phase-space operator value to the configuration block.
// Requires vanishing mixed blocks and equal diagonal blocks within
// tol * max(1, |k|).
Mat project_to_base(const Mat& k, double tol);

struct ClassicalReduction {
  std::array<ScalarFieldPtr, 3> ginv;  // inverse-metric diagonal, functions of q
  ScalarFieldPtr potential;
};

// For f_k = p_k^2/2 + W_k(q^k): inverse metric g^jj = adj_{1j}/det and scalar
// potential V = sum_j g^jj W_j.  Throws NotClassicalForm when some f_k is not
// of that shape (probed via second p-derivatives on a fixed grid).
ClassicalReduction classical_stackel_metric(const StackelSpec& spec);

}  // namespace omh
