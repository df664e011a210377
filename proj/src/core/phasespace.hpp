#pragma once

// Torsion tensors and operator-algebra checks on 6-dimensional phase space.
// Components with coordinate fields d_j (which commute), so for a (1,1) field K:
//   N^i_jk = K^m_j d_m K^i_k - K^m_k d_m K^i_j - K^i_m (d_j K^m_k - d_k K^m_j)
// and the Haantjes tensor contracts N with K twice:
//   Hn^i_jk = K^i_a K^a_b N^b_jk + K^a_j K^b_k N^i_ab
//           - K^i_a (K^b_k N^a_jb + K^b_j N^a_bk)

#include <cstdint>
#include <vector>

#include "fields.hpp"

namespace omh {

// symplectic structure in (q, p) block order: w(X, Y) = X^T J Y
Mat symplectic_matrix();

struct Tensor3 {
  double t[6][6][6] = {};  // t[i][j][k] = T^i_{jk}
  double max_abs() const;
};

Vec6 lie_bracket(const VectorFunction& x, const VectorFunction& y,
                 const Vec6& pt);

struct TorsionResult {
  Tensor3 tensor;
  double max_abs = 0.0;
  double scale = 1.0;  // homogeneity scale: |K|-powers times |dK|
  double scaled() const { return max_abs / scale; }
};

TorsionResult nijenhuis_torsion(const OperatorField& k, const Vec6& pt);
TorsionResult haantjes_torsion(const OperatorField& k, const Vec6& pt);

// max |J K - K^T J| entry: zero iff w(KX, Y) = w(X, KY) for all X, Y
double compatibility_residual(const OperatorField& k, const Vec6& pt);

double commutator_residual(const OperatorField& k1, const OperatorField& k2,
                           const Vec6& pt);

// f*K1 + g*K2 and K1*K2 as operator fields (for the module and ring axioms)
OperatorFieldPtr combo_field(ScalarFieldPtr f, OperatorFieldPtr k1,
                             ScalarFieldPtr g, OperatorFieldPtr k2);
OperatorFieldPtr product_field(OperatorFieldPtr k1, OperatorFieldPtr k2);

ScalarFieldPtr constant_field(double c);
// deterministic low-degree polynomial field in the 6 phase coordinates,
// coefficients drawn from the given engine state
ScalarFieldPtr random_polynomial_field(std::uint64_t seed, int degree);

struct AlgebraResidual {
  double module_constant = 0.0;  // Haantjes of a*K1 + b*K2, constant a, b
  double module_poly = 0.0;      // Haantjes of f*K1 + g*K2, polynomial f, g
  double ring = 0.0;             // Haantjes of K1*K2
  double commutator = 0.0;       // |K1 K2 - K2 K1|
  double max() const;
};

// scaled Haantjes residuals of the module/ring combinations at one point;
// poly_trials polynomial (f, g) draws are folded in via max
AlgebraResidual algebra_axioms(const OperatorField& k1,
                               const OperatorField& k2, const Vec6& pt,
                               std::uint64_t seed, int poly_trials);

EigenResult eigen_spectrum(const OperatorField& k, const Vec6& pt, double tol);

}  // namespace omh
