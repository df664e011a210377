#pragma once

// Real dense linear algebra on SmallMatrix: rank, kernels, and clustered real
// spectra with Riesz-index-1 verdicts (kernel dimension equal to algebraic
// multiplicity).

#include <vector>

#include "smallmat.hpp"

namespace omh {

struct EigenCluster {
  double value = 0.0;
  int multiplicity = 0;  // algebraic, from clustered eigenvalues
  int kernel_dim = 0;    // geometric: dim ker(m - value*I)
  bool riesz_index_one = false;
};

struct EigenResult {
  std::vector<EigenCluster> clusters;  // sorted by eigenvalue
};

// pivot count of column-pivoted elimination; pivots below tol*max(1,|m|) are
// treated as zero
int rank(const Mat& m, double tol);

// orthonormal basis of the null space, threshold tol*max(1,|m|)
std::vector<std::vector<double>> kernel_basis(const Mat& m, double tol);

// real spectrum of a (generally nonsymmetric) matrix; eigenvalues within
// tol*max(1,|m|) merge into one cluster.  Throws NonRealSpectrum if any
// imaginary part exceeds the threshold.
EigenResult eig_real(const Mat& m, double tol);

// solve a*x = b (square); throws SingularPoint when the factorization breaks
std::vector<double> solve(const Mat& a, const std::vector<double>& b);

}  // namespace omh
