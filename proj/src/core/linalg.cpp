#include "linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace omh {

namespace {

Eigen::MatrixXd to_eigen(const Mat& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

double threshold(const Mat& m, double tol) {
  return tol * std::max(1.0, m.max_abs());
}

}  // namespace

int rank(const Mat& m, double tol) {
  const double thresh = threshold(m, tol);
  Eigen::MatrixXd a = to_eigen(m);
  const int nr = static_cast<int>(a.rows()), nc = static_cast<int>(a.cols());
  int r = 0;
  for (int col = 0; col < nc && r < nr; ++col) {
    // pick the largest remaining entry in this column, swap its row up
    int prow = r;
    double pmax = 0.0;
    for (int i = r; i < nr; ++i) {
      double v = std::fabs(a(i, col));
      if (v > pmax) {
        pmax = v;
        prow = i;
      }
    }
    if (pmax <= thresh) continue;
    a.row(prow).swap(a.row(r));
    for (int i = r + 1; i < nr; ++i) {
      double f = a(i, col) / a(r, col);
      a.row(i) -= f * a.row(r);
    }
    ++r;
  }
  return r;
}

std::vector<std::vector<double>> kernel_basis(const Mat& m, double tol) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(to_eigen(m));
  lu.setThreshold(threshold(m, tol));
  Eigen::MatrixXd ker = lu.kernel();
  std::vector<std::vector<double>> basis;
  if (lu.dimensionOfKernel() == 0) return basis;
  // FullPivLU::kernel returns a single zero column when the kernel is trivial;
  // dimensionOfKernel above already filtered that case.  Orthonormalize.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ker);
  Eigen::MatrixXd q = qr.householderQ() *
                      Eigen::MatrixXd::Identity(ker.rows(), ker.cols());
  for (int j = 0; j < q.cols(); ++j) {
    std::vector<double> v(static_cast<std::size_t>(q.rows()));
    for (int i = 0; i < q.rows(); ++i) v[static_cast<std::size_t>(i)] = q(i, j);
    basis.push_back(std::move(v));
  }
  return basis;
}

EigenResult eig_real(const Mat& m, double tol) {
  if (m.rows() != m.cols()) throw Error("eig_real: matrix not square");
  const double thresh = threshold(m, tol);
  Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m));
  if (es.info() != Eigen::Success)
    throw Error("eig_real: eigensolver failed to converge");
  std::vector<double> vals;
  for (int i = 0; i < m.rows(); ++i) {
    std::complex<double> z = es.eigenvalues()(i);
    if (std::fabs(z.imag()) > thresh)
      throw NonRealSpectrum("eigenvalue with imaginary part " +
                            std::to_string(z.imag()));
    vals.push_back(z.real());
  }
  std::sort(vals.begin(), vals.end());

  EigenResult res;
  std::size_t i = 0;
  while (i < vals.size()) {
    std::size_t j = i + 1;
    // chain-cluster values that sit within the threshold of their neighbor
    while (j < vals.size() && vals[j] - vals[j - 1] <= thresh) ++j;
    EigenCluster c;
    double sum = 0.0;
    for (std::size_t k = i; k < j; ++k) sum += vals[k];
    c.value = sum / static_cast<double>(j - i);
    c.multiplicity = static_cast<int>(j - i);
    Mat shifted = m;
    for (int d = 0; d < m.rows(); ++d) shifted(d, d) -= c.value;
    c.kernel_dim = m.rows() - rank(shifted, tol);
    c.riesz_index_one = (c.kernel_dim == c.multiplicity);
    res.clusters.push_back(c);
    i = j;
  }
  return res;
}

std::vector<double> solve(const Mat& a, const std::vector<double>& b) {
  if (a.rows() != a.cols() || static_cast<int>(b.size()) != a.rows())
    throw Error("solve: shape mismatch");
  Eigen::MatrixXd ea = to_eigen(a);
  Eigen::VectorXd eb(
      Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<long>(b.size())));
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(ea);
  Eigen::VectorXd x = lu.solve(eb);
  if (!x.allFinite()) throw SingularPoint("solve: singular linear system");
  return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace omh
