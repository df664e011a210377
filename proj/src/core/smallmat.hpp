#pragma once

// Dense matrices up to 6x6 over any scalar ring (double or hyper-dual),
// fixed-capacity storage, row-major.  Determinants and cofactors use Laplace
// expansion: division-free, so they stay exact over dual scalars.

#include <array>
#include <cassert>
#include <cstddef>

#include "hyperdual.hpp"

namespace omh {

template <class T>
class SmallMatrix {
 public:
  static constexpr int kMaxDim = 6;

  SmallMatrix() : rows_(0), cols_(0) {}
  SmallMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    assert(rows >= 0 && rows <= kMaxDim && cols >= 0 && cols <= kMaxDim);
    data_.fill(T(0.0));
  }

  static SmallMatrix identity(int n) {
    SmallMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1.0);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int i, int j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(i * kMaxDim + j)];
  }
  const T& operator()(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(i * kMaxDim + j)];
  }

  SmallMatrix transpose() const {
    SmallMatrix m(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
    return m;
  }

  SmallMatrix minor_matrix(int row, int col) const {
    SmallMatrix m(rows_ - 1, cols_ - 1);
    for (int i = 0, mi = 0; i < rows_; ++i) {
      if (i == row) continue;
      for (int j = 0, mj = 0; j < cols_; ++j) {
        if (j == col) continue;
        m(mi, mj) = (*this)(i, j);
        ++mj;
      }
      ++mi;
    }
    return m;
  }

  T determinant() const {
    assert(rows_ == cols_ && rows_ >= 1);
    if (rows_ == 1) return (*this)(0, 0);
    if (rows_ == 2)
      return (*this)(0, 0) * (*this)(1, 1) - (*this)(0, 1) * (*this)(1, 0);
    T det(0.0);
    for (int j = 0; j < cols_; ++j) {
      T term = (*this)(0, j) * minor_matrix(0, j).determinant();
      det = (j % 2 == 0) ? det + term : det - term;
    }
    return det;
  }

  // signed cofactor of entry (i, j)
  T cofactor(int i, int j) const {
    T m = minor_matrix(i, j).determinant();
    return ((i + j) % 2 == 0) ? m : -m;
  }

  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) {
        double a = std::fabs(scalar_value((*this)(i, j)));
        if (a > m) m = a;
      }
    return m;
  }

 private:
  int rows_, cols_;
  std::array<T, kMaxDim * kMaxDim> data_;
};

template <class T>
SmallMatrix<T> operator+(const SmallMatrix<T>& a, const SmallMatrix<T>& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  SmallMatrix<T> m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j) + b(i, j);
  return m;
}
template <class T>
SmallMatrix<T> operator-(const SmallMatrix<T>& a, const SmallMatrix<T>& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  SmallMatrix<T> m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j) - b(i, j);
  return m;
}
template <class T>
SmallMatrix<T> operator*(const SmallMatrix<T>& a, const SmallMatrix<T>& b) {
  assert(a.cols() == b.rows());
  SmallMatrix<T> m(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      T s(0.0);
      for (int k = 0; k < a.cols(); ++k) s = s + a(i, k) * b(k, j);
      m(i, j) = s;
    }
  return m;
}
template <class T, class U>
SmallMatrix<T> operator*(const U& s, const SmallMatrix<T>& a) {
  SmallMatrix<T> m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = s * a(i, j);
  return m;
}

using Mat = SmallMatrix<double>;
using Vec6 = std::array<double, 6>;
using Vec3 = std::array<double, 3>;

}  // namespace omh
