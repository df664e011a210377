#pragma once

// Phase-space fields generic over the scalar type.  A field implementor
// supplies one templated call operator; the virtual interface pins the scalar
// types actually used: plain values, first/second derivatives (HDual), and
// derivatives of derivative-bearing quantities (HDual2, e.g. the entries of an
// operator built from field gradients).

#include <array>
#include <memory>

#include "hyperdual.hpp"
#include "linalg.hpp"
#include "smallmat.hpp"

namespace omh {

template <class S>
using C6 = std::array<S, 6>;

template <class S>
C6<S> promote6(const Vec6& x) {
  C6<S> r;
  for (int i = 0; i < 6; ++i) r[static_cast<std::size_t>(i)] = S(x[static_cast<std::size_t>(i)]);
  return r;
}

struct ScalarField {
  virtual ~ScalarField() = default;
  virtual double value(const C6<double>& x) const = 0;
  virtual HDual value(const C6<HDual>& x) const = 0;
  virtual HDual2 value(const C6<HDual2>& x) const = 0;
};
using ScalarFieldPtr = std::shared_ptr<const ScalarField>;

template <class F>
struct ScalarFieldImpl final : ScalarField {
  F f;
  explicit ScalarFieldImpl(F fn) : f(std::move(fn)) {}
  double value(const C6<double>& x) const override { return f(x); }
  HDual value(const C6<HDual>& x) const override { return f(x); }
  HDual2 value(const C6<HDual2>& x) const override { return f(x); }
};
template <class F>
ScalarFieldPtr make_scalar_field(F f) {
  return std::make_shared<ScalarFieldImpl<F>>(std::move(f));
}

struct OperatorField {
  virtual ~OperatorField() = default;
  virtual SmallMatrix<double> mat(const C6<double>& x) const = 0;
  virtual SmallMatrix<HDual> mat(const C6<HDual>& x) const = 0;
};
using OperatorFieldPtr = std::shared_ptr<const OperatorField>;

template <class F>
struct OperatorFieldImpl final : OperatorField {
  F f;
  explicit OperatorFieldImpl(F fn) : f(std::move(fn)) {}
  SmallMatrix<double> mat(const C6<double>& x) const override { return f(x); }
  SmallMatrix<HDual> mat(const C6<HDual>& x) const override { return f(x); }
};
template <class F>
OperatorFieldPtr make_operator_field(F f) {
  return std::make_shared<OperatorFieldImpl<F>>(std::move(f));
}

// vector-valued map on phase space: used both for vector fields and for
// chart transition maps
struct VectorFunction {
  virtual ~VectorFunction() = default;
  virtual C6<double> vec(const C6<double>& x) const = 0;
  virtual C6<HDual> vec(const C6<HDual>& x) const = 0;
};
using VectorFunctionPtr = std::shared_ptr<const VectorFunction>;

template <class F>
struct VectorFunctionImpl final : VectorFunction {
  F f;
  explicit VectorFunctionImpl(F fn) : f(std::move(fn)) {}
  C6<double> vec(const C6<double>& x) const override { return f(x); }
  C6<HDual> vec(const C6<HDual>& x) const override { return f(x); }
};
template <class F>
VectorFunctionPtr make_vector_function(F f) {
  return std::make_shared<VectorFunctionImpl<F>>(std::move(f));
}

// ---- derivative helpers ----------------------------------------------------

// partial of a scalar field in direction i, generic over the point scalar:
// lifts the point one dual level, so S=double costs an HDual pass and S=HDual
// an HDual2 pass
template <class S>
S field_partial(const ScalarField& f, const C6<S>& x, int i) {
  C6<HyperDual<S>> xx;
  for (int j = 0; j < 6; ++j) xx[static_cast<std::size_t>(j)].v = x[static_cast<std::size_t>(j)];
  xx[static_cast<std::size_t>(i)].d1 = S(1.0);
  return f.value(xx).d1;
}

inline Vec6 gradient6(const ScalarField& f, const Vec6& x) {
  Vec6 g{};
  for (int blk = 0; blk < 3; ++blk) {
    C6<HDual> xx = promote6<HDual>(x);
    xx[static_cast<std::size_t>(2 * blk)].d1 = 1.0;
    xx[static_cast<std::size_t>(2 * blk + 1)].d2 = 1.0;
    HDual r = f.value(xx);
    g[static_cast<std::size_t>(2 * blk)] = r.d1;
    g[static_cast<std::size_t>(2 * blk + 1)] = r.d2;
  }
  return g;
}

inline Mat hessian6(const ScalarField& f, const Vec6& x) {
  Mat h(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) {
      C6<HDual> xx = promote6<HDual>(x);
      xx[static_cast<std::size_t>(i)].d1 = 1.0;
      xx[static_cast<std::size_t>(j)].d2 = xx[static_cast<std::size_t>(j)].d2 + 1.0;  // i == j seeds both slots
      HDual r = f.value(xx);
      h(i, j) = r.d12;
      h(j, i) = r.d12;
    }
  return h;
}

// all first partials of an operator field: out[m](i,j) = d_m K(i,j)
inline std::array<Mat, 6> operator_partials(const OperatorField& k,
                                            const Vec6& x) {
  std::array<Mat, 6> out;
  for (int blk = 0; blk < 3; ++blk) {
    C6<HDual> xx = promote6<HDual>(x);
    xx[static_cast<std::size_t>(2 * blk)].d1 = 1.0;
    xx[static_cast<std::size_t>(2 * blk + 1)].d2 = 1.0;
    SmallMatrix<HDual> m = k.mat(xx);
    Mat a(6, 6), b(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        a(i, j) = m(i, j).d1;
        b(i, j) = m(i, j).d2;
      }
    out[static_cast<std::size_t>(2 * blk)] = a;
    out[static_cast<std::size_t>(2 * blk + 1)] = b;
  }
  return out;
}

inline Mat operator_value(const OperatorField& k, const Vec6& x) {
  return k.mat(promote6<double>(x));
}

// Jacobian of a vector function: out(i,j) = d v_i / d x_j
inline Mat jacobian6(const VectorFunction& f, const Vec6& x) {
  Mat m(6, 6);
  for (int blk = 0; blk < 3; ++blk) {
    C6<HDual> xx = promote6<HDual>(x);
    xx[static_cast<std::size_t>(2 * blk)].d1 = 1.0;
    xx[static_cast<std::size_t>(2 * blk + 1)].d2 = 1.0;
    C6<HDual> v = f.vec(xx);
    for (int i = 0; i < 6; ++i) {
      m(i, 2 * blk) = v[static_cast<std::size_t>(i)].d1;
      m(i, 2 * blk + 1) = v[static_cast<std::size_t>(i)].d2;
    }
  }
  return m;
}

inline Vec6 vector_value(const VectorFunction& f, const Vec6& x) {
  C6<double> v = f.vec(promote6<double>(x));
  Vec6 r;
  for (int i = 0; i < 6; ++i) r[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
  return r;
}

}  // namespace omh
