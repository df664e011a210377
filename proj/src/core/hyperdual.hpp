#pragma once

// Hyper-dual scalars: carry two independent first-derivative slots and the
// mixed second derivative alongside the value.  Arithmetic propagates all four
// components exactly (no truncation error), so first derivatives come from the
// d1/d2 slots and mixed second derivatives from d12.  The template nests:
// HyperDual<HyperDual<double>> propagates derivatives of quantities that are
// themselves derivative-bearing (operator entries built from field gradients).

#include <cmath>
#include <type_traits>

#include "errors.hpp"

namespace omh {

inline double scalar_value(double x) { return x; }

template <class T>
struct HyperDual {
  T v{}, d1{}, d2{}, d12{};

  HyperDual() = default;
  HyperDual(double x) : v(x) {}  // NOLINT: implicit by design, literals promote
  HyperDual(T v_, T d1_, T d2_, T d12_) : v(v_), d1(d1_), d2(d2_), d12(d12_) {}

  static HyperDual seeded(T x, int slot) {
    HyperDual r;
    r.v = x;
    if (slot == 1) r.d1 = T(1.0);
    if (slot == 2) r.d2 = T(1.0);
    return r;
  }

  HyperDual operator-() const { return {-v, -d1, -d2, -d12}; }
};

template <class T>
double scalar_value(const HyperDual<T>& x) {
  return scalar_value(x.v);
}

template <class T>
HyperDual<T> operator+(const HyperDual<T>& a, const HyperDual<T>& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d12 + b.d12};
}
template <class T>
HyperDual<T> operator-(const HyperDual<T>& a, const HyperDual<T>& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d12 - b.d12};
}
template <class T>
HyperDual<T> operator*(const HyperDual<T>& a, const HyperDual<T>& b) {
  return {a.v * b.v, a.v * b.d1 + a.d1 * b.v, a.v * b.d2 + a.d2 * b.v,
          a.v * b.d12 + a.d1 * b.d2 + a.d2 * b.d1 + a.d12 * b.v};
}

template <class T>
HyperDual<T> inv(const HyperDual<T>& a) {
  if (scalar_value(a.v) == 0.0) throw DomainError("division by zero");
  T iv = T(1.0) / a.v;  // base case: plain double division
  T iv2 = iv * iv;
  return {iv, -a.d1 * iv2, -a.d2 * iv2,
          -a.d12 * iv2 + T(2.0) * a.d1 * a.d2 * iv2 * iv};
}
inline double inv(double a) {
  if (a == 0.0) throw DomainError("division by zero");
  return 1.0 / a;
}

template <class T>
HyperDual<T> operator/(const HyperDual<T>& a, const HyperDual<T>& b) {
  return a * inv(b);
}

// mixed arithmetic with plain doubles (literals, parameters)
template <class T>
HyperDual<T> operator+(const HyperDual<T>& a, double b) {
  return a + HyperDual<T>(b);
}
template <class T>
HyperDual<T> operator+(double a, const HyperDual<T>& b) {
  return HyperDual<T>(a) + b;
}
template <class T>
HyperDual<T> operator-(const HyperDual<T>& a, double b) {
  return a - HyperDual<T>(b);
}
template <class T>
HyperDual<T> operator-(double a, const HyperDual<T>& b) {
  return HyperDual<T>(a) - b;
}
template <class T>
HyperDual<T> operator*(const HyperDual<T>& a, double b) {
  return {a.v * T(b), a.d1 * T(b), a.d2 * T(b), a.d12 * T(b)};
}
template <class T>
HyperDual<T> operator*(double a, const HyperDual<T>& b) {
  return b * a;
}
template <class T>
HyperDual<T> operator/(const HyperDual<T>& a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a * (1.0 / b);
}
template <class T>
HyperDual<T> operator/(double a, const HyperDual<T>& b) {
  return HyperDual<T>(a) / b;
}

// unary composition: f(x) with value f, first derivative fp, second fpp
template <class T>
HyperDual<T> compose(const HyperDual<T>& x, T f, T fp, T fpp) {
  return {f, fp * x.d1, fp * x.d2, fpp * x.d1 * x.d2 + fp * x.d12};
}

using std::abs;
using std::atan;
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tan;

template <class T>
HyperDual<T> sin(const HyperDual<T>& x) {
  T s = sin(x.v), c = cos(x.v);
  return compose(x, s, c, -s);
}
template <class T>
HyperDual<T> cos(const HyperDual<T>& x) {
  T s = sin(x.v), c = cos(x.v);
  return compose(x, c, -s, -c);
}
template <class T>
HyperDual<T> tan(const HyperDual<T>& x) {
  T t = tan(x.v);
  T sec2 = T(1.0) + t * t;
  return compose(x, t, sec2, T(2.0) * t * sec2);
}
template <class T>
HyperDual<T> exp(const HyperDual<T>& x) {
  T e = exp(x.v);
  return compose(x, e, e, e);
}
template <class T>
HyperDual<T> log(const HyperDual<T>& x) {
  if (scalar_value(x.v) <= 0.0) throw DomainError("log of nonpositive value");
  T iv = T(1.0) / x.v;
  return compose(x, log(x.v), iv, -iv * iv);
}
template <class T>
HyperDual<T> sqrt(const HyperDual<T>& x) {
  if (scalar_value(x.v) < 0.0) throw DomainError("sqrt of negative value");
  if (scalar_value(x.v) == 0.0)
    throw DomainError("sqrt not differentiable at zero");
  T r = sqrt(x.v);
  T half_ir = T(0.5) / r;
  return compose(x, r, half_ir, T(-0.5) * half_ir / x.v);
}
template <class T>
HyperDual<T> abs(const HyperDual<T>& x) {
  double s = scalar_value(x.v);
  if (s == 0.0) throw DomainError("abs not differentiable at zero");
  return s > 0.0 ? x : -x;
}
template <class T>
HyperDual<T> atan(const HyperDual<T>& x) {
  T den = T(1.0) + x.v * x.v;
  T fp = T(1.0) / den;
  return compose(x, atan(x.v), fp, T(-2.0) * x.v * fp * fp);
}

// integer powers by repeated multiplication: derivative-safe at base 0
template <class S>
S pow_int(const S& x, long n) {
  if (n < 0) return inv(pow_int(x, -n));
  S acc(1.0);
  S base = x;
  unsigned long e = static_cast<unsigned long>(n);
  while (e) {
    if (e & 1UL) acc = acc * base;
    base = base * base;
    e >>= 1UL;
  }
  return acc;
}

inline double pow_real(double x, double y) {
  if (x <= 0.0) throw DomainError("fractional power of nonpositive base");
  return std::pow(x, y);
}
template <class T>
HyperDual<T> pow_real(const HyperDual<T>& x, const HyperDual<T>& y) {
  return exp(y * log(x));
}

// atan2 with exact derivative propagation; branch constant carries no
// derivatives, so reduce to atan of a ratio on whichever axis is safe.
inline double atan2s(double y, double x) { return std::atan2(y, x); }
template <class T>
HyperDual<T> atan2s(const HyperDual<T>& y, const HyperDual<T>& x) {
  double yv = scalar_value(y.v), xv = scalar_value(x.v);
  if (xv == 0.0 && yv == 0.0) throw DomainError("atan2 at origin");
  if (std::fabs(xv) >= std::fabs(yv)) {
    HyperDual<T> t = atan(y / x);
    double c = std::atan2(yv, xv) - scalar_value(t.v);
    return t + c;
  }
  HyperDual<T> t = atan(x / y);
  double c = std::atan2(yv, xv) + scalar_value(t.v);
  return -t + c;
}

using HDual = HyperDual<double>;
using HDual2 = HyperDual<HyperDual<double>>;

}  // namespace omh
