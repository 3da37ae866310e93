// Copyright 2026 The dsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Differentiable primitives on Var, plus double overloads of the same names
// so simulation code can be written once as a template over the scalar.
//
// Kink convention for min/max/clamp/abs: at ties the derivative is routed to
// the first argument (for clamp: to the clamped input).

#include <cmath>
#include <vector>

#include "dsim/ad/tape.hpp"

namespace dsim::ad {

// ---------------------------------------------------------------------------
// Arithmetic

// Constant zeros are folded away; the sparse Jacobians in the dynamics would
// otherwise fill the tape with zero-partial nodes.

inline Var operator+(const Var& a, const Var& b) {
  const double v = a.value() + b.value();
  if (a.is_constant()) {
    if (b.is_constant()) return Var(v);
    if (a.value() == 0.0) return b;
  } else if (b.is_constant() && b.value() == 0.0) {
    return a;
  }
  return detail::record_binary(v, a, 1.0, b, 1.0);
}

inline Var operator-(const Var& a, const Var& b) {
  const double v = a.value() - b.value();
  if (a.is_constant() && b.is_constant()) return Var(v);
  if (b.is_constant() && b.value() == 0.0) return a;
  return detail::record_binary(v, a, 1.0, b, -1.0);
}

inline Var operator*(const Var& a, const Var& b) {
  const double v = a.value() * b.value();
  if (a.is_constant() && (b.is_constant() || a.value() == 0.0)) return Var(v);
  if (b.is_constant() && b.value() == 0.0) return Var(v);
  return detail::record_binary(v, a, b.value(), b, a.value());
}

inline Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.value();
  const double v = a.value() * inv;
  if (a.is_constant() && b.is_constant()) return Var(v);
  return detail::record_binary(v, a, inv, b, -v * inv);
}

inline Var operator-(const Var& a) {
  if (a.is_constant()) return Var(-a.value());
  return detail::record_unary(-a.value(), a, -1.0);
}

inline Var operator+(const Var& a) { return a; }

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

// Comparisons act on values and yield plain booleans (no gradient).
inline bool operator<(const Var& a, const Var& b) { return a.value() < b.value(); }
inline bool operator>(const Var& a, const Var& b) { return a.value() > b.value(); }
inline bool operator<=(const Var& a, const Var& b) { return a.value() <= b.value(); }
inline bool operator>=(const Var& a, const Var& b) { return a.value() >= b.value(); }
inline bool operator==(const Var& a, const Var& b) { return a.value() == b.value(); }
inline bool operator!=(const Var& a, const Var& b) { return a.value() != b.value(); }

// ---------------------------------------------------------------------------
// Elementary functions

inline Var exp(const Var& x) {
  const double v = std::exp(x.value());
  if (x.is_constant()) return Var(v);
  return detail::record_unary(v, x, v);
}

inline Var log(const Var& x) {
  const double v = std::log(x.value());
  if (x.is_constant()) return Var(v);
  return detail::record_unary(v, x, 1.0 / x.value());
}

inline Var tanh(const Var& x) {
  const double v = std::tanh(x.value());
  if (x.is_constant()) return Var(v);
  return detail::record_unary(v, x, 1.0 - v * v);
}

inline Var sqrt(const Var& x) {
  const double v = std::sqrt(x.value());
  if (x.is_constant()) return Var(v);
  return detail::record_unary(v, x, 0.5 / v);
}

inline Var sin(const Var& x) {
  const double v = std::sin(x.value());
  if (x.is_constant()) return Var(v);
  return detail::record_unary(v, x, std::cos(x.value()));
}

inline Var cos(const Var& x) {
  const double v = std::cos(x.value());
  if (x.is_constant()) return Var(v);
  return detail::record_unary(v, x, -std::sin(x.value()));
}

inline Var abs(const Var& x) { return x.value() >= 0.0 ? x : -x; }

inline Var min(const Var& a, const Var& b) { return a.value() <= b.value() ? a : b; }
inline Var max(const Var& a, const Var& b) { return a.value() >= b.value() ? a : b; }

inline Var clamp(const Var& x, const Var& lo, const Var& hi) {
  if (x.value() < lo.value()) return lo;
  if (x.value() > hi.value()) return hi;
  return x;
}

inline Var select(bool condition, const Var& if_true, const Var& if_false) {
  return condition ? if_true : if_false;
}

inline double value(const Var& x) { return x.value(); }

// ---------------------------------------------------------------------------
// double overloads with the same kink convention

inline double min(double a, double b) { return a <= b ? a : b; }
inline double max(double a, double b) { return a >= b ? a : b; }
inline double clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}
inline double select(bool condition, double if_true, double if_false) {
  return condition ? if_true : if_false;
}
inline double value(double x) { return x; }

using std::abs;
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tanh;

template <class T>
inline bool is_finite(const T& x) {
  return std::isfinite(value(x));
}

template <class T>
std::vector<double> value_vector(const std::vector<T>& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = value(x[i]);
  return out;
}

}  // namespace dsim::ad
