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

// Fixed-capacity dense vectors and matrices for systems with at most
// kMaxDof generalized coordinates. Everything is templated on the scalar so
// the same code runs on double and on ad::Var.

#include <array>
#include <cassert>
#include <span>
#include <stdexcept>

#include "dsim/ad/ops.hpp"

namespace dsim {

inline constexpr int kMaxDof = 8;

template <class T>
class DofVector {
 public:
  DofVector() = default;
  explicit DofVector(int n) : n_(n) {
    assert(n >= 0 && n <= kMaxDof);
    data_.fill(T(0.0));
  }

  static DofVector from(std::span<const T> values) {
    DofVector v(static_cast<int>(values.size()));
    for (int i = 0; i < v.n_; ++i) v.data_[i] = values[i];
    return v;
  }

  int size() const { return n_; }
  T& operator[](int i) { return data_[i]; }
  const T& operator[](int i) const { return data_[i]; }
  std::span<T> span() { return {data_.data(), static_cast<std::size_t>(n_)}; }
  std::span<const T> span() const {
    return {data_.data(), static_cast<std::size_t>(n_)};
  }
  T* begin() { return data_.data(); }
  T* end() { return data_.data() + n_; }
  const T* begin() const { return data_.data(); }
  const T* end() const { return data_.data() + n_; }

 private:
  std::array<T, kMaxDof> data_{};
  int n_ = 0;
};

/// Row-major n x n matrix.
template <class T>
class DofMatrix {
 public:
  DofMatrix() = default;
  explicit DofMatrix(int n) : n_(n) {
    assert(n >= 0 && n <= kMaxDof);
    data_.fill(T(0.0));
  }

  int size() const { return n_; }
  T& operator()(int r, int c) { return data_[r * kMaxDof + c]; }
  const T& operator()(int r, int c) const { return data_[r * kMaxDof + c]; }

 private:
  std::array<T, kMaxDof * kMaxDof> data_{};
  int n_ = 0;
};

template <class T>
T dot(const DofVector<T>& a, const DofVector<T>& b) {
  T s(0.0);
  for (int i = 0; i < a.size(); ++i) s = s + a[i] * b[i];
  return s;
}

template <class T>
DofVector<T> multiply(const DofMatrix<T>& m, const DofVector<T>& v) {
  DofVector<T> out(m.size());
  for (int r = 0; r < m.size(); ++r) {
    T s(0.0);
    for (int c = 0; c < m.size(); ++c) s = s + m(r, c) * v[c];
    out[r] = s;
  }
  return out;
}

/// Lower Cholesky factor L of an SPD matrix, A = L L^T. Throws
/// std::domain_error if a pivot is not positive.
template <class T>
DofMatrix<T> cholesky(const DofMatrix<T>& a) {
  const int n = a.size();
  DofMatrix<T> l(n);
  for (int j = 0; j < n; ++j) {
    T diag = a(j, j);
    for (int k = 0; k < j; ++k) diag = diag - l(j, k) * l(j, k);
    if (!(ad::value(diag) > 0.0)) {
      throw std::domain_error("cholesky: matrix is not positive definite");
    }
    const T ljj = ad::sqrt(diag);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      T s = a(i, j);
      for (int k = 0; k < j; ++k) s = s - l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// Solves (L L^T) x = b given the Cholesky factor L.
template <class T>
DofVector<T> cholesky_solve(const DofMatrix<T>& l, const DofVector<T>& b) {
  const int n = l.size();
  DofVector<T> y(n);
  for (int i = 0; i < n; ++i) {
    T s = b[i];
    for (int k = 0; k < i; ++k) s = s - l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  DofVector<T> x(n);
  for (int i = n - 1; i >= 0; --i) {
    T s = y[i];
    for (int k = i + 1; k < n; ++k) s = s - l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

}  // namespace dsim
