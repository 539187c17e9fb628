// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "fedrl/simd/kernels.hpp"

namespace fedrl::simd::detail {
namespace {

template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t a_rs,
          std::size_t a_cs, const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * ldc;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * a_rs + p * a_cs];
      const T* brow = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
T dot(std::size_t n, const T* x, const T* y) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

template <typename T>
void adam(std::size_t n, const T* grad, T* param, T* m, T* v, T lr_t, T beta1, T beta2, T eps_t) {
  for (std::size_t i = 0; i < n; ++i) {
    const T g = grad[i];
    m[i] = beta1 * m[i] + (T(1) - beta1) * g;
    v[i] = beta2 * v[i] + (T(1) - beta2) * g * g;
    param[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps_t);
  }
}

template <typename T>
constexpr Kernels<T> make() {
  return Kernels<T>{&gemm<T>, &axpy<T>, &dot<T>, &adam<T>};
}

constexpr Kernels<float> kF32 = make<float>();
constexpr Kernels<double> kF64 = make<double>();

}  // namespace

const Kernels<float>& scalar_f32() { return kF32; }
const Kernels<double>& scalar_f64() { return kF64; }

}  // namespace fedrl::simd::detail
