// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense arithmetic kernels behind the value network and optimizer.
//
// Every kernel has a scalar reference implementation. An AVX2+FMA variant is
// compiled on x86-64 and selected at runtime when the host supports it. The
// FEDRL_SIMD environment variable ("scalar" or "avx2") overrides the choice.

#include <cstddef>
#include <string_view>

namespace fedrl::simd {

enum class Isa { kScalar, kAvx2 };

template <typename T>
struct Kernels {
  // c[i*ldc + j] += sum_p a[i*a_rs + p*a_cs] * b[p*ldb + j]   (m x n += (m x k)(k x n))
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t a_rs,
               std::size_t a_cs, const T* b, std::size_t ldb, T* c, std::size_t ldc);
  // y += alpha * x
  void (*axpy)(std::size_t n, T alpha, const T* x, T* y);
  T (*dot)(std::size_t n, const T* x, const T* y);
  // One Adam step with bias-corrected step size lr_t and eps_t:
  //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g*g;  p -= lr_t * m / (sqrt(v) + eps_t)
  void (*adam)(std::size_t n, const T* grad, T* param, T* m, T* v, T lr_t, T beta1, T beta2,
               T eps_t);
};

bool isa_available(Isa isa);
Isa active_isa();
std::string_view isa_name(Isa isa);

template <typename T>
const Kernels<T>& kernels(Isa isa);

template <typename T>
const Kernels<T>& kernels() {
  return kernels<T>(active_isa());
}

namespace detail {
const Kernels<float>& scalar_f32();
const Kernels<double>& scalar_f64();
const Kernels<float>* avx2_f32();
const Kernels<double>* avx2_f64();
}  // namespace detail

}  // namespace fedrl::simd
