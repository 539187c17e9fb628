// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma. Nothing here may run unless dispatch has
// confirmed both features on the host.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "fedrl/simd/kernels.hpp"

namespace fedrl::simd::detail {
namespace {

template <typename T>
struct Vec;

template <>
struct Vec<float> {
  using Reg = __m256;
  using Mask = __m256i;
  static constexpr std::size_t kWidth = 8;
  static Reg load(const float* p) { return _mm256_loadu_ps(p); }
  static Reg load(const float* p, Mask m) { return _mm256_maskload_ps(p, m); }
  static void store(float* p, Reg r) { _mm256_storeu_ps(p, r); }
  static void store(float* p, Mask m, Reg r) { _mm256_maskstore_ps(p, m, r); }
  static Reg set1(float x) { return _mm256_set1_ps(x); }
  static Reg zero() { return _mm256_setzero_ps(); }
  static Reg fmadd(Reg a, Reg b, Reg c) { return _mm256_fmadd_ps(a, b, c); }
  static Reg mul(Reg a, Reg b) { return _mm256_mul_ps(a, b); }
  static Reg add(Reg a, Reg b) { return _mm256_add_ps(a, b); }
  static Reg sub(Reg a, Reg b) { return _mm256_sub_ps(a, b); }
  static Reg div(Reg a, Reg b) { return _mm256_div_ps(a, b); }
  static Reg sqrt(Reg a) { return _mm256_sqrt_ps(a); }
  static Mask mask(std::size_t rem) {
    return _mm256_cmpgt_epi32(_mm256_set1_epi32(static_cast<int>(rem)),
                              _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7));
  }
  static float hsum(Reg r) {
    __m128 lo = _mm256_castps256_ps128(r);
    __m128 hi = _mm256_extractf128_ps(r, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_hadd_ps(lo, lo);
    lo = _mm_hadd_ps(lo, lo);
    return _mm_cvtss_f32(lo);
  }
};

template <>
struct Vec<double> {
  using Reg = __m256d;
  using Mask = __m256i;
  static constexpr std::size_t kWidth = 4;
  static Reg load(const double* p) { return _mm256_loadu_pd(p); }
  static Reg load(const double* p, Mask m) { return _mm256_maskload_pd(p, m); }
  static void store(double* p, Reg r) { _mm256_storeu_pd(p, r); }
  static void store(double* p, Mask m, Reg r) { _mm256_maskstore_pd(p, m, r); }
  static Reg set1(double x) { return _mm256_set1_pd(x); }
  static Reg zero() { return _mm256_setzero_pd(); }
  static Reg fmadd(Reg a, Reg b, Reg c) { return _mm256_fmadd_pd(a, b, c); }
  static Reg mul(Reg a, Reg b) { return _mm256_mul_pd(a, b); }
  static Reg add(Reg a, Reg b) { return _mm256_add_pd(a, b); }
  static Reg sub(Reg a, Reg b) { return _mm256_sub_pd(a, b); }
  static Reg div(Reg a, Reg b) { return _mm256_div_pd(a, b); }
  static Reg sqrt(Reg a) { return _mm256_sqrt_pd(a); }
  static Mask mask(std::size_t rem) {
    return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(rem)),
                              _mm256_setr_epi64x(0, 1, 2, 3));
  }
  static double hsum(Reg r) {
    __m128d lo = _mm256_castpd256_pd128(r);
    __m128d hi = _mm256_extractf128_pd(r, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  }
};

// Register tile of MR rows x two vectors. kFull selects unmasked column access.
template <typename T, std::size_t MR, bool kFull>
inline void tile(std::size_t k, const T* a, std::size_t a_rs, std::size_t a_cs, const T* b,
                 std::size_t ldb, T* c, std::size_t ldc, typename Vec<T>::Mask m0,
                 typename Vec<T>::Mask m1) {
  using V = Vec<T>;
  constexpr std::size_t W = V::kWidth;
  typename V::Reg acc0[MR];
  typename V::Reg acc1[MR];
  for (std::size_t r = 0; r < MR; ++r) {
    if constexpr (kFull) {
      acc0[r] = V::load(c + r * ldc);
      acc1[r] = V::load(c + r * ldc + W);
    } else {
      acc0[r] = V::load(c + r * ldc, m0);
      acc1[r] = V::load(c + r * ldc + W, m1);
    }
  }
  for (std::size_t p = 0; p < k; ++p) {
    const T* brow = b + p * ldb;
    typename V::Reg b0, b1;
    if constexpr (kFull) {
      b0 = V::load(brow);
      b1 = V::load(brow + W);
    } else {
      b0 = V::load(brow, m0);
      b1 = V::load(brow + W, m1);
    }
    for (std::size_t r = 0; r < MR; ++r) {
      const typename V::Reg av = V::set1(a[r * a_rs + p * a_cs]);
      acc0[r] = V::fmadd(av, b0, acc0[r]);
      acc1[r] = V::fmadd(av, b1, acc1[r]);
    }
  }
  for (std::size_t r = 0; r < MR; ++r) {
    if constexpr (kFull) {
      V::store(c + r * ldc, acc0[r]);
      V::store(c + r * ldc + W, acc1[r]);
    } else {
      V::store(c + r * ldc, m0, acc0[r]);
      V::store(c + r * ldc + W, m1, acc1[r]);
    }
  }
}

template <typename T, std::size_t MR>
inline void row_block(std::size_t n, std::size_t k, const T* a, std::size_t a_rs,
                      std::size_t a_cs, const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  using V = Vec<T>;
  constexpr std::size_t W = V::kWidth;
  constexpr std::size_t NR = 2 * W;
  std::size_t j = 0;
  for (; j + NR <= n; j += NR) {
    tile<T, MR, true>(k, a, a_rs, a_cs, b + j, ldb, c + j, ldc, _mm256_setzero_si256(), _mm256_setzero_si256());
  }
  if (j < n) {
    const std::size_t rem = n - j;
    const auto m0 = V::mask(std::min(rem, W));
    const auto m1 = V::mask(rem > W ? rem - W : 0);
    tile<T, MR, false>(k, a, a_rs, a_cs, b + j, ldb, c + j, ldc, m0, m1);
  }
}

template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t a_rs,
          std::size_t a_cs, const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  constexpr std::size_t MR = 4;
  std::size_t i = 0;
  for (; i + MR <= m; i += MR) {
    row_block<T, MR>(n, k, a + i * a_rs, a_rs, a_cs, b, ldb, c + i * ldc, ldc);
  }
  const T* ai = a + i * a_rs;
  T* ci = c + i * ldc;
  switch (m - i) {
    case 3: row_block<T, 3>(n, k, ai, a_rs, a_cs, b, ldb, ci, ldc); break;
    case 2: row_block<T, 2>(n, k, ai, a_rs, a_cs, b, ldb, ci, ldc); break;
    case 1: row_block<T, 1>(n, k, ai, a_rs, a_cs, b, ldb, ci, ldc); break;
    default: break;
  }
}

template <typename T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  using V = Vec<T>;
  const auto va = V::set1(alpha);
  std::size_t i = 0;
  for (; i + V::kWidth <= n; i += V::kWidth) {
    V::store(y + i, V::fmadd(va, V::load(x + i), V::load(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
T dot(std::size_t n, const T* x, const T* y) {
  using V = Vec<T>;
  auto acc0 = V::zero();
  auto acc1 = V::zero();
  std::size_t i = 0;
  for (; i + 2 * V::kWidth <= n; i += 2 * V::kWidth) {
    acc0 = V::fmadd(V::load(x + i), V::load(y + i), acc0);
    acc1 = V::fmadd(V::load(x + i + V::kWidth), V::load(y + i + V::kWidth), acc1);
  }
  T s = V::hsum(V::add(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

template <typename T>
void adam(std::size_t n, const T* grad, T* param, T* m, T* v, T lr_t, T beta1, T beta2, T eps_t) {
  using V = Vec<T>;
  const auto b1 = V::set1(beta1), c1 = V::set1(T(1) - beta1);
  const auto b2 = V::set1(beta2), c2 = V::set1(T(1) - beta2);
  const auto lr = V::set1(lr_t), eps = V::set1(eps_t);
  std::size_t i = 0;
  for (; i + V::kWidth <= n; i += V::kWidth) {
    const auto g = V::load(grad + i);
    const auto mi = V::add(V::mul(b1, V::load(m + i)), V::mul(c1, g));
    const auto vi = V::add(V::mul(b2, V::load(v + i)), V::mul(V::mul(c2, g), g));
    V::store(m + i, mi);
    V::store(v + i, vi);
    const auto step = V::div(V::mul(lr, mi), V::add(V::sqrt(vi), eps));
    V::store(param + i, V::sub(V::load(param + i), step));
  }
  for (; i < n; ++i) {
    const T g = grad[i];
    m[i] = beta1 * m[i] + (T(1) - beta1) * g;
    v[i] = beta2 * v[i] + (T(1) - beta2) * g * g;
    param[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps_t);
  }
}

const Kernels<float> kF32{&gemm<float>, &axpy<float>, &dot<float>, &adam<float>};
const Kernels<double> kF64{&gemm<double>, &axpy<double>, &dot<double>, &adam<double>};

}  // namespace

const Kernels<float>* avx2_f32() { return &kF32; }
const Kernels<double>* avx2_f64() { return &kF64; }

}  // namespace fedrl::simd::detail
