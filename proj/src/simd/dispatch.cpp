// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <string>

#include "fedrl/simd/kernels.hpp"

namespace fedrl::simd {

namespace detail {
#ifndef FEDRL_HAVE_AVX2
const Kernels<float>* avx2_f32() { return nullptr; }
const Kernels<double>* avx2_f64() { return nullptr; }
#endif
}  // namespace detail

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(FEDRL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

namespace {

Isa detect() {
  if (const char* env = std::getenv("FEDRL_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && isa_available(Isa::kAvx2)) return Isa::kAvx2;
  }
  return isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

template <>
const Kernels<float>& kernels<float>(Isa isa) {
  if (isa == Isa::kAvx2 && isa_available(Isa::kAvx2)) return *detail::avx2_f32();
  return detail::scalar_f32();
}

template <>
const Kernels<double>& kernels<double>(Isa isa) {
  if (isa == Isa::kAvx2 && isa_available(Isa::kAvx2)) return *detail::avx2_f64();
  return detail::scalar_f64();
}

}  // namespace fedrl::simd
