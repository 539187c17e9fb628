// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace fedrl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a value violates a documented invariant (profile, config, weights).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Raised by file loaders; the message carries the line number and field.
class ParseError : public Error {
 public:
  using Error::Error;
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable child seed for (base, stream, index). Used for every per-agent and per-run stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(base ^ splitmix64(stream)) + index);
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace fedrl
