// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedrl/common.hpp"

namespace fedrl {

/// Throughput samples (MB/s) at a fixed sampling period.
struct Trace {
  std::vector<double> samples;
  double granularity_ms = 250.0;
  std::string source_label;

  std::size_t size() const { return samples.size(); }
  void validate() const;
};

struct TraceStats {
  std::size_t length = 0;
  double mean = 0, variance = 0, min = 0, max = 0;
};

TraceStats trace_stats(const Trace& trace);

/// AR(1) process around `mean` with stationary deviation `stddev` and lag-one
/// correlation `correlation`, plus optional outages where throughput collapses
/// to `outage_level * mean` for a geometric number of samples. Clamped to [min, max].
struct TraceSynthParams {
  std::string label = "synthetic";
  std::size_t length = 3000;
  double granularity_ms = 250.0;
  double mean = 40.0;
  double stddev = 10.0;
  double correlation = 0.99;
  double min = 0.0;
  double max = 580.0;
  double outage_rate = 0.0;       // per-sample probability an outage starts
  double outage_mean_len = 40.0;  // samples
  double outage_level = 0.05;
};

TraceSynthParams default_wifi_params();
TraceSynthParams default_5g_params();

Trace synthesize_trace(const TraceSynthParams& params, std::uint64_t seed);

/// Two-column text `timestamp_ms,throughput`; an optional header row is skipped.
Trace load_trace(const std::filesystem::path& path);
void save_trace(const Trace& trace, const std::filesystem::path& path);

struct ReplayOptions {
  double noise_rel = 0.10;
  bool shift_enabled = true;
  bool inversion_enabled = true;
};

/// Endless replay of a base trace. Each full pass draws a circular shift and,
/// with probability 1/2, a mid-point inversion (second half played first);
/// every emitted sample carries independent multiplicative noise (1 + e),
/// e ~ N(0, noise_rel), clamped at zero.
class PerturbedReplay {
 public:
  PerturbedReplay(Trace base, ReplayOptions options, std::uint64_t seed);

  double next_sample();
  /// Mean of the next `count` samples (count >= 1).
  double advance_mean(std::size_t count);

  const Trace& base() const { return base_; }
  double base_mean() const { return base_mean_; }

 private:
  void start_pass();

  Trace base_;
  ReplayOptions options_;
  Rng rng_;
  std::normal_distribution<double> noise_;
  double base_mean_ = 0;
  std::size_t pos_ = 0;
  std::size_t offset_ = 0;
};

/// Exponential draw with mean t3 by inversion, -t3 * ln(u) with u in (0, 1].
double sample_cloud_latency(double t3_ms, Rng& rng);
double cloud_latency_from_uniform(double t3_ms, double u);

}  // namespace fedrl
