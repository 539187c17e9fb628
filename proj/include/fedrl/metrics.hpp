// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fedrl/agent.hpp"
#include "fedrl/env.hpp"

namespace fedrl {

/// Violation moving average: mean of the first t flags while t < W, then of the
/// last W. Integer counts internally, division only on read.
class MovingAverage {
 public:
  explicit MovingAverage(std::size_t window);
  void push(bool violated);
  double value() const;
  std::size_t count() const { return seen_; }

 private:
  std::vector<std::uint8_t> ring_;
  std::size_t seen_ = 0;
  std::size_t in_window_ = 0;
};

std::vector<double> moving_avg_violations(std::span<const std::uint8_t> history, std::size_t window = 1000);
std::vector<double> moving_avg_violations(const std::vector<StepRecord>& history, std::size_t window = 1000);

/// Fraction of violating steps in one validation phase of exactly `phase_len` flags.
double validation_rate(std::span<const std::uint8_t> flags, std::size_t phase_len = 300);

struct Band {
  std::vector<double> mean, min, max;
};

Band band(const std::vector<std::vector<double>>& runs);

struct ValidationRecord {
  std::size_t k = 0;
  std::uint64_t steps_trained = 0;
  double c_lat = 0;
};

struct RunLog {
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  std::vector<ValidationRecord> validations;
};

/// Greedy validation on a dedicated environment every `interval` training
/// steps (including step 0). The agent is only read: no exploration, no
/// updates, no buffer writes, no use of its rng.
class Validator {
 public:
  Validator(Environment env, std::size_t interval = 250, std::size_t phase_len = 300);

  void maybe_validate(const DqnAgent& agent);
  double run_phase(const DqnAgent& agent);
  const std::vector<ValidationRecord>& records() const { return records_; }

 private:
  Environment env_;
  std::size_t interval_;
  std::size_t phase_len_;
  std::vector<ValidationRecord> records_;
  std::vector<std::uint8_t> flags_;
};

void write_step_log(const std::filesystem::path& path, const std::vector<StepRecord>& steps, std::size_t ma_window);
void write_validation_log(const std::filesystem::path& path, const std::vector<ValidationRecord>& records);
void write_band(const std::filesystem::path& path, std::span<const double> x, const Band& b);

}  // namespace fedrl
