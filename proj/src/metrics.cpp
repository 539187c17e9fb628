// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include "fedrl/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace fedrl {

MovingAverage::MovingAverage(std::size_t window) : ring_(window, 0) {
  if (window == 0) throw ValidationError("moving average: window must be >= 1");
}

void MovingAverage::push(bool violated) {
  const std::size_t slot = seen_ % ring_.size();
  if (seen_ >= ring_.size()) in_window_ -= ring_[slot];
  ring_[slot] = violated ? 1 : 0;
  in_window_ += ring_[slot];
  ++seen_;
}

double MovingAverage::value() const {
  if (seen_ == 0) return 0.0;
  return static_cast<double>(in_window_) / static_cast<double>(std::min(seen_, ring_.size()));
}

std::vector<double> moving_avg_violations(std::span<const std::uint8_t> history, std::size_t window) {
  MovingAverage ma(window);
  std::vector<double> out;
  out.reserve(history.size());
  for (auto f : history) {
    ma.push(f != 0);
    out.push_back(ma.value());
  }
  return out;
}

std::vector<double> moving_avg_violations(const std::vector<StepRecord>& history, std::size_t window) {
  std::vector<std::uint8_t> flags;
  flags.reserve(history.size());
  for (const auto& r : history) flags.push_back(r.violated ? 1 : 0);
  return moving_avg_violations(flags, window);
}

double validation_rate(std::span<const std::uint8_t> flags, std::size_t phase_len) {
  if (phase_len == 0 || flags.size() != phase_len) {
    throw ValidationError("validation_rate: expected " + std::to_string(phase_len) + " flags, got " +
                          std::to_string(flags.size()));
  }
  std::size_t n = 0;
  for (auto f : flags) n += f != 0;
  return static_cast<double>(n) / static_cast<double>(phase_len);
}

Band band(const std::vector<std::vector<double>>& runs) {
  Band b;
  if (runs.empty()) return b;
  const std::size_t n = runs.front().size();
  for (const auto& r : runs) {
    if (r.size() != n) throw ValidationError("band: runs have different lengths");
  }
  b.mean.assign(n, 0.0);
  b.min.assign(n, 0.0);
  b.max.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0, lo = runs[0][i], hi = runs[0][i];
    for (const auto& r : runs) {
      sum += r[i];
      lo = std::min(lo, r[i]);
      hi = std::max(hi, r[i]);
    }
    b.mean[i] = sum / static_cast<double>(runs.size());
    b.min[i] = lo;
    b.max[i] = hi;
  }
  return b;
}

Validator::Validator(Environment env, std::size_t interval, std::size_t phase_len)
    : env_(std::move(env)), interval_(interval), phase_len_(phase_len) {
  if (interval == 0 || phase_len == 0) throw ValidationError("validator: interval and phase length must be >= 1");
}

void Validator::maybe_validate(const DqnAgent& agent) {
  const std::uint64_t steps = agent.env_steps();
  if (steps % interval_ != 0) return;
  if (!records_.empty() && records_.back().steps_trained == steps) return;
  const double rate = run_phase(agent);
  records_.push_back({static_cast<std::size_t>(steps / interval_), steps, rate});
}

double Validator::run_phase(const DqnAgent& agent) {
  flags_.assign(phase_len_, 0);
  for (std::size_t i = 0; i < phase_len_; ++i) {
    const int a = agent.greedy_action(env_.observe());
    flags_[i] = env_.step(a).violated ? 1 : 0;
  }
  return validation_rate(flags_, phase_len_);
}

void write_step_log(const std::filesystem::path& path, const std::vector<StepRecord>& steps, std::size_t ma_window) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "step,cost,violated,ma_violations,action,config_id,l_total_ms,e_sew_j,e_phone_j,c_5g,tau_s\n";
  MovingAverage ma(ma_window);
  char buf[256];
  for (const auto& r : steps) {
    ma.push(r.violated);
    std::snprintf(buf, sizeof buf, "%llu,%.9g,%d,%.9g,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<unsigned long long>(r.step), r.cost, r.violated ? 1 : 0, ma.value(), r.action,
                  r.config_id, r.l_total, r.e_sew, r.e_phone, r.c_5g, r.tau);
    os << buf;
  }
}

void write_validation_log(const std::filesystem::path& path, const std::vector<ValidationRecord>& records) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "k,steps_trained,c_lat\n";
  char buf[96];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%zu,%llu,%.9g\n", r.k, static_cast<unsigned long long>(r.steps_trained), r.c_lat);
    os << buf;
  }
}

void write_band(const std::filesystem::path& path, std::span<const double> x, const Band& b) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "x,mean,min,max\n";
  char buf[128];
  for (std::size_t i = 0; i < b.mean.size() && i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g\n", x[i], b.mean[i], b.min[i], b.max[i]);
    os << buf;
  }
}

}  // namespace fedrl
