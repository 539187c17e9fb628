// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include "fedrl/traces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fedrl {

void Trace::validate() const {
  if (samples.empty()) throw ValidationError("trace '" + source_label + "' is empty");
  if (!(granularity_ms > 0)) throw ValidationError("trace '" + source_label + "': granularity must be > 0");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] >= 0) || !std::isfinite(samples[i])) {
      throw ValidationError("trace '" + source_label + "': sample " + std::to_string(i) + " is negative or non-finite");
    }
  }
}

TraceStats trace_stats(const Trace& trace) {
  TraceStats s;
  s.length = trace.samples.size();
  if (s.length == 0) return s;
  s.min = *std::min_element(trace.samples.begin(), trace.samples.end());
  s.max = *std::max_element(trace.samples.begin(), trace.samples.end());
  double sum = 0;
  for (double v : trace.samples) sum += v;
  s.mean = sum / static_cast<double>(s.length);
  double ss = 0;
  for (double v : trace.samples) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / static_cast<double>(s.length);
  return s;
}

TraceSynthParams default_wifi_params() {
  TraceSynthParams p;
  p.label = "wifi";
  p.length = 3000;
  p.mean = 30.0;
  p.stddev = 8.0;
  p.correlation = 0.995;
  p.max = 580.0;
  p.outage_rate = 1.0 / 250.0;
  p.outage_mean_len = 60.0;
  p.outage_level = 0.08;
  return p;
}

TraceSynthParams default_5g_params() {
  TraceSynthParams p;
  p.label = "5g";
  p.length = 11024;
  p.mean = 24.0;
  p.stddev = 8.0;
  p.correlation = 0.995;
  p.max = 350.0;
  p.outage_rate = 1.0 / 300.0;
  p.outage_mean_len = 50.0;
  p.outage_level = 0.06;
  return p;
}

Trace synthesize_trace(const TraceSynthParams& p, std::uint64_t seed) {
  if (p.length == 0) throw ValidationError("synthesize_trace: length must be >= 1");
  if (!(p.granularity_ms > 0)) throw ValidationError("synthesize_trace: granularity must be > 0");
  if (!(p.stddev >= 0) || !(p.correlation >= 0 && p.correlation < 1)) {
    throw ValidationError("synthesize_trace: stddev must be >= 0 and correlation in [0, 1)");
  }
  if (!(p.min >= 0 && p.min <= p.max)) throw ValidationError("synthesize_trace: need 0 <= min <= max");
  if (!(p.outage_rate >= 0 && p.outage_rate <= 1) || !(p.outage_mean_len >= 1)) {
    throw ValidationError("synthesize_trace: outage_rate in [0, 1] and outage_mean_len >= 1 required");
  }
  Rng rng(derive_seed(seed, 0x7ace));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double innovation = std::sqrt(1.0 - p.correlation * p.correlation) * p.stddev;
  Trace t;
  t.granularity_ms = p.granularity_ms;
  t.source_label = p.label;
  t.samples.reserve(p.length);
  double dev = p.stddev * gauss(rng);
  std::size_t outage_left = 0;
  for (std::size_t i = 0; i < p.length; ++i) {
    if (outage_left == 0 && p.outage_rate > 0 && uniform01(rng) < p.outage_rate) {
      // Geometric length with the requested mean.
      const double q = 1.0 / p.outage_mean_len;
      const double u = 1.0 - uniform01(rng);
      outage_left = q >= 1.0 ? 1 : 1 + static_cast<std::size_t>(std::floor(std::log(u) / std::log1p(-q)));
    }
    double v = p.mean + dev;
    if (outage_left > 0) {
      v = p.outage_level * p.mean * (1.0 + 0.2 * gauss(rng));
      --outage_left;
    }
    t.samples.push_back(std::clamp(v, p.min, p.max));
    if (p.stddev > 0) dev = p.correlation * dev + innovation * gauss(rng);
  }
  return t;
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read trace: " + path.string());
  Trace t;
  t.source_label = path.filename().string();
  std::vector<double> stamps;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError(path.string() + ": line " + std::to_string(lineno) + ": expected 'timestamp_ms,throughput'");
    }
    const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
    if (lineno == 1 && a == "timestamp_ms") continue;
    double ts = 0, v = 0;
    try {
      std::size_t pa = 0, pb = 0;
      ts = std::stod(a, &pa);
      v = std::stod(b, &pb);
      if (pa != a.size() || pb != b.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": line " + std::to_string(lineno) + ": malformed row '" + line + "'");
    }
    if (v < 0) {
      throw ParseError(path.string() + ": line " + std::to_string(lineno) + ": field 'throughput' is negative");
    }
    stamps.push_back(ts);
    t.samples.push_back(v);
  }
  if (t.samples.empty()) throw ParseError(path.string() + ": trace file has no samples");
  if (stamps.size() >= 2) t.granularity_ms = stamps[1] - stamps[0];
  t.validate();
  return t;
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write trace: " + path.string());
  os << "timestamp_ms,throughput\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", static_cast<double>(i) * trace.granularity_ms, trace.samples[i]);
    os << buf;
  }
}

PerturbedReplay::PerturbedReplay(Trace base, ReplayOptions options, std::uint64_t seed)
    : base_(std::move(base)), options_(options), rng_(seed), noise_(0.0, options.noise_rel) {
  base_.validate();
  if (!(options_.noise_rel >= 0)) throw ValidationError("replay: noise_rel must be >= 0");
  double sum = 0;
  for (double v : base_.samples) sum += v;
  base_mean_ = sum / static_cast<double>(base_.samples.size());
  start_pass();
}

void PerturbedReplay::start_pass() {
  const std::size_t n = base_.samples.size();
  pos_ = 0;
  offset_ = options_.shift_enabled ? static_cast<std::size_t>(rng_() % n) : 0;
  if (options_.inversion_enabled && (rng_() & 1U)) offset_ = (offset_ + n / 2) % n;
}

double PerturbedReplay::next_sample() {
  const std::size_t n = base_.samples.size();
  if (pos_ == n) start_pass();
  double v = base_.samples[(offset_ + pos_) % n];
  ++pos_;
  if (options_.noise_rel > 0) v *= 1.0 + noise_(rng_);
  return std::max(v, 0.0);
}

double PerturbedReplay::advance_mean(std::size_t count) {
  if (count == 0) count = 1;
  double sum = 0;
  for (std::size_t i = 0; i < count; ++i) sum += next_sample();
  return sum / static_cast<double>(count);
}

double cloud_latency_from_uniform(double t3_ms, double u) {
  if (t3_ms < 0) throw ValidationError("cloud latency: t3 must be >= 0");
  if (t3_ms == 0) return 0.0;
  return -t3_ms * std::log(u);
}

double sample_cloud_latency(double t3_ms, Rng& rng) {
  return cloud_latency_from_uniform(t3_ms, 1.0 - uniform01(rng));
}

}  // namespace fedrl
