// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Decision-epoch environment for runtime partition selection.
//
// Units: latency in ms, transfer sizes in MB, throughput in MB/s, energy in J
// per decision window, window durations in s.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>

#include "fedrl/common.hpp"
#include "fedrl/profile.hpp"
#include "fedrl/traces.hpp"

namespace fedrl {

inline constexpr std::size_t kStateDim = 5;
using Observation = std::array<float, kStateDim>;

struct CostWeights {
  double w_sew = 0.03;
  double w_phone = 0.02;
  double w_5g = 0.0;
  double w_lat = 0.93;
  double w_rcfg = 0.02;
  // Normalizers; values <= 0 are resolved from the profile (see resolve_normalizers).
  double c_sew_max = 0;
  double c_phone_max = 0;
  double c_5g_max = 0;
  double alpha = 1.0;      // cost per joule
  double g = 0.1;          // cost per MB over 5G
  double lambda_fps = 1.0;
  double tau_normal = 10.0;
  double tau_fast = 1.0;
  double l_max = 400.0;

  void validate() const;
};

struct Range {
  double min = 0, max = 1;
  double normalize(double v) const;
};

struct StateBounds {
  Range r_wifi{0, 580};
  Range r_5g{0, 350};
  Range l_sew{0, 450};
  Range l_phone{0, 65};
  Range l_cloud{0, 30};
};

struct EnvConfig {
  CostWeights weights{};
  DeviceProfile devices{};
  StateBounds bounds{};
  double floor_fraction = 1e-3;      // throughput floor, fraction of the max bound
  int fast_after_violations = 5;
  ReplayOptions replay{};
  std::uint64_t seed = 1;

  double wifi_floor() const { return floor_fraction * bounds.r_wifi.max; }
  double g5_floor() const { return floor_fraction * bounds.r_5g.max; }
  void validate() const;
};

struct EnergyBreakdown {
  double e_sew = 0;
  double e_phone = 0;
};

struct CostComponents {
  double c_sew = 0;
  double c_phone = 0;
  double c_5g = 0;
  double c_lat = 0;   // violation indicator
  double c_rcfg = 0;  // reconfiguration indicator
  double l_total = 0;
  double e_sew = 0;
  double e_phone = 0;
};

double total_latency(const PartitionConfig& c, double r_wifi, double r_5g, double cloud_latency_ms);
EnergyBreakdown energy(const PartitionConfig& c, double r_wifi, double r_5g, double tau_s, double lambda_fps,
                       const DeviceProfile& devices);
double comm_cost_5g(const PartitionConfig& c, double tau_s, double lambda_fps, double g);

/// Additive weighting of normalized energy and 5G terms (each ratio clamped to
/// [0, 1]) plus the violation and reconfiguration indicators.
double step_cost(const CostComponents& components, const CostWeights& weights);

/// Fills non-positive c_*_max with the largest per-window component over the
/// profile at the throughput floor and tau_normal.
CostWeights resolve_normalizers(const CostWeights& weights, const ApplicationProfile& profile,
                                const DeviceProfile& devices, double wifi_floor, double g5_floor);

struct Snapshot {
  double r_wifi = 0;
  double r_5g = 0;
};

/// Exhaustive minimizer of alpha(E_sew + E_phone) + c_5G over configs whose
/// expected latency (cloud at its mean t3) stays below l_max; falls back to the
/// lowest-latency config when none is feasible. Ties go to the lowest id.
int oracle_best_config(const ApplicationProfile& profile, const Snapshot& snapshot, const CostWeights& weights,
                       const DeviceProfile& devices, double wifi_floor, double g5_floor);

struct EnvState {
  double r_wifi = 0;
  double r_5g = 0;
  double l_sew = 0;
  double l_phone = 0;
  double l_cloud = 0;
};

struct StepOutcome {
  EnvState next_state;
  double cost = 0;
  bool violated = false;
  int config_id = 0;
  double tau = 0;
  CostComponents components;
};

class Environment {
 public:
  Environment(std::shared_ptr<const ApplicationProfile> profile, EnvConfig config, Trace wifi, Trace g5);

  /// Actions [0, |configs|) deploy a config; action |configs| (eta) keeps the current one.
  StepOutcome step(int action);
  Observation observe() const;

  const EnvState& state() const { return state_; }
  int deployed() const { return deployed_; }
  double current_tau() const { return fast_mode_ ? weights_.tau_fast : weights_.tau_normal; }
  std::size_t action_count() const { return profile_->size() + 1; }
  int eta() const { return static_cast<int>(profile_->size()); }
  const ApplicationProfile& profile() const { return *profile_; }
  const CostWeights& weights() const { return weights_; }
  const EnvConfig& config() const { return config_; }
  double wifi_base_mean() const { return wifi_.base_mean(); }
  double g5_base_mean() const { return g5_.base_mean(); }

 private:
  std::size_t window_samples(const PerturbedReplay& replay, double tau_s) const;

  std::shared_ptr<const ApplicationProfile> profile_;
  EnvConfig config_;
  CostWeights weights_;
  PerturbedReplay wifi_;
  PerturbedReplay g5_;
  Rng cloud_rng_;
  EnvState state_;
  int deployed_ = 0;
  int consecutive_violations_ = 0;
  bool fast_mode_ = false;
};

}  // namespace fedrl
