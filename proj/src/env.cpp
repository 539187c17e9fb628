// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include "fedrl/env.hpp"

#include <algorithm>
#include <cmath>

namespace fedrl {

void CostWeights::validate() const {
  for (double w : {w_sew, w_phone, w_5g, w_lat, w_rcfg}) {
    if (!(w >= 0)) throw ValidationError("environment: weights must be nonnegative");
  }
  const double sum = w_sew + w_phone + w_5g + w_lat + w_rcfg;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("environment: weights must sum to 1 (got " + std::to_string(sum) + ")");
  }
  if (!(alpha >= 0 && g >= 0 && lambda_fps > 0 && tau_normal > 0 && tau_fast > 0 && l_max > 0)) {
    throw ValidationError("environment: need alpha, g >= 0 and lambda_fps, tau_normal, tau_fast, l_max > 0");
  }
}

double Range::normalize(double v) const {
  if (!(max > min)) return 0.0;
  return std::clamp((v - min) / (max - min), 0.0, 1.0);
}

void EnvConfig::validate() const {
  weights.validate();
  devices.validate();
  for (const Range* r : {&bounds.r_wifi, &bounds.r_5g, &bounds.l_sew, &bounds.l_phone, &bounds.l_cloud}) {
    if (!(r->max > r->min)) throw ValidationError("environment: every bound needs max > min");
  }
  if (!(floor_fraction > 0 && floor_fraction <= 1)) {
    throw ValidationError("environment: floor_fraction must be in (0, 1]");
  }
  if (fast_after_violations < 1) throw ValidationError("environment: fast_after_violations must be >= 1");
}

double total_latency(const PartitionConfig& c, double r_wifi, double r_5g, double cloud_latency_ms) {
  return c.t1 + c.t2 + 1000.0 * c.delta12 / r_wifi + 1000.0 * c.delta23 / r_5g + cloud_latency_ms;
}

EnergyBreakdown energy(const PartitionConfig& c, double r_wifi, double r_5g, double tau_s, double lambda_fps,
                       const DeviceProfile& d) {
  const double frames = tau_s * lambda_fps;
  return {frames * (d.z_sew * c.mu1 + d.theta_sew * c.delta12 / r_wifi),
          frames * (d.z_phone * c.mu2 + d.theta_phone * c.delta23 / r_5g)};
}

double comm_cost_5g(const PartitionConfig& c, double tau_s, double lambda_fps, double g) {
  return tau_s * lambda_fps * g * c.delta23;
}

double step_cost(const CostComponents& x, const CostWeights& w) {
  auto ratio = [](double v, double norm) { return std::clamp(v / norm, 0.0, 1.0); };
  return w.w_sew * ratio(x.c_sew, w.c_sew_max) + w.w_phone * ratio(x.c_phone, w.c_phone_max) +
         w.w_5g * ratio(x.c_5g, w.c_5g_max) + w.w_lat * x.c_lat + w.w_rcfg * x.c_rcfg;
}

CostWeights resolve_normalizers(const CostWeights& weights, const ApplicationProfile& profile,
                                const DeviceProfile& devices, double wifi_floor, double g5_floor) {
  CostWeights w = weights;
  double sew = 0, phone = 0, g5 = 0;
  for (const auto& c : profile.configs) {
    const auto e = energy(c, wifi_floor, g5_floor, w.tau_normal, w.lambda_fps, devices);
    sew = std::max(sew, w.alpha * e.e_sew);
    phone = std::max(phone, w.alpha * e.e_phone);
    g5 = std::max(g5, comm_cost_5g(c, w.tau_normal, w.lambda_fps, w.g));
  }
  if (w.c_sew_max <= 0) w.c_sew_max = sew > 0 ? sew : 1.0;
  if (w.c_phone_max <= 0) w.c_phone_max = phone > 0 ? phone : 1.0;
  if (w.c_5g_max <= 0) w.c_5g_max = g5 > 0 ? g5 : 1.0;
  return w;
}

int oracle_best_config(const ApplicationProfile& profile, const Snapshot& s, const CostWeights& w,
                       const DeviceProfile& devices, double wifi_floor, double g5_floor) {
  const double rw = std::max(s.r_wifi, wifi_floor);
  const double r5 = std::max(s.r_5g, g5_floor);
  int best = -1, fastest = 0;
  double best_obj = 0, best_lat = 0;
  for (const auto& c : profile.configs) {
    const double lat = total_latency(c, rw, r5, c.t3);
    if (c.id == 0 || lat < best_lat) {
      best_lat = lat;
      fastest = c.id;
    }
    if (!(lat < w.l_max)) continue;
    const auto e = energy(c, rw, r5, w.tau_normal, w.lambda_fps, devices);
    const double obj = w.alpha * (e.e_sew + e.e_phone) + comm_cost_5g(c, w.tau_normal, w.lambda_fps, w.g);
    if (best < 0 || obj < best_obj) {
      best = c.id;
      best_obj = obj;
    }
  }
  return best >= 0 ? best : fastest;
}

Environment::Environment(std::shared_ptr<const ApplicationProfile> profile, EnvConfig config, Trace wifi, Trace g5)
    : profile_(std::move(profile)),
      config_(config),
      wifi_(std::move(wifi), config.replay, derive_seed(config.seed, 0x3141)),
      g5_(std::move(g5), config.replay, derive_seed(config.seed, 0x5926)),
      cloud_rng_(derive_seed(config.seed, 0xc10d)) {
  if (!profile_ || profile_->configs.empty()) throw ValidationError("environment: empty profile");
  config_.validate();
  weights_ = resolve_normalizers(config_.weights, *profile_, config_.devices, config_.wifi_floor(),
                                 config_.g5_floor());
  const double tau = weights_.tau_normal;
  state_.r_wifi = wifi_.advance_mean(window_samples(wifi_, tau));
  state_.r_5g = g5_.advance_mean(window_samples(g5_, tau));
  const auto& local = profile_->configs.front();
  state_.l_sew = local.t1;
  state_.l_phone = local.t2;
  state_.l_cloud = 0.0;
}

std::size_t Environment::window_samples(const PerturbedReplay& replay, double tau_s) const {
  const double n = std::round(tau_s * 1000.0 / replay.base().granularity_ms);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

StepOutcome Environment::step(int action) {
  if (action < 0 || action > eta()) {
    throw ValidationError("environment: action " + std::to_string(action) + " out of range [0, " +
                          std::to_string(eta()) + "]");
  }
  const bool reconfigure = action != eta();
  if (reconfigure) deployed_ = action;
  const auto& c = profile_->configs[static_cast<std::size_t>(deployed_)];
  const double tau = current_tau();

  const double rw_raw = wifi_.advance_mean(window_samples(wifi_, tau));
  const double r5_raw = g5_.advance_mean(window_samples(g5_, tau));
  const double rw = std::max(rw_raw, config_.wifi_floor());
  const double r5 = std::max(r5_raw, config_.g5_floor());
  const double cloud = c.has_cloud_stage() ? sample_cloud_latency(c.t3, cloud_rng_) : 0.0;

  StepOutcome out;
  out.config_id = deployed_;
  out.tau = tau;
  auto& x = out.components;
  x.l_total = total_latency(c, rw, r5, cloud);
  const auto e = energy(c, rw, r5, tau, weights_.lambda_fps, config_.devices);
  x.e_sew = e.e_sew;
  x.e_phone = e.e_phone;
  x.c_sew = weights_.alpha * e.e_sew;
  x.c_phone = weights_.alpha * e.e_phone;
  x.c_5g = comm_cost_5g(c, tau, weights_.lambda_fps, weights_.g);
  out.violated = x.l_total > weights_.l_max;
  x.c_lat = out.violated ? 1.0 : 0.0;
  x.c_rcfg = reconfigure ? 1.0 : 0.0;
  out.cost = step_cost(x, weights_);

  consecutive_violations_ = out.violated ? consecutive_violations_ + 1 : 0;
  fast_mode_ = consecutive_violations_ >= config_.fast_after_violations;

  state_ = {rw_raw, r5_raw, c.t1, c.t2, cloud};
  out.next_state = state_;
  return out;
}

Observation Environment::observe() const {
  const auto& b = config_.bounds;
  return {static_cast<float>(b.r_wifi.normalize(state_.r_wifi)), static_cast<float>(b.r_5g.normalize(state_.r_5g)),
          static_cast<float>(b.l_sew.normalize(state_.l_sew)), static_cast<float>(b.l_phone.normalize(state_.l_phone)),
          static_cast<float>(b.l_cloud.normalize(state_.l_cloud))};
}

}  // namespace fedrl
