// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include "fedrl/baseline.hpp"

#include <algorithm>

namespace fedrl {

std::string_view objective_name(BaselineObjective objective) {
  return objective == BaselineObjective::kLatency ? "latency" : "energy";
}

BaselineObjective parse_objective(std::string_view name) {
  if (name == "latency") return BaselineObjective::kLatency;
  if (name == "energy") return BaselineObjective::kEnergy;
  throw ValidationError("baseline: objective must be 'latency' or 'energy', got '" + std::string(name) + "'");
}

int neurosurgeon_select(const ApplicationProfile& profile, const BaselineObservation& obs,
                        BaselineObjective objective, const DeviceProfile& devices, const CostWeights& weights,
                        double wifi_floor, double g5_floor) {
  const double rw = std::max(obs.last_r_wifi, wifi_floor);
  const double r5 = std::max(obs.last_r_5g, g5_floor);
  int best = 0;
  double best_value = 0;
  for (const auto& c : profile.configs) {
    double v = 0;
    if (objective == BaselineObjective::kLatency) {
      v = total_latency(c, rw, r5, c.has_cloud_stage() ? obs.last_cloud_latency : 0.0);
    } else {
      const auto e = energy(c, rw, r5, weights.tau_normal, weights.lambda_fps, devices);
      v = e.e_sew + e.e_phone;
    }
    if (c.id == 0 || v < best_value) {
      best = c.id;
      best_value = v;
    }
  }
  return best;
}

BaselineObservation bootstrap_observation(const Environment& env) {
  return {env.wifi_base_mean(), env.g5_base_mean(), env.profile().configs.at(2).t3};
}

std::vector<StepRecord> run_baseline(Environment& env, BaselineObjective objective, std::size_t steps) {
  const auto& cfg = env.config();
  BaselineObservation obs = bootstrap_observation(env);
  std::vector<StepRecord> out;
  out.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const int pick = neurosurgeon_select(env.profile(), obs, objective, cfg.devices, env.weights(), cfg.wifi_floor(),
                                         cfg.g5_floor());
    const int action = (i > 0 && pick == env.deployed()) ? env.eta() : pick;
    const StepOutcome o = env.step(action);
    obs.last_r_wifi = o.next_state.r_wifi;
    obs.last_r_5g = o.next_state.r_5g;
    if (env.profile().configs[static_cast<std::size_t>(o.config_id)].has_cloud_stage()) {
      obs.last_cloud_latency = o.next_state.l_cloud;
    }
    out.push_back(make_record(i + 1, action, o));
  }
  return out;
}

}  // namespace fedrl
