// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Neurosurgeon-style partitioner extended to two split points: at each
// decision epoch it picks the config minimizing a single predicted metric
// (latency or device energy) under the previously observed conditions.

#include <string_view>
#include <vector>

#include "fedrl/agent.hpp"
#include "fedrl/env.hpp"

namespace fedrl {

enum class BaselineObjective { kLatency, kEnergy };

std::string_view objective_name(BaselineObjective objective);
BaselineObjective parse_objective(std::string_view name);

struct BaselineObservation {
  double last_r_wifi = 0;
  double last_r_5g = 0;
  double last_cloud_latency = 0;
};

/// Exhaustive argmin, ties to the lowest id. Throughputs are floored first;
/// every cloud stage is predicted at last_cloud_latency. No latency constraint.
int neurosurgeon_select(const ApplicationProfile& profile, const BaselineObservation& obs,
                        BaselineObjective objective, const DeviceProfile& devices, const CostWeights& weights,
                        double wifi_floor, double g5_floor);

/// First-epoch observation: base-trace means and the fully-cloud config's mean cloud latency.
BaselineObservation bootstrap_observation(const Environment& env);

/// Re-selects every epoch from the previous epoch's observation. Choosing the
/// already deployed config is issued as the keep action.
std::vector<StepRecord> run_baseline(Environment& env, BaselineObjective objective, std::size_t steps);

}  // namespace fedrl
