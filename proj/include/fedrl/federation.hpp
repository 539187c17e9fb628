// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Master loop for federated DQN training.
//
// Sync: every agent trains freq_updates steps from the broadcast weights and
// the master averages all of them. Async: fast agents train freq_updates
// steps and are averaged together; each slow agent trains a drawn, longer
// step count and is folded into the running aggregate in completion order,
// receiving back the aggregate that includes it. Every agent starts the next
// iteration from the last aggregate it took part in.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fedrl/agent.hpp"
#include "fedrl/metrics.hpp"

namespace fedrl {

enum class FederationMode { kSync, kAsync };
enum class RolePolicy { kFixed, kRedraw };
enum class Role { kFast, kSlow };

struct FederationConfig {
  std::size_t agents = 10;
  std::size_t steps_per_agent = 21000;
  std::size_t freq_updates = 500;
  FederationMode mode = FederationMode::kSync;
  double proportion_slow = 0.0;
  double max_delay_slow_relative = 0.3;
  RolePolicy role_policy = RolePolicy::kFixed;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;

  /// ceil(steps_per_agent / freq_updates); the last iteration may be shorter.
  std::size_t iterations() const;
  void validate() const;
};

struct AggregationState {
  WeightVector current;
  std::size_t contributors = 0;
};

/// Coordinate-wise arithmetic mean.
WeightVector aggregate_mean(std::span<const WeightVector> thetas);
WeightVector aggregate_mean(std::span<const WeightVector* const> thetas);

/// theta_agg <- ((n - 1) theta_agg + theta) / n with n the new contributor count.
AggregationState aggregate_incremental(const AggregationState& agg, const WeightVector& theta);

/// round(M * proportion_slow) slow agents per iteration; the fixed policy
/// draws once, the redraw policy every iteration. Indexed [iteration][agent].
std::vector<std::vector<Role>> schedule_roles(std::size_t agents, double proportion_slow, RolePolicy policy,
                                              std::size_t iterations, Rng& rng);

/// Uniform integer in [freq_updates, round(freq_updates * (1 + max_delay))].
std::size_t slow_step_count(std::size_t freq_updates, double max_delay_slow_relative, Rng& rng);

struct AgentWorker {
  DqnAgent agent;
  Environment env;
  std::optional<Validator> validator;
  bool keep_history = true;
  std::vector<StepRecord> history;
};

/// Builds worker `index` from its derived seed.
using WorkerFactory = std::function<AgentWorker(std::size_t index, std::uint64_t seed)>;

struct AggregationEvent {
  std::size_t iteration = 0;
  std::size_t agent = 0;
  std::size_t steps = 0;
  Role role = Role::kFast;
  std::size_t aggregation_index = 0;  // 0 = fast-group mean, s >= 1 = s-th slow fold
};

struct AgentLog {
  std::vector<StepRecord> steps;
  std::vector<ValidationRecord> validations;
  std::uint64_t total_steps = 0;
};

struct FederationResult {
  WeightVector global;
  std::vector<AggregationEvent> events;
  std::vector<AgentLog> agents;
};

/// Called after every iteration with each agent's trained weights and the
/// aggregate distributed to it.
using RoundObserver = std::function<void(std::size_t iteration, std::span<const WeightVector> trained,
                                         std::span<const WeightVector> distributed)>;

std::uint64_t agent_seed(std::uint64_t master_seed, std::size_t index);

FederationResult run_federation(const FederationConfig& config, const WorkerFactory& factory,
                                const std::optional<WeightVector>& initial = std::nullopt,
                                const RoundObserver& observer = {});

std::string_view role_name(Role role);

}  // namespace fedrl
