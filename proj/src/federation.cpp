// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include "fedrl/federation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

namespace fedrl {

std::size_t FederationConfig::iterations() const {
  if (freq_updates == 0) return 0;
  return (steps_per_agent + freq_updates - 1) / freq_updates;
}

void FederationConfig::validate() const {
  if (agents < 1) throw ValidationError("federation: agents must be >= 1");
  if (freq_updates < 1) throw ValidationError("federation: freq_updates must be >= 1");
  if (!(proportion_slow >= 0 && proportion_slow <= 1)) {
    throw ValidationError("federation: proportion_slow must be in [0, 1]");
  }
  if (!(max_delay_slow_relative >= 0)) throw ValidationError("federation: max_delay_slow_relative must be >= 0");
  if (threads < 1) throw ValidationError("federation: threads must be >= 1");
}

namespace {

void check_lengths(std::size_t expected, const WeightVector& w) {
  if (w.size() != expected) {
    throw ValidationError("aggregation: weight vector length " + std::to_string(w.size()) + " differs from " +
                          std::to_string(expected));
  }
}

}  // namespace

WeightVector aggregate_mean(std::span<const WeightVector* const> thetas) {
  if (thetas.empty()) throw ValidationError("aggregation: need at least one weight vector");
  const std::size_t n = thetas.front()->size();
  WeightVector out;
  out.dims = thetas.front()->dims;
  out.values.assign(n, 0.0);
  for (const auto* t : thetas) {
    check_lengths(n, *t);
    for (std::size_t i = 0; i < n; ++i) out.values[i] += t->values[i];
  }
  const double f = static_cast<double>(thetas.size());
  for (auto& v : out.values) v /= f;
  return out;
}

WeightVector aggregate_mean(std::span<const WeightVector> thetas) {
  std::vector<const WeightVector*> ptrs;
  ptrs.reserve(thetas.size());
  for (const auto& t : thetas) ptrs.push_back(&t);
  return aggregate_mean(std::span<const WeightVector* const>(ptrs));
}

AggregationState aggregate_incremental(const AggregationState& agg, const WeightVector& theta) {
  if (agg.contributors == 0) return {theta, 1};
  check_lengths(agg.current.size(), theta);
  AggregationState out;
  out.contributors = agg.contributors + 1;
  out.current.dims = agg.current.dims;
  out.current.values.resize(theta.size());
  const double prev = static_cast<double>(agg.contributors);
  const double n = static_cast<double>(out.contributors);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    out.current.values[i] = (prev * agg.current.values[i] + theta.values[i]) / n;
  }
  return out;
}

std::vector<std::vector<Role>> schedule_roles(std::size_t agents, double proportion_slow, RolePolicy policy,
                                              std::size_t iterations, Rng& rng) {
  const auto slow = static_cast<std::size_t>(std::llround(static_cast<double>(agents) * proportion_slow));
  auto draw = [&] {
    std::vector<std::size_t> ids(agents);
    std::iota(ids.begin(), ids.end(), 0);
    // Fisher-Yates with the shared rng so the draw is library-independent.
    for (std::size_t i = agents; i > 1; --i) std::swap(ids[i - 1], ids[rng() % i]);
    std::vector<Role> roles(agents, Role::kFast);
    for (std::size_t i = 0; i < slow && i < agents; ++i) roles[ids[i]] = Role::kSlow;
    return roles;
  };
  std::vector<std::vector<Role>> out;
  out.reserve(iterations);
  if (policy == RolePolicy::kFixed) {
    const auto roles = draw();
    out.assign(iterations, roles);
  } else {
    for (std::size_t n = 0; n < iterations; ++n) out.push_back(draw());
  }
  return out;
}

std::size_t slow_step_count(std::size_t freq_updates, double max_delay, Rng& rng) {
  if (!(max_delay >= 0)) throw ValidationError("slow_step_count: max_delay must be >= 0");
  const auto hi = static_cast<std::size_t>(std::llround(static_cast<double>(freq_updates) * (1.0 + max_delay)));
  const std::size_t span = hi - freq_updates + 1;
  return freq_updates + static_cast<std::size_t>(rng() % span);
}

std::uint64_t agent_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, 0xa9e47, index);
}

std::string_view role_name(Role role) { return role == Role::kFast ? "fast" : "slow"; }

namespace {

template <typename Fn>
void for_each_agent(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  const std::size_t n = std::min(threads, count);
  for (std::size_t t = 0; t < n; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += n) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

FederationResult run_federation(const FederationConfig& config, const WorkerFactory& factory,
                                const std::optional<WeightVector>& initial, const RoundObserver& observer) {
  config.validate();
  const std::size_t m_agents = config.agents;
  std::vector<AgentWorker> workers;
  workers.reserve(m_agents);
  for (std::size_t m = 0; m < m_agents; ++m) workers.push_back(factory(m, agent_seed(config.master_seed, m)));

  FederationResult result;
  result.global = initial ? *initial : workers.front().agent.get_weights();
  std::vector<WeightVector> start(m_agents, result.global);
  std::vector<WeightVector> trained(m_agents);

  Rng rng(derive_seed(config.master_seed, 0xfed));
  const std::size_t iterations = config.iterations();
  const double p_slow = config.mode == FederationMode::kSync ? 0.0 : config.proportion_slow;
  const auto roles = schedule_roles(m_agents, p_slow, config.role_policy, iterations, rng);

  for (std::size_t n = 0; n < iterations; ++n) {
    const std::size_t phase = std::min(config.freq_updates, config.steps_per_agent - n * config.freq_updates);
    std::vector<std::size_t> steps(m_agents, phase);
    for (std::size_t m = 0; m < m_agents; ++m) {
      if (roles[n][m] == Role::kSlow) steps[m] = slow_step_count(phase, config.max_delay_slow_relative, rng);
    }

    for_each_agent(m_agents, config.threads, [&](std::size_t m) {
      auto& w = workers[m];
      w.agent.set_weights(start[m]);
      StepHook hook;
      if (w.validator) hook = [&w](DqnAgent& a) { w.validator->maybe_validate(a); };
      run_training_phase(w.agent, w.env, steps[m], w.keep_history ? &w.history : nullptr, hook);
      trained[m] = w.agent.get_weights();
    });

    std::vector<const WeightVector*> fast;
    std::vector<std::size_t> fast_ids, slow_ids;
    for (std::size_t m = 0; m < m_agents; ++m) {
      if (roles[n][m] == Role::kFast) {
        fast.push_back(&trained[m]);
        fast_ids.push_back(m);
      } else {
        slow_ids.push_back(m);
      }
    }
    std::sort(slow_ids.begin(), slow_ids.end(),
              [&](std::size_t a, std::size_t b) { return steps[a] != steps[b] ? steps[a] < steps[b] : a < b; });

    AggregationState agg;
    if (!fast.empty()) {
      agg = {aggregate_mean(std::span<const WeightVector* const>(fast)), fast.size()};
      for (auto f : fast_ids) {
        start[f] = agg.current;
        result.events.push_back({n, f, steps[f], Role::kFast, 0});
      }
    }
    std::size_t fold = 0;
    for (auto s : slow_ids) {
      agg = aggregate_incremental(agg, trained[s]);
      start[s] = agg.current;
      result.events.push_back({n, s, steps[s], Role::kSlow, ++fold});
    }
    result.global = agg.current;
    if (observer) observer(n, trained, start);
  }

  result.agents.resize(m_agents);
  for (std::size_t m = 0; m < m_agents; ++m) {
    auto& w = workers[m];
    result.agents[m].steps = std::move(w.history);
    if (w.validator) result.agents[m].validations = w.validator->records();
    result.agents[m].total_steps = w.agent.env_steps();
  }
  return result;
}

}  // namespace fedrl
