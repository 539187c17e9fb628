// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <map>
#include <set>

#include "fedrl/federation.hpp"
#include "helpers.hpp"

using namespace fedrl;

namespace {

WeightVector wv(std::vector<double> v) { return {{}, std::move(v)}; }

DqnConfig small_agent() {
  DqnConfig c;
  c.hidden = {16, 16};
  c.dropout = {0.2, 0.0};
  c.batch_size = 32;
  c.buffer_capacity = 400;
  c.lr = 1e-3;
  c.target_update_every = 20;
  return c;
}

const Trace& wifi_trace() {
  static const Trace t = synthesize_trace(default_wifi_params(), 1);
  return t;
}
const Trace& g5_trace() {
  static const Trace t = synthesize_trace(default_5g_params(), 2);
  return t;
}

Environment env_for(std::uint64_t seed) {
  EnvConfig cfg;
  cfg.seed = seed;
  return Environment(test::default_profile(), cfg, wifi_trace(), g5_trace());
}

// Per-agent envs and agents derived from the worker seed; `same` forces one seed for all.
WorkerFactory factory(bool validate = false, std::optional<std::uint64_t> same = std::nullopt) {
  return [=](std::size_t, std::uint64_t seed) {
    const std::uint64_t s = same ? *same : seed;
    auto env = env_for(derive_seed(s, 1));
    DqnAgent agent(env.action_count(), small_agent(), derive_seed(s, 2));
    std::optional<Validator> v;
    if (validate) v.emplace(env_for(derive_seed(s, 3)), 100, 50);
    return AgentWorker{std::move(agent), std::move(env), std::move(v), true, {}};
  };
}

FederationConfig fed(std::size_t agents, std::size_t steps, std::size_t freq) {
  FederationConfig c;
  c.agents = agents;
  c.steps_per_agent = steps;
  c.freq_updates = freq;
  c.master_seed = 5;
  return c;
}

}  // namespace

TEST_CASE("mean aggregation") {
  const std::vector<WeightVector> a{wv({1, 2}), wv({3, 4})};
  CHECK(aggregate_mean(a).values == std::vector<double>{2, 3});
  const std::vector<WeightVector> same(5, wv({0.3, -7.25, 1e-9}));
  CHECK(aggregate_mean(same).values == same[0].values);
  const std::vector<WeightVector> bad{wv({1, 2}), wv({1})};
  CHECK_THROWS_AS(aggregate_mean(bad), ValidationError);
  CHECK_THROWS_AS(aggregate_mean(std::span<const WeightVector>{}), ValidationError);

  // Permutation invariance and the coordinate-wise bound.
  Rng rng(2);
  std::vector<WeightVector> xs;
  for (int i = 0; i < 7; ++i) {
    std::vector<double> v(30);
    for (auto& x : v) x = 4 * uniform01(rng) - 2;
    xs.push_back(wv(v));
  }
  const auto m = aggregate_mean(xs);
  std::reverse(xs.begin(), xs.end());
  const auto r = aggregate_mean(xs);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(m.values[i] == doctest::Approx(r.values[i]).epsilon(1e-15));
    double lo = 1e9, hi = -1e9;
    for (const auto& x : xs) {
      lo = std::min(lo, x.values[i]);
      hi = std::max(hi, x.values[i]);
    }
    CHECK(m.values[i] >= lo);
    CHECK(m.values[i] <= hi);
  }
}

TEST_CASE("incremental aggregation") {
  AggregationState s{wv({2.0}), 3};
  CHECK(aggregate_incremental(s, wv({6.0})).current.values[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(aggregate_incremental(s, wv({6.0})).contributors == 4);
  CHECK(aggregate_incremental({}, wv({1, 2})).current.values == std::vector<double>{1, 2});
  CHECK_THROWS_AS(aggregate_incremental(s, wv({1, 2})), ValidationError);

  // Folding one by one equals the batch mean.
  Rng rng(4);
  std::vector<WeightVector> xs;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> v(20);
    for (auto& x : v) x = uniform01(rng);
    xs.push_back(wv(v));
  }
  AggregationState run;
  for (const auto& x : xs) run = aggregate_incremental(run, x);
  const auto m = aggregate_mean(xs);
  for (std::size_t i = 0; i < 20; ++i) CHECK(run.current.values[i] == doctest::Approx(m.values[i]).epsilon(1e-13));
}

TEST_CASE("role scheduling") {
  Rng rng(1);
  const auto fixed = schedule_roles(10, 0.4, RolePolicy::kFixed, 12, rng);
  REQUIRE(fixed.size() == 12);
  for (const auto& it : fixed) {
    CHECK(std::count(it.begin(), it.end(), Role::kSlow) == 4);
    CHECK(it == fixed.front());
  }
  const auto redraw = schedule_roles(10, 0.3, RolePolicy::kRedraw, 200, rng);
  std::set<std::vector<Role>> distinct(redraw.begin(), redraw.end());
  CHECK(distinct.size() > 1);
  for (const auto& it : redraw) CHECK(std::count(it.begin(), it.end(), Role::kSlow) == 3);
  for (const auto& it : schedule_roles(10, 0.0, RolePolicy::kRedraw, 5, rng)) {
    CHECK(std::count(it.begin(), it.end(), Role::kSlow) == 0);
  }
  for (const auto& it : schedule_roles(4, 1.0, RolePolicy::kFixed, 2, rng)) {
    CHECK(std::count(it.begin(), it.end(), Role::kSlow) == 4);
  }
}

TEST_CASE("slow step counts are uniform over the delay range") {
  Rng rng(7);
  std::map<std::size_t, int> hist;
  const int n = 151000;
  for (int i = 0; i < n; ++i) ++hist[slow_step_count(500, 0.3, rng)];
  CHECK(hist.begin()->first == 500);
  CHECK(hist.rbegin()->first == 650);
  CHECK(hist.size() == 151);
  for (const auto& [k, c] : hist) CHECK(c == doctest::Approx(1000).epsilon(0.15));
  CHECK(slow_step_count(500, 0.0, rng) == 500);
  CHECK_THROWS_AS(slow_step_count(500, -0.1, rng), ValidationError);
}

TEST_CASE("iteration count") {
  CHECK(fed(1, 21000, 500).iterations() == 42);
  CHECK(fed(1, 1001, 500).iterations() == 3);
  CHECK(fed(1, 0, 500).iterations() == 0);
  auto bad = fed(0, 10, 5);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("one-agent federation equals a standalone agent") {
  const auto result = run_federation(fed(1, 900, 250), factory());
  // Standalone: same worker, phase lengths 250, 250, 250, 150, weights re-broadcast each phase.
  AgentWorker w = factory()(0, agent_seed(5, 0));
  std::vector<StepRecord> h;
  for (std::size_t steps : {250, 250, 250, 150}) {
    w.agent.set_weights(w.agent.get_weights());
    run_training_phase(w.agent, w.env, steps, &h);
  }
  CHECK(result.global == w.agent.get_weights());
  REQUIRE(result.agents[0].steps.size() == h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(result.agents[0].steps[i].action == h[i].action);
    CHECK(result.agents[0].steps[i].cost == h[i].cost);
  }
  CHECK(result.agents[0].total_steps == 900);
}

TEST_CASE("identical agents aggregate to their own weights") {
  std::size_t rounds = 0;
  run_federation(fed(3, 600, 200), factory(false, 42), std::nullopt,
                 [&](std::size_t, std::span<const WeightVector> trained, std::span<const WeightVector> dist) {
                   ++rounds;
                   for (std::size_t m = 0; m < 3; ++m) {
                     CHECK(trained[m] == trained[0]);
                     CHECK(dist[m] == trained[0]);
                   }
                 });
  CHECK(rounds == 3);
}

TEST_CASE("federation invariants") {
  SUBCASE("sync: every agent receives the mean of all trained weights") {
    auto c = fed(4, 600, 200);
    run_federation(c, factory(), std::nullopt,
                   [&](std::size_t, std::span<const WeightVector> trained, std::span<const WeightVector> dist) {
                     const auto m = aggregate_mean(trained);
                     for (const auto& d : dist) CHECK(d == m);
                   });
  }
  SUBCASE("async: slow agents fold in completion order") {
    auto c = fed(5, 600, 200);
    c.mode = FederationMode::kAsync;
    c.proportion_slow = 0.4;
    const auto r = run_federation(c, factory());
    std::map<std::size_t, std::vector<AggregationEvent>> by_iter;
    for (const auto& e : r.events) by_iter[e.iteration].push_back(e);
    CHECK(by_iter.size() == 3);
    for (const auto& [n, evs] : by_iter) {
      CHECK(evs.size() == 5);
      std::size_t slow = 0, last_steps = 0;
      for (const auto& e : evs) {
        if (e.role == Role::kFast) {
          CHECK(e.steps == 200);
          CHECK(e.aggregation_index == 0);
        } else {
          ++slow;
          CHECK(e.aggregation_index == slow);
          CHECK(e.steps >= 200);
          CHECK(e.steps <= 260);
          CHECK(e.steps >= last_steps);
          last_steps = e.steps;
        }
      }
      CHECK(slow == 2);
    }
    // Slow agents run more steps overall.
    std::size_t fast_total = 0, slow_total = 0;
    for (const auto& e : r.events) (e.role == Role::kFast ? fast_total : slow_total) += e.steps;
    CHECK(static_cast<double>(slow_total) / 2 >= static_cast<double>(fast_total) / 3);
  }
  SUBCASE("async with no slow agents equals sync") {
    auto sync = fed(3, 500, 250);
    auto async = sync;
    async.mode = FederationMode::kAsync;
    async.proportion_slow = 0.0;
    CHECK(run_federation(sync, factory()).global == run_federation(async, factory()).global);
  }
  SUBCASE("threads do not change results") {
    auto seq = fed(4, 500, 250);
    seq.mode = FederationMode::kAsync;
    seq.proportion_slow = 0.5;
    auto par = seq;
    par.threads = 4;
    const auto a = run_federation(seq, factory(true));
    const auto b = run_federation(par, factory(true));
    CHECK(a.global == b.global);
    for (std::size_t m = 0; m < 4; ++m) {
      REQUIRE(a.agents[m].validations.size() == b.agents[m].validations.size());
      for (std::size_t i = 0; i < a.agents[m].validations.size(); ++i) {
        CHECK(a.agents[m].validations[i].c_lat == b.agents[m].validations[i].c_lat);
      }
    }
  }
  SUBCASE("repeat runs are bit identical") {
    const auto a = run_federation(fed(2, 400, 100), factory(true));
    const auto b = run_federation(fed(2, 400, 100), factory(true));
    CHECK(a.global == b.global);
    CHECK(a.agents[1].steps.size() == b.agents[1].steps.size());
    for (std::size_t i = 0; i < a.agents[1].steps.size(); ++i) CHECK(a.agents[1].steps[i].cost == b.agents[1].steps[i].cost);
  }
  SUBCASE("warm start replaces the initial weights") {
    const auto first = run_federation(fed(1, 0, 100), factory());
    AgentWorker w = factory()(0, agent_seed(5, 0));
    CHECK(first.global == w.agent.get_weights());
    WeightVector init = w.agent.get_weights();
    for (auto& v : init.values) v *= 0.5;
    CHECK(run_federation(fed(2, 0, 100), factory(), init).global == init);
    WeightVector wrong = init;
    wrong.values.pop_back();
    CHECK_THROWS_AS(run_federation(fed(2, 100, 100), factory(), wrong), ValidationError);
  }
}

TEST_CASE("validation does not perturb training") {
  const auto with = run_federation(fed(2, 600, 200), factory(true));
  const auto without = run_federation(fed(2, 600, 200), factory(false));
  CHECK(with.global == without.global);
  REQUIRE(with.agents[0].validations.size() == 7);  // steps 0, 100, ..., 600
  CHECK(with.agents[0].validations.front().steps_trained == 0);
  CHECK(with.agents[0].validations.back().steps_trained == 600);
  for (std::size_t i = 0; i < with.agents[0].steps.size(); ++i) {
    CHECK(with.agents[0].steps[i].cost == without.agents[0].steps[i].cost);
  }
}
