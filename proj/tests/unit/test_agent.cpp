// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "fedrl/agent.hpp"
#include "helpers.hpp"

using namespace fedrl;

namespace {

Transition numbered(int i) {
  Transition t;
  t.a = i;
  t.r = static_cast<float>(i);
  return t;
}

DqnConfig small_config() {
  DqnConfig c;
  c.hidden = {16, 16};
  c.dropout = {0.0, 0.0};
  c.batch_size = 32;
  c.buffer_capacity = 500;
  c.lr = 1e-3;
  return c;
}

Environment synthetic_env(std::uint64_t seed) {
  EnvConfig cfg;
  cfg.seed = seed;
  return Environment(test::default_profile(), cfg, synthesize_trace(default_wifi_params(), 1),
                     synthesize_trace(default_5g_params(), 2));
}

}  // namespace

TEST_CASE("replay buffer is a bounded FIFO") {
  ReplayBuffer b(3);
  CHECK(b.size() == 0);
  for (int i = 0; i < 2; ++i) b.push(numbered(i));
  CHECK(b.size() == 2);
  CHECK(b.at(0).a == 0);
  for (int i = 2; i < 5; ++i) b.push(numbered(i));
  CHECK(b.size() == 3);
  CHECK(b.at(0).a == 2);
  CHECK(b.at(2).a == 4);
  CHECK_THROWS_AS(b.at(3), ValidationError);
  Rng rng(1);
  CHECK_THROWS_AS(b.sample(4, rng), ValidationError);
  CHECK_THROWS_AS(ReplayBuffer(0), ValidationError);

  std::map<int, int> seen;
  for (int i = 0; i < 10000; ++i) {
    for (const auto* t : b.sample(3, rng)) ++seen[t->a];
  }
  CHECK(seen.size() == 3);
  for (const auto& [a, n] : seen) CHECK(n == doctest::Approx(10000).epsilon(0.05));
}

TEST_CASE("argmax takes the lowest index on ties") {
  const std::vector<float> q{1.0f, 3.0f, 3.0f, -2.0f};
  CHECK(argmax(q) == 1);
  const std::vector<float> flat(7, 0.5f);
  CHECK(argmax(flat) == 0);
}

TEST_CASE("action selection") {
  DqnAgent agent(10, small_config(), 4);
  const Observation s{0.1f, 0.2f, 0.3f, 0.4f, 0.5f};

  SUBCASE("epsilon 1 is uniform") {
    std::vector<int> counts(10, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(agent.select_action(s, 1.0))];
    for (int c : counts) CHECK(static_cast<double>(c) / n == doctest::Approx(0.1).epsilon(0.01 / 0.1));
  }
  SUBCASE("epsilon 0 is greedy and invariant to a constant shift of Q") {
    const auto q = agent.q_values(s);
    CHECK(agent.select_action(s, 0.0) == static_cast<int>(argmax(q)));
    // Shifting every output bias moves Q uniformly and keeps the argmax.
    auto& net = agent.mutable_online();
    const auto last = net.layer_count() - 1;
    for (std::size_t j = 0; j < net.output_dim(); ++j) net.params()[net.bias_offset(last) + j] += 3.0f;
    CHECK(agent.greedy_action(s) == static_cast<int>(argmax(q)));
  }
  SUBCASE("all-equal Q picks action 0") {
    auto p = agent.mutable_online().params();
    std::fill(p.begin(), p.end(), 0.0f);
    CHECK(agent.greedy_action(s) == 0);
  }
}

TEST_CASE("td loss gradient matches central differences") {
  Mlp<double> online({5, 8, 3}, {0.0}), target({5, 8, 3}, {0.0});
  Rng rng(9);
  online.init_uniform(rng);
  target.init_uniform(rng);
  TransitionBatch<double> b;
  b.size = 6;
  for (std::size_t i = 0; i < b.size; ++i) {
    for (std::size_t k = 0; k < 5; ++k) {
      b.s.push_back(uniform01(rng));
      b.s_next.push_back(uniform01(rng));
    }
    b.a.push_back(static_cast<int>(rng() % 3));
    b.r.push_back(-uniform01(rng));
  }
  TdScratch<double> scratch;
  std::vector<double> grad(online.param_count());
  const double base = td_loss(online, target, b, 0.9, Mode::kEval, nullptr, scratch, std::span<double>(grad));

  // Oracle loss written out directly.
  auto oracle = [&] {
    MlpWorkspace<double> ws;
    double sum = 0;
    for (std::size_t i = 0; i < b.size; ++i) {
      const std::span<const double> sn(b.s_next.data() + 5 * i, 5), s(b.s.data() + 5 * i, 5);
      const auto qn = target.forward(sn, 1, ws, Mode::kEval, nullptr);
      const double y = b.r[i] + 0.9 * std::max({qn[0], qn[1], qn[2]});
      const double q = online.forward(s, 1, ws, Mode::kEval, nullptr)[static_cast<std::size_t>(b.a[i])];
      sum += (q - y) * (q - y);
    }
    return sum / static_cast<double>(b.size);
  };
  CHECK(base == doctest::Approx(oracle()).epsilon(1e-12));
  auto p = online.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i], h = 1e-6;
    p[i] = keep + h;
    const double up = oracle();
    p[i] = keep - h;
    const double down = oracle();
    p[i] = keep;
    CHECK(grad[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("gamma 0 regresses Q(s, a) onto the reward") {
  DqnConfig c = small_config();
  c.gamma = 0.0;
  c.batch_size = 1;
  c.buffer_capacity = 1;
  c.lr = 0.01;
  DqnAgent agent(4, c, 2);
  Transition t;
  t.s = {0.2f, 0.7f, 0.1f, 0.9f, 0.4f};
  t.s_next = {0.5f, 0.5f, 0.5f, 0.5f, 0.5f};
  t.a = 2;
  t.r = -0.37f;
  agent.remember(t);
  for (int i = 0; i < 3000; ++i) agent.train_step();
  CHECK(agent.q_values(t.s)[2] == doctest::Approx(-0.37).epsilon(1e-3 / 0.37));
  CHECK(agent.updates() == 3000);
}

TEST_CASE("target network sync and weight exchange") {
  DqnConfig c = small_config();
  c.target_update_every = 3;
  DqnAgent agent(5, c, 8);
  const auto w0 = agent.get_weights();
  CHECK(flatten(agent.target()) == w0);
  Rng rng(3);
  for (int i = 0; i < 64; ++i) {
    Transition t;
    for (auto& v : t.s) v = static_cast<float>(uniform01(rng));
    t.s_next = t.s;
    t.a = static_cast<int>(rng() % 5);
    t.r = -static_cast<float>(uniform01(rng));
    agent.remember(t);
  }
  agent.train_step();
  agent.train_step();
  CHECK(flatten(agent.target()) == w0);
  CHECK_FALSE(agent.get_weights() == w0);
  agent.train_step();
  CHECK(flatten(agent.target()) == agent.get_weights());

  DqnAgent other(5, c, 99);
  other.set_weights(agent.get_weights());
  CHECK(other.get_weights() == agent.get_weights());
  CHECK(flatten(other.target()) == agent.get_weights());

  WeightVector bad = agent.get_weights();
  bad.values.pop_back();
  CHECK_THROWS_AS(other.set_weights(bad), ValidationError);
}

TEST_CASE("checkpoint round trip") {
  DqnAgent agent(7, small_config(), 5);
  const auto path = std::filesystem::temp_directory_path() / "fedrl_test_checkpoint.txt";
  save_checkpoint(agent.get_weights(), path);
  const auto back = load_checkpoint(path);
  CHECK(back == agent.get_weights());
  {
    std::ofstream os(path);
    os << "fedrl-checkpoint 1\ndims 5 3\ncount 18\n1\n2\n";
  }
  CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  {
    std::ofstream os(path);
    os << "something else\n";
  }
  CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("training phase") {
  const DqnConfig c = small_config();

  SUBCASE("zero steps leave the agent untouched") {
    auto env = synthetic_env(1);
    DqnAgent agent(env.action_count(), c, 1);
    const auto w = agent.get_weights();
    std::vector<StepRecord> h;
    run_training_phase(agent, env, 0, &h);
    CHECK(h.empty());
    CHECK(agent.get_weights() == w);
    CHECK(agent.env_steps() == 0);
  }
  SUBCASE("buffer fills and updates follow the fragment schedule") {
    auto env = synthetic_env(1);
    DqnAgent agent(env.action_count(), c, 1);
    std::vector<StepRecord> h;
    run_training_phase(agent, env, 600, &h);
    CHECK(agent.buffer().size() == 500);
    CHECK(h.size() == 600);
    CHECK(h.back().step == 600);
    // Updates at steps 35, 40, ..., 600 (first multiple of 5 with a full batch).
    CHECK(agent.updates() == (600 - 35) / 5 + 1);
  }
  SUBCASE("identical seeds give identical trajectories") {
    auto e1 = synthetic_env(3), e2 = synthetic_env(3);
    DqnAgent a1(e1.action_count(), c, 7), a2(e2.action_count(), c, 7);
    std::vector<StepRecord> h1, h2;
    run_training_phase(a1, e1, 800, &h1);
    run_training_phase(a2, e2, 800, &h2);
    CHECK(a1.get_weights() == a2.get_weights());
    for (std::size_t i = 0; i < h1.size(); ++i) {
      CHECK(h1[i].action == h2[i].action);
      CHECK(h1[i].cost == h2[i].cost);
    }
  }
  SUBCASE("mismatched action spaces are rejected") {
    auto env = synthetic_env(1);
    DqnAgent agent(env.action_count() - 1, c, 1);
    CHECK_THROWS_AS(run_training_phase(agent, env, 1, nullptr), ValidationError);
  }
}

TEST_CASE("default agent stays finite over a long run") {
  auto env = synthetic_env(21);
  DqnAgent agent(env.action_count(), DqnConfig{}, 21);
  run_training_phase(agent, env, 21000, nullptr);
  bool finite = true;
  for (double v : agent.get_weights().values) finite = finite && std::isfinite(v);
  CHECK(finite);
  const auto q = agent.q_values(env.observe());
  for (float v : q) CHECK(std::isfinite(v));
}
