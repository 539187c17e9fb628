// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "fedrl/common.hpp"
#include "fedrl/env.hpp"
#include "fedrl/mlp.hpp"

namespace fedrl {

struct Transition {
  Observation s{};
  int a = 0;
  float r = 0;
  Observation s_next{};
};

/// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return data_.size(); }
  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;
  /// Uniform sample with replacement.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

 private:
  std::vector<Transition> data_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

/// Flat parameter snapshot exchanged with the federation master. Held in
/// double so aggregation arithmetic does not lose precision.
struct WeightVector {
  std::vector<std::size_t> dims;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const WeightVector&) const = default;
};

template <typename T>
WeightVector flatten(const Mlp<T>& net);
template <typename T>
void unflatten(const WeightVector& wv, Mlp<T>& net);

/// Header (layer dims) followed by one parameter per line.
void save_checkpoint(const WeightVector& wv, const std::filesystem::path& path);
WeightVector load_checkpoint(const std::filesystem::path& path);

template <typename T>
struct TransitionBatch {
  std::size_t size = 0;
  std::vector<T> s;       // size x state_dim
  std::vector<T> s_next;  // size x state_dim
  std::vector<int> a;
  std::vector<T> r;
};

template <typename T>
struct TdScratch {
  MlpWorkspace<T> online;
  MlpWorkspace<T> target;
  std::vector<T> d_out;
};

/// Mean squared TD error with targets r + gamma * max_a' Q_target(s', a')
/// (target net in eval mode, no terminal masking). When `grad` is non-empty
/// it receives d loss / d online params; the target is held constant.
template <typename T>
T td_loss(const Mlp<T>& online, const Mlp<T>& target, const TransitionBatch<T>& batch, T gamma, Mode online_mode,
          Rng* rng, TdScratch<T>& scratch, std::span<T> grad);

enum class Optimizer { kAdam, kSgd };

struct DqnConfig {
  std::vector<std::size_t> hidden{100, 100, 60};
  std::vector<double> dropout{0.4, 0.3, 0.0};
  double gamma = 0.99;
  double epsilon = 0.05;
  double lr = 0.04;
  std::size_t buffer_capacity = 10000;
  std::size_t batch_size = 512;
  std::size_t target_update_every = 400;  // gradient updates
  std::size_t train_every = 5;            // env steps per gradient update (rollout fragment)
  Optimizer optimizer = Optimizer::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 0.0;  // global L2 norm; 0 disables

  void validate() const;
};

/// Index of the largest value, lowest index on ties.
std::size_t argmax(std::span<const float> q);

class DqnAgent {
 public:
  DqnAgent(std::size_t n_actions, DqnConfig config, std::uint64_t seed);

  std::size_t action_count() const { return n_actions_; }
  const DqnConfig& config() const { return config_; }

  std::vector<float> q_values(const Observation& s) const;
  int greedy_action(const Observation& s) const;
  /// Epsilon-greedy using the agent's own rng.
  int select_action(const Observation& s, double epsilon);

  void remember(const Transition& t) { buffer_.push(t); }
  /// One gradient update on a uniform minibatch; returns the pre-update loss.
  double train_step();
  void sync_target();

  WeightVector get_weights() const { return flatten(online_); }
  /// Loads weights into the online network and resets the target network to them.
  void set_weights(const WeightVector& wv);

  const Mlp<float>& online() const { return online_; }
  const Mlp<float>& target() const { return target_; }
  Mlp<float>& mutable_online() { return online_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::uint64_t env_steps() const { return env_steps_; }
  std::uint64_t updates() const { return updates_; }
  void count_env_step() { ++env_steps_; }

 private:
  void apply_gradient();

  std::size_t n_actions_;
  DqnConfig config_;
  Mlp<float> online_;
  Mlp<float> target_;
  ReplayBuffer buffer_;
  Rng rng_;
  std::vector<float> grad_, adam_m_, adam_v_;
  TdScratch<float> scratch_;
  TransitionBatch<float> batch_;
  mutable MlpWorkspace<float> act_ws_;
  std::uint64_t env_steps_ = 0;
  std::uint64_t updates_ = 0;
};

struct StepRecord {
  std::uint64_t step = 0;
  double cost = 0;
  bool violated = false;
  int action = 0;
  int config_id = 0;
  double l_total = 0;
  double e_sew = 0;
  double e_phone = 0;
  double c_5g = 0;
  double tau = 0;
};

StepRecord make_record(std::uint64_t step, int action, const StepOutcome& out);

/// Called before every training step and once after the last one.
using StepHook = std::function<void(DqnAgent&)>;

/// `steps` interactions of select / step / store / (update every train_every
/// steps once the buffer holds a full batch) / target sync on schedule.
void run_training_phase(DqnAgent& agent, Environment& env, std::size_t steps, std::vector<StepRecord>* history,
                        const StepHook& hook = {});

}  // namespace fedrl
