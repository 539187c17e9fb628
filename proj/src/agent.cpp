// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include "fedrl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedrl/simd/kernels.hpp"

namespace fedrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : data_(capacity) {
  if (capacity == 0) throw ValidationError("replay buffer: capacity must be >= 1");
}

void ReplayBuffer::push(const Transition& t) {
  data_[head_] = t;
  head_ = (head_ + 1) % data_.size();
  size_ = std::min(size_ + 1, data_.size());
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ValidationError("replay buffer: index out of range");
  const std::size_t oldest = size_ < data_.size() ? 0 : head_;
  return data_[(oldest + i) % data_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (n > size_) {
    throw ValidationError("replay buffer: batch of " + std::to_string(n) + " exceeds " + std::to_string(size_) +
                          " stored transitions");
  }
  std::vector<const Transition*> out(n);
  for (auto& p : out) p = &data_[rng() % size_];
  return out;
}

template <typename T>
WeightVector flatten(const Mlp<T>& net) {
  WeightVector wv;
  wv.dims = net.dims();
  const auto p = net.params();
  wv.values.assign(p.begin(), p.end());
  return wv;
}

template <typename T>
void unflatten(const WeightVector& wv, Mlp<T>& net) {
  if (wv.values.size() != net.param_count()) {
    throw ValidationError("weights: length " + std::to_string(wv.values.size()) + " does not match network (" +
                          std::to_string(net.param_count()) + ")");
  }
  if (!wv.dims.empty() && wv.dims != net.dims()) throw ValidationError("weights: layer dims do not match network");
  auto p = net.params();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<T>(wv.values[i]);
}

template WeightVector flatten(const Mlp<float>&);
template WeightVector flatten(const Mlp<double>&);
template void unflatten(const WeightVector&, Mlp<float>&);
template void unflatten(const WeightVector&, Mlp<double>&);

void save_checkpoint(const WeightVector& wv, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write checkpoint: " + path.string());
  os << "fedrl-checkpoint 1\ndims";
  for (auto d : wv.dims) os << ' ' << d;
  os << "\ncount " << wv.values.size() << '\n';
  char buf[40];
  for (double v : wv.values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    os << buf;
  }
}

WeightVector load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read checkpoint: " + path.string());
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "fedrl-checkpoint" || version != 1) throw ParseError(path.string() + ": line 1: not a checkpoint");
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  std::istringstream ds(line);
  std::string tag;
  ds >> tag;
  if (tag != "dims") throw ParseError(path.string() + ": line 2: expected 'dims'");
  WeightVector wv;
  std::size_t d = 0;
  while (ds >> d) wv.dims.push_back(d);
  std::size_t count = 0;
  is >> tag >> count;
  if (tag != "count") throw ParseError(path.string() + ": line 3: expected 'count'");
  if (count != mlp_param_count(wv.dims)) throw ParseError(path.string() + ": count does not match dims");
  wv.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(is >> wv.values[i])) {
      throw ParseError(path.string() + ": line " + std::to_string(i + 4) + ": missing or malformed parameter");
    }
  }
  return wv;
}

template <typename T>
T td_loss(const Mlp<T>& online, const Mlp<T>& target, const TransitionBatch<T>& batch, T gamma, Mode online_mode,
          Rng* rng, TdScratch<T>& scratch, std::span<T> grad) {
  const std::size_t b = batch.size;
  const std::size_t na = online.output_dim();
  const auto qn = target.forward(batch.s_next, b, scratch.target, Mode::kEval, nullptr);
  std::vector<T> y(b);
  for (std::size_t i = 0; i < b; ++i) {
    const T* row = qn.data() + i * na;
    y[i] = batch.r[i] + gamma * *std::max_element(row, row + na);
  }
  const auto q = online.forward(batch.s, b, scratch.online, online_mode, rng);
  T loss = 0;
  const bool want_grad = !grad.empty();
  if (want_grad) scratch.d_out.assign(b * na, T(0));
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t idx = i * na + static_cast<std::size_t>(batch.a[i]);
    const T err = q[idx] - y[i];
    loss += err * err;
    if (want_grad) scratch.d_out[idx] = T(2) * err / static_cast<T>(b);
  }
  loss /= static_cast<T>(b);
  if (want_grad) online.backward(scratch.online, scratch.d_out, grad);
  return loss;
}

template float td_loss(const Mlp<float>&, const Mlp<float>&, const TransitionBatch<float>&, float, Mode, Rng*,
                       TdScratch<float>&, std::span<float>);
template double td_loss(const Mlp<double>&, const Mlp<double>&, const TransitionBatch<double>&, double, Mode, Rng*,
                        TdScratch<double>&, std::span<double>);

void DqnConfig::validate() const {
  if (hidden.empty()) throw ValidationError("agent: need at least one hidden layer");
  if (dropout.size() != hidden.size()) throw ValidationError("agent: one dropout rate per hidden layer required");
  if (!(gamma >= 0 && gamma <= 1)) throw ValidationError("agent: gamma must be in [0, 1]");
  if (!(epsilon >= 0 && epsilon <= 1)) throw ValidationError("agent: epsilon must be in [0, 1]");
  if (!(lr > 0)) throw ValidationError("agent: lr must be > 0");
  if (buffer_capacity == 0 || batch_size == 0 || target_update_every == 0 || train_every == 0) {
    throw ValidationError("agent: buffer_capacity, batch_size, target_update_every, train_every must be >= 1");
  }
  if (batch_size > buffer_capacity) throw ValidationError("agent: batch_size exceeds buffer_capacity");
  if (!(grad_clip >= 0)) throw ValidationError("agent: grad_clip must be >= 0");
}

std::size_t argmax(std::span<const float> q) {
  return static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
}

namespace {

std::vector<std::size_t> layer_dims(std::size_t n_actions, const DqnConfig& c) {
  std::vector<std::size_t> dims{kStateDim};
  dims.insert(dims.end(), c.hidden.begin(), c.hidden.end());
  dims.push_back(n_actions);
  return dims;
}

DqnConfig validated(DqnConfig c) {
  c.validate();
  return c;
}

}  // namespace

DqnAgent::DqnAgent(std::size_t n_actions, DqnConfig config, std::uint64_t seed)
    : n_actions_(n_actions),
      config_(validated(std::move(config))),
      online_(layer_dims(n_actions, config_), config_.dropout),
      target_(online_),
      buffer_(config_.buffer_capacity),
      rng_(seed) {
  if (n_actions < 1) throw ValidationError("agent: need at least one action");
  Rng init(derive_seed(seed, 0x1a17));
  online_.init_uniform(init);
  target_ = online_;
  grad_.assign(online_.param_count(), 0.0f);
  adam_m_.assign(online_.param_count(), 0.0f);
  adam_v_.assign(online_.param_count(), 0.0f);
}

std::vector<float> DqnAgent::q_values(const Observation& s) const {
  const auto q = online_.forward(s, 1, act_ws_, Mode::kEval, nullptr);
  return {q.begin(), q.end()};
}

int DqnAgent::greedy_action(const Observation& s) const {
  const auto q = online_.forward(s, 1, act_ws_, Mode::kEval, nullptr);
  return static_cast<int>(argmax(q));
}

int DqnAgent::select_action(const Observation& s, double epsilon) {
  if (epsilon > 0 && uniform01(rng_) < epsilon) return static_cast<int>(rng_() % n_actions_);
  return greedy_action(s);
}

double DqnAgent::train_step() {
  const std::size_t b = config_.batch_size;
  const auto picks = buffer_.sample(b, rng_);
  auto& bt = batch_;
  bt.size = b;
  bt.s.resize(b * kStateDim);
  bt.s_next.resize(b * kStateDim);
  bt.a.resize(b);
  bt.r.resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    const Transition& t = *picks[i];
    std::copy(t.s.begin(), t.s.end(), bt.s.begin() + i * kStateDim);
    std::copy(t.s_next.begin(), t.s_next.end(), bt.s_next.begin() + i * kStateDim);
    bt.a[i] = t.a;
    bt.r[i] = t.r;
  }
  const float loss = td_loss(online_, target_, bt, static_cast<float>(config_.gamma), Mode::kTrain, &rng_, scratch_,
                             std::span<float>(grad_));
  apply_gradient();
  ++updates_;
  if (updates_ % config_.target_update_every == 0) sync_target();
  return loss;
}

void DqnAgent::apply_gradient() {
  const auto& k = simd::kernels<float>();
  const std::size_t n = grad_.size();
  if (config_.grad_clip > 0) {
    const double norm = std::sqrt(static_cast<double>(k.dot(n, grad_.data(), grad_.data())));
    if (norm > config_.grad_clip) {
      const auto scale = static_cast<float>(config_.grad_clip / norm);
      for (auto& g : grad_) g *= scale;
    }
  }
  auto params = online_.params();
  if (config_.optimizer == Optimizer::kSgd) {
    k.axpy(n, static_cast<float>(-config_.lr), grad_.data(), params.data());
    return;
  }
  const double t = static_cast<double>(updates_ + 1);
  const double bc1 = 1.0 - std::pow(config_.adam_beta1, t);
  const double bc2 = std::sqrt(1.0 - std::pow(config_.adam_beta2, t));
  k.adam(n, grad_.data(), params.data(), adam_m_.data(), adam_v_.data(), static_cast<float>(config_.lr * bc2 / bc1),
         static_cast<float>(config_.adam_beta1), static_cast<float>(config_.adam_beta2),
         static_cast<float>(config_.adam_eps * bc2));
}

void DqnAgent::sync_target() {
  auto src = online_.params();
  auto dst = target_.params();
  std::copy(src.begin(), src.end(), dst.begin());
}

void DqnAgent::set_weights(const WeightVector& wv) {
  unflatten(wv, online_);
  sync_target();
}

StepRecord make_record(std::uint64_t step, int action, const StepOutcome& out) {
  StepRecord r;
  r.step = step;
  r.cost = out.cost;
  r.violated = out.violated;
  r.action = action;
  r.config_id = out.config_id;
  r.l_total = out.components.l_total;
  r.e_sew = out.components.e_sew;
  r.e_phone = out.components.e_phone;
  r.c_5g = out.components.c_5g;
  r.tau = out.tau;
  return r;
}

void run_training_phase(DqnAgent& agent, Environment& env, std::size_t steps, std::vector<StepRecord>* history,
                        const StepHook& hook) {
  if (env.action_count() != agent.action_count()) {
    throw ValidationError("training: agent has " + std::to_string(agent.action_count()) +
                          " actions but the environment has " + std::to_string(env.action_count()));
  }
  const auto& cfg = agent.config();
  for (std::size_t i = 0; i < steps; ++i) {
    if (hook) hook(agent);
    Transition t;
    t.s = env.observe();
    t.a = agent.select_action(t.s, cfg.epsilon);
    const StepOutcome out = env.step(t.a);
    t.r = static_cast<float>(-out.cost);
    t.s_next = env.observe();
    agent.remember(t);
    agent.count_env_step();
    if (agent.buffer().size() >= cfg.batch_size && agent.env_steps() % cfg.train_every == 0) agent.train_step();
    if (history) history->push_back(make_record(agent.env_steps(), t.a, out));
  }
  if (hook) hook(agent);
}

}  // namespace fedrl
