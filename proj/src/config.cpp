// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include "fedrl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fedrl {

std::string_view mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kSingle: return "single";
    case RunMode::kSync: return "sync";
    case RunMode::kAsync: return "async";
  }
  return "?";
}

RunMode parse_mode(std::string_view name) {
  if (name == "single") return RunMode::kSingle;
  if (name == "sync") return RunMode::kSync;
  if (name == "async") return RunMode::kAsync;
  throw ValidationError("mode must be single, sync or async (got '" + std::string(name) + "')");
}

void apply_application_preset(ExperimentConfig& c, const std::string& preset) {
  auto& b = c.environment.bounds;
  if (preset == "yolov5") {
    c.profile.synth = yolov5_like_spec();
    c.profile.extend_to = 0;
    c.environment.weights.l_max = 400.0;
    b.l_sew = {0, 450};
    b.l_phone = {0, 65};
    b.l_cloud = {0, 30};
  } else if (preset == "yolov5-extended") {
    c.profile.synth = yolov5_like_spec();
    c.profile.synth.name = "yolov5-extended";
    c.profile.extend_to = config_count(18);
    c.environment.weights.l_max = 600.0;
    b.l_sew = {0, 660};
    b.l_phone = {0, 110};
    b.l_cloud = {0, 50};
  } else if (preset == "yolov8") {
    c.profile.synth = yolov8_like_spec();
    c.profile.extend_to = 0;
    c.environment.weights.l_max = 600.0;
    b.l_sew = {0, 660};
    b.l_phone = {0, 110};
    b.l_cloud = {0, 50};
  } else {
    throw ValidationError("unknown application preset '" + preset + "' (yolov5, yolov5-extended, yolov8)");
  }
  c.profile.preset = preset;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError(what + ": expected a number, got '" + s + "'");
}

std::uint64_t to_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    if (!s.empty() && s[0] != '-') {
      const auto v = std::stoull(s, &pos);
      if (pos == s.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw ValidationError(what + ": expected a nonnegative integer, got '" + s + "'");
}

bool to_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError(what + ": expected true or false, got '" + s + "'");
}

template <typename T>
std::vector<T> to_list(const std::string& s, const std::string& what, std::function<T(const std::string&)> conv) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (item.empty()) throw ValidationError(what + ": empty list element");
    out.push_back(conv(item));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v, std::function<std::string(const T&)> f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + f(v[i]);
  return out;
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

using Registry = std::vector<std::pair<std::string, Field>>;  // "section.key" -> field, in output order

template <typename Member>
Field dbl(Member m) {
  return {[m](ExperimentConfig& c, const std::string& v, const std::string& w) { m(c) = to_double(v, w); },
          [m](const ExperimentConfig& c) { return fmt(m(const_cast<ExperimentConfig&>(c))); }};
}

template <typename Member>
Field uint(Member m) {
  return {[m](ExperimentConfig& c, const std::string& v, const std::string& w) {
            m(c) = static_cast<std::remove_reference_t<decltype(m(c))>>(to_u64(v, w));
          },
          [m](const ExperimentConfig& c) { return std::to_string(m(const_cast<ExperimentConfig&>(c))); }};
}

template <typename Member>
Field boolean(Member m) {
  return {[m](ExperimentConfig& c, const std::string& v, const std::string& w) { m(c) = to_bool(v, w); },
          [m](const ExperimentConfig& c) { return std::string(m(const_cast<ExperimentConfig&>(c)) ? "true" : "false"); }};
}

template <typename Member>
Field text(Member m) {
  return {[m](ExperimentConfig& c, const std::string& v, const std::string&) { m(c) = v; },
          [m](const ExperimentConfig& c) { return m(const_cast<ExperimentConfig&>(c)); }};
}

#define FEDRL_REF(expr) [](ExperimentConfig& c) -> auto& { return expr; }

void add_trace_fields(Registry& r, const std::string& prefix, TraceSynthParams TraceSection::*member) {
  auto p = [member](ExperimentConfig& c) -> TraceSynthParams& { return c.traces.*member; };
  r.push_back({"traces." + prefix + "_length", uint([p](ExperimentConfig& c) -> auto& { return p(c).length; })});
  r.push_back({"traces." + prefix + "_granularity_ms", dbl([p](ExperimentConfig& c) -> auto& { return p(c).granularity_ms; })});
  r.push_back({"traces." + prefix + "_mean", dbl([p](ExperimentConfig& c) -> auto& { return p(c).mean; })});
  r.push_back({"traces." + prefix + "_stddev", dbl([p](ExperimentConfig& c) -> auto& { return p(c).stddev; })});
  r.push_back({"traces." + prefix + "_correlation", dbl([p](ExperimentConfig& c) -> auto& { return p(c).correlation; })});
  r.push_back({"traces." + prefix + "_min", dbl([p](ExperimentConfig& c) -> auto& { return p(c).min; })});
  r.push_back({"traces." + prefix + "_max", dbl([p](ExperimentConfig& c) -> auto& { return p(c).max; })});
  r.push_back({"traces." + prefix + "_outage_rate", dbl([p](ExperimentConfig& c) -> auto& { return p(c).outage_rate; })});
  r.push_back({"traces." + prefix + "_outage_mean_len", dbl([p](ExperimentConfig& c) -> auto& { return p(c).outage_mean_len; })});
  r.push_back({"traces." + prefix + "_outage_level", dbl([p](ExperimentConfig& c) -> auto& { return p(c).outage_level; })});
}

void add_range(Registry& r, const std::string& name, Range StateBounds::*member) {
  r.push_back({"environment." + name + "_min", dbl([member](ExperimentConfig& c) -> auto& {
                 return (c.environment.bounds.*member).min;
               })});
  r.push_back({"environment." + name + "_max", dbl([member](ExperimentConfig& c) -> auto& {
                 return (c.environment.bounds.*member).max;
               })});
}

Registry build_registry() {
  Registry r;
  // [profile]
  r.push_back({"profile.preset", text(FEDRL_REF(c.profile.preset))});
  r.push_back({"profile.path", text(FEDRL_REF(c.profile.path))});
  r.push_back({"profile.name", text(FEDRL_REF(c.profile.synth.name))});
  r.push_back({"profile.cut_points", {[](ExperimentConfig& c, const std::string& v, const std::string& w) {
                                        c.profile.synth.cut_points = static_cast<int>(to_u64(v, w));
                                      },
                                      [](const ExperimentConfig& c) { return std::to_string(c.profile.synth.cut_points); }}});
  r.push_back({"profile.delta0", dbl(FEDRL_REF(c.profile.synth.delta0))});
  r.push_back({"profile.total_flops", dbl(FEDRL_REF(c.profile.synth.total_flops))});
  r.push_back({"profile.full_sew_ms", dbl(FEDRL_REF(c.profile.synth.full_sew_ms))});
  r.push_back({"profile.full_phone_ms", dbl(FEDRL_REF(c.profile.synth.full_phone_ms))});
  r.push_back({"profile.full_cloud_ms", dbl(FEDRL_REF(c.profile.synth.full_cloud_ms))});
  r.push_back({"profile.min_tensor_fraction", dbl(FEDRL_REF(c.profile.synth.min_tensor_fraction))});
  r.push_back({"profile.sew_latency_max", dbl(FEDRL_REF(c.profile.synth.ranges.sew_max))});
  r.push_back({"profile.phone_latency_max", dbl(FEDRL_REF(c.profile.synth.ranges.phone_max))});
  r.push_back({"profile.cloud_latency_max", dbl(FEDRL_REF(c.profile.synth.ranges.cloud_max))});
  r.push_back({"profile.seed", uint(FEDRL_REF(c.profile.synth.seed))});
  r.push_back({"profile.extend_to", uint(FEDRL_REF(c.profile.extend_to))});
  // [traces]
  r.push_back({"traces.wifi_path", text(FEDRL_REF(c.traces.wifi_path))});
  r.push_back({"traces.5g_path", text(FEDRL_REF(c.traces.g5_path))});
  r.push_back({"traces.seed", uint(FEDRL_REF(c.traces.seed))});
  add_trace_fields(r, "wifi", &TraceSection::wifi);
  add_trace_fields(r, "5g", &TraceSection::g5);
  r.push_back({"traces.noise_rel", dbl(FEDRL_REF(c.environment.replay.noise_rel))});
  r.push_back({"traces.shift", boolean(FEDRL_REF(c.environment.replay.shift_enabled))});
  r.push_back({"traces.inversion", boolean(FEDRL_REF(c.environment.replay.inversion_enabled))});
  // [environment]
  r.push_back({"environment.w_sew", dbl(FEDRL_REF(c.environment.weights.w_sew))});
  r.push_back({"environment.w_phone", dbl(FEDRL_REF(c.environment.weights.w_phone))});
  r.push_back({"environment.w_5g", dbl(FEDRL_REF(c.environment.weights.w_5g))});
  r.push_back({"environment.w_lat", dbl(FEDRL_REF(c.environment.weights.w_lat))});
  r.push_back({"environment.w_rcfg", dbl(FEDRL_REF(c.environment.weights.w_rcfg))});
  r.push_back({"environment.c_sew_max", dbl(FEDRL_REF(c.environment.weights.c_sew_max))});
  r.push_back({"environment.c_phone_max", dbl(FEDRL_REF(c.environment.weights.c_phone_max))});
  r.push_back({"environment.c_5g_max", dbl(FEDRL_REF(c.environment.weights.c_5g_max))});
  r.push_back({"environment.alpha", dbl(FEDRL_REF(c.environment.weights.alpha))});
  r.push_back({"environment.g", dbl(FEDRL_REF(c.environment.weights.g))});
  r.push_back({"environment.lambda_fps", dbl(FEDRL_REF(c.environment.weights.lambda_fps))});
  r.push_back({"environment.tau_normal", dbl(FEDRL_REF(c.environment.weights.tau_normal))});
  r.push_back({"environment.tau_fast", dbl(FEDRL_REF(c.environment.weights.tau_fast))});
  r.push_back({"environment.fast_after_violations", uint(FEDRL_REF(c.environment.fast_after_violations))});
  r.push_back({"environment.l_max", dbl(FEDRL_REF(c.environment.weights.l_max))});
  r.push_back({"environment.z_sew", dbl(FEDRL_REF(c.environment.devices.z_sew))});
  r.push_back({"environment.z_phone", dbl(FEDRL_REF(c.environment.devices.z_phone))});
  r.push_back({"environment.theta_sew", dbl(FEDRL_REF(c.environment.devices.theta_sew))});
  r.push_back({"environment.theta_phone", dbl(FEDRL_REF(c.environment.devices.theta_phone))});
  add_range(r, "wifi", &StateBounds::r_wifi);
  add_range(r, "5g", &StateBounds::r_5g);
  add_range(r, "sew_latency", &StateBounds::l_sew);
  add_range(r, "phone_latency", &StateBounds::l_phone);
  add_range(r, "cloud_latency", &StateBounds::l_cloud);
  r.push_back({"environment.floor_fraction", dbl(FEDRL_REF(c.environment.floor_fraction))});
  // [agent]
  r.push_back({"agent.hidden", {[](ExperimentConfig& c, const std::string& v, const std::string& w) {
                                  c.agent.hidden = to_list<std::size_t>(v, w, [&](const std::string& s) {
                                    return static_cast<std::size_t>(to_u64(s, w));
                                  });
                                },
                                [](const ExperimentConfig& c) {
                                  return join<std::size_t>(c.agent.hidden, [](const std::size_t& x) { return std::to_string(x); });
                                }}});
  r.push_back({"agent.dropout", {[](ExperimentConfig& c, const std::string& v, const std::string& w) {
                                   c.agent.dropout = to_list<double>(v, w, [&](const std::string& s) { return to_double(s, w); });
                                 },
                                 [](const ExperimentConfig& c) {
                                   return join<double>(c.agent.dropout, [](const double& x) { return fmt(x); });
                                 }}});
  r.push_back({"agent.gamma", dbl(FEDRL_REF(c.agent.gamma))});
  r.push_back({"agent.epsilon", dbl(FEDRL_REF(c.agent.epsilon))});
  r.push_back({"agent.lr", dbl(FEDRL_REF(c.agent.lr))});
  r.push_back({"agent.buffer_capacity", uint(FEDRL_REF(c.agent.buffer_capacity))});
  r.push_back({"agent.batch_size", uint(FEDRL_REF(c.agent.batch_size))});
  r.push_back({"agent.target_update_every", uint(FEDRL_REF(c.agent.target_update_every))});
  r.push_back({"agent.train_every", uint(FEDRL_REF(c.agent.train_every))});
  r.push_back({"agent.optimizer", {[](ExperimentConfig& c, const std::string& v, const std::string& w) {
                                     if (v == "adam") c.agent.optimizer = Optimizer::kAdam;
                                     else if (v == "sgd") c.agent.optimizer = Optimizer::kSgd;
                                     else throw ValidationError(w + ": expected adam or sgd, got '" + v + "'");
                                   },
                                   [](const ExperimentConfig& c) {
                                     return std::string(c.agent.optimizer == Optimizer::kAdam ? "adam" : "sgd");
                                   }}});
  r.push_back({"agent.adam_beta1", dbl(FEDRL_REF(c.agent.adam_beta1))});
  r.push_back({"agent.adam_beta2", dbl(FEDRL_REF(c.agent.adam_beta2))});
  r.push_back({"agent.adam_eps", dbl(FEDRL_REF(c.agent.adam_eps))});
  r.push_back({"agent.grad_clip", dbl(FEDRL_REF(c.agent.grad_clip))});
  // [federation]
  r.push_back({"federation.mode", {[](ExperimentConfig& c, const std::string& v, const std::string&) { c.mode = parse_mode(v); },
                                   [](const ExperimentConfig& c) { return std::string(mode_name(c.mode)); }}});
  r.push_back({"federation.agents", uint(FEDRL_REF(c.federation.agents))});
  r.push_back({"federation.steps_per_agent", uint(FEDRL_REF(c.federation.steps_per_agent))});
  r.push_back({"federation.freq_updates", uint(FEDRL_REF(c.federation.freq_updates))});
  r.push_back({"federation.proportion_slow", dbl(FEDRL_REF(c.federation.proportion_slow))});
  r.push_back({"federation.max_delay_slow_relative", dbl(FEDRL_REF(c.federation.max_delay_slow_relative))});
  r.push_back({"federation.role_policy", {[](ExperimentConfig& c, const std::string& v, const std::string& w) {
                                            if (v == "fixed") c.federation.role_policy = RolePolicy::kFixed;
                                            else if (v == "redraw") c.federation.role_policy = RolePolicy::kRedraw;
                                            else throw ValidationError(w + ": expected fixed or redraw, got '" + v + "'");
                                          },
                                          [](const ExperimentConfig& c) {
                                            return std::string(c.federation.role_policy == RolePolicy::kFixed ? "fixed" : "redraw");
                                          }}});
  r.push_back({"federation.threads", uint(FEDRL_REF(c.federation.threads))});
  // [run]
  r.push_back({"run.n_runs", uint(FEDRL_REF(c.run.n_runs))});
  r.push_back({"run.seed", uint(FEDRL_REF(c.run.seed))});
  r.push_back({"run.output_dir", text(FEDRL_REF(c.run.output_dir))});
  r.push_back({"run.validation_interval", uint(FEDRL_REF(c.run.validation_interval))});
  r.push_back({"run.validation_steps", uint(FEDRL_REF(c.run.validation_steps))});
  r.push_back({"run.ma_window", uint(FEDRL_REF(c.run.ma_window))});
  r.push_back({"run.validate", boolean(FEDRL_REF(c.run.validate))});
  r.push_back({"run.write_step_logs", boolean(FEDRL_REF(c.run.write_step_logs))});
  return r;
}

#undef FEDRL_REF

const Registry& registry() {
  static const Registry r = build_registry();
  return r;
}

const Field* find_field(const std::string& dotted) {
  for (const auto& [name, f] : registry()) {
    if (name == dotted) return &f;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [name, f] : registry()) out.push_back(name);
  return out;
}

void set_value(ExperimentConfig& config, const std::string& section, const std::string& key, const std::string& value) {
  const std::string dotted = section + "." + key;
  const Field* f = find_field(dotted);
  if (!f) throw ValidationError("unknown config key [" + section + "] " + key);
  if (dotted == "profile.preset") {
    apply_application_preset(config, value);
    return;
  }
  f->set(config, value, "[" + section + "] " + key);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ValidationError("override must look like section.key=value, got '" + assignment + "'");
  }
  set_value(config, assignment.substr(0, dot), assignment.substr(dot + 1, eq - dot - 1), assignment.substr(eq + 1));
}

void ExperimentConfig::validate() const {
  if (profile.path.empty()) {
    if (profile.synth.cut_points < 1) throw ValidationError("[profile] cut_points must be >= 1");
  }
  environment.validate();
  agent.validate();
  effective_federation().validate();
  if (mode == RunMode::kAsync && federation.agents < 2) {
    throw ValidationError("[federation] async mode needs agents >= 2");
  }
  if (run.n_runs < 1) throw ValidationError("[run] n_runs must be >= 1");
  if (run.validation_interval < 1 || run.validation_steps < 1 || run.ma_window < 1) {
    throw ValidationError("[run] validation_interval, validation_steps and ma_window must be >= 1");
  }
  if (profile.extend_to != 0 && profile.path.empty() && profile.extend_to < config_count(profile.synth.cut_points)) {
    throw ValidationError("[profile] extend_to is smaller than the configuration space");
  }
}

FederationConfig ExperimentConfig::effective_federation() const {
  FederationConfig f = federation;
  if (mode == RunMode::kSingle) f.agents = 1;
  f.mode = mode == RunMode::kAsync ? FederationMode::kAsync : FederationMode::kSync;
  return f;
}

ExperimentConfig parse_config(const std::string& ini_text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(ini_text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig c;
  static const char* kSections[] = {"profile", "traces", "environment", "agent", "federation", "run"};
  for (const auto& [section, body] : tree) {
    bool known = false;
    for (const char* s : kSections) known = known || section == s;
    if (!known || body.empty()) throw ValidationError("config: unknown section or top-level key '" + section + "'");
  }
  // The preset rewrites several sections, so it goes first.
  if (auto preset = tree.get_optional<std::string>("profile.preset")) apply_application_preset(c, *preset);
  for (const char* s : kSections) {
    const auto child = tree.get_child_optional(s);
    if (!child) continue;
    for (const auto& [key, value] : *child) {
      if (std::string(s) == "profile" && key == "preset") continue;
      set_value(c, s, key, value.get_value<std::string>());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string format_config(const ExperimentConfig& config) {
  std::ostringstream os;
  std::string current;
  for (const auto& [name, f] : registry()) {
    const auto dot = name.find('.');
    const std::string section = name.substr(0, dot);
    if (section != current) {
      if (!current.empty()) os << '\n';
      os << '[' << section << "]\n";
      current = section;
    }
    os << name.substr(dot + 1) << " = " << f.get(config) << '\n';
  }
  return os.str();
}

}  // namespace fedrl
