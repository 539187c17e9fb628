// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Hierarchical INI experiment configuration. Sections: [profile], [traces],
// [environment], [agent], [federation], [run]. Defaults mirror the reference
// YOLOv5 scenario; unknown sections and keys are rejected.

#include <cstdint>
#include <string>
#include <vector>

#include "fedrl/agent.hpp"
#include "fedrl/env.hpp"
#include "fedrl/federation.hpp"
#include "fedrl/profile.hpp"
#include "fedrl/traces.hpp"

namespace fedrl {

enum class RunMode { kSingle, kSync, kAsync };

struct ProfileSection {
  std::string preset = "yolov5";
  std::string path;           // load instead of synthesizing when set
  ProfileSynthSpec synth = yolov5_like_spec();
  std::size_t extend_to = 0;  // 0 keeps the enumerated size
};

struct TraceSection {
  std::string wifi_path;
  std::string g5_path;
  TraceSynthParams wifi = default_wifi_params();
  TraceSynthParams g5 = default_5g_params();
  std::uint64_t seed = 2024;
};

struct RunSection {
  std::size_t n_runs = 5;
  std::uint64_t seed = 1;
  std::string output_dir = "fedrl-out";
  std::size_t validation_interval = 250;
  std::size_t validation_steps = 300;
  std::size_t ma_window = 1000;
  bool validate = true;
  bool write_step_logs = true;
};

struct ExperimentConfig {
  ProfileSection profile;
  TraceSection traces;
  EnvConfig environment;
  DqnConfig agent;
  FederationConfig federation;
  RunMode mode = RunMode::kSync;
  RunSection run;

  void validate() const;
  /// Federation settings after the mode is applied (single => one sync agent).
  FederationConfig effective_federation() const;
};

/// Applies an application preset: yolov5, yolov5-extended or yolov8
/// (profile synthesis, latency threshold and latency normalization bounds).
void apply_application_preset(ExperimentConfig& config, const std::string& preset);

ExperimentConfig parse_config(const std::string& ini_text);
ExperimentConfig load_config(const std::string& path);
std::string format_config(const ExperimentConfig& config);

/// "section.key=value" override; throws on unknown keys or bad values.
void apply_override(ExperimentConfig& config, const std::string& assignment);
void set_value(ExperimentConfig& config, const std::string& section, const std::string& key, const std::string& value);

std::vector<std::string> config_keys();

std::string_view mode_name(RunMode mode);
RunMode parse_mode(std::string_view name);

}  // namespace fedrl
