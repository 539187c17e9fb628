// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "fedrl/baseline.hpp"
#include "fedrl/config.hpp"
#include "fedrl/federation.hpp"
#include "fedrl/metrics.hpp"

namespace fedrl {

/// Profile plus base traces shared by every agent of every run.
struct Scenario {
  std::shared_ptr<const ApplicationProfile> profile;
  Trace wifi;
  Trace g5;
};

Scenario build_scenario(const ExperimentConfig& config);

struct WorkerSeeds {
  std::uint64_t train_env = 0;
  std::uint64_t validation_env = 0;
  std::uint64_t agent = 0;
};

WorkerSeeds worker_seeds(std::uint64_t agent_seed);
std::uint64_t run_seed(const ExperimentConfig& config, std::size_t run);

Environment make_environment(const ExperimentConfig& config, const Scenario& scenario, std::uint64_t seed);
WorkerFactory make_worker_factory(const ExperimentConfig& config, const Scenario& scenario);

struct RunResult {
  std::uint64_t seed = 0;
  FederationResult federation;
  std::vector<double> validation;   // mean over agents at each validation x
  std::vector<double> training_ma;  // mean over agents at each training x
};

struct ExperimentResult {
  std::vector<double> validation_x;  // steps trained
  std::vector<double> training_x;    // env steps
  std::vector<RunResult> runs;
  Band validation;
  Band training_ma;
};

/// Mean across agents of C_lat at steps_trained = 0, interval, ... <= max_steps.
std::vector<double> mean_validation_curve(const FederationResult& result, std::size_t interval, std::size_t max_steps);

/// Mean across agents of the training violation moving average sampled every
/// `interval` steps up to `max_steps`.
std::vector<double> mean_training_ma(const FederationResult& result, std::size_t window, std::size_t interval,
                                     std::size_t max_steps);

/// run.n_runs seeded repetitions of the configured mode.
ExperimentResult run_experiment(const ExperimentConfig& config, const Scenario& scenario,
                                const std::optional<WeightVector>& warm_start = std::nullopt);

/// Per-run output directories, band files, checkpoints and manifest.ini.
void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& config, const ExperimentResult& result);

struct BaselineRun {
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  double violation_rate = 0;
};

/// The baseline on each run's agent-0 training environment.
std::vector<BaselineRun> run_baseline_experiment(const ExperimentConfig& config, const Scenario& scenario,
                                                 BaselineObjective objective, std::size_t steps);

std::string summarize(const ExperimentResult& result);

}  // namespace fedrl
