// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include "fedrl/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedrl/simd/kernels.hpp"

namespace fedrl {

Scenario build_scenario(const ExperimentConfig& config) {
  ApplicationProfile profile = config.profile.path.empty() ? synthesize_profile(config.profile.synth)
                                                           : load_profile(config.profile.path);
  if (config.profile.extend_to > profile.configs.size()) profile = extend_profile(profile, config.profile.extend_to);
  validate_profile(profile);

  Scenario s;
  s.profile = std::make_shared<const ApplicationProfile>(std::move(profile));
  s.wifi = config.traces.wifi_path.empty() ? synthesize_trace(config.traces.wifi, derive_seed(config.traces.seed, 0x3141))
                                           : load_trace(config.traces.wifi_path);
  s.g5 = config.traces.g5_path.empty() ? synthesize_trace(config.traces.g5, derive_seed(config.traces.seed, 0x5926))
                                       : load_trace(config.traces.g5_path);
  return s;
}

WorkerSeeds worker_seeds(std::uint64_t agent_seed) {
  return {derive_seed(agent_seed, 0xe1), derive_seed(agent_seed, 0x7a1), derive_seed(agent_seed, 0xa6)};
}

std::uint64_t run_seed(const ExperimentConfig& config, std::size_t run) { return derive_seed(config.run.seed, 0x7e5, run); }

Environment make_environment(const ExperimentConfig& config, const Scenario& scenario, std::uint64_t seed) {
  EnvConfig env = config.environment;
  env.seed = seed;
  return Environment(scenario.profile, env, scenario.wifi, scenario.g5);
}

WorkerFactory make_worker_factory(const ExperimentConfig& config, const Scenario& scenario) {
  return [config, scenario](std::size_t, std::uint64_t seed) {
    const WorkerSeeds ws = worker_seeds(seed);
    Environment train = make_environment(config, scenario, ws.train_env);
    const std::size_t actions = train.action_count();
    AgentWorker w{DqnAgent(actions, config.agent, ws.agent), std::move(train), std::nullopt, true, {}};
    if (config.run.validate) {
      w.validator.emplace(make_environment(config, scenario, ws.validation_env), config.run.validation_interval,
                          config.run.validation_steps);
    }
    return w;
  };
}

std::vector<double> mean_validation_curve(const FederationResult& result, std::size_t interval, std::size_t max_steps) {
  std::vector<double> curve(max_steps / interval + 1, 0.0);
  std::vector<std::size_t> counts(curve.size(), 0);
  for (const auto& a : result.agents) {
    for (const auto& v : a.validations) {
      if (v.steps_trained % interval != 0) continue;
      const std::size_t k = v.steps_trained / interval;
      if (k < curve.size()) {
        curve[k] += v.c_lat;
        ++counts[k];
      }
    }
  }
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (counts[k] != result.agents.size()) {
      throw Error("validation record missing at steps_trained=" + std::to_string(k * interval));
    }
    curve[k] /= static_cast<double>(counts[k]);
  }
  return curve;
}

std::vector<double> mean_training_ma(const FederationResult& result, std::size_t window, std::size_t interval,
                                     std::size_t max_steps) {
  std::vector<double> curve(max_steps / interval, 0.0);
  for (const auto& a : result.agents) {
    if (a.steps.size() < max_steps) throw Error("training history shorter than steps_per_agent");
    const auto ma = moving_avg_violations(a.steps, window);
    for (std::size_t i = 0; i < curve.size(); ++i) curve[i] += ma[(i + 1) * interval - 1];
  }
  for (auto& v : curve) v /= static_cast<double>(result.agents.size());
  return curve;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Scenario& scenario,
                                const std::optional<WeightVector>& warm_start) {
  config.validate();
  const auto factory = make_worker_factory(config, scenario);
  FederationConfig fed = config.effective_federation();
  const std::size_t interval = config.run.validation_interval;

  ExperimentResult out;
  const bool trained = fed.steps_per_agent > 0;
  if (trained) {
    for (std::size_t k = 0; k * interval <= fed.steps_per_agent; ++k) out.validation_x.push_back(double(k * interval));
  }
  for (std::size_t t = interval; t <= fed.steps_per_agent; t += interval) out.training_x.push_back(double(t));

  std::vector<std::vector<double>> val_runs, ma_runs;
  for (std::size_t r = 0; r < config.run.n_runs; ++r) {
    fed.master_seed = run_seed(config, r);
    RunResult run;
    run.seed = fed.master_seed;
    run.federation = run_federation(fed, factory, warm_start);
    if (!trained) {
      out.runs.push_back(std::move(run));
      continue;
    }
    if (config.run.validate) {
      run.validation = mean_validation_curve(run.federation, interval, fed.steps_per_agent);
      val_runs.push_back(run.validation);
    }
    run.training_ma = mean_training_ma(run.federation, config.run.ma_window, interval, fed.steps_per_agent);
    ma_runs.push_back(run.training_ma);
    out.runs.push_back(std::move(run));
  }
  if (!val_runs.empty()) out.validation = band(val_runs);
  if (!ma_runs.empty()) out.training_ma = band(ma_runs);
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

std::string federation_csv(const FederationResult& f) {
  std::ostringstream os;
  os << "iteration,agent,steps,role,aggregation_index\n";
  for (const auto& e : f.events) {
    os << e.iteration << ',' << e.agent << ',' << e.steps << ',' << role_name(e.role) << ',' << e.aggregation_index
       << '\n';
  }
  return os.str();
}

}  // namespace

void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& config, const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "# fedrl " << FEDRL_VERSION << " simd=" << simd::isa_name(simd::active_isa()) << '\n';
  manifest << "# run seeds:";
  for (const auto& r : result.runs) manifest << ' ' << r.seed;
  manifest << "\n\n" << format_config(config);
  write_text(dir / "manifest.ini", manifest.str());

  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    const auto& run = result.runs[r];
    const auto rdir = dir / ("run_" + std::to_string(r));
    std::filesystem::create_directories(rdir);
    write_text(rdir / "federation.csv", federation_csv(run.federation));
    save_checkpoint(run.federation.global, rdir / "checkpoint.txt");
    for (std::size_t m = 0; m < run.federation.agents.size(); ++m) {
      const auto& a = run.federation.agents[m];
      if (config.run.validate) write_validation_log(rdir / ("validation_agent_" + std::to_string(m) + ".csv"), a.validations);
      if (config.run.write_step_logs) write_step_log(rdir / ("steps_agent_" + std::to_string(m) + ".csv"), a.steps, config.run.ma_window);
    }
  }
  if (!result.validation.mean.empty()) write_band(dir / "band_validation.csv", result.validation_x, result.validation);
  if (!result.training_ma.mean.empty()) write_band(dir / "band_training_ma.csv", result.training_x, result.training_ma);
}

std::vector<BaselineRun> run_baseline_experiment(const ExperimentConfig& config, const Scenario& scenario,
                                                 BaselineObjective objective, std::size_t steps) {
  std::vector<BaselineRun> out;
  for (std::size_t r = 0; r < config.run.n_runs; ++r) {
    BaselineRun b;
    b.seed = run_seed(config, r);
    Environment env = make_environment(config, scenario, worker_seeds(agent_seed(b.seed, 0)).train_env);
    b.steps = run_baseline(env, objective, steps);
    std::size_t v = 0;
    for (const auto& s : b.steps) v += s.violated ? 1 : 0;
    b.violation_rate = steps ? double(v) / double(steps) : 0.0;
    out.push_back(std::move(b));
  }
  return out;
}

std::string summarize(const ExperimentResult& result) {
  char buf[256];
  std::string out;
  if (!result.validation.mean.empty()) {
    const std::size_t i = result.validation.mean.size() - 1;
    std::snprintf(buf, sizeof buf, "validation C_lat at %.0f steps: mean %.4f [min %.4f, max %.4f]\n",
                  result.validation_x[i], result.validation.mean[i], result.validation.min[i], result.validation.max[i]);
    out += buf;
  }
  if (!result.training_ma.mean.empty()) {
    const std::size_t i = result.training_ma.mean.size() - 1;
    std::snprintf(buf, sizeof buf, "training violation MA at %.0f steps: mean %.4f [min %.4f, max %.4f]\n",
                  result.training_x[i], result.training_ma.mean[i], result.training_ma.min[i], result.training_ma.max[i]);
    out += buf;
  }
  return out;
}

}  // namespace fedrl
