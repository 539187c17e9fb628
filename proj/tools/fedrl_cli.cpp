// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

// Experiment driver: train, transfer, baseline and the data utilities.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "fedrl/experiment.hpp"
#include "fedrl/simd/kernels.hpp"

namespace {

using namespace fedrl;

struct CommonOptions {
  std::string config_path;
  std::string app;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::size_t> agents, steps_per_agent, freq_updates, runs, threads;
  std::optional<double> proportion_slow, max_delay_slow;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config,-c", o.config_path, "INI experiment config");
  cmd->add_option("--app", o.app, "application preset: yolov5, yolov5-extended, yolov8");
  cmd->add_option("--set", o.overrides, "override, section.key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "run.seed");
  cmd->add_option("--mode", o.mode, "single, sync or async");
  cmd->add_option("--agents", o.agents, "federation.agents");
  cmd->add_option("--steps-per-agent", o.steps_per_agent, "federation.steps_per_agent");
  cmd->add_option("--freq-updates", o.freq_updates, "federation.freq_updates");
  cmd->add_option("--proportion-slow", o.proportion_slow, "federation.proportion_slow");
  cmd->add_option("--max-delay-slow", o.max_delay_slow, "federation.max_delay_slow_relative");
  cmd->add_option("--runs", o.runs, "run.n_runs");
  cmd->add_option("--threads", o.threads, "worker threads for agents");
  cmd->add_option("--out,-o", o.out, "output directory (relative paths resolve under $FEDRL_OUTPUT_ROOT)");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (!o.app.empty()) apply_application_preset(c, o.app);
  for (const auto& s : o.overrides) apply_override(c, s);
  if (o.seed) c.run.seed = *o.seed;
  if (o.mode) c.mode = parse_mode(*o.mode);
  if (o.agents) c.federation.agents = *o.agents;
  if (o.steps_per_agent) c.federation.steps_per_agent = *o.steps_per_agent;
  if (o.freq_updates) c.federation.freq_updates = *o.freq_updates;
  if (o.proportion_slow) c.federation.proportion_slow = *o.proportion_slow;
  if (o.max_delay_slow) c.federation.max_delay_slow_relative = *o.max_delay_slow;
  if (o.runs) c.run.n_runs = *o.runs;
  if (o.threads) c.federation.threads = *o.threads;
  if (!o.out.empty()) c.run.output_dir = o.out;
  c.validate();
  return c;
}

std::filesystem::path output_dir(const ExperimentConfig& c) {
  std::filesystem::path p(c.run.output_dir);
  const char* root = std::getenv("FEDRL_OUTPUT_ROOT");
  if (p.is_relative() && root && *root) p = std::filesystem::path(root) / p;
  return p;
}

int cmd_train(const CommonOptions& o, const std::string& checkpoint) {
  const ExperimentConfig c = resolve(o);
  const Scenario scenario = build_scenario(c);
  std::optional<WeightVector> warm;
  if (!checkpoint.empty()) {
    warm = load_checkpoint(checkpoint);
    const std::size_t want = scenario.profile->configs.size() + 1;
    const std::size_t have = warm->dims.empty() ? 0 : warm->dims.back();
    if (have != want) {
      throw ValidationError("checkpoint has " + std::to_string(have) + " actions but the target profile needs " +
                            std::to_string(want));
    }
  }
  const auto result = run_experiment(c, scenario, warm);
  const auto dir = output_dir(c);
  write_experiment(dir, c, result);
  std::cout << summarize(result);
  std::cout << "outputs: " << dir.string() << '\n';
  return 0;
}

int cmd_baseline(const CommonOptions& o, const std::string& objective_name_arg, std::optional<std::size_t> steps) {
  const ExperimentConfig c = resolve(o);
  const BaselineObjective objective = parse_objective(objective_name_arg);
  const Scenario scenario = build_scenario(c);
  const std::size_t n = steps ? *steps : c.federation.steps_per_agent;
  const auto runs = run_baseline_experiment(c, scenario, objective, n);
  const auto dir = output_dir(c);
  std::filesystem::create_directories(dir);
  double mean = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    write_step_log(dir / ("baseline_" + std::string(objective_name(objective)) + "_run_" + std::to_string(r) + ".csv"),
                   runs[r].steps, c.run.ma_window);
    std::printf("run %zu seed %llu: violation rate %.4f\n", r, static_cast<unsigned long long>(runs[r].seed),
                runs[r].violation_rate);
    mean += runs[r].violation_rate / static_cast<double>(runs.size());
  }
  std::printf("baseline %s: mean violation rate %.4f over %zu steps\n", std::string(objective_name(objective)).c_str(),
              mean, n);
  return 0;
}

int cmd_enumerate(int cuts, bool list) {
  const auto configs = enumerate_configs(cuts);
  std::cout << configs.size() << '\n';
  if (list) {
    std::cout << "id,kind,cut_a,cut_b\n";
    for (const auto& s : configs) {
      std::cout << s.id << ',' << split_kind_name(s.kind) << ',' << s.cut_a << ',' << s.cut_b << '\n';
    }
  }
  return 0;
}

// Last row of a band file, or nothing when absent.
void report_band(const std::filesystem::path& path, const char* label, bool all) {
  std::ifstream is(path);
  if (!is) return;
  std::string line, last;
  std::getline(is, line);
  if (all) std::cout << label << '\n' << line << '\n';
  while (std::getline(is, line)) {
    if (all) std::cout << line << '\n';
    last = line;
  }
  if (!all && !last.empty()) std::cout << label << " (x,mean,min,max): " << last << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated DQN partitioning of DNN inference across eyewear, phone and cloud"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(FEDRL_VERSION));

  CommonOptions train_opts, transfer_opts, baseline_opts, config_opts;
  auto* train = app.add_subcommand("train", "run n_runs seeded repetitions of single, sync or async training");
  add_common(train, train_opts);

  std::string checkpoint;
  auto* transfer = app.add_subcommand("transfer", "warm-start every agent from a checkpoint and train");
  add_common(transfer, transfer_opts);
  transfer->add_option("--checkpoint", checkpoint, "weights written by train")->required();

  std::string objective = "latency";
  std::optional<std::size_t> baseline_steps;
  auto* baseline = app.add_subcommand("baseline", "run the single-metric partitioning baseline");
  add_common(baseline, baseline_opts);
  baseline->add_option("--objective", objective, "latency or energy");
  baseline->add_option("--steps", baseline_steps, "decision epochs per run (default steps_per_agent)");

  int cuts = 12;
  bool list = false;
  auto* enumerate = app.add_subcommand("enumerate", "count (and list) the partitioning configurations");
  enumerate->add_option("--cuts", cuts, "number of cut points")->check(CLI::PositiveNumber);
  enumerate->add_flag("--list", list, "print every configuration");

  auto* profile = app.add_subcommand("profile", "synthesize or validate application profiles");
  profile->require_subcommand(1);
  std::string profile_app = "yolov5", profile_out, profile_in;
  std::optional<std::uint64_t> profile_seed;
  std::size_t extend_to = 0;
  auto* psynth = profile->add_subcommand("synth", "write a synthetic profile");
  psynth->add_option("--app", profile_app, "yolov5, yolov5-extended or yolov8");
  psynth->add_option("--seed", profile_seed, "synthesis seed");
  psynth->add_option("--extend-to", extend_to, "pad with duplicate configs up to this count");
  psynth->add_option("--out,-o", profile_out, "output file")->required();
  auto* pvalidate = profile->add_subcommand("validate", "check a profile file");
  pvalidate->add_option("file", profile_in)->required();

  auto* traces = app.add_subcommand("traces", "synthesize traces or print trace statistics");
  traces->require_subcommand(1);
  std::string trace_kind = "wifi", trace_out, trace_in;
  std::uint64_t trace_seed = 2024;
  std::optional<std::size_t> trace_len;
  auto* tsynth = traces->add_subcommand("synth", "write a synthetic throughput trace");
  tsynth->add_option("--kind", trace_kind, "wifi or 5g");
  tsynth->add_option("--seed", trace_seed, "synthesis seed");
  tsynth->add_option("--length", trace_len, "samples");
  tsynth->add_option("--out,-o", trace_out, "output file")->required();
  auto* tstats = traces->add_subcommand("stats", "length, mean, variance, min, max");
  tstats->add_option("file", trace_in)->required();

  std::string report_dir;
  bool report_all = false;
  auto* report = app.add_subcommand("report", "print the band files of a train output directory");
  report->add_option("dir", report_dir)->required();
  report->add_flag("--all", report_all, "print every row");

  auto* config = app.add_subcommand("config", "print the resolved configuration");
  add_common(config, config_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(train_opts, "");
    if (*transfer) return cmd_train(transfer_opts, checkpoint);
    if (*baseline) return cmd_baseline(baseline_opts, objective, baseline_steps);
    if (*enumerate) return cmd_enumerate(cuts, list);
    if (*psynth) {
      ExperimentConfig c;
      apply_application_preset(c, profile_app);
      if (profile_seed) c.profile.synth.seed = *profile_seed;
      if (extend_to) c.profile.extend_to = extend_to;
      ApplicationProfile p = synthesize_profile(c.profile.synth);
      if (c.profile.extend_to > p.configs.size()) p = extend_profile(p, c.profile.extend_to);
      save_profile(p, profile_out);
      std::printf("%s: %zu configs, %d cut points\n", profile_out.c_str(), p.configs.size(), p.cut_points);
      return 0;
    }
    if (*pvalidate) {
      const ApplicationProfile p = load_profile(profile_in);
      validate_profile(p);
      std::printf("ok: %s, %zu configs, %d cut points\n", p.name.c_str(), p.configs.size(), p.cut_points);
      return 0;
    }
    if (*tsynth) {
      TraceSynthParams params;
      if (trace_kind == "wifi") params = default_wifi_params();
      else if (trace_kind == "5g") params = default_5g_params();
      else throw ValidationError("--kind must be wifi or 5g");
      if (trace_len) params.length = *trace_len;
      save_trace(synthesize_trace(params, trace_seed), trace_out);
      std::printf("%s: %zu samples\n", trace_out.c_str(), params.length);
      return 0;
    }
    if (*tstats) {
      const Trace t = load_trace(trace_in);
      const TraceStats s = trace_stats(t);
      std::printf("length %zu\ngranularity_ms %.17g\nmean %.17g\nvariance %.17g\nmin %.17g\nmax %.17g\n", s.length,
                  t.granularity_ms, s.mean, s.variance, s.min, s.max);
      return 0;
    }
    if (*report) {
      const std::filesystem::path dir(report_dir);
      if (!std::filesystem::exists(dir / "manifest.ini")) throw Error("no manifest.ini in " + report_dir);
      report_band(dir / "band_validation.csv", "validation C_lat", report_all);
      report_band(dir / "band_training_ma.csv", "training violation MA", report_all);
      return 0;
    }
    if (*config) {
      std::cout << format_config(resolve(config_opts));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
