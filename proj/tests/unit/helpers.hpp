// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "fedrl/env.hpp"
#include "fedrl/profile.hpp"
#include "fedrl/traces.hpp"

namespace fedrl::test {

inline Trace constant_trace(double value, std::size_t n = 64, double granularity_ms = 250.0) {
  Trace t;
  t.samples.assign(n, value);
  t.granularity_ms = granularity_ms;
  t.source_label = "constant";
  return t;
}

inline ReplayOptions identity_replay() { return ReplayOptions{0.0, false, false}; }

inline std::shared_ptr<const ApplicationProfile> default_profile() {
  static const auto p = std::make_shared<const ApplicationProfile>(synthesize_profile(yolov5_like_spec()));
  return p;
}

// Three-config (P = 0) hand-made profile.
inline ApplicationProfile tiny_profile(double t_sew = 300, double t_phone = 50, double t_cloud = 20) {
  ApplicationProfile p;
  p.name = "tiny";
  p.cut_points = 0;
  p.delta0 = 2.0;
  p.total_flops = 1000.0;
  PartitionConfig sew{0, 1, 1, t_sew, 0, 0, 1000, 0, 0, 0, 0};
  PartitionConfig phone{1, 0, 1, 0, t_phone, 0, 0, 1000, 0, 2.0, 0};
  PartitionConfig cloud{2, 0, 0, 0, 0, t_cloud, 0, 0, 1000, 2.0, 2.0};
  p.configs = {sew, phone, cloud};
  return p;
}

inline EnvConfig quiet_env_config(std::uint64_t seed = 1) {
  EnvConfig c;
  c.replay = identity_replay();
  c.seed = seed;
  return c;
}

}  // namespace fedrl::test
