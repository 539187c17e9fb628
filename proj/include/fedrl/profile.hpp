// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Partition-configuration space of a chain DNN split across SEW, phone and cloud.
//
// A model with P joinable cut points has P + 1 blocks. A configuration is a
// pair of cut indices (a, b) with 0 <= a <= b <= P + 1: the SEW runs blocks
// [0, a), the phone [a, b) and the cloud [b, P + 1). Cut 0 stands for "the raw
// input leaves the SEW", cut P + 1 for "nothing left to run".

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fedrl {

enum class SplitKind {
  kAllSew,
  kAllPhone,
  kAllCloud,
  kSewPhone,
  kSewCloud,
  kPhoneCloud,
  kSewPhoneCloud,
};

std::string_view split_kind_name(SplitKind kind);

struct ConfigSkeleton {
  int id = 0;
  SplitKind kind = SplitKind::kAllSew;
  int cut_a = 0;
  int cut_b = 0;
  bool operator==(const ConfigSkeleton&) const = default;
};

struct PartitionConfig {
  int id = 0;
  int cut_a = 0;
  int cut_b = 0;
  double t1 = 0, t2 = 0, t3 = 0;      // ms on SEW, phone, cloud
  double mu1 = 0, mu2 = 0, mu3 = 0;   // MFLOPs per partition
  double delta12 = 0, delta23 = 0;    // MB sent SEW->phone and phone->cloud
  bool operator==(const PartitionConfig&) const = default;

  bool has_cloud_stage() const { return t3 > 0.0 || mu3 > 0.0; }
};

struct ApplicationProfile {
  std::string name;
  int cut_points = 0;
  std::vector<PartitionConfig> configs;
  double delta0 = 0;       // MB, input tensor
  double total_flops = 0;  // MFLOPs
  bool operator==(const ApplicationProfile&) const = default;

  std::size_t size() const { return configs.size(); }
  const PartitionConfig& at(std::size_t id) const { return configs.at(id); }
};

struct DeviceProfile {
  double z_sew = 1.5e-3;    // J per MFLOP
  double z_phone = 1.5e-4;  // J per MFLOP
  double theta_sew = 7.9;   // W while transmitting
  double theta_phone = 4.5; // W while transmitting

  void validate() const;
};

/// 3 + 3P + P(P-1)/2.
std::size_t config_count(int cut_points);

/// Full-device configs (SEW, phone, cloud), then single splits grouped by pair
/// type ascending by cut, then double splits lexicographic by (cut_a, cut_b).
std::vector<ConfigSkeleton> enumerate_configs(int cut_points);

struct LatencyRange {
  double sew_max = 450.0;
  double phone_max = 65.0;
  double cloud_max = 30.0;
};

struct ProfileSynthSpec {
  std::string name = "yolov5-like";
  int cut_points = 12;
  double delta0 = 4.9152;        // 640x640x3 float32
  double total_flops = 4500.0;   // MFLOPs
  // Full-model latency on each device; speed factors are total_flops / these.
  double full_sew_ms = 330.0;
  double full_phone_ms = 60.0;
  double full_cloud_ms = 28.0;
  double min_tensor_fraction = 0.35;  // per-cut sizes drawn in [f * delta0, delta0]
  LatencyRange ranges{};
  std::uint64_t seed = 7;
};

ProfileSynthSpec yolov5_like_spec();
ProfileSynthSpec yolov8_like_spec();

ApplicationProfile synthesize_profile(const ProfileSynthSpec& spec);

/// Appends round-robin duplicates of existing configs (fresh ids) up to target.
ApplicationProfile extend_profile(const ApplicationProfile& profile, std::size_t target_count);

/// Checks structural invariants; throws ValidationError naming offending configs.
void validate_profile(const ApplicationProfile& profile);

void save_profile(const ApplicationProfile& profile, const std::filesystem::path& path);
ApplicationProfile load_profile(const std::filesystem::path& path);

std::string format_profile(const ApplicationProfile& profile);
ApplicationProfile parse_profile(const std::string& text);

}  // namespace fedrl
