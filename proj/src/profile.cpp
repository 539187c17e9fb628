// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include "fedrl/profile.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fedrl/common.hpp"

namespace fedrl {

std::string_view split_kind_name(SplitKind kind) {
  switch (kind) {
    case SplitKind::kAllSew: return "sew";
    case SplitKind::kAllPhone: return "phone";
    case SplitKind::kAllCloud: return "cloud";
    case SplitKind::kSewPhone: return "sew-phone";
    case SplitKind::kSewCloud: return "sew-cloud";
    case SplitKind::kPhoneCloud: return "phone-cloud";
    case SplitKind::kSewPhoneCloud: return "sew-phone-cloud";
  }
  return "?";
}

void DeviceProfile::validate() const {
  if (!(z_sew > 0 && z_phone > 0 && theta_sew > 0 && theta_phone > 0)) {
    throw ValidationError("device profile: z_sew, z_phone, theta_sew, theta_phone must be > 0");
  }
}

std::size_t config_count(int cut_points) {
  const auto p = static_cast<std::size_t>(cut_points);
  return 3 + 3 * p + p * (p - (p > 0 ? 1 : 0)) / 2;
}

std::vector<ConfigSkeleton> enumerate_configs(int cut_points) {
  if (cut_points < 0) throw ValidationError("enumerate_configs: cut_points must be >= 0");
  const int end = cut_points + 1;
  std::vector<ConfigSkeleton> out;
  out.reserve(config_count(cut_points));
  auto add = [&](SplitKind kind, int a, int b) {
    out.push_back({static_cast<int>(out.size()), kind, a, b});
  };
  add(SplitKind::kAllSew, end, end);
  add(SplitKind::kAllPhone, 0, end);
  add(SplitKind::kAllCloud, 0, 0);
  for (int c = 1; c <= cut_points; ++c) add(SplitKind::kSewPhone, c, end);
  for (int c = 1; c <= cut_points; ++c) add(SplitKind::kSewCloud, c, c);
  for (int c = 1; c <= cut_points; ++c) add(SplitKind::kPhoneCloud, 0, c);
  for (int a = 1; a <= cut_points; ++a) {
    for (int b = a + 1; b <= cut_points; ++b) add(SplitKind::kSewPhoneCloud, a, b);
  }
  return out;
}

ProfileSynthSpec yolov5_like_spec() { return ProfileSynthSpec{}; }

ProfileSynthSpec yolov8_like_spec() {
  ProfileSynthSpec s;
  s.name = "yolov8-like";
  s.cut_points = 18;
  s.total_flops = 8700.0;
  s.full_sew_ms = 480.0;
  s.full_phone_ms = 100.0;
  s.full_cloud_ms = 45.0;
  s.ranges = {660.0, 110.0, 50.0};
  s.seed = 11;
  return s;
}

namespace {

// Physical values of config (a, b) on a chain with cumulative FLOPs `cum`
// (cum[0] = 0, cum[P+1] = total) and per-cut tensor sizes `size` (size[0] = delta0).
PartitionConfig realize(const ConfigSkeleton& sk, const std::vector<double>& cum,
                        const std::vector<double>& size, const double speed[3]) {
  const int end = static_cast<int>(cum.size()) - 1;
  const double total = cum[end];
  PartitionConfig c;
  c.id = sk.id;
  c.cut_a = sk.cut_a;
  c.cut_b = sk.cut_b;
  c.mu1 = cum[sk.cut_a];
  c.mu2 = cum[sk.cut_b] - cum[sk.cut_a];
  c.mu3 = total - cum[sk.cut_b];
  c.t1 = c.mu1 / speed[0];
  c.t2 = c.mu2 / speed[1];
  c.t3 = c.mu3 / speed[2];
  c.delta12 = sk.cut_a == end ? 0.0 : size[sk.cut_a];
  c.delta23 = sk.cut_b == end ? 0.0 : size[sk.cut_b];
  return c;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool near(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

ApplicationProfile synthesize_profile(const ProfileSynthSpec& spec) {
  if (spec.cut_points < 1) throw ValidationError("synthesize_profile: cut_points must be >= 1");
  if (!(spec.delta0 > 0 && spec.total_flops > 0 && spec.full_sew_ms > 0 && spec.full_phone_ms > 0 &&
        spec.full_cloud_ms > 0)) {
    throw ValidationError("synthesize_profile: delta0, total_flops and full-model latencies must be > 0");
  }
  if (!(spec.min_tensor_fraction > 0 && spec.min_tensor_fraction <= 1)) {
    throw ValidationError("synthesize_profile: min_tensor_fraction must be in (0, 1]");
  }
  Rng rng(derive_seed(spec.seed, 0x9f0f11e));
  const int end = spec.cut_points + 1;

  std::vector<double> cum(end + 1, 0.0);
  double acc = 0.0;
  for (int j = 1; j <= end; ++j) {
    acc += 0.25 + uniform01(rng);
    cum[j] = acc;
  }
  for (int j = 1; j <= end; ++j) cum[j] = spec.total_flops * cum[j] / acc;
  cum[end] = spec.total_flops;

  std::vector<double> size(end + 1, 0.0);
  size[0] = spec.delta0;
  for (int j = 1; j < end; ++j) {
    const double f = spec.min_tensor_fraction + (1.0 - spec.min_tensor_fraction) * uniform01(rng);
    size[j] = spec.delta0 * f;
  }

  const double speed[3] = {spec.total_flops / spec.full_sew_ms, spec.total_flops / spec.full_phone_ms,
                           spec.total_flops / spec.full_cloud_ms};

  ApplicationProfile p;
  p.name = spec.name;
  p.cut_points = spec.cut_points;
  p.delta0 = spec.delta0;
  p.total_flops = spec.total_flops;
  std::string bad;
  for (const auto& sk : enumerate_configs(spec.cut_points)) {
    auto c = realize(sk, cum, size, speed);
    if (c.t1 > spec.ranges.sew_max || c.t2 > spec.ranges.phone_max || c.t3 > spec.ranges.cloud_max) {
      bad += " " + std::to_string(c.id);
    }
    p.configs.push_back(c);
  }
  if (!bad.empty()) {
    throw ValidationError("synthesize_profile: latencies outside ranges for configs:" + bad);
  }
  validate_profile(p);
  return p;
}

ApplicationProfile extend_profile(const ApplicationProfile& profile, std::size_t target_count) {
  const std::size_t n = profile.configs.size();
  if (target_count < n) {
    throw ValidationError("extend_profile: target " + std::to_string(target_count) +
                          " is smaller than current count " + std::to_string(n));
  }
  if (n == 0) throw ValidationError("extend_profile: empty profile");
  ApplicationProfile out = profile;
  for (std::size_t i = n; i < target_count; ++i) {
    PartitionConfig dup = profile.configs[(i - n) % n];
    dup.id = static_cast<int>(i);
    out.configs.push_back(dup);
  }
  return out;
}

void validate_profile(const ApplicationProfile& p) {
  if (p.cut_points < 0) throw ValidationError("profile: cut_points must be >= 0");
  if (!(p.delta0 > 0)) throw ValidationError("profile: delta0 must be > 0");
  const std::size_t base = config_count(p.cut_points);
  if (p.configs.size() < base) {
    throw ValidationError("profile: expected at least 3 + 3P + P(P-1)/2 = " + std::to_string(base) +
                          " configs for P = " + std::to_string(p.cut_points) + ", found " +
                          std::to_string(p.configs.size()));
  }
  const auto skeletons = enumerate_configs(p.cut_points);
  const int end = p.cut_points + 1;
  for (std::size_t i = 0; i < p.configs.size(); ++i) {
    const auto& c = p.configs[i];
    const std::string where = "profile: config " + std::to_string(c.id) + ": ";
    if (c.id != static_cast<int>(i)) throw ValidationError(where + "ids must be dense and ascending");
    for (double v : {c.t1, c.t2, c.t3, c.mu1, c.mu2, c.mu3, c.delta12, c.delta23}) {
      if (!(v >= 0) || !std::isfinite(v)) throw ValidationError(where + "negative or non-finite value");
    }
    if (i < base) {
      if (c.cut_a != skeletons[i].cut_a || c.cut_b != skeletons[i].cut_b) {
        throw ValidationError(where + "cuts (" + std::to_string(c.cut_a) + "," + std::to_string(c.cut_b) +
                              ") do not match the enumerated order");
      }
    } else {
      bool duplicate = false;
      for (std::size_t j = 0; j < base && !duplicate; ++j) {
        PartitionConfig src = p.configs[j];
        src.id = c.id;
        duplicate = src == c;
      }
      if (!duplicate) {
        throw ValidationError(where + "rows beyond the enumerated space must duplicate an existing config");
      }
    }
    if (!near(c.mu1 + c.mu2 + c.mu3, p.total_flops)) {
      throw ValidationError(where + "mu1 + mu2 + mu3 differs from total_flops");
    }
    if (c.cut_a == end && (c.delta12 != 0 || c.delta23 != 0 || c.t2 != 0 || c.t3 != 0)) {
      throw ValidationError(where + "fully-local config must have zero transfers and remote latency");
    }
  }
  const auto& cloud = p.configs[2];
  if (!near(cloud.delta12, p.delta0) || !near(cloud.delta23, p.delta0)) {
    throw ValidationError("profile: fully-offloaded config must transfer delta0 on both links");
  }
}

std::string format_profile(const ApplicationProfile& p) {
  std::ostringstream os;
  os << "# fedrl partition profile\n";
  os << "name," << p.name << "\n";
  os << "cut_points," << p.cut_points << "\n";
  os << "delta0," << fmt_double(p.delta0) << "\n";
  os << "total_flops," << fmt_double(p.total_flops) << "\n";
  os << "id,cut_a,cut_b,t1_ms,t2_ms,t3_ms,mu1,mu2,mu3,delta12_mb,delta23_mb\n";
  for (const auto& c : p.configs) {
    os << c.id << ',' << c.cut_a << ',' << c.cut_b;
    for (double v : {c.t1, c.t2, c.t3, c.mu1, c.mu2, c.mu3, c.delta12, c.delta23}) os << ',' << fmt_double(v);
    os << '\n';
  }
  return os.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, int line, const std::string& field) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": field '" + field + "': not a number: '" + s + "'");
  }
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

}  // namespace

ApplicationProfile parse_profile(const std::string& text) {
  static const char* kColumns[] = {"id", "cut_a", "cut_b", "t1_ms", "t2_ms", "t3_ms",
                                   "mu1", "mu2", "mu3", "delta12_mb", "delta23_mb"};
  ApplicationProfile p;
  std::map<std::string, bool> seen;
  bool in_rows = false;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    if (!in_rows) {
      if (f[0] == "id") {
        if (f.size() != 11) throw ParseError("line " + std::to_string(lineno) + ": expected 11 columns");
        for (std::size_t i = 0; i < 11; ++i) {
          if (trim(f[i]) != kColumns[i]) {
            throw ParseError("line " + std::to_string(lineno) + ": column " + std::to_string(i + 1) +
                             " must be '" + kColumns[i] + "'");
          }
        }
        for (const char* key : {"name", "cut_points", "delta0", "total_flops"}) {
          if (!seen.count(key)) throw ParseError("missing header field '" + std::string(key) + "'");
        }
        in_rows = true;
        continue;
      }
      if (f.size() != 2) throw ParseError("line " + std::to_string(lineno) + ": expected 'key,value'");
      const std::string key = trim(f[0]);
      const std::string val = trim(f[1]);
      if (key == "name") {
        p.name = val;
      } else if (key == "cut_points") {
        const double v = parse_number(val, lineno, key);
        if (v != std::floor(v) || v < 0) throw ParseError("line " + std::to_string(lineno) + ": cut_points must be a nonnegative integer");
        p.cut_points = static_cast<int>(v);
      } else if (key == "delta0") {
        p.delta0 = parse_number(val, lineno, key);
      } else if (key == "total_flops") {
        p.total_flops = parse_number(val, lineno, key);
      } else {
        throw ParseError("line " + std::to_string(lineno) + ": unknown header field '" + key + "'");
      }
      seen[key] = true;
      continue;
    }
    if (f.size() != 11) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 11 fields, found " + std::to_string(f.size()));
    }
    double v[11];
    for (std::size_t i = 0; i < 11; ++i) v[i] = parse_number(trim(f[i]), lineno, kColumns[i]);
    PartitionConfig c;
    c.id = static_cast<int>(v[0]);
    c.cut_a = static_cast<int>(v[1]);
    c.cut_b = static_cast<int>(v[2]);
    c.t1 = v[3]; c.t2 = v[4]; c.t3 = v[5];
    c.mu1 = v[6]; c.mu2 = v[7]; c.mu3 = v[8];
    c.delta12 = v[9]; c.delta23 = v[10];
    p.configs.push_back(c);
  }
  if (!in_rows) throw ParseError("profile has no config table (missing 'id,...' header row)");
  validate_profile(p);
  return p;
}

void save_profile(const ApplicationProfile& profile, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write profile: " + path.string());
  os << format_profile(profile);
}

ApplicationProfile load_profile(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read profile: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_profile(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace fedrl
