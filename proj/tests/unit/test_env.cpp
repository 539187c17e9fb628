// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "fedrl/env.hpp"
#include "helpers.hpp"

using namespace fedrl;

namespace {

Environment make_env(std::shared_ptr<const ApplicationProfile> profile, double wifi, double g5,
                     EnvConfig cfg = test::quiet_env_config()) {
  return Environment(std::move(profile), cfg, test::constant_trace(wifi), test::constant_trace(g5));
}

// Independent restatement of the cost definition.
double eq1(const CostComponents& x, const CostWeights& w) {
  auto r = [](double v, double n) { return v / n < 0 ? 0.0 : (v / n > 1 ? 1.0 : v / n); };
  return w.w_sew * r(x.c_sew, w.c_sew_max) + w.w_phone * r(x.c_phone, w.c_phone_max) +
         w.w_5g * r(x.c_5g, w.c_5g_max) + w.w_lat * x.c_lat + w.w_rcfg * x.c_rcfg;
}

}  // namespace

TEST_CASE("total latency") {
  PartitionConfig c;
  c.t1 = 50;
  c.t2 = 20;
  c.delta12 = 2;
  c.delta23 = 1;
  CHECK(total_latency(c, 10, 5, 10) == doctest::Approx(480.0).epsilon(1e-15));

  const auto p = test::default_profile();
  const auto& local = p->configs[0];
  CHECK(total_latency(local, 0.001, 0.001, 0) == local.t1);

  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const auto& k = p->configs[rng() % p->configs.size()];
    const double rw = 0.1 + 100 * uniform01(rng), r5 = 0.1 + 100 * uniform01(rng), cl = 50 * uniform01(rng);
    const double oracle = k.t1 + k.t2 + (k.delta12 * 1000) / rw + (k.delta23 * 1000) / r5 + cl;
    CHECK(total_latency(k, rw, r5, cl) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("device energy") {
  DeviceProfile d;
  d.z_sew = 0.001;
  d.theta_sew = 7.9;
  PartitionConfig c;
  c.mu1 = 1000;
  c.delta12 = 1;
  CHECK(energy(c, 10, 5, 10, 1, d).e_sew == doctest::Approx(17.9).epsilon(1e-14));

  const auto p = test::default_profile();
  const DeviceProfile dev;
  const auto local = energy(p->configs[0], 30, 20, 10, 1, dev);
  CHECK(local.e_phone == 0);
  CHECK(local.e_sew == doctest::Approx(10 * dev.z_sew * p->total_flops).epsilon(1e-14));

  // Fully offloaded: energy vanishes as throughput grows.
  const auto far = energy(p->configs[2], 1e12, 1e12, 10, 1, dev);
  CHECK(far.e_sew < 1e-9);
  CHECK(far.e_phone < 1e-9);

  // Phone transmit energy uses the 5G link.
  PartitionConfig pc;
  pc.delta23 = 2;
  CHECK(energy(pc, 1.0, 4.0, 1, 1, dev).e_phone == doctest::Approx(dev.theta_phone * 0.5));
}

TEST_CASE("5G monetary cost") {
  PartitionConfig c;
  CHECK(comm_cost_5g(c, 10, 1, 0.1) == 0);
  c.delta23 = 1;
  CHECK(comm_cost_5g(c, 10, 1, 0.0) == 0);
  CHECK(comm_cost_5g(c, 10, 1, 0.1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("step cost") {
  CostWeights w;
  w.c_sew_max = w.c_phone_max = w.c_5g_max = 1.0;
  CostComponents x;
  CHECK(step_cost(x, w) == 0.0);
  x.c_lat = 1;
  x.c_rcfg = 1;
  CHECK(step_cost(x, w) == doctest::Approx(0.95).epsilon(1e-15));

  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    CostWeights r;
    double raw[5], sum = 0;
    for (double& v : raw) sum += v = uniform01(rng);
    r.w_sew = raw[0] / sum;
    r.w_phone = raw[1] / sum;
    r.w_5g = raw[2] / sum;
    r.w_lat = raw[3] / sum;
    r.w_rcfg = raw[4] / sum;
    r.c_sew_max = 0.1 + uniform01(rng);
    r.c_phone_max = 0.1 + uniform01(rng);
    r.c_5g_max = 0.1 + uniform01(rng);
    CostComponents y;
    y.c_sew = 2 * uniform01(rng);
    y.c_phone = 2 * uniform01(rng);
    y.c_5g = 2 * uniform01(rng);
    y.c_lat = rng() & 1;
    y.c_rcfg = rng() & 1;
    const double c = step_cost(y, r);
    CHECK(c == doctest::Approx(eq1(y, r)).epsilon(1e-15));
    CHECK(c >= 0);
    CHECK(c <= 1 + 1e-12);
  }

  CostWeights bad;
  bad.w_lat = 0.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("normalizers resolve to the worst case at the throughput floor") {
  const auto p = test::default_profile();
  EnvConfig cfg;
  const auto w = resolve_normalizers(cfg.weights, *p, cfg.devices, cfg.wifi_floor(), cfg.g5_floor());
  double sew = 0;
  for (const auto& c : p->configs) {
    sew = std::max(sew, energy(c, cfg.wifi_floor(), cfg.g5_floor(), 10, 1, cfg.devices).e_sew);
  }
  CHECK(w.c_sew_max == sew);
  CHECK(w.c_phone_max > 0);
  CHECK(w.c_5g_max > 0);
  auto fixed = cfg.weights;
  fixed.c_sew_max = 3.0;
  CHECK(resolve_normalizers(fixed, *p, cfg.devices, 1, 1).c_sew_max == 3.0);
}

TEST_CASE("environment step semantics") {
  const auto p = test::default_profile();

  SUBCASE("keeping the configuration never pays reconfiguration") {
    auto env = make_env(p, 30, 20);
    CHECK(env.deployed() == 0);
    const auto a = env.step(env.eta());
    const auto b = env.step(env.eta());
    CHECK(a.components.c_rcfg == 0);
    CHECK(b.components.c_rcfg == 0);
    CHECK(a.config_id == 0);
    const auto c = env.step(5);
    CHECK(c.components.c_rcfg == 1);
    CHECK(env.deployed() == 5);
    CHECK(env.step(env.eta()).config_id == 5);
  }

  SUBCASE("five consecutive violations switch to the fast interval") {
    EnvConfig cfg = test::quiet_env_config();
    cfg.weights.l_max = 10;  // everything violates
    auto env = make_env(p, 30, 20, cfg);
    for (int i = 0; i < 5; ++i) {
      const auto o = env.step(env.eta());
      CHECK(o.violated);
      CHECK(o.tau == 10.0);
    }
    const auto sixth = env.step(env.eta());
    CHECK(sixth.tau == 1.0);
    CHECK(env.current_tau() == 1.0);

    // A non-violating step restores the normal interval.
    EnvConfig ok = test::quiet_env_config();
    auto env2 = make_env(p, 0.0, 0.0, ok);  // floors => offloading violates, local is fine
    for (int i = 0; i < 6; ++i) env2.step(2);
    CHECK(env2.current_tau() == 1.0);
    const auto back = env2.step(0);
    CHECK_FALSE(back.violated);
    CHECK(back.tau == 1.0);
    CHECK(env2.current_tau() == 10.0);
  }

  SUBCASE("determinism and recomputable outcomes") {
    EnvConfig cfg;
    cfg.seed = 99;
    const auto wifi = synthesize_trace(default_wifi_params(), 1);
    const auto g5 = synthesize_trace(default_5g_params(), 2);
    Environment e1(p, cfg, wifi, g5), e2(p, cfg, wifi, g5);
    Rng actions(4);
    for (int i = 0; i < 3000; ++i) {
      const int a = static_cast<int>(actions() % e1.action_count());
      const auto o1 = e1.step(a);
      const auto o2 = e2.step(a);
      CHECK(o1.cost == o2.cost);
      CHECK(o1.components.l_total == o2.components.l_total);
      CHECK(o1.cost == eq1(o1.components, e1.weights()));
      CHECK(o1.violated == (o1.components.l_total > e1.weights().l_max));
      CHECK(o1.cost >= 0);
      CHECK(o1.cost <= 1.0 + 1e-12);
      const auto& c = p->configs[static_cast<std::size_t>(o1.config_id)];
      if (!c.has_cloud_stage()) CHECK(o1.next_state.l_cloud == 0);
      if (o1.config_id == 0) CHECK(o1.components.c_5g == 0);
      for (float v : e1.observe()) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
      }
    }
  }

  SUBCASE("actions out of range are rejected") {
    auto env = make_env(p, 30, 20);
    CHECK_THROWS_AS(env.step(-1), ValidationError);
    CHECK_THROWS_AS(env.step(static_cast<int>(env.action_count())), ValidationError);
  }

  SUBCASE("window throughput is the mean over the interval") {
    Trace ramp;
    ramp.granularity_ms = 250;
    for (int i = 0; i < 400; ++i) ramp.samples.push_back(i);
    Environment env(p, test::quiet_env_config(), ramp, test::constant_trace(20));
    // Initial window: samples 0..39; first step: 40..79.
    CHECK(env.state().r_wifi == doctest::Approx(19.5));
    env.step(env.eta());
    CHECK(env.state().r_wifi == doctest::Approx(59.5));
  }
}

TEST_CASE("observation normalization") {
  const auto p = std::make_shared<const ApplicationProfile>(test::tiny_profile(300, 50, 20));
  EnvConfig cfg = test::quiet_env_config();

  SUBCASE("minimum bounds map to zero") {
    cfg.bounds.l_sew = {300, 450};
    auto env = make_env(p, 0.0, 0.0, cfg);
    const auto o = env.observe();
    for (float v : o) CHECK(v == 0.0f);
  }
  SUBCASE("maximum bounds map to one") {
    cfg.bounds.r_wifi = {0, 40};
    cfg.bounds.r_5g = {0, 20};
    cfg.bounds.l_sew = {0, 300};
    cfg.bounds.l_phone = {-1, 0};
    cfg.bounds.l_cloud = {-1, 0};
    auto env = make_env(p, 40.0, 20.0, cfg);
    const auto o = env.observe();
    for (float v : o) CHECK(v == 1.0f);
  }
  SUBCASE("wifi midpoint") {
    auto env = make_env(p, 290.0, 20.0, cfg);
    CHECK(env.observe()[0] == doctest::Approx(0.5f));
  }
  SUBCASE("values outside the bounds are clamped") {
    auto env = make_env(p, 10000.0, 10000.0, cfg);
    CHECK(env.observe()[0] == 1.0f);
    CHECK(env.observe()[1] == 1.0f);
  }
}

TEST_CASE("exhaustive oracle") {
  const CostWeights w;
  const DeviceProfile dev;

  SUBCASE("single-config space picks that config") {
    ApplicationProfile one = test::tiny_profile();
    one.configs.resize(1);
    CHECK(oracle_best_config(one, {30, 20}, w, dev, 0.58, 0.35) == 0);
  }
  SUBCASE("throughput at the floor leaves only local execution") {
    const auto p = test::default_profile();
    CHECK(oracle_best_config(*p, {0, 0}, w, dev, 0.58, 0.35) == 0);
  }
  SUBCASE("no feasible config falls back to the fastest") {
    auto tight = w;
    tight.l_max = 1;
    const auto p = test::tiny_profile(300, 50, 20);
    // At the floor only local (300 ms) avoids huge transfers.
    CHECK(oracle_best_config(p, {0, 0}, tight, dev, 0.58, 0.35) == 0);
    // With fast links the cloud path is quickest.
    CHECK(oracle_best_config(p, {1e9, 1e9}, tight, dev, 0.58, 0.35) == 2);
  }
  SUBCASE("agrees with a brute-force restatement") {
    const auto p = test::default_profile();
    Rng rng(8);
    for (int i = 0; i < 300; ++i) {
      const double rw = 80 * uniform01(rng), r5 = 60 * uniform01(rng);
      const double fw = std::max(rw, 0.58), f5 = std::max(r5, 0.35);
      int best = -1, fastest = -1;
      double bo = 0, bl = 0;
      for (const auto& c : p->configs) {
        const double lat = c.t1 + c.t2 + 1000 * c.delta12 / fw + 1000 * c.delta23 / f5 + c.t3;
        if (fastest < 0 || lat < bl) {
          fastest = c.id;
          bl = lat;
        }
        if (lat >= w.l_max) continue;
        const double es = 10 * (dev.z_sew * c.mu1 + dev.theta_sew * c.delta12 / fw);
        const double ep = 10 * (dev.z_phone * c.mu2 + dev.theta_phone * c.delta23 / f5);
        const double obj = w.alpha * (es + ep) + 10 * w.g * c.delta23;
        if (best < 0 || obj < bo) {
          best = c.id;
          bo = obj;
        }
      }
      CHECK(oracle_best_config(*p, {rw, r5}, w, dev, 0.58, 0.35) == (best >= 0 ? best : fastest));
    }
  }
}
