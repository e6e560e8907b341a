#include <algorithm>
#include <cmath>
#include <random>

#include "declutter/env/environment.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace declutter;
using namespace declutter::obs;

namespace {

sim::SensedClouds shuffled(sim::SensedClouds c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto* cl : {&c.whole_branch, &c.zoomed_branch, &c.clearance, &c.robot})
    std::shuffle(cl->points.begin(), cl->points.end(), rng);
  return c;
}

}  // namespace

TEST_CASE("observation layout") {
  CHECK(kObservationDim == 88);
  const std::array<std::size_t, kGroupCount> offsets{0, 6, 12, 16, 32, 48, 64, 80, 81, 86, 87};
  std::size_t total = 0;
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    CHECK(kGroups[g].offset == offsets[g]);
    CHECK(kGroups[g].offset == total);
    total += kGroups[g].width;
  }
  CHECK(total == 88);
  CHECK(feature_group_from_string("kme_zbr") == FeatureGroup::kme_zbr);
  CHECK(to_string(FeatureGroup::occ_h) == "occ_h");
  CHECK_THROWS_AS(feature_group_from_string("kme_foo"), ConfigError);
}

TEST_CASE("observation on generated worlds") {
  sim::ScenarioConfig cfg;
  const auto bases = ObservationBases::sample(0.25, 3);
  ObservationConfig oc;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto sc = sim::randomize_scenario(cfg, s);
    const auto clouds = sim::sense_clouds(sc.world, cfg.sensing, s);
    const auto o = build_observation(read_arm_sensors(sc.world), clouds, bases, oc, 0);
    const auto q = o.group(FeatureGroup::ee_quat);
    CHECK(std::abs(std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]) - 1.0) < 1e-6);
    CHECK(o.values[80] == 0.0);
    CHECK((o.values[86] == 0.0 || o.values[86] == 1.0));
    CHECK(o.values[87] >= 0.0);
    CHECK(o.values[87] <= 1.0);
    CHECK(o.values[87] == oracle::brute_h(clouds.zoomed_branch, clouds.clearance, 200, 0.10));
    const auto d = o.group(FeatureGroup::ee_branch_dists);
    CHECK(std::is_sorted(d.begin(), d.end()));
    const auto kme = kme::embed_cloud(clouds.robot, bases.robot);
    for (std::size_t i = 0; i < 16; ++i) CHECK(o.values[64 + i] == kme.values[i]);

    const auto p = build_observation(read_arm_sensors(sc.world), shuffled(clouds, s + 100), bases, oc, 0);
    for (std::size_t i = 0; i < kObservationDim; ++i) CHECK(std::abs(p.values[i] - o.values[i]) <= 1e-6);
  }
}

TEST_CASE("robot at home with the tree and line far away") {
  sim::ScenarioConfig cfg;
  auto sc = sim::randomize_scenario(cfg, 4);
  auto& w = sc.world;
  w.tree.anchor += Vec3(0, 0, 10.0);
  w.line.origin += Vec3(0, 0, 20.0);
  const auto clouds = sim::sense_clouds(w, cfg.sensing, 2);
  ObservationConfig oc;
  oc.h_source = CloudTag::whole_branch;
  const auto bases = ObservationBases::sample(0.25, 1);
  const auto r = sim::step_in_place(w, sim::ArmVector::Zero(), cfg.dt);
  const auto o = build_observation(read_arm_sensors(w), clouds, bases, oc, sim::touch_indicator(r, oc.f_u));
  CHECK(o.values[80] == 0.0);
  CHECK(o.values[86] == 0.0);
  CHECK(o.values[87] == oracle::brute_h(clouds.whole_branch, clouds.clearance, 200, 0.10));
  CHECK(o.values[87] == 0.0);
}

TEST_CASE("empty branch clouds fall back to the last good values") {
  sim::ScenarioConfig cfg;
  const auto sc = sim::randomize_scenario(cfg, 8);
  const auto bases = ObservationBases::sample(0.25, 1);
  ObservationConfig oc;
  oc.max_stale_steps = 3;
  ObservationMemory mem;
  const auto clouds = sim::sense_clouds(sc.world, cfg.sensing, 1);
  const auto arm = read_arm_sensors(sc.world);
  const auto good = build_observation(arm, clouds, bases, oc, 0, &mem);

  auto no_zoom = clouds;
  no_zoom.zoomed_branch.points.clear();
  const auto z = build_observation(arm, no_zoom, bases, oc, 0, &mem);
  CHECK(z.diagnostics.zoomed_empty);
  CHECK(z.occ_h() == 0.0);
  for (std::size_t i = 32; i < 48; ++i) CHECK(z.values[i] == good.values[i]);

  auto no_whole = clouds;
  no_whole.whole_branch.points.clear();
  for (int i = 1; i <= 3; ++i) {
    const auto s = build_observation(arm, no_whole, bases, oc, 0, &mem);
    CHECK(s.diagnostics.whole_stale);
    CHECK(s.diagnostics.stale_whole == i);
    for (std::size_t k = 16; k < 32; ++k) CHECK(s.values[k] == good.values[k]);
    for (std::size_t k = 81; k < 86; ++k) CHECK(s.values[k] == good.values[k]);
  }
  CHECK_THROWS_AS(build_observation(arm, no_whole, bases, oc, 0, &mem), Error);
  build_observation(arm, clouds, bases, oc, 0, &mem);
  CHECK(mem.stale_whole == 0);

  auto no_robot = clouds;
  no_robot.robot.points.clear();
  CHECK_THROWS_AS(build_observation(arm, no_robot, bases, oc, 0), EmptyCloudError);
}

TEST_CASE("feature masks zero their groups") {
  sim::ScenarioConfig cfg;
  const auto sc = sim::randomize_scenario(cfg, 9);
  const auto bases = ObservationBases::sample(0.25, 1);
  ObservationConfig oc;
  oc.mask.set(FeatureGroup::kme_wbr, false);
  oc.mask.set(FeatureGroup::occ_h, false);
  const auto clouds = sim::sense_clouds(sc.world, cfg.sensing, 1);
  const auto o = build_observation(read_arm_sensors(sc.world), clouds, bases, oc, 1);
  for (std::size_t i = 16; i < 32; ++i) CHECK(o.values[i] == 0.0);
  CHECK(o.values[87] == 0.0);
  CHECK(o.occ_h() > 0.0);
  CHECK(o.values[80] == 1.0);
}

TEST_CASE("reward anchors") {
  CHECK(clearance_reward(0.0) == 1.0);
  CHECK(clearance_reward(1.0) == 0.25);
  CHECK(std::abs(clearance_reward(0.5) - 0.64) <= 1e-12);
  CHECK_THROWS_AS(clearance_reward(1.01), DomainError);
  CHECK_THROWS_AS(clearance_reward(-0.01), DomainError);
  CHECK_THROWS_AS(clearance_reward(std::nan("")), DomainError);
  double prev = 2.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = clearance_reward(i / 100.0);
    CHECK(r < prev);
    CHECK(r >= 0.25);
    CHECK(r <= 1.0);
    prev = r;
  }

  CHECK(smoothness_reward(sim::ArmVector::Zero()) == 0.0);
  CHECK(std::abs(smoothness_reward(sim::ArmVector::Ones()) + 0.06) <= 1e-12);
  sim::ArmVector v = sim::ArmVector::Zero();
  v[0] = 1.0;
  v[1] = 2.0;
  CHECK(std::abs(smoothness_reward(v) + 0.05) <= 1e-12);

  CHECK(safety_reward(false) == 0.4);
  CHECK(safety_reward(true) == 0.0);
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) sum += safety_reward(i % 2 == 0);
  CHECK(std::abs(sum - 2.0) <= 1e-12);

  CHECK(std::abs(total_reward(0.0, sim::ArmVector::Zero(), false).total - 1.4) <= 1e-12);
  CHECK(std::abs(total_reward(1.0, sim::ArmVector::Zero(), true).total - 0.25) <= 1e-12);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    sim::ArmVector q = sim::ArmVector::NullaryExpr([&] { return 2.0 * u(rng) - 1.0; });
    const auto r = total_reward(u(rng), q, u(rng) < 0.5);
    CHECK(std::abs(r.total - (r.r_h + r.r_q + r.r_sm)) <= 1e-12);
  }
}

TEST_CASE("episode metrics") {
  auto run = [](const std::vector<double>& h, const std::vector<bool>& breach) {
    EpisodeMetrics m;
    for (std::size_t i = 0; i < h.size(); ++i)
      update_episode_metrics(m, h[i], breach.empty() ? false : breach[i], static_cast<int>(i));
    close_episode(m, static_cast<int>(h.size()));
    return m;
  };

  const auto zeros = run(std::vector<double>(20, 0.0), {});
  CHECK(zeros.success);
  CHECK(zeros.steps_in_success == 20);
  CHECK(zeros.success_onset == 0);

  std::vector<double> nine(20, 0.5);
  std::fill(nine.begin() + 5, nine.begin() + 14, 0.0);
  const auto m9 = run(nine, {});
  CHECK_FALSE(m9.success);
  CHECK(m9.steps_in_success == 0);

  std::vector<double> ten = nine;
  ten[14] = 0.0;  // run of 10 at steps 5..14
  ten[17] = 0.0;
  const auto m10 = run(ten, {});
  CHECK(m10.success);
  CHECK(m10.success_onset == 5);
  CHECK(m10.steps_in_success == 11);

  std::vector<double> drop{0.8, 0.6, 0.4, 0.2};
  CHECK(run(drop, {}).occ_drop_pct == doctest::Approx(75.0).epsilon(1e-12));
  std::vector<double> worse{0.4, 0.8};
  CHECK(run(worse, {}).occ_drop_pct == doctest::Approx(-100.0).epsilon(1e-12));
  CHECK(run({0.0, 0.5}, {}).occ_drop_pct == 0.0);

  const auto tp = run(std::vector<double>(8, 0.5), {true, false, false, true, false, false, false, false});
  CHECK(tp.touch_pct == 25.0);

  EpisodeMetrics m;
  update_episode_metrics(m, 0.1, false, 0);
  CHECK_THROWS_AS(update_episode_metrics(m, 0.1, false, 5), ContractError);
}

TEST_CASE("environment episode plumbing") {
  auto cfg = env::EnvConfig::single_branch();
  cfg.scenario.horizon = 12;
  auto bases = std::make_shared<const ObservationBases>(ObservationBases::sample(cfg.kme_gamma, 1));
  env::Environment e(cfg, bases);
  const auto o0 = e.reset(42);
  CHECK(o0.occ_h() >= cfg.scenario.min_initial_h);
  double total = 0.0, recomputed = 0.0;
  for (int t = 0; t < 12; ++t) {
    const auto s = e.step(sim::ArmVector::Zero());
    CHECK_FALSE(s.diverged);
    CHECK(s.done == (t == 11));
    CHECK(s.reward.r_q == 0.0);
    total += s.reward.total;
    recomputed += clearance_reward(s.observation.occ_h()) + safety_reward(s.observation.safety_breach());
  }
  CHECK(e.metrics().closed);
  CHECK(e.metrics().cumulative_reward == doctest::Approx(total).epsilon(1e-12));
  CHECK(total == doctest::Approx(recomputed).epsilon(1e-12));
  CHECK_THROWS_AS(e.step(sim::ArmVector::Zero()), ContractError);

  env::Environment e2(cfg, bases);
  e2.reset(42);
  env::Environment e3(cfg, bases);
  e3.reset(42);
  sim::ArmVector cmd = sim::ArmVector::Constant(0.3);
  for (int t = 0; t < 5; ++t) {
    const auto a = e2.step(cmd);
    const auto b = e3.step(cmd);
    CHECK(a.observation.values == b.observation.values);
    CHECK(a.reward.total == b.reward.total);
  }
}
