#include "declutter/env/environment.hpp"

#include <cmath>

#include "declutter/util/seed.hpp"

namespace declutter::env {

void NoiseConfig::validate() const {
  if (!(d_max >= 0.0)) throw ConfigError("noise.d_max must be >= 0");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
    throw ConfigError("noise.subsample_fraction must be in (0, 1]");
}

void EnvConfig::validate() const {
  scenario.validate();
  observation.validate();
  noise.validate();
  if (!(kme_gamma > 0.0)) throw ConfigError("kme_gamma must be > 0");
  for (double w : {weights.clearance, weights.smoothness, weights.safety})
    if (!std::isfinite(w)) throw ConfigError("reward weights must be finite");
}

EnvConfig EnvConfig::single_branch() {
  EnvConfig c;
  c.scenario = sim::ScenarioConfig::single_branch_defaults();
  c.scenario.training_mode = true;
  return c;
}

Environment::Environment(EnvConfig config, std::shared_ptr<const obs::ObservationBases> bases)
    : config_(std::move(config)), bases_(std::move(bases)) {
  config_.validate();
  if (!bases_) throw ContractError("Environment: null bases");
  bases_->validate();
}

obs::Observation Environment::observe(const sim::ContactReport* report) {
  const auto& w = scenario_.world;
  const std::uint64_t s = derive_seed(seed_, static_cast<std::uint64_t>(t_) + 1);
  auto clouds = sim::sense_clouds(w, config_.scenario.sensing, s);
  if (config_.noise.active()) {
    const auto& n = config_.noise;
    auto noisy = [&](const PointCloud& c, std::uint64_t stream) {
      return c.empty() ? c : sim::add_cloud_noise(c, n.d_max, n.subsample_fraction, derive_seed(s, stream));
    };
    clouds.whole_branch = noisy(clouds.whole_branch, 11);
    clouds.zoomed_branch = noisy(clouds.zoomed_branch, 12);
    clouds.clearance = noisy(clouds.clearance, 13);
    clouds.robot = noisy(clouds.robot, 14);
  }
  const int touch = report ? sim::touch_indicator(*report, config_.observation.f_u) : 0;
  return obs::build_observation(obs::read_arm_sensors(w), clouds, *bases_, config_.observation,
                                touch, &memory_);
}

obs::Observation Environment::reset(std::uint64_t seed) {
  seed_ = seed;
  t_ = 0;
  memory_ = obs::ObservationMemory{};
  scenario_ = sim::randomize_scenario(config_.scenario, seed);
  auto o = observe(nullptr);
  obs::begin_episode(metrics_, o.occ_h());
  return o;
}

StepOutcome Environment::step(const sim::ArmVector& command) {
  if (metrics_.closed) throw ContractError("Environment::step: episode finished; call reset");
  StepOutcome out;
  sim::ContactReport report;
  try {
    report = sim::step_in_place(scenario_.world, command, config_.scenario.dt);
  } catch (const DivergenceError&) {
    out.diverged = true;
    out.done = true;
    obs::close_episode(metrics_, horizon());
    return out;
  }
  ++t_;
  out.observation = observe(&report);
  const auto& d = out.observation.diagnostics;
  out.reward = obs::total_reward(d.h, scenario_.world.qdot, d.safety_breach, config_.weights);
  obs::update_episode_metrics(metrics_, d.h, d.safety_breach, t_ - 1, out.reward.total);
  if (t_ >= horizon()) {
    out.done = true;
    obs::close_episode(metrics_, horizon());
  }
  return out;
}

void Environment::teleport_tree(const Vec3& offset) {
  auto& w = scenario_.world;
  w.tree.anchor += offset;
  for (auto& v : w.theta_dot) v.setZero();
}

}  // namespace declutter::env
