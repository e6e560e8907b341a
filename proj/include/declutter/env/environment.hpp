#pragma once

#include <memory>

#include "declutter/obs/metrics.hpp"
#include "declutter/obs/observation.hpp"
#include "declutter/obs/reward.hpp"
#include "declutter/sim/scenario.hpp"

namespace declutter::env {

// Sensor noise applied to every cloud before embedding.
struct NoiseConfig {
  double d_max = 0.0;  // m; per-coordinate sigma is d_max / 3
  double subsample_fraction = 1.0;

  bool active() const { return d_max > 0.0 || subsample_fraction < 1.0; }
  void validate() const;
};

struct EnvConfig {
  sim::ScenarioConfig scenario;
  obs::ObservationConfig observation;
  obs::RewardWeights weights;
  NoiseConfig noise;
  double kme_gamma = 0.25;  // m
  std::uint64_t basis_seed = 7;

  void validate() const;
  static EnvConfig single_branch();
};

struct StepOutcome {
  obs::Observation observation;  // after the step (after reset if diverged)
  obs::RewardBreakdown reward;
  bool done = false;      // horizon reached or diverged
  bool diverged = false;
};

// One simulated episode stream. Not thread safe; give each worker its own.
class Environment {
 public:
  Environment(EnvConfig config, std::shared_ptr<const obs::ObservationBases> bases);

  // Generates the scenario for `seed` and returns the initial observation.
  obs::Observation reset(std::uint64_t seed);
  // Applies joint velocity commands (rad/s) for one control period.
  StepOutcome step(const sim::ArmVector& command);

  const sim::WorldState& world() const { return scenario_.world; }
  const sim::Scenario& scenario() const { return scenario_; }
  const obs::EpisodeMetrics& metrics() const { return metrics_; }
  const EnvConfig& config() const { return config_; }
  int t() const { return t_; }
  int horizon() const { return config_.scenario.horizon; }

  // Evaluation harness hook: moves the whole tree `offset` away and freezes it.
  void teleport_tree(const Vec3& offset);

 private:
  obs::Observation observe(const sim::ContactReport* report);

  EnvConfig config_;
  std::shared_ptr<const obs::ObservationBases> bases_;
  sim::Scenario scenario_;
  obs::ObservationMemory memory_;
  obs::EpisodeMetrics metrics_;
  std::uint64_t seed_ = 0;
  int t_ = 0;
};

}  // namespace declutter::env
