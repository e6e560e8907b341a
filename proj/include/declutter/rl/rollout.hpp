#pragma once

#include <memory>
#include <vector>

#include "declutter/env/environment.hpp"
#include "declutter/rl/policy.hpp"

namespace declutter::rl {

// Converts raw Gaussian actions to joint velocity commands: clamp to [-1, 1],
// then scale by each joint's velocity limit.
sim::ArmVector action_to_command(const Eigen::Ref<const Vector>& action, const sim::ArmModel& arm);

Vector observation_vector(const obs::Observation& o);

// Independent environments with per-env episode seeds. Env i's k-th episode
// uses derive_seed(seed, i * 2^32 + k), so results do not depend on how the
// envs are scheduled.
class VecEnv {
 public:
  VecEnv(const env::EnvConfig& config, std::shared_ptr<const obs::ObservationBases> bases,
         std::size_t count, std::uint64_t seed);

  std::size_t size() const { return envs_.size(); }
  env::Environment& operator[](std::size_t i) { return envs_[i]; }
  const obs::Observation& observation(std::size_t i) const { return current_[i]; }

  void reset_all();
  void reset(std::size_t i);  // starts env i's next episode
  void set_observation(std::size_t i, obs::Observation o) { current_[i] = std::move(o); }

 private:
  std::vector<env::Environment> envs_;
  std::vector<obs::Observation> current_;
  std::vector<std::uint64_t> episodes_;
  std::uint64_t seed_;
};

struct EpisodeSummary {
  std::size_t env = 0;
  obs::EpisodeMetrics metrics;
  bool diverged = false;
};

// Column e * horizon + t holds env e's step t.
struct Trajectories {
  int env_count = 0;
  int horizon = 0;
  Matrix obs;      // normalized with the statistics at rollout start
  Matrix raw_obs;  // as built by the environment
  Matrix actions;
  Vector log_prob;
  Vector rewards;
  Vector values;
  std::vector<std::uint8_t> dones;
  Vector bootstrap;  // value of each env's observation after the last step
  std::vector<double> h;  // occlusion after each step
  std::vector<std::uint8_t> breach;
  std::vector<EpisodeSummary> episodes;  // finished during this rollout
  int divergences = 0;

  Eigen::Index column(int env, int t) const { return static_cast<Eigen::Index>(env) * horizon + t; }
};

// Steps every env `horizon` times under the policy. Action noise for env e
// comes from its own stream derived from (seed, e). With deterministic set the
// mean action is used. Envs that finish or diverge are reset immediately.
Trajectories rollout(VecEnv& envs, const PolicyParams& params, int horizon, std::uint64_t seed,
                     bool deterministic = false, unsigned threads = 1);

}  // namespace declutter::rl
