#include "declutter/rl/rollout.hpp"

#include <algorithm>
#include <random>

#include "declutter/util/parallel.hpp"
#include "declutter/util/seed.hpp"

namespace declutter::rl {

sim::ArmVector action_to_command(const Eigen::Ref<const Vector>& action, const sim::ArmModel& arm) {
  if (action.size() != static_cast<Eigen::Index>(sim::kArmDof))
    throw ContractError("action_to_command: expected 6 actions");
  sim::ArmVector c;
  for (std::size_t j = 0; j < sim::kArmDof; ++j)
    c[j] = std::clamp(action[static_cast<Eigen::Index>(j)], -1.0, 1.0) * arm.joints[j].v_max;
  return c;
}

Vector observation_vector(const obs::Observation& o) {
  return Eigen::Map<const Vector>(o.values.data(), static_cast<Eigen::Index>(o.values.size()));
}

VecEnv::VecEnv(const env::EnvConfig& config, std::shared_ptr<const obs::ObservationBases> bases,
               std::size_t count, std::uint64_t seed)
    : current_(count), episodes_(count, 0), seed_(seed) {
  if (count == 0) throw ConfigError("VecEnv: env count must be >= 1");
  envs_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) envs_.emplace_back(config, bases);
}

void VecEnv::reset(std::size_t i) {
  const std::uint64_t s = derive_seed(seed_, (static_cast<std::uint64_t>(i) << 32) + episodes_[i]);
  ++episodes_[i];
  current_[i] = envs_[i].reset(s);
}

void VecEnv::reset_all() {
  for (std::size_t i = 0; i < envs_.size(); ++i) reset(i);
}

Trajectories rollout(VecEnv& envs, const PolicyParams& params, int horizon, std::uint64_t seed,
                     bool deterministic, unsigned threads) {
  if (horizon < 1) throw ConfigError("rollout: horizon must be >= 1");
  const int n_env = static_cast<int>(envs.size());
  const int od = params.obs_dim(), ad = params.act_dim();
  const Eigen::Index total = static_cast<Eigen::Index>(n_env) * horizon;

  Trajectories tr;
  tr.env_count = n_env;
  tr.horizon = horizon;
  tr.obs.resize(od, total);
  tr.raw_obs.resize(od, total);
  tr.actions.resize(ad, total);
  tr.log_prob.resize(total);
  tr.rewards.resize(total);
  tr.values.resize(total);
  tr.dones.assign(static_cast<std::size_t>(total), 0);
  tr.h.assign(static_cast<std::size_t>(total), 0.0);
  tr.breach.assign(static_cast<std::size_t>(total), 0);

  std::vector<std::mt19937_64> rngs;
  rngs.reserve(static_cast<std::size_t>(n_env));
  for (int e = 0; e < n_env; ++e) rngs.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(e)));

  const Vector log_std = params.log_std();
  const Vector stddev = log_std.array().exp();
  Matrix raw(od, n_env);
  std::vector<std::uint8_t> diverged(static_cast<std::size_t>(n_env));
  std::vector<env::StepOutcome> outcomes(static_cast<std::size_t>(n_env));

  for (int t = 0; t < horizon; ++t) {
    for (int e = 0; e < n_env; ++e) raw.col(e) = observation_vector(envs.observation(e));
    const Matrix x = params.norm.normalize(raw);
    const Matrix mu = params.mean(x);
    const Vector v = params.value(x);
    Matrix a = mu;
    if (!deterministic) {
      for (int e = 0; e < n_env; ++e) {
        std::normal_distribution<double> g(0.0, 1.0);
        for (int k = 0; k < ad; ++k) a(k, e) += stddev[k] * g(rngs[static_cast<std::size_t>(e)]);
      }
    }
    const Vector lp = gaussian_log_prob(a, mu, log_std);
    for (int e = 0; e < n_env; ++e) {
      const auto c = tr.column(e, t);
      tr.obs.col(c) = x.col(e);
      tr.raw_obs.col(c) = raw.col(e);
      tr.actions.col(c) = a.col(e);
      tr.log_prob[c] = lp[e];
      tr.values[c] = v[e];
    }

    parallel_for(static_cast<std::size_t>(n_env), threads, [&](std::size_t e) {
      auto& env = envs[e];
      outcomes[e] = env.step(action_to_command(a.col(static_cast<Eigen::Index>(e)), env.world().arm));
    });

    for (int e = 0; e < n_env; ++e) {
      auto& out = outcomes[static_cast<std::size_t>(e)];
      const auto c = tr.column(e, t);
      tr.rewards[c] = out.diverged ? 0.0 : out.reward.total;
      tr.dones[static_cast<std::size_t>(c)] = out.done ? 1 : 0;
      if (!out.diverged) {
        tr.h[static_cast<std::size_t>(c)] = out.observation.occ_h();
        tr.breach[static_cast<std::size_t>(c)] = out.observation.safety_breach() ? 1 : 0;
      }
      if (out.done) {
        tr.episodes.push_back(EpisodeSummary{static_cast<std::size_t>(e), envs[e].metrics(), out.diverged});
        if (out.diverged) ++tr.divergences;
      } else {
        envs.set_observation(static_cast<std::size_t>(e), std::move(out.observation));
      }
    }
    // Resets run in env order after all steps so scheduling cannot affect seeds.
    parallel_for(static_cast<std::size_t>(n_env), threads, [&](std::size_t e) {
      if (outcomes[e].done) envs.reset(e);
    });
  }

  for (int e = 0; e < n_env; ++e) raw.col(e) = observation_vector(envs.observation(e));
  tr.bootstrap = params.value(params.norm.normalize(raw));
  return tr;
}

}  // namespace declutter::rl
