#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>

#include "declutter/rl/mlp.hpp"

namespace declutter::rl {

// Per-dimension running mean/variance (parallel Welford merge).
struct RunningNorm {
  Vector mean;
  Vector var;
  double count = 0.0;
  double epsilon = 1e-6;  // variance floor
  double clip = 10.0;

  explicit RunningNorm(int dim = 0);
  void update(const Matrix& batch);  // features x batch
  Matrix normalize(const Matrix& x) const;
};

// Diagonal Gaussian actor with a state-independent log std, and a value critic.
// Flat parameter layout: [actor | log_std | critic].
struct PolicyParams {
  MlpShape actor;
  MlpShape critic;
  Vector theta;
  RunningNorm norm;
  double min_log_std = -5.0;

  static PolicyParams create(int obs_dim, int act_dim, const std::vector<int>& hidden,
                             std::uint64_t seed, double init_log_std = 0.0);

  int obs_dim() const { return actor.input(); }
  int act_dim() const { return actor.output(); }
  std::size_t actor_size() const { return actor.parameter_count(); }
  std::size_t log_std_offset() const { return actor_size(); }
  std::size_t critic_offset() const { return actor_size() + static_cast<std::size_t>(act_dim()); }
  std::size_t size() const { return critic_offset() + critic.parameter_count(); }

  Vector log_std() const;  // clamped at min_log_std
  Matrix mean(const Matrix& obs_normalized) const;
  Vector value(const Matrix& obs_normalized) const;
  bool finite() const;
};

// log N(a; mu, diag(exp(2 log_std))) per column.
Vector gaussian_log_prob(const Matrix& actions, const Matrix& mean, const Vector& log_std);
double gaussian_entropy(const Vector& log_std);

}  // namespace declutter::rl
