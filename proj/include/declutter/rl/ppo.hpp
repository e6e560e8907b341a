#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "declutter/rl/policy.hpp"

namespace declutter::rl {

// Defaults follow common PPO practice; the values are not from a reference run.
struct TrainConfig {
  double discount = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  int epochs = 3;
  int minibatch_size = 1024;
  int horizon = 64;  // steps per env per iteration
  int env_count = 128;
  int iterations = 200;
  std::uint64_t seed = 1;

  std::vector<int> hidden = {256, 256};
  double init_log_std = 0.0;
  double min_log_std = -5.0;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;
  int checkpoint_every = 50;  // iterations; 0 disables periodic checkpoints
  unsigned threads = 1;

  void validate() const;
  // Smaller network and batch for the single-branch scenario.
  static TrainConfig single_branch();
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Backward recursion over one env's trajectory:
//   delta_t = r_t + beta (1 - done_t) V_{t+1} - V_t
//   A_t     = delta_t + beta lambda (1 - done_t) A_{t+1}
// with V_T = bootstrap_value. returns = advantages + values.
GaeResult gae_advantages(std::span<const double> rewards, std::span<const double> values,
                         std::span<const std::uint8_t> dones, double bootstrap_value, double beta,
                         double lambda);

// Shifts to zero mean and scales to unit (population) std; order preserving.
Vector normalize_advantages(const Vector& advantages);

// Columns are samples.
struct PpoBatch {
  Matrix obs;       // normalized observations
  Matrix actions;   // pre-squash Gaussian samples
  Vector log_prob;  // under the policy that collected the batch
  Vector advantages;
  Vector returns;

  Eigen::Index size() const { return obs.cols(); }
  PpoBatch subset(std::span<const Eigen::Index> columns) const;
};

struct LossTerms {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// Loss = policy surrogate + value_coef * value loss - entropy_coef * entropy.
// If grad is non-null it receives dLoss/dtheta (overwritten).
LossTerms ppo_loss(const PolicyParams& params, const PpoBatch& batch, const TrainConfig& config,
                   Vector* grad = nullptr);

struct AdamState {
  Vector m, v;
  std::int64_t t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  explicit AdamState(std::size_t n = 0) : m(Vector::Zero(static_cast<Eigen::Index>(n))), v(m) {}
  void step(Vector& theta, const Vector& grad, double lr);
};

struct UpdateDiagnostics {
  LossTerms first;  // first minibatch of the first epoch
  LossTerms last;
  double clip_fraction = 0.0;  // mean over minibatches
  double approx_kl = 0.0;
  double grad_norm = 0.0;  // mean pre-clip norm
  int minibatches = 0;
};

// Runs `epochs` passes of shuffled minibatches. Throws TrainingError without
// touching params if any loss or gradient is non-finite.
UpdateDiagnostics ppo_update(PolicyParams& params, AdamState& adam, const PpoBatch& batch,
                             const TrainConfig& config, std::uint64_t seed);

}  // namespace declutter::rl
