#include "declutter/rl/policy.hpp"

#include <cmath>
#include <numbers>

#include "declutter/error.hpp"

namespace declutter::rl {

RunningNorm::RunningNorm(int dim) : mean(Vector::Zero(dim)), var(Vector::Ones(dim)) {}

void RunningNorm::update(const Matrix& batch) {
  if (batch.rows() != mean.size()) throw ContractError("RunningNorm::update: width mismatch");
  const double n = static_cast<double>(batch.cols());
  if (n == 0.0) return;
  const Vector bmean = batch.rowwise().mean();
  const Vector bvar = (batch.colwise() - bmean).array().square().rowwise().sum() / n;
  if (count == 0.0) {
    mean = bmean;
    var = bvar;
    count = n;
    return;
  }
  const double total = count + n;
  const Vector delta = bmean - mean;
  mean += delta * (n / total);
  var = (var * count + bvar * n + delta.array().square().matrix() * (count * n / total)) / total;
  count = total;
}

Matrix RunningNorm::normalize(const Matrix& x) const {
  const Vector inv = (var.array().max(epsilon)).sqrt().inverse();
  Matrix out = (x.colwise() - mean).array().colwise() * inv.array();
  return out.array().max(-clip).min(clip);
}

PolicyParams PolicyParams::create(int obs_dim, int act_dim, const std::vector<int>& hidden,
                                  std::uint64_t seed, double init_log_std) {
  if (obs_dim < 1 || act_dim < 1) throw ConfigError("policy: dimensions must be >= 1");
  PolicyParams p;
  p.actor.sizes = {obs_dim};
  p.critic.sizes = {obs_dim};
  for (int h : hidden) {
    if (h < 1) throw ConfigError("policy: hidden sizes must be >= 1");
    p.actor.sizes.push_back(h);
    p.critic.sizes.push_back(h);
  }
  p.actor.sizes.push_back(act_dim);
  p.critic.sizes.push_back(1);
  p.norm = RunningNorm(obs_dim);
  p.theta = Vector::Zero(static_cast<Eigen::Index>(p.size()));
  std::mt19937_64 rng(seed);
  init_mlp(p.actor, p.theta.data(), rng, 0.01);
  p.theta.segment(static_cast<Eigen::Index>(p.log_std_offset()), act_dim).setConstant(init_log_std);
  init_mlp(p.critic, p.theta.data() + p.critic_offset(), rng, 1.0);
  return p;
}

Vector PolicyParams::log_std() const {
  return theta.segment(static_cast<Eigen::Index>(log_std_offset()), act_dim())
      .array()
      .max(min_log_std);
}

Matrix PolicyParams::mean(const Matrix& obs) const { return mlp_forward(actor, theta.data(), obs); }

Vector PolicyParams::value(const Matrix& obs) const {
  return mlp_forward(critic, theta.data() + critic_offset(), obs).row(0).transpose();
}

bool PolicyParams::finite() const { return theta.allFinite() && norm.mean.allFinite() && norm.var.allFinite(); }

Vector gaussian_log_prob(const Matrix& actions, const Matrix& mean, const Vector& log_std) {
  const Vector inv_std = (-log_std.array()).exp();
  const Matrix z = (actions - mean).array().colwise() * inv_std.array();
  const double c = -log_std.sum() - 0.5 * static_cast<double>(log_std.size()) * std::log(2.0 * std::numbers::pi);
  return (-0.5 * z.array().square().colwise().sum() + c).transpose();
}

double gaussian_entropy(const Vector& log_std) {
  return log_std.sum() + 0.5 * static_cast<double>(log_std.size()) * (1.0 + std::log(2.0 * std::numbers::pi));
}

}  // namespace declutter::rl
