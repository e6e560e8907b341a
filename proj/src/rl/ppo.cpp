#include "declutter/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "declutter/error.hpp"

namespace declutter::rl {

void TrainConfig::validate() const {
  if (!(discount > 0.0 && discount < 1.0)) throw ConfigError("train.discount must be in (0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("train.gae_lambda must be in [0, 1]");
  if (!(clip_epsilon > 0.0)) throw ConfigError("train.clip_epsilon must be > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (minibatch_size < 1) throw ConfigError("train.minibatch_size must be >= 1");
  if (horizon < 1) throw ConfigError("train.horizon must be >= 1");
  if (env_count < 1) throw ConfigError("train.env_count must be >= 1");
  if (iterations < 1) throw ConfigError("train.iterations must be >= 1");
  if (hidden.empty()) throw ConfigError("train.hidden must list at least one layer");
  if (!(value_coef >= 0.0) || !(entropy_coef >= 0.0)) throw ConfigError("train loss coefficients must be >= 0");
  if (!(max_grad_norm > 0.0)) throw ConfigError("train.max_grad_norm must be > 0");
  if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
  if (threads < 1) throw ConfigError("train.threads must be >= 1");
}

TrainConfig TrainConfig::single_branch() {
  TrainConfig c;
  c.env_count = 128;
  c.iterations = 200;
  c.horizon = 64;
  c.hidden = {64, 64};
  return c;
}

GaeResult gae_advantages(std::span<const double> rewards, std::span<const double> values,
                         std::span<const std::uint8_t> dones, double bootstrap_value, double beta,
                         double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw ContractError("gae_advantages: rewards, values and dones differ in length");
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + beta * live * next_value - values[i];
    next_adv = delta + beta * lambda * live * next_adv;
    r.advantages[i] = next_adv;
    r.returns[i] = next_adv + values[i];
    next_value = values[i];
  }
  return r;
}

Vector normalize_advantages(const Vector& a) {
  if (a.size() == 0) return a;
  const double mean = a.mean();
  const double sd = std::sqrt((a.array() - mean).square().mean());
  return (a.array() - mean) / (sd + 1e-8);
}

PpoBatch PpoBatch::subset(std::span<const Eigen::Index> cols) const {
  PpoBatch b;
  const auto n = static_cast<Eigen::Index>(cols.size());
  b.obs.resize(obs.rows(), n);
  b.actions.resize(actions.rows(), n);
  b.log_prob.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = cols[static_cast<std::size_t>(i)];
    b.obs.col(i) = obs.col(c);
    b.actions.col(i) = actions.col(c);
    b.log_prob[i] = log_prob[c];
    b.advantages[i] = advantages[c];
    b.returns[i] = returns[c];
  }
  return b;
}

LossTerms ppo_loss(const PolicyParams& p, const PpoBatch& batch, const TrainConfig& cfg, Vector* grad) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw ContractError("ppo_loss: empty batch");
  if (batch.obs.rows() != p.obs_dim() || batch.actions.rows() != p.act_dim())
    throw ContractError("ppo_loss: batch shape does not match the policy");
  const double inv_n = 1.0 / static_cast<double>(n);

  MlpCache actor_cache, critic_cache;
  const Matrix mu = mlp_forward(p.actor, p.theta.data(), batch.obs, grad ? &actor_cache : nullptr);
  const Matrix v = mlp_forward(p.critic, p.theta.data() + p.critic_offset(), batch.obs,
                               grad ? &critic_cache : nullptr);
  const Vector log_std = p.log_std();
  const Vector logp = gaussian_log_prob(batch.actions, mu, log_std);

  LossTerms out;
  Vector g_logp(n);  // dL/dlogp per sample
  int clipped = 0;
  double kl = 0.0;
  const double lo = 1.0 - cfg.clip_epsilon, hi = 1.0 + cfg.clip_epsilon;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double diff = logp[i] - batch.log_prob[i];
    const double ratio = std::exp(diff);
    const double a = batch.advantages[i];
    const double unclipped = ratio * a;
    const double clipped_val = std::clamp(ratio, lo, hi) * a;
    if (ratio < lo || ratio > hi) ++clipped;
    kl += (ratio - 1.0) - diff;
    if (unclipped <= clipped_val) {
      out.policy -= unclipped * inv_n;
      g_logp[i] = -a * ratio * inv_n;
    } else {
      out.policy -= clipped_val * inv_n;
      g_logp[i] = 0.0;
    }
  }
  Vector g_v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = v(0, i) - batch.returns[i];
    out.value += 0.5 * e * e * inv_n;
    g_v[i] = cfg.value_coef * e * inv_n;
  }
  out.entropy = gaussian_entropy(log_std);
  out.total = out.policy + cfg.value_coef * out.value - cfg.entropy_coef * out.entropy;
  out.clip_fraction = clipped * inv_n;
  out.approx_kl = kl * inv_n;

  if (grad) {
    grad->setZero(static_cast<Eigen::Index>(p.size()));
    const Vector inv_var = (-2.0 * log_std.array()).exp();
    const Matrix diff = batch.actions - mu;
    // dlogp/dmu = (a - mu) / sigma^2
    const Matrix g_mu = (diff.array().colwise() * inv_var.array()).rowwise() * g_logp.transpose().array();
    mlp_backward(p.actor, p.theta.data(), actor_cache, g_mu, grad->data());
    // dlogp/dlog_std = z^2 - 1
    const Vector z2_sum = (diff.array().square().colwise() * inv_var.array()).matrix() * g_logp;
    const double g_sum = g_logp.sum();
    const auto raw = p.theta.segment(static_cast<Eigen::Index>(p.log_std_offset()), p.act_dim());
    for (int k = 0; k < p.act_dim(); ++k) {
      if (raw[k] < p.min_log_std) continue;
      (*grad)[static_cast<Eigen::Index>(p.log_std_offset()) + k] = z2_sum[k] - g_sum - cfg.entropy_coef;
    }
    mlp_backward(p.critic, p.theta.data() + p.critic_offset(), critic_cache, g_v.transpose(),
                 grad->data() + p.critic_offset());
  }
  return out;
}

void AdamState::step(Vector& theta, const Vector& grad, double lr) {
  ++t;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.array().square().matrix();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

UpdateDiagnostics ppo_update(PolicyParams& params, AdamState& adam, const PpoBatch& input,
                             const TrainConfig& cfg, std::uint64_t seed) {
  const Eigen::Index n = input.size();
  if (n == 0) throw ContractError("ppo_update: empty batch");
  if (adam.m.size() != static_cast<Eigen::Index>(params.size())) adam = AdamState(params.size());

  PpoBatch batch = input;
  if (cfg.normalize_advantages && n > 1) {
    batch.advantages = normalize_advantages(batch.advantages);
  }

  PolicyParams work = params;
  AdamState opt = adam;
  UpdateDiagnostics d;
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto mb = static_cast<std::size_t>(std::min<Eigen::Index>(cfg.minibatch_size, n));
  Vector grad;
  for (int e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::size_t len = std::min(mb, order.size() - start);
      const auto sub = batch.subset(std::span<const Eigen::Index>(order.data() + start, len));
      const auto terms = ppo_loss(work, sub, cfg, &grad);
      if (!std::isfinite(terms.total) || !grad.allFinite())
        throw TrainingError("ppo_update: non-finite loss or gradient");
      const double gn = grad.norm();
      if (gn > cfg.max_grad_norm) grad *= cfg.max_grad_norm / gn;
      opt.step(work.theta, grad, cfg.learning_rate);
      if (d.minibatches == 0) d.first = terms;
      d.last = terms;
      d.clip_fraction += terms.clip_fraction;
      d.approx_kl += terms.approx_kl;
      d.grad_norm += gn;
      ++d.minibatches;
    }
  }
  if (!work.theta.allFinite()) throw TrainingError("ppo_update: parameters went non-finite");
  d.clip_fraction /= d.minibatches;
  d.approx_kl /= d.minibatches;
  d.grad_norm /= d.minibatches;
  params = std::move(work);
  adam = std::move(opt);
  return d;
}

}  // namespace declutter::rl
