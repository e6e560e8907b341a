#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "declutter/rl/evaluate.hpp"
#include "declutter/rl/rollout.hpp"
#include "declutter/rl/train.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

using namespace declutter;
using namespace declutter::rl;
namespace fs = std::filesystem;

namespace {

// obs 1 -> [2] -> 1 actor (7), one log std, linear 1 -> 1 critic (2).
PolicyParams toy_policy(std::uint64_t seed) {
  PolicyParams p;
  p.actor.sizes = {1, 2, 1};
  p.critic.sizes = {1, 1};
  p.norm = RunningNorm(1);
  p.theta.resize(static_cast<Eigen::Index>(p.size()));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = u(rng);
  p.theta[static_cast<Eigen::Index>(p.log_std_offset())] = -0.3;
  return p;
}

PpoBatch toy_batch(const PolicyParams& p, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  PpoBatch b;
  b.obs.resize(1, n);
  for (int i = 0; i < n; ++i) b.obs(0, i) = g(rng);
  const Matrix mu = p.mean(b.obs);
  const double sd = std::exp(p.log_std()[0]);
  b.actions.resize(1, n);
  for (int i = 0; i < n; ++i) b.actions(0, i) = mu(0, i) + sd * g(rng);
  const Vector lp = gaussian_log_prob(b.actions, mu, p.log_std());
  b.log_prob.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (int i = 0; i < n; ++i) {
    // Alternate between ratios well inside and well outside the clip range so
    // the loss is smooth at the evaluation point.
    const double shift = (i % 3 == 0) ? 0.6 : (i % 3 == 1 ? -0.6 : 0.05);
    b.log_prob[i] = lp[i] + shift;
    b.advantages[i] = g(rng);
    b.returns[i] = g(rng);
  }
  return b;
}

env::EnvConfig quick_env() {
  auto c = env::EnvConfig::single_branch();
  c.scenario.horizon = 16;
  return c;
}

std::shared_ptr<const obs::ObservationBases> bases_for(const env::EnvConfig& c) {
  return std::make_shared<const obs::ObservationBases>(obs::ObservationBases::sample(c.kme_gamma, c.basis_seed));
}

PolicyParams zero_action_policy() {
  auto p = PolicyParams::create(obs::kObservationDim, 6, {8}, 3);
  p.theta.head(static_cast<Eigen::Index>(p.actor_size())).setZero();
  return p;
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("declutter_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("gae: single step and telescoping sum") {
  const std::vector<double> r1{1.0}, v1{0.0};
  for (double lambda : {0.0, 0.5, 1.0}) {
    const std::vector<std::uint8_t> d1{1};
    CHECK(gae_advantages(r1, v1, d1, 5.0, 0.99, lambda).advantages[0] == doctest::Approx(1.0).epsilon(1e-15));
  }

  const std::vector<double> r{0.5, -1.0, 2.0, 0.25, 3.0};
  const std::vector<double> v(r.size(), 0.0);
  const std::vector<std::uint8_t> d(r.size(), 0);
  const auto g = gae_advantages(r, v, d, 0.0, 1.0, 1.0);
  double suffix = 0.0;
  for (std::size_t i = r.size(); i-- > 0;) {
    suffix += r[i];
    CHECK(g.advantages[i] == doctest::Approx(suffix).epsilon(1e-14));
  }
}

TEST_CASE("gae: random traces match the unrolled recursion") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution done_p(0.08);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> r(50), v(50);
    std::vector<std::uint8_t> d(50);
    std::vector<int> di(50);
    for (int t = 0; t < 50; ++t) {
      r[t] = g(rng);
      v[t] = g(rng);
      di[t] = d[t] = done_p(rng) ? 1 : 0;
    }
    const double boot = g(rng);
    const auto res = gae_advantages(r, v, d, boot, 0.97, 0.9);
    const auto want = oracle::gae_unrolled(r, v, di, boot, 0.97, 0.9);
    for (int t = 0; t < 50; ++t) {
      CHECK(std::abs(res.advantages[t] - want[t]) <= 1e-10);
      CHECK(res.returns[t] == res.advantages[t] + v[t]);
    }
  }
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  const std::vector<std::uint8_t> d{0, 0};
  CHECK_THROWS_AS(gae_advantages(a, b, d, 0.0, 0.9, 0.9), ContractError);
}

TEST_CASE("advantage normalization keeps the ranking") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(3.0, 7.0);
  Vector a(200);
  for (auto& x : a) x = g(rng);
  const Vector n = normalize_advantages(a);
  CHECK(std::abs(n.mean()) < 1e-12);
  for (Eigen::Index i = 0; i + 1 < a.size(); ++i) CHECK((a[i] < a[i + 1]) == (n[i] < n[i + 1]));
}

TEST_CASE("ppo loss gradient matches central differences") {
  const auto p = toy_policy(11);
  REQUIRE(p.size() == 10);
  const auto batch = toy_batch(p, 12, 12);
  TrainConfig cfg;
  cfg.entropy_coef = 0.01;
  cfg.value_coef = 0.7;
  Vector grad;
  ppo_loss(p, batch, cfg, &grad);

  const double step = 1e-6;
  double max_rel = 0.0;
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
    auto plus = p, minus = p;
    plus.theta[i] += step;
    minus.theta[i] -= step;
    const double fd = (ppo_loss(plus, batch, cfg).total - ppo_loss(minus, batch, cfg).total) / (2.0 * step);
    const double rel = std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
    max_rel = std::max(max_rel, rel);
  }
  CHECK(max_rel <= 1e-4);
}

TEST_CASE("zero advantages leave the actor untouched") {
  auto p = toy_policy(3);
  auto batch = toy_batch(p, 16, 4);
  batch.advantages.setZero();
  TrainConfig cfg;
  cfg.minibatch_size = 8;
  AdamState adam(p.size());
  const Vector before = p.theta;
  ppo_update(p, adam, batch, cfg, 9);
  const auto actor = static_cast<Eigen::Index>(p.actor_size() + 1);
  CHECK(p.theta.head(actor) == before.head(actor));
  CHECK(p.theta.tail(2) != before.tail(2));
}

TEST_CASE("positive advantage raises the log-probability of its action") {
  auto p = toy_policy(8);
  auto batch = toy_batch(p, 1, 2);
  batch.log_prob = gaussian_log_prob(batch.actions, p.mean(batch.obs), p.log_std());
  batch.advantages[0] = 1.0;
  TrainConfig cfg;
  cfg.normalize_advantages = false;
  AdamState adam(p.size());
  const double before = batch.log_prob[0];
  ppo_update(p, adam, batch, cfg, 1);
  CHECK(gaussian_log_prob(batch.actions, p.mean(batch.obs), p.log_std())[0] > before);
}

TEST_CASE("log std is clamped from below") {
  auto p = toy_policy(1);
  p.theta[static_cast<Eigen::Index>(p.log_std_offset())] = -40.0;
  CHECK(p.log_std()[0] == p.min_log_std);
  const auto b = toy_batch(p, 4, 1);
  Vector grad;
  ppo_loss(p, b, TrainConfig{}, &grad);
  CHECK(grad[static_cast<Eigen::Index>(p.log_std_offset())] == 0.0);
}

TEST_CASE("running normalization merges batches exactly") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(2.0, 3.0);
  Matrix all(3, 300);
  for (Eigen::Index i = 0; i < all.size(); ++i) all.data()[i] = g(rng);
  RunningNorm a(3), b(3);
  a.update(all);
  b.update(all.leftCols(100));
  b.update(all.middleCols(100, 57));
  b.update(all.rightCols(143));
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.var - b.var).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(b.count == 300.0);
}

TEST_CASE("action commands are clamped to the joint limits") {
  const auto arm = sim::default_arm();
  Vector a(6);
  a << 3.0, -3.0, 0.5, -0.25, 0.0, 1.0;
  const auto c = action_to_command(a, arm);
  CHECK(c[0] == arm.joints[0].v_max);
  CHECK(c[1] == -arm.joints[1].v_max);
  CHECK(c[2] == 0.5 * arm.joints[2].v_max);
  CHECK_THROWS_AS(action_to_command(Vector::Zero(5), arm), ContractError);
}

TEST_CASE("rollout shapes and determinism") {
  const auto cfg = quick_env();
  const auto bases = bases_for(cfg);
  const auto p = PolicyParams::create(obs::kObservationDim, 6, {16}, 4);
  VecEnv envs(cfg, bases, 8, 77);
  envs.reset_all();
  const auto tr = rollout(envs, p, 100, 5, true);
  CHECK(tr.obs.rows() == 88);
  CHECK(tr.obs.cols() == 800);
  CHECK(tr.raw_obs.cols() == 800);
  CHECK(tr.actions.rows() == 6);
  CHECK(tr.actions.cols() == 800);
  CHECK(tr.log_prob.size() == 800);
  CHECK(tr.rewards.size() == 800);
  CHECK(tr.values.size() == 800);
  CHECK(tr.dones.size() == 800);
  CHECK(tr.bootstrap.size() == 8);
  CHECK(tr.rewards.allFinite());
  // 100 steps with a 16-step horizon: 6 full episodes per env.
  CHECK(tr.episodes.size() == 48);
  CHECK(tr.dones[static_cast<std::size_t>(tr.column(0, 15))] == 1);

  VecEnv again(cfg, bases, 8, 77);
  again.reset_all();
  const auto tr2 = rollout(again, p, 100, 5, true);
  CHECK(tr2.raw_obs == tr.raw_obs);
  CHECK(tr2.rewards == tr.rewards);
  CHECK(tr2.actions == tr.actions);

  VecEnv stoch(cfg, bases, 8, 77), stoch2(cfg, bases, 8, 77);
  stoch.reset_all();
  stoch2.reset_all();
  VecEnv threaded(cfg, bases, 8, 77);
  threaded.reset_all();
  const auto s1 = rollout(stoch, p, 20, 6);
  const auto s2 = rollout(stoch2, p, 20, 6);
  const auto s3 = rollout(threaded, p, 20, 6, false, 3);
  CHECK(s1.actions == s2.actions);
  CHECK(s1.rewards == s2.rewards);
  CHECK(s3.rewards == s1.rewards);
  CHECK(s3.raw_obs == s1.raw_obs);
}

TEST_CASE("zero-action rollout reward is the sum of clearance and safety terms") {
  const auto cfg = quick_env();
  VecEnv envs(cfg, bases_for(cfg), 4, 3);
  envs.reset_all();
  const auto tr = rollout(envs, zero_action_policy(), 32, 1, true);
  CHECK(tr.actions.cwiseAbs().maxCoeff() == 0.0);
  double want = 0.0;
  for (std::size_t i = 0; i < tr.h.size(); ++i)
    want += obs::clearance_reward(tr.h[i]) + obs::safety_reward(tr.breach[i] != 0);
  CHECK(tr.rewards.sum() == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("smoke training writes metrics and checkpoints deterministically") {
  TrainRun run;
  run.env = quick_env();
  run.train.env_count = 8;
  run.train.iterations = 2;
  run.train.horizon = 16;
  run.train.hidden = {16};
  run.train.minibatch_size = 32;
  run.config_hash = 0xabc;
  const auto dir = temp_dir("smoke");
  run.output_dir = dir;
  std::ostringstream m1;
  run.metrics = &m1;
  const auto r1 = train(run);

  std::istringstream lines(m1.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    ++count;
    CHECK(line.find("\"mean_episode_reward\"") != std::string::npos);
    CHECK(line.find("\"clip_fraction\"") != std::string::npos);
    CHECK(line.find("\"mean_h\"") != std::string::npos);
  }
  CHECK(count == 2);
  CHECK(r1.records.size() == 2);
  CHECK(fs::exists(dir / "checkpoints" / "final" / "manifest.json"));
  CHECK(fs::exists(dir / "checkpoints" / "final" / "weights.bin"));

  std::ostringstream m2;
  run.metrics = &m2;
  run.output_dir.reset();
  const auto r2 = train(run);
  CHECK(m2.str() == m1.str());
  CHECK(r2.params.theta == r1.params.theta);

  const auto ck = load_checkpoint(dir / "checkpoints" / "final");
  CHECK(ck.params.theta == r1.params.theta);
  CHECK(ck.params.norm.mean == r1.params.norm.mean);
  CHECK(ck.params.norm.var == r1.params.norm.var);
  CHECK(ck.adam.m == r1.adam.m);
  CHECK(ck.adam.t == r1.adam.t);
  CHECK(ck.iteration == 2);
  CHECK(ck.config_hash == 0xabc);

  // Resume for one more iteration.
  run.resume_from = dir / "checkpoints" / "final";
  run.train.iterations = 3;
  run.metrics = nullptr;
  const auto r3 = train(run);
  CHECK(r3.start_iteration == 2);
  REQUIRE(r3.records.size() == 1);
  CHECK(r3.records[0].iteration == 3);

  run.config_hash = 0xabd;
  CHECK_THROWS_AS(train(run), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto dir = temp_dir("corrupt");
  Checkpoint c{toy_policy(1), AdamState(10), 4, 7};
  save_checkpoint(dir, c);
  const auto back = load_checkpoint(dir);
  CHECK(back.params.theta == c.params.theta);
  CHECK(back.params.actor.sizes == c.params.actor.sizes);
  fs::resize_file(dir / "weights.bin", fs::file_size(dir / "weights.bin") - 3);
  CHECK_THROWS_AS(load_checkpoint(dir), FormatError);
  std::ofstream(dir / "manifest.json") << "{\"format\": ";
  CHECK_THROWS_AS(load_checkpoint(dir), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("a diverging update keeps the last good checkpoint") {
  TrainRun run;
  run.env = quick_env();
  run.train.env_count = 4;
  run.train.iterations = 3;
  run.train.horizon = 16;
  run.train.hidden = {8};
  run.train.minibatch_size = 16;
  run.train.learning_rate = 1e300;
  run.train.max_grad_norm = 1e300;
  const auto dir = temp_dir("diverge");
  run.output_dir = dir;
  CHECK_THROWS_AS(train(run), TrainingError);
  const auto ck = load_checkpoint(dir / "checkpoints" / "last_good");
  CHECK(ck.params.finite());
  fs::remove_all(dir);
}

TEST_CASE("evaluation report schema and scripted baselines") {
  const auto cfg = quick_env();
  EvalConfig ec;
  ec.env_count = 6;
  ec.controller = ControllerKind::teleport;
  ec.teleport_step = 4;
  const auto tele = evaluate(nullptr, cfg, ec);
  CHECK(tele.success_pct.mean == 100.0);
  CHECK(tele.steps_in_success.mean == cfg.scenario.horizon - ec.teleport_step);
  CHECK(tele.occ_drop_pct.mean == doctest::Approx(100.0));

  ec.controller = ControllerKind::zero;
  const auto zero = evaluate(nullptr, cfg, ec);
  CHECK(zero.success_pct.mean == 0.0);
  CHECK(zero.steps_in_success.count == 0);

  ec.controller = ControllerKind::policy;
  CHECK_THROWS_AS(evaluate(nullptr, cfg, ec), ContractError);

  const auto json = report_json({tele, zero});
  const auto doc = nlohmann::json::parse(json);
  std::vector<std::string> cols(kReportColumns.begin(), kReportColumns.end());
  CHECK(doc["columns"].get<std::vector<std::string>>() == cols);
  for (const auto& row : doc["rows"]) {
    CHECK(row.size() == cols.size());
    for (const auto& c : cols) CHECK(row.contains(c));
  }
  const auto table = report_table({tele});
  CHECK(table.find("Steps in Succ") != std::string::npos);
  CHECK(controller_from_string("random") == ControllerKind::random);
  CHECK_THROWS_AS(controller_from_string("nope"), ConfigError);
}
