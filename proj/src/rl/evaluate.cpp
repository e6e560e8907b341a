#include "declutter/rl/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "declutter/error.hpp"
#include "declutter/rl/rollout.hpp"
#include "declutter/util/parallel.hpp"
#include "declutter/util/seed.hpp"
#include "json.hpp"

namespace declutter::rl {

using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kEvalEnvStream = 0xe7a1'0000;
constexpr std::uint64_t kRandomStream = 0xe7a2'0000;
const Vec3 kTeleportOffset(0.0, 0.0, 25.0);

}  // namespace

std::string_view to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::policy: return "policy";
    case ControllerKind::random: return "random";
    case ControllerKind::zero: return "zero";
    case ControllerKind::teleport: return "teleport";
  }
  return "?";
}

ControllerKind controller_from_string(std::string_view s) {
  for (auto k : {ControllerKind::policy, ControllerKind::random, ControllerKind::zero, ControllerKind::teleport})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown controller '" + std::string(s) + "' (policy, random, zero, teleport)");
}

void EvalConfig::validate() const {
  if (env_count < 1) throw ConfigError("eval.env_count must be >= 1");
  if (teleport_step < 0) throw ConfigError("eval.teleport_step must be >= 0");
  if (threads < 1) throw ConfigError("eval.threads must be >= 1");
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  m.count = static_cast<int>(v.size());
  if (v.empty()) return m;
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / static_cast<double>(v.size());
  double q = 0.0;
  for (double x : v) q += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(q / static_cast<double>(v.size()));
  return m;
}

EvalRow evaluate(const PolicyParams* params, const env::EnvConfig& env_config, const EvalConfig& cfg) {
  cfg.validate();
  if (cfg.controller == ControllerKind::policy) {
    if (!params) throw ContractError("evaluate: policy controller needs parameters");
    if (params->obs_dim() != obs::kObservationDim || params->act_dim() != static_cast<int>(sim::kArmDof))
      throw ContractError("evaluate: policy dimensions do not match the environment");
  }
  env::EnvConfig ec = env_config;
  ec.scenario.training_mode = false;

  auto bases = std::make_shared<const obs::ObservationBases>(
      obs::ObservationBases::sample(ec.kme_gamma, ec.basis_seed));
  const auto n = static_cast<std::size_t>(cfg.env_count);
  VecEnv envs(ec, bases, n, derive_seed(cfg.seed, kEvalEnvStream));
  envs.reset_all();

  std::vector<std::mt19937_64> rngs;
  for (std::size_t e = 0; e < n; ++e) rngs.emplace_back(derive_seed(cfg.seed, kRandomStream + e));
  std::vector<std::uint8_t> done(n, 0);
  Matrix actions = Matrix::Zero(static_cast<Eigen::Index>(sim::kArmDof), static_cast<Eigen::Index>(n));
  Matrix raw(obs::kObservationDim, static_cast<Eigen::Index>(n));

  for (int t = 0; t < ec.scenario.horizon; ++t) {
    switch (cfg.controller) {
      case ControllerKind::policy:
        for (std::size_t e = 0; e < n; ++e)
          raw.col(static_cast<Eigen::Index>(e)) = observation_vector(envs.observation(e));
        actions = params->mean(params->norm.normalize(raw));
        break;
      case ControllerKind::random:
        for (std::size_t e = 0; e < n; ++e) {
          std::uniform_real_distribution<double> u(-1.0, 1.0);
          for (Eigen::Index k = 0; k < actions.rows(); ++k) actions(k, static_cast<Eigen::Index>(e)) = u(rngs[e]);
        }
        break;
      case ControllerKind::zero:
      case ControllerKind::teleport:
        break;
    }
    parallel_for(n, cfg.threads, [&](std::size_t e) {
      if (done[e]) return;
      auto& env = envs[e];
      if (cfg.controller == ControllerKind::teleport && t == cfg.teleport_step) env.teleport_tree(kTeleportOffset);
      auto out = env.step(action_to_command(actions.col(static_cast<Eigen::Index>(e)), env.world().arm));
      if (out.done) done[e] = 1;
      else envs.set_observation(e, std::move(out.observation));
    });
  }

  EvalRow row;
  row.description = cfg.description.empty() ? std::string(to_string(cfg.controller)) : cfg.description;
  row.d_max = ec.noise.d_max;
  row.train_reward = cfg.train_reward;
  row.trials = cfg.env_count;
  std::vector<double> rew, sr, occ, touch, sis;
  for (std::size_t e = 0; e < n; ++e) {
    const auto& m = envs[e].metrics();
    row.episodes.push_back(m);
    rew.push_back(m.cumulative_reward);
    sr.push_back(m.success ? 100.0 : 0.0);
    occ.push_back(m.occ_drop_pct);
    touch.push_back(m.touch_pct);
    if (m.success) sis.push_back(m.steps_in_success);
  }
  row.test_reward = mean_std(rew);
  row.success_pct = mean_std(sr);
  row.occ_drop_pct = mean_std(occ);
  row.touch_pct = mean_std(touch);
  row.steps_in_success = mean_std(sis);
  return row;
}

namespace {

ordered_json cell(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

std::string fmt(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f +/- %.1f", m.mean, m.std);
  return buf;
}

}  // namespace

std::string report_json(const std::vector<EvalRow>& rows, int indent) {
  ordered_json doc;
  doc["columns"] = ordered_json::array();
  for (auto c : kReportColumns) doc["columns"].push_back(std::string(c));
  doc["rows"] = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j;
    j["Description"] = r.description;
    j["d_max"] = r.d_max;
    j["Train Rew"] = r.train_reward ? ordered_json(*r.train_reward) : ordered_json(nullptr);
    j["Trials"] = r.trials;
    j["Test Rew"] = cell(r.test_reward);
    j["Test SR %"] = cell(r.success_pct);
    j["Occ Drop %"] = cell(r.occ_drop_pct);
    j["Touch %"] = cell(r.touch_pct);
    j["Steps in Succ"] = r.steps_in_success.count > 0 ? cell(r.steps_in_success) : ordered_json(nullptr);
    doc["rows"].push_back(std::move(j));
  }
  return doc.dump(indent);
}

std::string report_table(const std::vector<EvalRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.emplace_back(kReportColumns.begin(), kReportColumns.end());
  for (const auto& r : rows) {
    char dm[32], tr[32];
    std::snprintf(dm, sizeof dm, "%.3f", r.d_max);
    if (r.train_reward) std::snprintf(tr, sizeof tr, "%.1f", *r.train_reward);
    else std::snprintf(tr, sizeof tr, "-");
    cells.push_back({r.description, dm, tr, std::to_string(r.trials), fmt(r.test_reward), fmt(r.success_pct),
                     fmt(r.occ_drop_pct), fmt(r.touch_pct),
                     r.steps_in_success.count > 0 ? fmt(r.steps_in_success) : "-"});
  }
  std::vector<std::size_t> width(kReportColumns.size(), 0);
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  std::string out;
  for (std::size_t l = 0; l < cells.size(); ++l) {
    for (std::size_t i = 0; i < cells[l].size(); ++i) {
      out += i == 0 ? "| " : " | ";
      out += cells[l][i];
      out.append(width[i] - cells[l][i].size(), ' ');
    }
    out += " |\n";
    if (l == 0) {
      for (std::size_t i = 0; i < width.size(); ++i) {
        out += '|';
        out.append(width[i] + 2, '-');
      }
      out += "|\n";
    }
  }
  return out;
}

}  // namespace declutter::rl
