#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "declutter/env/environment.hpp"
#include "declutter/rl/policy.hpp"

namespace declutter::rl {

enum class ControllerKind {
  policy,    // mean action of a trained policy
  random,    // uniform in [-1, 1] per joint
  zero,      // arm holds still
  teleport,  // zero action; the tree is moved far away at teleport_step
};

std::string_view to_string(ControllerKind k);
ControllerKind controller_from_string(std::string_view s);

struct EvalConfig {
  int env_count = 64;
  std::uint64_t seed = 1001;
  ControllerKind controller = ControllerKind::policy;
  std::string description;
  std::optional<double> train_reward;  // reported in the Train Rew column
  int teleport_step = 10;
  unsigned threads = 1;

  void validate() const;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  int count = 0;
};

MeanStd mean_std(const std::vector<double>& v);

inline constexpr std::array<std::string_view, 9> kReportColumns = {
    "Description", "d_max", "Train Rew", "Trials", "Test Rew", "Test SR %", "Occ Drop %", "Touch %",
    "Steps in Succ"};

struct EvalRow {
  std::string description;
  double d_max = 0.0;
  std::optional<double> train_reward;
  int trials = 0;
  MeanStd test_reward;
  MeanStd success_pct;  // per-env 0 or 100
  MeanStd occ_drop_pct;
  MeanStd touch_pct;
  MeanStd steps_in_success;  // successful episodes only
  std::vector<obs::EpisodeMetrics> episodes;
};

// One episode per env on seeds the trainer never draws. Always runs with full
// contacts (training_mode is forced off). params is required for the policy
// controller and ignored otherwise.
EvalRow evaluate(const PolicyParams* params, const env::EnvConfig& env_config, const EvalConfig& config);

// JSON document {"columns": [...], "rows": [{column: value, ...}]}. Numeric
// aggregate cells are {"mean", "std"} objects.
std::string report_json(const std::vector<EvalRow>& rows, int indent = 2);
std::string report_table(const std::vector<EvalRow>& rows);

}  // namespace declutter::rl
