#pragma once

#include <cstdint>
#include <string>

#include "declutter/occlusion/occlusion.hpp"
#include "declutter/sim/sampling.hpp"

namespace declutter::sim {

enum class ScenarioKind {
  full_tree,      // L-system tree in front of the arm, line through the crown
  single_branch,  // two-link branch resting just above the line, arm underneath
};

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(std::string_view name);

// Scale factors drawn per scenario; the ranges are invented defaults.
struct DynamicsRandomization {
  double scale_min = 0.7;
  double scale_max = 1.3;
  bool enabled = true;
};

struct DynamicsScale {
  double stiffness = 1.0;
  double damping = 1.0;
  double friction = 1.0;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::full_tree;
  LSystemParams lsystem;
  TreeDynamicsParams dynamics;
  ContactParams contact;
  DynamicsRandomization randomization;
  SensingConfig sensing;
  occlusion::OcclusionParams occlusion;
  bool training_mode = false;

  double dt = 1.0 / 60.0;
  int horizon = 1000;

  double min_initial_h = 0.7;
  int max_attempts = 400;
  int settle_steps = 60;

  double trunk_distance_min = 0.75;  // m from the arm base
  double trunk_distance_max = 0.95;
  double trunk_bearing_max = 0.3;  // rad, |bearing of the trunk from the base +x axis|
  double line_length = 0.6;
  double line_yaw_max = 0.2617993877991494;  // 15 deg, vs the trunk-base axis
  double reach_min = 0.3;  // horizontal distance of the line center from the base
  double reach_max = 0.95;
  double height_min = 0.35;
  double height_max = 1.15;
  double clearance_margin = 0.03;  // free space required around trunk and arm at start

  void validate() const;
  // Defaults for the single-branch training scenario (short episodes, small clouds).
  static ScenarioConfig single_branch_defaults();
};

struct Scenario {
  WorldState world;
  double initial_h = 0.0;
  DynamicsScale scale;
  Vec3 trunk_base_axis = Vec3::UnitX();  // horizontal unit vector from base toward the trunk
  int attempts = 0;
  std::uint64_t seed = 0;
};

// Deterministic in (config, seed). Rejection-samples candidates until one
// satisfies every placement constraint and has initial h >= min_initial_h;
// throws ScenarioError naming the most frequent failure if the budget runs out.
Scenario randomize_scenario(const ScenarioConfig& config, std::uint64_t seed);

// Occlusion heuristic of the current state with freshly sampled clouds;
// 0 when the zoomed cloud is empty.
double measure_h(const WorldState& world, const ScenarioConfig& config, std::uint64_t seed);

}  // namespace declutter::sim
