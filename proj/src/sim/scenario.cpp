#include "declutter/sim/scenario.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "declutter/util/seed.hpp"

namespace declutter::sim {

namespace {

class Rejected : public std::exception {
 public:
  explicit Rejected(const char* why) : why_(why) {}
  const char* what() const noexcept override { return why_; }

 private:
  const char* why_;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Capsule horizontal_line(const Vec3& center, double yaw, double length) {
  const Vec3 dir(std::cos(yaw), std::sin(yaw), 0.0);
  Capsule line;
  line.origin = center - dir * (0.5 * length);
  line.frame = Quat::FromTwoVectors(Vec3::UnitZ(), dir).toRotationMatrix();
  line.length = length;
  line.radius = kLineRadius;
  return line;
}

double capsule_gap(const Capsule& a, const Capsule& b) {
  const auto cp = closest_points(a.origin, a.tip(), b.origin, b.tip());
  return std::sqrt(cp.dist2) - a.radius - b.radius;
}

DynamicsScale draw_scale(const DynamicsRandomization& r, std::mt19937_64& rng) {
  DynamicsScale s;
  if (!r.enabled) return s;
  s.stiffness = uniform(rng, r.scale_min, r.scale_max);
  s.damping = uniform(rng, r.scale_min, r.scale_max);
  s.friction = uniform(rng, r.scale_min, r.scale_max);
  return s;
}

TreeDynamicsParams scaled(TreeDynamicsParams d, const DynamicsScale& s) {
  d.base_stiffness *= s.stiffness;
  d.damping_ratio *= s.damping;
  return d;
}

void check_arm_clear(const WorldState& w, double margin) {
  const auto arm = arm_pose(w);
  const auto tree = tree_pose(w.tree, w.theta);
  for (const auto& a : arm.links) {
    if (capsule_gap(a, w.line) < margin) throw Rejected("arm clearance from the line at home");
    for (const auto& t : tree.links)
      if (capsule_gap(a, t) < margin) throw Rejected("arm clearance from the tree at home");
  }
}

Scenario full_tree_candidate(const ScenarioConfig& cfg, std::uint64_t aseed) {
  std::mt19937_64 rng(aseed);
  Scenario sc;
  const double bearing = uniform(rng, -cfg.trunk_bearing_max, cfg.trunk_bearing_max);
  const double dist = uniform(rng, cfg.trunk_distance_min, cfg.trunk_distance_max);
  const double trunk_yaw = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  sc.trunk_base_axis = Vec3(std::cos(bearing), std::sin(bearing), 0.0);
  sc.scale = draw_scale(cfg.randomization, rng);

  const Vec3 trunk_pos = sc.trunk_base_axis * dist;
  TreeModel tree = generate_tree(cfg.lsystem, scaled(cfg.dynamics, sc.scale),
                                 derive_seed(aseed, 1), trunk_yaw, trunk_pos);

  const int min_depth = std::min(2, cfg.lsystem.recursion_depth);
  std::vector<int> eligible;
  for (std::size_t i = 0; i < tree.size(); ++i)
    if (tree.links[i].depth >= min_depth && tree.links[i].depth > 0) eligible.push_back(static_cast<int>(i));
  if (eligible.empty()) throw Rejected("no branch links at the required depth");

  const auto rest = tree_pose(tree, std::vector<Vec3>(tree.size(), Vec3::Zero()));
  const int pick = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
  const Capsule& host = rest.links[pick];
  Vec3 center = host.origin + host.axis() * (host.length * uniform(rng, 0.3, 0.7));
  center.z() += uniform(rng, -0.03, 0.03);
  const double line_yaw = bearing + uniform(rng, -cfg.line_yaw_max, cfg.line_yaw_max);

  const double reach = center.head<2>().norm();
  if (reach < cfg.reach_min || reach > cfg.reach_max || center.z() < cfg.height_min ||
      center.z() > cfg.height_max)
    throw Rejected("line center outside the reach region");

  const Capsule line = horizontal_line(center, line_yaw, cfg.line_length);
  if (capsule_gap(rest.links[0], line) < cfg.clearance_margin)
    throw Rejected("line clearance from the trunk");

  ContactParams contact = cfg.contact;
  contact.friction *= sc.scale.friction;
  sc.world = WorldState::make(std::move(tree), default_arm(), line, contact);
  check_arm_clear(sc.world, cfg.clearance_margin);
  return sc;
}

Scenario single_branch_candidate(const ScenarioConfig& cfg, std::uint64_t aseed) {
  std::mt19937_64 rng(aseed);
  Scenario sc;
  sc.trunk_base_axis = Vec3::UnitX();
  sc.scale = draw_scale(cfg.randomization, rng);

  TreeModel tree;
  tree.anchor = Vec3(0.55 + uniform(rng, -0.03, 0.03), -0.30, 0.70 + uniform(rng, -0.01, 0.01));
  TreeLink root;
  root.length = 0.30;
  root.radius = 0.015;
  root.rest_relative = Quat(Eigen::AngleAxisd(-0.5 * std::numbers::pi, Vec3::UnitX()) *
                            Eigen::AngleAxisd(uniform(rng, -0.05, 0.05), Vec3::UnitY()));
  TreeLink tip;
  tip.parent = 0;
  tip.depth = 1;
  tip.length = 0.30;
  tip.radius = 0.012;
  tip.rest_relative = Quat(Eigen::AngleAxisd(uniform(rng, -0.08, 0.08), Vec3::UnitX()) *
                           Eigen::AngleAxisd(uniform(rng, -0.08, 0.08), Vec3::UnitY()));
  tree.links = {root, tip};
  tree.twist_dof = cfg.dynamics.twist_dof;
  assign_tree_dynamics(tree, scaled(cfg.dynamics, sc.scale), root.radius);

  const Vec3 center(0.60 + uniform(rng, -0.03, 0.03), 0.18 + uniform(rng, -0.02, 0.02),
                    0.62 + uniform(rng, -0.01, 0.01));
  const double line_yaw = uniform(rng, -cfg.line_yaw_max, cfg.line_yaw_max);

  ContactParams contact = cfg.contact;
  contact.friction *= sc.scale.friction;
  sc.world = WorldState::make(std::move(tree), default_arm(),
                              horizontal_line(center, line_yaw, cfg.line_length), contact);
  check_arm_clear(sc.world, cfg.clearance_margin);
  return sc;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  return kind == ScenarioKind::full_tree ? "full_tree" : "single_branch";
}

ScenarioKind scenario_kind_from_string(std::string_view name) {
  if (name == "full_tree") return ScenarioKind::full_tree;
  if (name == "single_branch") return ScenarioKind::single_branch;
  throw ConfigError("unknown scenario kind '" + std::string(name) + "'");
}

void ScenarioConfig::validate() const {
  lsystem.validate();
  dynamics.validate();
  contact.validate();
  sensing.validate();
  occlusion.validate();
  if (!(dt > 0.0 && dt <= 0.05)) throw ConfigError("scenario.dt must be in (0, 0.05]");
  if (horizon < 1) throw ConfigError("scenario.horizon must be >= 1");
  if (!(min_initial_h >= 0.0 && min_initial_h <= 1.0))
    throw ConfigError("scenario.min_initial_h must be in [0, 1]");
  if (max_attempts < 1) throw ConfigError("scenario.max_attempts must be >= 1");
  if (settle_steps < 0) throw ConfigError("scenario.settle_steps must be >= 0");
  if (!(trunk_distance_min > 0.0 && trunk_distance_min <= trunk_distance_max))
    throw ConfigError("scenario.trunk_distance_min/max out of order");
  if (!(line_length > 0.0)) throw ConfigError("scenario.line_length must be > 0");
  if (!(line_yaw_max >= 0.0 && line_yaw_max <= 0.2617993877991494 + 1e-12))
    throw ConfigError("scenario.line_yaw_max must be in [0, 15 deg]");
  if (!(reach_min < reach_max) || !(height_min < height_max))
    throw ConfigError("scenario reach region is empty");
  if (!(randomization.scale_min > 0.0 && randomization.scale_min <= randomization.scale_max))
    throw ConfigError("scenario.randomization scale range invalid");
}

ScenarioConfig ScenarioConfig::single_branch_defaults() {
  ScenarioConfig c;
  c.kind = ScenarioKind::single_branch;
  c.dt = 0.05;
  c.horizon = 64;
  c.settle_steps = 10;
  c.line_yaw_max = 5.0 * std::numbers::pi / 180.0;
  c.dynamics.base_stiffness = 6.0;
  c.contact.substeps = 8;
  c.sensing.n_robot = 64;
  c.sensing.n_clearance = 128;
  c.sensing.n_whole_branch = 64;
  c.sensing.n_zoomed_branch = 128;
  return c;
}

double measure_h(const WorldState& world, const ScenarioConfig& config, std::uint64_t seed) {
  const auto pose = tree_pose(world.tree, world.theta);
  const auto zoomed = sample_zoomed_or_empty(world, pose, config.sensing.n_zoomed_branch,
                                             derive_seed(seed, 1), config.sensing.zoom_radius);
  if (zoomed.empty()) return 0.0;
  const auto clearance = sample_surface_points(world, BodySelector::clearance,
                                               config.sensing.n_clearance, derive_seed(seed, 2));
  return occlusion::occlusion_heuristic(zoomed, clearance, config.occlusion);
}

Scenario randomize_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  std::map<std::string, int> failures;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const std::uint64_t aseed = derive_seed(seed, static_cast<std::uint64_t>(attempt));
    try {
      Scenario sc = config.kind == ScenarioKind::full_tree ? full_tree_candidate(config, aseed)
                                                           : single_branch_candidate(config, aseed);
      auto& w = sc.world;
      w.training_mode = false;
      for (int i = 0; i < config.settle_steps; ++i) step_in_place(w, ArmVector::Zero(), config.dt);
      w.time = 0.0;
      w.training_mode = config.training_mode;
      check_arm_clear(w, 0.0);
      sc.initial_h = measure_h(w, config, derive_seed(aseed, 2));
      if (sc.initial_h < config.min_initial_h) throw Rejected("initial occlusion below min_initial_h");
      sc.attempts = attempt + 1;
      sc.seed = seed;
      return sc;
    } catch (const Rejected& r) {
      ++failures[r.what()];
    } catch (const DivergenceError&) {
      ++failures["settling diverged"];
    }
  }
  std::string worst;
  int count = 0;
  for (const auto& [why, n] : failures)
    if (n > count) worst = why, count = n;
  throw ScenarioError("scenario generation failed after " + std::to_string(config.max_attempts) +
                      " attempts; most frequent constraint: " + worst + " (" +
                      std::to_string(count) + "x)");
}

}  // namespace declutter::sim
