#include "declutter/sim/lsystem.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include "json.hpp"

namespace declutter::sim {

namespace {

constexpr int kMaxResample = 100;
constexpr double kGoldenAngle = 2.399963229728653;  // rad

class Perturber {
 public:
  Perturber(std::uint64_t seed, double sigma) : rng_(seed), sigma_(sigma) {}

  // value * (1 + sigma z), z ~ N(0, 1), redrawn until positive.
  double positive(double value, const char* what) {
    for (int i = 0; i < kMaxResample; ++i) {
      const double v = value * (1.0 + sigma_ * normal_(rng_));
      if (v > 0.0 && std::isfinite(v)) return v;
    }
    throw ScenarioError(std::string("tree generation: could not draw a positive ") + what);
  }

  double jitter(double scale) { return sigma_ * scale * normal_(rng_); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double sigma_;
};

}  // namespace

void LSystemParams::validate() const {
  if (recursion_depth < 0) throw ConfigError("lsystem.recursion_depth must be >= 0");
  if (branching_factor < 1) throw ConfigError("lsystem.branching_factor must be >= 1");
  if (!(elongation_rate > 0.0)) throw ConfigError("lsystem.elongation_rate must be > 0");
  if (!(base_segment_length > 0.0)) throw ConfigError("lsystem.base_segment_length must be > 0");
  if (!(base_radius > 0.0)) throw ConfigError("lsystem.base_radius must be > 0");
  if (!(radius_taper > 0.0 && radius_taper <= 1.0))
    throw ConfigError("lsystem.radius_taper must be in (0, 1]");
  if (!(morphology_sigma >= 0.0)) throw ConfigError("lsystem.morphology_sigma must be >= 0");
  if (expected_link_count() > 20000) throw ConfigError("lsystem: tree too large");
}

std::size_t LSystemParams::expected_link_count() const {
  std::size_t total = 0, level = 1;
  for (int d = 0; d <= recursion_depth; ++d) {
    total += level;
    level *= static_cast<std::size_t>(branching_factor);
    if (total > 1000000) break;
  }
  return total;
}

void TreeDynamicsParams::validate() const {
  if (!(base_stiffness > 0.0)) throw ConfigError("tree_dynamics.base_stiffness must be > 0");
  if (!(damping_ratio > 0.0)) throw ConfigError("tree_dynamics.damping_ratio must be > 0");
  if (!(density > 0.0)) throw ConfigError("tree_dynamics.density must be > 0");
  if (!(inertia_floor > 0.0)) throw ConfigError("tree_dynamics.inertia_floor must be > 0");
}

bool TreeModel::operator==(const TreeModel& o) const {
  if (anchor != o.anchor || twist_dof != o.twist_dof || links.size() != o.links.size())
    return false;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto &a = links[i], &b = o.links[i];
    if (a.parent != b.parent || a.depth != b.depth || a.length != b.length ||
        a.radius != b.radius || a.mass != b.mass || a.rest_relative.coeffs() != b.rest_relative.coeffs())
      return false;
    const auto &ja = joints[i], &jb = o.joints[i];
    if (ja.stiffness != jb.stiffness || ja.damping != jb.damping || ja.inertia != jb.inertia)
      return false;
  }
  return true;
}

TreeModel generate_tree(const LSystemParams& params, const TreeDynamicsParams& dynamics,
                        std::uint64_t seed, double trunk_yaw, const Vec3& anchor) {
  params.validate();
  dynamics.validate();
  Perturber draw(seed, params.morphology_sigma);

  const double divergence = draw.positive(params.divergence_angle, "divergence angle");
  const double elongation = draw.positive(params.elongation_rate, "elongation rate");
  const double base_length = draw.positive(params.base_segment_length, "segment length");
  const double base_radius = draw.positive(params.base_radius, "radius");
  const double taper = std::min(1.0, draw.positive(params.radius_taper, "radius taper"));

  TreeModel tree;
  tree.anchor = anchor;
  tree.twist_dof = dynamics.twist_dof;
  tree.links.reserve(params.expected_link_count());

  TreeLink trunk;
  trunk.parent = -1;
  trunk.depth = 0;
  trunk.length = base_length;
  trunk.radius = base_radius;
  trunk.rest_relative = Quat(Eigen::AngleAxisd(trunk_yaw, Vec3::UnitZ()));
  tree.links.push_back(trunk);

  const int b = params.branching_factor;
  std::deque<int> frontier{0};
  while (!frontier.empty()) {
    const int p = frontier.front();
    frontier.pop_front();
    const TreeLink parent = tree.links[p];
    if (parent.depth >= params.recursion_depth) continue;
    const double phase = kGoldenAngle * parent.depth;
    for (int i = 0; i < b; ++i) {
      TreeLink child;
      child.parent = p;
      child.depth = parent.depth + 1;
      child.length = draw.positive(parent.length * elongation, "segment length");
      child.radius = parent.radius * taper;
      const double azimuth =
          2.0 * std::numbers::pi * i / b + phase + draw.jitter(std::numbers::pi / b);
      const double tilt = b == 1 ? draw.jitter(divergence) : draw.positive(divergence, "divergence");
      child.rest_relative = Quat(Eigen::AngleAxisd(azimuth, Vec3::UnitZ()) *
                                 Eigen::AngleAxisd(tilt, Vec3::UnitX()));
      tree.links.push_back(child);
      frontier.push_back(static_cast<int>(tree.links.size()) - 1);
    }
  }

  assign_tree_dynamics(tree, dynamics, base_radius);
  return tree;
}

void assign_tree_dynamics(TreeModel& tree, const TreeDynamicsParams& dynamics, double base_radius) {
  const std::size_t n = tree.links.size();
  std::vector<Vec3> origin(n), center(n);
  std::vector<Mat3> frame(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = tree.links[i];
    if (l.parent < 0) {
      origin[i] = tree.anchor;
      frame[i] = l.rest_relative.toRotationMatrix();
    } else {
      const auto& pl = tree.links[l.parent];
      origin[i] = origin[l.parent] + frame[l.parent].col(2) * pl.length;
      frame[i] = frame[l.parent] * l.rest_relative.toRotationMatrix();
    }
    center[i] = origin[i] + frame[i].col(2) * (0.5 * l.length);
  }

  tree.joints.assign(n, TreeJoint{});
  for (std::size_t i = 0; i < n; ++i) {
    auto& l = tree.links[i];
    l.mass = dynamics.density * std::numbers::pi * l.radius * l.radius * l.length;
  }
  // Each link contributes to the inertia of every joint on its path to the root.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = tree.links[i];
    for (int j = static_cast<int>(i); j >= 0; j = tree.links[j].parent) {
      tree.joints[j].inertia +=
          l.mass * ((center[i] - origin[j]).squaredNorm() + l.length * l.length / 12.0);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& j = tree.joints[i];
    j.inertia = std::max(j.inertia, dynamics.inertia_floor);
    j.stiffness = dynamics.base_stiffness *
                  std::pow(tree.links[i].radius / base_radius, dynamics.stiffness_exponent);
    j.damping = 2.0 * dynamics.damping_ratio * std::sqrt(j.stiffness * j.inertia);
  }
}

std::string tree_to_json(const TreeModel& tree, int indent) {
  nlohmann::ordered_json j;
  j["format"] = "declutter-tree";
  j["version"] = 1;
  j["anchor"] = {tree.anchor.x(), tree.anchor.y(), tree.anchor.z()};
  j["twist_dof"] = tree.twist_dof;
  auto& links = j["links"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < tree.links.size(); ++i) {
    const auto& l = tree.links[i];
    const auto& jt = tree.joints[i];
    const auto& q = l.rest_relative;
    links.push_back({{"parent", l.parent},
                     {"depth", l.depth},
                     {"length", l.length},
                     {"radius", l.radius},
                     {"mass", l.mass},
                     {"rest_quat_wxyz", {q.w(), q.x(), q.y(), q.z()}},
                     {"stiffness", jt.stiffness},
                     {"damping", jt.damping},
                     {"inertia", jt.inertia}});
  }
  return j.dump(indent) + "\n";
}

}  // namespace declutter::sim
