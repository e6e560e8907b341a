#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "declutter/sim/geometry.hpp"

namespace declutter::sim {

// Growth attributes of the parametric branching rule
//   F -> F [R(phi_1) D(alpha) F] ... [R(phi_b) D(alpha) F]
// applied recursion_depth times to the axiom F (the trunk). Each child segment
// is scaled by elongation_rate in length and radius_taper in radius.
struct LSystemParams {
  int recursion_depth = 3;
  double divergence_angle = 0.65;  // rad, child axis vs parent axis
  double elongation_rate = 0.75;
  double base_segment_length = 0.40;  // m
  double base_radius = 0.02;          // m
  double radius_taper = 0.70;
  int branching_factor = 3;
  double morphology_sigma = 0.1;  // relative Gaussian perturbation of the above

  void validate() const;
  // Segment count of the unperturbed rule: sum_{d=0..depth} b^d.
  std::size_t expected_link_count() const;
};

// Spring-damper and mass properties assigned to generated links.
struct TreeDynamicsParams {
  double base_stiffness = 40.0;    // N m / rad at base_radius
  double stiffness_exponent = 3.0;  // k ~ (r / base_radius)^exponent
  double damping_ratio = 0.8;       // fraction of critical damping per joint
  double density = 600.0;           // kg / m^3
  double inertia_floor = 5e-4;      // kg m^2; lumps foliage mass on thin twigs
  bool twist_dof = false;           // spherical joints with a third (twist) DOF

  void validate() const;
};

struct TreeLink {
  int parent = -1;  // -1: root, anchored to the world at TreeModel::anchor
  int depth = 0;
  double length = 0.0;
  double radius = 0.0;
  double mass = 0.0;
  Quat rest_relative = Quat::Identity();  // orientation relative to the parent link frame
};

// Deformable spherical joint at the base of every link (the root's joint is the
// ground anchor). Two bending DOFs about the local x/y axes, plus an optional twist.
struct TreeJoint {
  double stiffness = 0.0;  // N m / rad
  double damping = 0.0;    // N m s / rad
  double inertia = 0.0;    // kg m^2, subtree about the joint at rest
};

struct TreeModel {
  Vec3 anchor = Vec3::Zero();
  std::vector<TreeLink> links;    // parents precede children
  std::vector<TreeJoint> joints;  // one per link
  bool twist_dof = false;

  std::size_t size() const noexcept { return links.size(); }
  bool operator==(const TreeModel& other) const;
};

// Deterministic in (params, dynamics, seed). Morphology values are perturbed by
// relative Gaussian noise with sigma = morphology_sigma, once per tree and once
// per segment; non-positive draws are resampled. Topology never changes.
TreeModel generate_tree(const LSystemParams& params, const TreeDynamicsParams& dynamics,
                        std::uint64_t seed, double trunk_yaw = 0.0, const Vec3& anchor = Vec3::Zero());

// Recomputes masses, stiffness, damping and subtree inertia from geometry.
void assign_tree_dynamics(TreeModel& tree, const TreeDynamicsParams& dynamics,
                          double base_radius);

// Stable textual dump (JSON) used by the gen-tree command.
std::string tree_to_json(const TreeModel& tree, int indent = 2);

}  // namespace declutter::sim
