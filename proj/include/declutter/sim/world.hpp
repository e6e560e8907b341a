#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "declutter/sim/arm.hpp"
#include "declutter/sim/lsystem.hpp"

namespace declutter::sim {

// Penalty contact law between capsules. All constants are invented; the
// stiffness is chosen so that 1 cm of penetration yields 20 N, far above the
// default touch threshold of 1 N.
struct ContactParams {
  double stiffness = 2000.0;  // N / m
  double damping = 20.0;      // N s / m, normal and regularized tangential
  double friction = 0.5;      // Coulomb coefficient
  int substeps = 4;

  void validate() const;
};

inline constexpr double kLineRadius = 0.05;  // 10 cm diameter clearance cylinder

struct TreePose {
  std::vector<Capsule> links;
  std::vector<Mat3> joint_frames;  // parent frame * rest_relative; DOF axes are its columns
};

struct WorldState {
  TreeModel tree;
  std::vector<Vec3> theta;      // per-joint rotation vector in the joint frame
  std::vector<Vec3> theta_dot;  // rad / s
  ArmModel arm;
  ArmVector q = ArmVector::Zero();
  ArmVector qdot = ArmVector::Zero();
  Capsule line;  // rigid clearance cylinder (power line)
  ContactParams contact;
  double time = 0.0;
  bool training_mode = false;  // masks branch <-> line contacts

  // Tree at rest orientation, arm at home, time zero.
  static WorldState make(TreeModel tree, ArmModel arm, Capsule line, ContactParams contact = {});

  std::size_t tree_dofs() const noexcept { return tree.twist_dof ? 3 : 2; }
  bool operator==(const WorldState& other) const;
};

enum class BodyKind : std::uint8_t { arm, tree, line };

struct Contact {
  BodyKind kind_a = BodyKind::arm;
  int index_a = 0;
  BodyKind kind_b = BodyKind::tree;
  int index_b = 0;
  Vec3 point = Vec3::Zero();   // on body a's surface
  Vec3 normal = Vec3::Zero();  // separation axis, from b toward a
  double depth = 0.0;          // meters
  Vec3 force = Vec3::Zero();   // on body a; body b receives -force
};

struct ContactReport {
  std::array<Vec3, kArmDof> arm_force;  // net force per arm link, averaged over substeps
  std::vector<std::uint8_t> branch_contact;
  std::vector<Contact> contacts;  // from the final substep
  double max_depth = 0.0;

  ContactReport() { arm_force.fill(Vec3::Zero()); }
};

TreePose tree_pose(const TreeModel& tree, const std::vector<Vec3>& theta);
ArmPose arm_pose(const WorldState& state);

// Advances the state by dt with a velocity command for the six arm joints.
// Throws DomainError on bad arguments and DivergenceError if the state goes
// non-finite (the state is then unspecified and should be discarded).
ContactReport step_in_place(WorldState& state, const ArmVector& command, double dt);

struct StepResult {
  WorldState state;
  ContactReport report;
};
StepResult step(const WorldState& state, const ArmVector& command, double dt);

// 1 iff some arm link's net contact force norm strictly exceeds f_u.
int touch_indicator(const ContactReport& report, double f_u);

// Kinetic energy of the tree joints, sum of 0.5 I |theta_dot|^2.
double tree_kinetic_energy(const WorldState& state);

}  // namespace declutter::sim
