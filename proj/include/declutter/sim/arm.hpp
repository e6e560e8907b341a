#pragma once

#include <array>

#include "declutter/sim/geometry.hpp"

namespace declutter::sim {

inline constexpr std::size_t kArmDof = 6;
using ArmVector = Eigen::Matrix<double, 6, 1>;

// One revolute joint followed by its link. The joint frame is the parent link
// tip frame, then `fixed_rotation`, then a rotation of q about `axis`. The link
// capsule runs along the local z axis of the resulting frame.
struct ArmJointSpec {
  Vec3 axis = Vec3::UnitZ();
  Mat3 fixed_rotation = Mat3::Identity();
  double link_length = 0.0;
  double link_radius = 0.0;
  double q_min = -3.1;
  double q_max = 3.1;
  double v_max = 1.0;  // rad / s
};

struct ArmPose {
  std::array<Capsule, kArmDof> links;
  std::array<Vec3, kArmDof> joint_origins;
  std::array<Vec3, kArmDof> joint_axes;  // world frame
  Vec3 ee_position = Vec3::Zero();
  Mat3 ee_rotation = Mat3::Identity();

  Quat ee_quaternion() const { return Quat(ee_rotation).normalized(); }
};

struct ArmModel {
  std::array<ArmJointSpec, kArmDof> joints;
  Vec3 base = Vec3::Zero();
  // End-effector pose at q = 0, recorded when the model is built.
  Vec3 home_ee_position = Vec3::Zero();
  Mat3 home_ee_rotation = Mat3::Identity();

  void validate() const;
  ArmVector clamp_velocity(const ArmVector& qdot) const;
  ArmVector clamp_position(const ArmVector& q) const;
  bool within_limits(const ArmVector& q) const;
};

// Generic 6-DOF chain: base yaw, shoulder and elbow pitch, then a spherical
// wrist (roll, pitch, roll). At q = 0 the base column and upper arm point up
// and the forearm and wrist point along +x.
ArmModel default_arm(const Vec3& base = Vec3::Zero());

// Records the q = 0 end-effector pose into home_ee_*.
void record_home(ArmModel& arm);

ArmPose forward_kinematics(const ArmModel& arm, const ArmVector& q);

// World velocity of point p rigidly attached to link `link`.
Vec3 arm_point_velocity(const ArmPose& pose, std::size_t link, const Vec3& p,
                        const ArmVector& qdot);

}  // namespace declutter::sim
