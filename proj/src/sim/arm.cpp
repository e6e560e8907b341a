#include "declutter/sim/arm.hpp"

#include <algorithm>
#include <cmath>

#include "declutter/error.hpp"

namespace declutter::sim {

void ArmModel::validate() const {
  for (std::size_t j = 0; j < kArmDof; ++j) {
    const auto& s = joints[j];
    if (!(s.q_min < s.q_max)) throw ConfigError("arm joint " + std::to_string(j) + ": q_min >= q_max");
    if (!(s.v_max > 0.0)) throw ConfigError("arm joint " + std::to_string(j) + ": v_max must be > 0");
    if (!(s.link_length > 0.0) || !(s.link_radius > 0.0))
      throw ConfigError("arm joint " + std::to_string(j) + ": link geometry must be positive");
    if (std::abs(s.axis.norm() - 1.0) > 1e-9)
      throw ConfigError("arm joint " + std::to_string(j) + ": axis must be a unit vector");
  }
}

ArmVector ArmModel::clamp_velocity(const ArmVector& qdot) const {
  ArmVector out;
  for (std::size_t j = 0; j < kArmDof; ++j)
    out[j] = std::clamp(qdot[j], -joints[j].v_max, joints[j].v_max);
  return out;
}

ArmVector ArmModel::clamp_position(const ArmVector& q) const {
  ArmVector out;
  for (std::size_t j = 0; j < kArmDof; ++j)
    out[j] = std::clamp(q[j], joints[j].q_min, joints[j].q_max);
  return out;
}

bool ArmModel::within_limits(const ArmVector& q) const {
  for (std::size_t j = 0; j < kArmDof; ++j)
    if (!(q[j] >= joints[j].q_min && q[j] <= joints[j].q_max)) return false;
  return true;
}

ArmModel default_arm(const Vec3& base) {
  ArmModel arm;
  arm.base = base;
  Mat3 pitch_forward;  // exact R_y(pi/2): local z -> world +x
  pitch_forward << 0, 0, 1, 0, 1, 0, -1, 0, 0;

  auto& j = arm.joints;
  j[0] = {Vec3::UnitZ(), Mat3::Identity(), 0.20, 0.040, -3.1, 3.1, 1.0};
  j[1] = {Vec3::UnitY(), Mat3::Identity(), 0.40, 0.040, -2.0, 2.0, 1.0};
  j[2] = {Vec3::UnitY(), pitch_forward, 0.35, 0.035, -2.4, 2.4, 1.0};
  j[3] = {Vec3::UnitZ(), Mat3::Identity(), 0.08, 0.030, -3.1, 3.1, 1.0};
  j[4] = {Vec3::UnitY(), Mat3::Identity(), 0.08, 0.030, -2.0, 2.0, 1.0};
  j[5] = {Vec3::UnitZ(), Mat3::Identity(), 0.10, 0.030, -3.1, 3.1, 1.0};
  record_home(arm);
  return arm;
}

void record_home(ArmModel& arm) {
  const auto pose = forward_kinematics(arm, ArmVector::Zero());
  arm.home_ee_position = pose.ee_position;
  arm.home_ee_rotation = pose.ee_rotation;
}

ArmPose forward_kinematics(const ArmModel& arm, const ArmVector& q) {
  ArmPose pose;
  Vec3 origin = arm.base;
  Mat3 frame = Mat3::Identity();
  for (std::size_t j = 0; j < kArmDof; ++j) {
    const auto& s = arm.joints[j];
    frame = frame * s.fixed_rotation;
    pose.joint_origins[j] = origin;
    pose.joint_axes[j] = frame * s.axis;
    if (q[j] != 0.0) frame = frame * Eigen::AngleAxisd(q[j], s.axis).toRotationMatrix();
    Capsule& c = pose.links[j];
    c.origin = origin;
    c.frame = frame;
    c.length = s.link_length;
    c.radius = s.link_radius;
    origin = c.tip();
  }
  pose.ee_position = origin;
  pose.ee_rotation = frame;
  return pose;
}

Vec3 arm_point_velocity(const ArmPose& pose, std::size_t link, const Vec3& p,
                        const ArmVector& qdot) {
  Vec3 v = Vec3::Zero();
  for (std::size_t j = 0; j <= link; ++j)
    v += qdot[j] * pose.joint_axes[j].cross(p - pose.joint_origins[j]);
  return v;
}

}  // namespace declutter::sim
