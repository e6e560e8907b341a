#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "declutter/point_cloud.hpp"

namespace declutter::sim {

using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Cylinder of `length` along the local z axis of `frame`, starting at `origin`,
// with hemispherical caps for collision. Surface sampling covers only the
// lateral surface, parameterized in the local frame so that sampling commutes
// with rigid motions of the body.
struct Capsule {
  Vec3 origin = Vec3::Zero();
  Mat3 frame = Mat3::Identity();
  double length = 0.0;
  double radius = 0.0;

  Vec3 axis() const { return frame.col(2); }
  Vec3 tip() const { return origin + frame.col(2) * length; }
};

struct SegmentClosest {
  double s = 0.0;  // parameter on the first segment, [0, 1]
  double t = 0.0;  // parameter on the second segment, [0, 1]
  Vec3 p1 = Vec3::Zero();
  Vec3 p2 = Vec3::Zero();
  double dist2 = 0.0;
};

// Closest points between segments [a1, b1] and [a2, b2] (Ericson, RTCD 5.1.9).
SegmentClosest closest_points(const Vec3& a1, const Vec3& b1, const Vec3& a2, const Vec3& b2);

double point_segment_distance2(const Vec3& p, const Vec3& a, const Vec3& b);

// Rotation exp(w^) for a rotation vector w.
Mat3 rotation_from_vector(const Vec3& w);

// Any unit vector orthogonal to n (n need not be normalized, must be nonzero).
Vec3 any_orthogonal(const Vec3& n);

}  // namespace declutter::sim
