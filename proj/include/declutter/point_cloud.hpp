#pragma once

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "declutter/error.hpp"

namespace declutter {

using Vec3 = Eigen::Vector3d;

enum class CloudTag { robot, clearance, whole_branch, zoomed_branch, generic };

std::string_view to_string(CloudTag tag);
CloudTag cloud_tag_from_string(std::string_view name);

// Ordered 3D points in meters. Order matters only for summation rounding; every
// consumer in this library is permutation invariant up to ~1e-12.
struct PointCloud {
  std::vector<Vec3> points;
  CloudTag tag = CloudTag::generic;

  PointCloud() = default;
  PointCloud(std::vector<Vec3> pts, CloudTag t = CloudTag::generic)
      : points(std::move(pts)), tag(t) {}

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }

  std::span<const Vec3> view() const noexcept { return points; }
};

inline bool is_finite(const Vec3& p) noexcept {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

// Throws DomainError on the first non-finite coordinate.
void require_finite(std::span<const Vec3> points, std::string_view what);

// Throws EmptyCloudError when the cloud is empty.
inline void require_non_empty(const PointCloud& cloud, std::string_view what) {
  if (cloud.empty()) throw EmptyCloudError(std::string(what));
}

// Structure-of-arrays copy used by the distance kernels.
struct SoaPoints {
  std::vector<double> x, y, z;

  SoaPoints() = default;
  explicit SoaPoints(std::span<const Vec3> pts);
  std::size_t size() const noexcept { return x.size(); }
};

}  // namespace declutter
