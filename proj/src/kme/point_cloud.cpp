#include "declutter/point_cloud.hpp"

#include <string>

namespace declutter {

std::string_view to_string(CloudTag tag) {
  switch (tag) {
    case CloudTag::robot: return "robot";
    case CloudTag::clearance: return "clearance";
    case CloudTag::whole_branch: return "whole_branch";
    case CloudTag::zoomed_branch: return "zoomed_branch";
    case CloudTag::generic: return "generic";
  }
  return "generic";
}

CloudTag cloud_tag_from_string(std::string_view name) {
  if (name == "robot") return CloudTag::robot;
  if (name == "clearance") return CloudTag::clearance;
  if (name == "whole_branch") return CloudTag::whole_branch;
  if (name == "zoomed_branch") return CloudTag::zoomed_branch;
  if (name == "generic") return CloudTag::generic;
  throw ConfigError("unknown cloud tag '" + std::string(name) + "'");
}

void require_finite(std::span<const Vec3> points, std::string_view what) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!is_finite(points[i]))
      throw DomainError(std::string(what) + ": non-finite coordinate at point " +
                        std::to_string(i));
  }
}

SoaPoints::SoaPoints(std::span<const Vec3> pts) {
  x.resize(pts.size());
  y.resize(pts.size());
  z.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    x[i] = pts[i].x();
    y[i] = pts[i].y();
    z[i] = pts[i].z();
  }
}

}  // namespace declutter
