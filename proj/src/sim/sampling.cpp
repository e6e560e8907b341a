#include "declutter/sim/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "declutter/util/seed.hpp"

namespace declutter::sim {

namespace {

std::vector<Capsule> zoom_candidates(const TreePose& pose, const Capsule& line, double rho) {
  std::vector<Capsule> out;
  for (const auto& c : pose.links) {
    const auto cp = closest_points(c.origin, c.tip(), line.origin, line.tip());
    const double reach = rho + c.radius;
    if (cp.dist2 <= reach * reach) out.push_back(c);
  }
  return out;
}

enum Stream : std::uint64_t { kRobot = 1, kClearance, kWhole, kZoomed };

}  // namespace

void SensingConfig::validate() const {
  if (n_robot == 0 || n_clearance == 0 || n_whole_branch == 0 || n_zoomed_branch == 0)
    throw ConfigError("sensing: every cloud size must be >= 1");
  if (!(zoom_radius > 0.0)) throw ConfigError("sensing.zoom_radius must be > 0");
}

PointCloud sample_capsule_surfaces(std::span<const Capsule> capsules, std::size_t n,
                                   std::mt19937_64& rng, CloudTag tag) {
  if (capsules.empty()) throw EmptyCloudError("sample_capsule_surfaces: no bodies selected");
  std::vector<double> cum(capsules.size());
  double total = 0.0;
  for (std::size_t i = 0; i < capsules.size(); ++i) {
    total += 2.0 * std::numbers::pi * capsules[i].radius * capsules[i].length;
    cum[i] = total;
  }
  if (!(total > 0.0)) throw DomainError("sample_capsule_surfaces: zero surface area");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud out;
  out.tag = tag;
  out.points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double pick = unit(rng) * total;
    const std::size_t i = std::min<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), pick) - cum.begin(), capsules.size() - 1);
    const double u = unit(rng);
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const Capsule& c = capsules[i];
    const Vec3 local(c.radius * std::cos(phi), c.radius * std::sin(phi), u * c.length);
    out.points.push_back(c.origin + c.frame * local);
  }
  return out;
}

PointCloud sample_zoomed_or_empty(const WorldState& state, const TreePose& pose, std::size_t n,
                                  std::uint64_t seed, double zoom_radius) {
  PointCloud out;
  out.tag = CloudTag::zoomed_branch;
  const auto near = zoom_candidates(pose, state.line, zoom_radius);
  if (near.empty()) return out;
  std::mt19937_64 rng(seed);
  auto candidates = sample_capsule_surfaces(near, n, rng, CloudTag::zoomed_branch);
  const double r2 = zoom_radius * zoom_radius;
  for (const auto& p : candidates.points)
    if (point_segment_distance2(p, state.line.origin, state.line.tip()) <= r2) out.points.push_back(p);
  return out;
}

PointCloud sample_surface_points(const WorldState& state, BodySelector selector, std::size_t n,
                                 std::uint64_t seed, double zoom_radius) {
  std::mt19937_64 rng(seed);
  switch (selector) {
    case BodySelector::robot: {
      const auto pose = arm_pose(state);
      return sample_capsule_surfaces(pose.links, n, rng, CloudTag::robot);
    }
    case BodySelector::clearance:
      return sample_capsule_surfaces(std::span<const Capsule>(&state.line, 1), n, rng,
                                     CloudTag::clearance);
    case BodySelector::whole_branch: {
      const auto pose = tree_pose(state.tree, state.theta);
      return sample_capsule_surfaces(pose.links, n, rng, CloudTag::whole_branch);
    }
    case BodySelector::zoomed_branch: {
      const auto pose = tree_pose(state.tree, state.theta);
      auto out = sample_zoomed_or_empty(state, pose, n, seed, zoom_radius);
      if (out.empty()) throw EmptyCloudError("zoomed branch cloud: no branch surface near the line");
      return out;
    }
  }
  throw ConfigError("sample_surface_points: unknown selector");
}

SensedClouds sense_clouds(const WorldState& state, const SensingConfig& config, std::uint64_t seed) {
  SensedClouds c;
  const auto pose = tree_pose(state.tree, state.theta);
  {
    std::mt19937_64 rng(derive_seed(seed, kWhole));
    c.whole_branch = sample_capsule_surfaces(pose.links, config.n_whole_branch, rng,
                                             CloudTag::whole_branch);
  }
  c.zoomed_branch = sample_zoomed_or_empty(state, pose, config.n_zoomed_branch,
                                           derive_seed(seed, kZoomed), config.zoom_radius);
  c.clearance = sample_surface_points(state, BodySelector::clearance, config.n_clearance,
                                      derive_seed(seed, kClearance));
  c.robot = sample_surface_points(state, BodySelector::robot, config.n_robot,
                                  derive_seed(seed, kRobot));
  return c;
}

PointCloud add_cloud_noise(const PointCloud& cloud, double d_max, double subsample_fraction,
                           std::uint64_t seed) {
  require_non_empty(cloud, "add_cloud_noise");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
    throw DomainError("add_cloud_noise: subsample_fraction must be in (0, 1]");
  if (!(d_max >= 0.0) || !std::isfinite(d_max)) throw DomainError("add_cloud_noise: d_max must be >= 0");

  const std::size_t n = cloud.size();
  const auto keep = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(subsample_fraction * static_cast<double>(n))), 1, n);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  PointCloud out;
  out.tag = cloud.tag;
  out.points.reserve(keep);
  const double sigma = d_max / 3.0;
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  for (std::size_t i = 0; i < keep; ++i) {
    Vec3 p = cloud.points[order[i]];
    if (sigma > 0.0) {
      const double nx = noise(rng), ny = noise(rng), nz = noise(rng);
      p += Vec3(nx, ny, nz);
    }
    out.points.push_back(p);
  }
  return out;
}

}  // namespace declutter::sim
