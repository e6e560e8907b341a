#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "declutter/sim/world.hpp"

namespace declutter::sim {

enum class BodySelector { robot, clearance, whole_branch, zoomed_branch };

struct SensingConfig {
  std::size_t n_robot = 256;
  std::size_t n_clearance = 256;
  std::size_t n_whole_branch = 512;
  std::size_t n_zoomed_branch = 512;
  double zoom_radius = 0.3;  // m around the clearance axis

  void validate() const;
};

// n points uniform over the lateral surfaces of the capsules (area weighted).
// Each point is drawn in its capsule's local frame and then mapped to world
// coordinates, so moving a capsule rigidly moves its samples with it.
PointCloud sample_capsule_surfaces(std::span<const Capsule> capsules, std::size_t n,
                                   std::mt19937_64& rng, CloudTag tag = CloudTag::generic);

// Zoomed selector draws n candidates from the links near the clearance axis
// and keeps those within zoom_radius of it, so it may return fewer than n.
// Throws EmptyCloudError when it keeps nothing.
PointCloud sample_surface_points(const WorldState& state, BodySelector selector, std::size_t n,
                                 std::uint64_t seed, double zoom_radius = 0.3);

// Same as above but returns an empty cloud instead of throwing.
PointCloud sample_zoomed_or_empty(const WorldState& state, const TreePose& pose, std::size_t n,
                                  std::uint64_t seed, double zoom_radius);

struct SensedClouds {
  PointCloud whole_branch;
  PointCloud zoomed_branch;  // may be empty
  PointCloud clearance;
  PointCloud robot;
};

SensedClouds sense_clouds(const WorldState& state, const SensingConfig& config, std::uint64_t seed);

// Keeps ceil(fraction * N) points chosen uniformly, in random order, and adds
// i.i.d. N(0, (d_max / 3)^2) noise to every coordinate.
PointCloud add_cloud_noise(const PointCloud& cloud, double d_max, double subsample_fraction,
                           std::uint64_t seed);

}  // namespace declutter::sim
