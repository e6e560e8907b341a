#pragma once

#include <cstddef>
#include <vector>

#include "declutter/point_cloud.hpp"

namespace declutter::occlusion {

struct OcclusionParams {
  std::size_t k_pairs = 200;  // neighbourhood size of the heuristic
  double d_th = 0.10;         // breach threshold, meters (clearance cylinder diameter)
  std::size_t k_local = 5;    // local k-NN features
  double d_sm = 0.04;         // robot/line safety margin, meters

  void validate() const;
};

// The k smallest entries of the cross-cloud distance matrix, ascending.
struct NearestPairSet {
  std::vector<double> distances;
  std::size_t effective_k = 0;  // min(k, N1 * N2)
};

// Bounded max-heap scan over all N1 x N2 pairs; the full matrix is never stored.
// Squared distances come from simd::squared_distances, so the result is
// bit-identical for every backend.
NearestPairSet nearest_pair_distances(const PointCloud& p1, const PointCloud& p2, std::size_t k);

struct OcclusionStats {
  double h = 0.0;
  std::size_t breach_count = 0;
  std::size_t effective_k = 0;
};

// Fraction of the k nearest cross-cloud pairs closer than d_th (strict).
OcclusionStats occlusion_stats(const PointCloud& branches, const PointCloud& clearance,
                               const OcclusionParams& params);
double occlusion_heuristic(const PointCloud& branches, const PointCloud& clearance,
                           const OcclusionParams& params);

double mean_knn_distance(const PointCloud& p1, const PointCloud& p2, std::size_t k);

// True iff the mean of the k_local smallest robot/clearance distances is below d_sm.
bool safety_breach(const PointCloud& robot, const PointCloud& clearance,
                   const OcclusionParams& params);

// The k_local smallest ee-to-branch distances. When fewer pairs exist the last
// (largest) distance is repeated.
std::vector<double> ee_branch_distances(const PointCloud& ee, const PointCloud& branches,
                                        std::size_t k_local);

}  // namespace declutter::occlusion
