#include "declutter/occlusion/occlusion.hpp"

#include <algorithm>
#include <cmath>

#include "declutter/simd/kernels.hpp"

namespace declutter::occlusion {

void OcclusionParams::validate() const {
  if (k_pairs == 0) throw ConfigError("occlusion.k_pairs must be >= 1");
  if (k_local == 0) throw ConfigError("occlusion.k_local must be >= 1");
  if (!(d_th > 0.0)) throw ConfigError("occlusion.d_th must be > 0");
  if (!(d_sm > 0.0)) throw ConfigError("occlusion.d_sm must be > 0");
}

NearestPairSet nearest_pair_distances(const PointCloud& p1, const PointCloud& p2, std::size_t k) {
  require_non_empty(p1, "nearest_pair_distances(p1)");
  require_non_empty(p2, "nearest_pair_distances(p2)");
  if (k == 0) throw ConfigError("nearest_pair_distances: k must be >= 1");

  // Scan with the smaller cloud as the query side: fewer kernel calls.
  const PointCloud& query = p1.size() <= p2.size() ? p1 : p2;
  const PointCloud& target = p1.size() <= p2.size() ? p2 : p1;
  const SoaPoints soa(target.points);

  const std::size_t total = query.size() * target.size();
  const std::size_t eff = std::min(k, total);

  std::vector<double> heap;  // max-heap of squared distances
  heap.reserve(eff);
  std::vector<double> row(target.size());
  for (const auto& q : query.points) {
    simd::squared_distances(q.data(), soa.x.data(), soa.y.data(), soa.z.data(), soa.size(),
                            row.data());
    for (double d : row) {
      if (heap.size() < eff) {
        heap.push_back(d);
        std::push_heap(heap.begin(), heap.end());
      } else if (d < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = d;
        std::push_heap(heap.begin(), heap.end());
      }
    }
  }
  std::sort_heap(heap.begin(), heap.end());
  for (double& d : heap) d = std::sqrt(d);
  return NearestPairSet{std::move(heap), eff};
}

OcclusionStats occlusion_stats(const PointCloud& branches, const PointCloud& clearance,
                               const OcclusionParams& params) {
  params.validate();
  const auto set = nearest_pair_distances(branches, clearance, params.k_pairs);
  OcclusionStats s;
  s.effective_k = set.effective_k;
  for (double d : set.distances)
    if (d < params.d_th) ++s.breach_count;
  s.h = static_cast<double>(s.breach_count) / static_cast<double>(s.effective_k);
  return s;
}

double occlusion_heuristic(const PointCloud& branches, const PointCloud& clearance,
                           const OcclusionParams& params) {
  return occlusion_stats(branches, clearance, params).h;
}

double mean_knn_distance(const PointCloud& p1, const PointCloud& p2, std::size_t k) {
  const auto set = nearest_pair_distances(p1, p2, k);
  double s = 0.0;
  for (double d : set.distances) s += d;
  return s / static_cast<double>(set.distances.size());
}

bool safety_breach(const PointCloud& robot, const PointCloud& clearance,
                   const OcclusionParams& params) {
  params.validate();
  return mean_knn_distance(robot, clearance, params.k_local) < params.d_sm;
}

std::vector<double> ee_branch_distances(const PointCloud& ee, const PointCloud& branches,
                                        std::size_t k_local) {
  require_non_empty(ee, "ee_branch_distances(ee)");
  auto set = nearest_pair_distances(ee, branches, k_local);
  auto out = std::move(set.distances);
  const double pad = out.back();
  out.resize(k_local, pad);
  return out;
}

}  // namespace declutter::occlusion
