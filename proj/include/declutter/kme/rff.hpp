#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "declutter/point_cloud.hpp"

namespace declutter::kme {

// Gaussian RBF kernel exp(-|x - y|^2 / (2 gamma^2)).
double rbf_kernel(const Vec3& x, const Vec3& y, double gamma);

// Sampled spectral frequencies of the RBF kernel, one row per cos/sin pair.
// Immutable once built; share freely across threads.
class RffBasis {
 public:
  RffBasis(std::vector<Vec3> frequencies, double gamma, std::uint64_t seed);

  std::size_t num_pairs() const noexcept { return frequencies_.size(); }
  std::size_t output_dim() const noexcept { return 2 * frequencies_.size(); }
  double gamma() const noexcept { return gamma_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const Vec3> frequencies() const noexcept { return frequencies_; }

  // Structure-of-arrays view consumed by the SIMD kernels.
  const double* wx() const noexcept { return wx_.data(); }
  const double* wy() const noexcept { return wy_.data(); }
  const double* wz() const noexcept { return wz_.data(); }

  bool operator==(const RffBasis& other) const;

 private:
  std::vector<Vec3> frequencies_;
  std::vector<double> wx_, wy_, wz_;
  double gamma_;
  std::uint64_t seed_;
};

// Frequencies i.i.d. N(0, gamma^-2 I), drawn row by row from a 64-bit Mersenne
// Twister seeded with `seed`.
RffBasis sample_rff_basis(std::size_t num_pairs, double gamma, std::uint64_t seed);

// Basis sized by the embedding width (must be even): output_dim / 2 pairs.
RffBasis basis_for_output_dim(std::size_t output_dim, double gamma, std::uint64_t seed);

struct Embedding {
  std::vector<double> values;
  std::size_t source_count = 0;

  double norm() const;
};

// Interleaved [cos(w_1.x), sin(w_1.x), ..., sin(w_F.x)] / sqrt(F).
std::vector<double> feature_map(const Vec3& x, const RffBasis& basis);

// Empirical kernel mean: the average of feature_map over the cloud. One pass
// over the points, O(N F). The per-feature sums are accumulated exactly in
// 2^-60 fixed point, so the result is bit-identical under any permutation or
// uniform duplication of the points.
Embedding embed_cloud(const PointCloud& cloud, const RffBasis& basis);

// Embeds every cloud with the same basis. `threads` > 1 splits the clouds
// across workers; output is identical to the sequential result.
std::vector<Embedding> embed_clouds(std::span<const PointCloud> clouds, const RffBasis& basis,
                                    unsigned threads = 1);

double inner(const Embedding& a, const Embedding& b);
double squared_distance(const Embedding& a, const Embedding& b);

// (1 / (Np Nq)) sum_i sum_j k(p_i, q_j): the Gram-matrix value the RFF inner
// product approximates. O(Np Nq).
double exact_mean_inner(const PointCloud& p, const PointCloud& q, double gamma);

// Biased MMD^2 estimate from the three exact mean inner products.
double mmd2(const PointCloud& p, const PointCloud& q, double gamma);

// Flat little-endian binary: magic "DCRFFB\0\0", u32 version, u32 reserved,
// u64 num_pairs, f64 gamma, u64 seed, then num_pairs * 3 f64 row-major.
inline constexpr std::uint32_t kBasisFormatVersion = 1;
void write_basis(std::ostream& out, const RffBasis& basis);
RffBasis read_basis(std::istream& in);
void save_basis(const std::string& path, const RffBasis& basis);
RffBasis load_basis(const std::string& path);

}  // namespace declutter::kme
