#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "declutter/kme/rff.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace declutter;
using kme::RffBasis;

namespace {

double sample_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / (v.size() - 1));
}

std::vector<double> column(const RffBasis& b, int c) {
  std::vector<double> out;
  for (const auto& w : b.frequencies()) out.push_back(w[c]);
  return out;
}

}  // namespace

TEST_CASE("rbf_kernel anchors") {
  const Vec3 x(0.3, 0.1, 0.9);
  CHECK(kme::rbf_kernel(x, x, 0.2) == 1.0);
  CHECK(kme::rbf_kernel(x, x, 7.0) == 1.0);
  const double g = 0.35;
  CHECK(kme::rbf_kernel(Vec3::Zero(), Vec3(g * std::sqrt(2.0), 0, 0), g) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(kme::rbf_kernel(Vec3(1, 2, 3), Vec3(-1, 0, 4), 1.3) ==
        kme::rbf_kernel(Vec3(-1, 0, 4), Vec3(1, 2, 3), 1.3));
}

TEST_CASE("rbf_kernel matches an extended-precision evaluation") {
  std::mt19937_64 rng(2);
  const auto c = oracle::uniform_cloud(rng, 200, -2, 2);
  for (std::size_t i = 0; i + 1 < c.size(); i += 2) {
    const double k = kme::rbf_kernel(c.points[i], c.points[i + 1], 1.0);
    CHECK(std::abs(k - static_cast<double>(oracle::rbf(c.points[i], c.points[i + 1], 1.0L))) <
          1e-12);
  }
}

TEST_CASE("rbf_kernel rejects non-finite input and bad bandwidth") {
  CHECK_THROWS_AS(kme::rbf_kernel(Vec3(NAN, 0, 0), Vec3::Zero(), 1.0), DomainError);
  CHECK_THROWS_AS(kme::rbf_kernel(Vec3::Zero(), Vec3(INFINITY, 0, 0), 1.0), DomainError);
  CHECK_THROWS_AS(kme::rbf_kernel(Vec3::Zero(), Vec3::Zero(), 0.0), DomainError);
}

TEST_CASE("basis sampling is deterministic and has the right shape") {
  const auto a = kme::sample_rff_basis(8, 1.0, 7);
  const auto b = kme::sample_rff_basis(8, 1.0, 7);
  CHECK(a == b);
  CHECK(a.num_pairs() == 8);
  CHECK(a.output_dim() == 16);
  CHECK_FALSE(a == kme::sample_rff_basis(8, 1.0, 8));
  CHECK_THROWS_AS(kme::sample_rff_basis(0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(kme::basis_for_output_dim(15, 1.0, 1), ConfigError);
  CHECK(kme::basis_for_output_dim(16, 1.0, 1).num_pairs() == 8);
}

TEST_CASE("frequency spread scales as 1/gamma") {
  const auto unit = kme::sample_rff_basis(10000, 1.0, 3);
  const auto half = kme::sample_rff_basis(10000, 0.5, 3);
  for (int c = 0; c < 3; ++c) {
    const double s1 = sample_std(column(unit, c));
    const double s2 = sample_std(column(half, c));
    CHECK(s1 >= 0.95);
    CHECK(s1 <= 1.05);
    CHECK(std::abs(s2 - 2.0) <= 0.1);
  }
}

TEST_CASE("feature map of the origin and unit norm") {
  const auto basis = kme::sample_rff_basis(8, 1.0, 1);
  const auto phi0 = kme::feature_map(Vec3::Zero(), basis);
  REQUIRE(phi0.size() == 16);
  for (std::size_t r = 0; r < 8; ++r) {
    CHECK(phi0[2 * r] == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-15));
    CHECK(phi0[2 * r + 1] == 0.0);
  }
  std::mt19937_64 rng(9);
  const auto c = oracle::uniform_cloud(rng, 500, -5, 5);
  for (const auto& p : c.points) {
    const auto phi = kme::feature_map(p, basis);
    double n = 0.0;
    for (double v : phi) n += v * v;
    CHECK(std::abs(std::sqrt(n) - 1.0) <= 1e-12);
  }
}

TEST_CASE("feature inner products approximate the kernel at F=4096") {
  const auto basis = kme::sample_rff_basis(4096, 1.0, 42);
  std::mt19937_64 rng(17);
  const auto c = oracle::uniform_cloud(rng, 2000);
  double err = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto& x = c.points[2 * i];
    const auto& y = c.points[2 * i + 1];
    const auto fx = kme::feature_map(x, basis), fy = kme::feature_map(y, basis);
    const double dot = std::inner_product(fx.begin(), fx.end(), fy.begin(), 0.0);
    err += std::abs(dot - static_cast<double>(oracle::rbf(x, y, 1.0L)));
  }
  CHECK(err / 1000.0 <= 0.02);
}

TEST_CASE("kernel approximation is unbiased over bases (F=64, 200 seeds)") {
  std::mt19937_64 rng(23);
  const auto c = oracle::uniform_cloud(rng, 10);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& x = c.points[2 * i];
    const auto& y = c.points[2 * i + 1];
    double mean = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      const auto basis = kme::sample_rff_basis(64, 1.0, 1000 + s);
      const auto fx = kme::feature_map(x, basis), fy = kme::feature_map(y, basis);
      mean += std::inner_product(fx.begin(), fx.end(), fy.begin(), 0.0);
    }
    mean /= 200.0;
    CHECK(std::abs(mean - static_cast<double>(oracle::rbf(x, y, 1.0L))) <= 0.02);
  }
}

TEST_CASE("embedding of a single point is its feature map") {
  const auto basis = kme::sample_rff_basis(8, 1.0, 4);
  const Vec3 p(0.4, -0.2, 0.75);
  const auto e = kme::embed_cloud(PointCloud({p}), basis);
  CHECK(e.source_count == 1);
  CHECK(e.values == kme::feature_map(p, basis));
}

TEST_CASE("embedding is exactly invariant to permutation and duplication") {
  const auto basis = kme::sample_rff_basis(8, 1.0, 5);
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto cloud = oracle::uniform_cloud(rng, 1 + trial * 13, -1, 1);
    const auto base = kme::embed_cloud(cloud, basis);

    auto shuffled = cloud;
    std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
    CHECK(kme::embed_cloud(shuffled, basis).values == base.values);

    PointCloud doubled;
    for (const auto& p : cloud.points) {
      doubled.points.push_back(p);
      doubled.points.push_back(p);
    }
    const auto d = kme::embed_cloud(doubled, basis);
    CHECK(d.values == base.values);
    CHECK(d.source_count == 2 * base.source_count);
    CHECK(kme::embed_cloud(cloud, basis).values == base.values);
    CHECK(base.norm() <= 1.0 + 1e-15);
  }
}

TEST_CASE("empty and non-finite clouds are rejected") {
  const auto basis = kme::sample_rff_basis(8, 1.0, 5);
  CHECK_THROWS_AS(kme::embed_cloud(PointCloud{}, basis), EmptyCloudError);
  CHECK_THROWS_AS(kme::embed_cloud(PointCloud({Vec3(0, NAN, 0)}), basis), DomainError);
  CHECK_THROWS_AS(kme::exact_mean_inner(PointCloud{}, PointCloud({Vec3::Zero()}), 1.0),
                  EmptyCloudError);
  CHECK_THROWS_AS(kme::mmd2(PointCloud({Vec3::Zero()}), PointCloud{}, 1.0), EmptyCloudError);
}

TEST_CASE("exact mean inner product: anchors and extended-precision oracle") {
  const PointCloud one({Vec3(0.1, 0.2, 0.3)});
  CHECK(kme::exact_mean_inner(one, one, 0.5) == 1.0);

  std::mt19937_64 rng(31);
  const auto a = oracle::uniform_cloud(rng, 16, 0, 0.5);
  const auto far = oracle::translated(oracle::uniform_cloud(rng, 16, 0, 0.5), Vec3(20, 0, 0));
  CHECK(kme::exact_mean_inner(a, far, 1.0) <= std::exp(-50.0));

  for (int t = 0; t < 20; ++t) {
    const auto p = oracle::uniform_cloud(rng, 8, -1, 1);
    const auto q = oracle::uniform_cloud(rng, 8, -1, 1);
    CHECK(std::abs(kme::exact_mean_inner(p, q, 0.8) -
                   static_cast<double>(oracle::mean_inner(p, q, 0.8L))) < 1e-12);
  }
}

TEST_CASE("embedding inner products track the Gram oracle at F=4096") {
  const auto basis = kme::sample_rff_basis(4096, 1.0, 99);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> size(1, 64);
  for (int t = 0; t < 25; ++t) {
    const auto p = oracle::uniform_cloud(rng, size(rng));
    const auto q = oracle::uniform_cloud(rng, size(rng));
    const double approx = kme::inner(kme::embed_cloud(p, basis), kme::embed_cloud(q, basis));
    CHECK(std::abs(approx - static_cast<double>(oracle::mean_inner(p, q, 1.0L))) <= 0.05);
  }
}

TEST_CASE("mmd2 identities and RFF approximation") {
  std::mt19937_64 rng(12);
  const auto p = oracle::uniform_cloud(rng, 30);
  CHECK(std::abs(kme::mmd2(p, p, 1.0)) <= 1e-9);

  const auto far = oracle::translated(p, Vec3(50, 50, 50));
  const double self = kme::exact_mean_inner(p, p, 1.0) + kme::exact_mean_inner(far, far, 1.0);
  CHECK(kme::mmd2(p, far, 1.0) == doctest::Approx(self).epsilon(1e-12));

  const auto basis = kme::sample_rff_basis(4096, 1.0, 3);
  for (int t = 0; t < 10; ++t) {
    const auto a = oracle::uniform_cloud(rng, 40);
    const auto b = oracle::translated(oracle::uniform_cloud(rng, 40), Vec3(0.3 * t, 0, 0));
    const double exact = kme::mmd2(a, b, 1.0);
    CHECK(exact >= -1e-9);
    const double approx =
        kme::squared_distance(kme::embed_cloud(a, basis), kme::embed_cloud(b, basis));
    CHECK(std::abs(approx - exact) <= 0.05);
  }
}

TEST_CASE("batched embedding equals sequential embedding") {
  const auto basis = kme::sample_rff_basis(8, 1.0, 6);
  std::mt19937_64 rng(4);
  std::vector<PointCloud> clouds;
  for (int i = 0; i < 9; ++i) clouds.push_back(oracle::uniform_cloud(rng, 50 + i));
  const auto seq = kme::embed_clouds(clouds, basis, 1);
  const auto par = kme::embed_clouds(clouds, basis, 4);
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    CHECK(seq[i].values == par[i].values);
    CHECK(seq[i].values == kme::embed_cloud(clouds[i], basis).values);
  }
}

TEST_CASE("basis binary format round-trips and rejects garbage") {
  const auto basis = kme::sample_rff_basis(8, 0.75, 123);
  std::stringstream ss;
  kme::write_basis(ss, basis);
  CHECK(ss.str().size() == 8 + 4 + 4 + 8 + 8 + 8 + 8 * 3 * 8);
  CHECK(kme::read_basis(ss) == basis);

  std::stringstream bad("not a basis at all, definitely not");
  CHECK_THROWS_AS(kme::read_basis(bad), FormatError);

  std::stringstream truncated(ss.str().substr(0, 50));
  std::string full;
  {
    std::stringstream again;
    kme::write_basis(again, basis);
    full = again.str();
  }
  std::stringstream cut(full.substr(0, full.size() - 5));
  CHECK_THROWS_AS(kme::read_basis(cut), FormatError);
}
