#include <random>

#include "declutter/occlusion/occlusion.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace declutter;
using namespace declutter::occlusion;

TEST_CASE("nearest pairs: degenerate overlap and single query") {
  const PointCloud three({Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(1, 1, 1)});
  const auto s = nearest_pair_distances(three, three, 5);
  CHECK(s.effective_k == 5);
  CHECK(s.distances == std::vector<double>(5, 0.0));

  const PointCloud origin({Vec3::Zero()});
  const PointCloud line({Vec3(1, 0, 0), Vec3(2, 0, 0)});
  CHECK(nearest_pair_distances(origin, line, 1).distances == std::vector<double>{1.0});
  const auto all = nearest_pair_distances(origin, line, 10);
  CHECK(all.effective_k == 2);
  CHECK(all.distances == std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(nearest_pair_distances(PointCloud{}, line, 1), EmptyCloudError);
  CHECK_THROWS_AS(nearest_pair_distances(origin, line, 0), ConfigError);
}

TEST_CASE("nearest pairs match the full-matrix sort exactly") {
  std::mt19937_64 rng(50);
  const auto a = oracle::uniform_cloud(rng, 50);
  const auto b = oracle::uniform_cloud(rng, 50);
  CHECK(nearest_pair_distances(a, b, 200).distances == oracle::k_smallest(a, b, 200));
  CHECK(nearest_pair_distances(b, a, 200).distances == oracle::k_smallest(a, b, 200));
}

TEST_CASE("occlusion heuristic anchors") {
  OcclusionParams p;
  std::mt19937_64 rng(3);
  // Every pair of a 5 cm cube is within d_th.
  const auto c = oracle::uniform_cloud(rng, 30, 0.0, 0.05);
  CHECK(occlusion_heuristic(c, c, p) == 1.0);
  const auto far = oracle::translated(c, Vec3(0, 0, 2.0));
  CHECK(occlusion_heuristic(c, far, p) == 0.0);
  CHECK_THROWS_AS(occlusion_heuristic(PointCloud{}, c, p), EmptyCloudError);
}

TEST_CASE("occlusion heuristic matches brute force on mixed distances") {
  OcclusionParams p;
  p.k_pairs = 50;
  std::mt19937_64 rng(61);
  for (int t = 0; t < 20; ++t) {
    const auto a = oracle::uniform_cloud(rng, 20, 0.0, 0.4);
    const auto b = oracle::uniform_cloud(rng, 20, 0.15, 0.55);
    const auto st = occlusion_stats(a, b, p);
    CHECK(st.h == oracle::brute_h(a, b, 50, p.d_th));
    CHECK(st.effective_k == 50);
    CHECK(st.h >= 0.0);
    CHECK(st.h <= 1.0);
  }
}

TEST_CASE("threshold is strict and ties share their breach status") {
  OcclusionParams p;
  p.d_th = 0.5;
  p.k_pairs = 2;
  // Exactly representable distances 0.25, 0.5, 0.5, 0.5.
  const PointCloud a({Vec3::Zero()});
  const PointCloud b({Vec3(0.5, 0, 0), Vec3(0, 0.5, 0), Vec3(0.25, 0, 0), Vec3(0, 0, 0.5)});
  const auto st = occlusion_stats(a, b, p);
  CHECK(st.breach_count == 1);
  CHECK(st.h == 0.5);
  p.k_pairs = 3;
  CHECK(occlusion_heuristic(a, b, p) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("heuristic is symmetric and monotone") {
  std::mt19937_64 rng(71);
  OcclusionParams p;
  p.k_pairs = 40;
  for (int t = 0; t < 20; ++t) {
    const auto a = oracle::uniform_cloud(rng, 25, 0.0, 0.3);
    const auto b = oracle::uniform_cloud(rng, 30, 0.1, 0.4);
    CHECK(occlusion_heuristic(a, b, p) == occlusion_heuristic(b, a, p));

    double prev = -1.0;
    for (double th : {0.01, 0.03, 0.05, 0.1, 0.2, 0.4}) {
      OcclusionParams q = p;
      q.d_th = th;
      const double h = occlusion_heuristic(a, b, q);
      CHECK(h >= prev);
      prev = h;
    }

    // Translate b away along the line of centers.
    Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
    for (auto& x : a.points) ca += x;
    for (auto& x : b.points) cb += x;
    const Vec3 dir = (cb / b.size() - ca / a.size()).normalized();
    prev = 2.0;
    for (double s = 0.0; s < 0.5; s += 0.05) {
      const double h = occlusion_heuristic(a, oracle::translated(b, dir * s), p);
      CHECK(h <= prev);
      prev = h;
    }
  }
}

TEST_CASE("mean k-NN distance") {
  const PointCloud o({Vec3::Zero()});
  CHECK(mean_knn_distance(o, o, 5) == 0.0);
  const PointCloud two({Vec3(1, 0, 0), Vec3(3, 0, 0)});
  CHECK(mean_knn_distance(o, two, 2) == 2.0);
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    const auto a = oracle::uniform_cloud(rng, 12), b = oracle::uniform_cloud(rng, 9);
    CHECK(mean_knn_distance(a, b, 5) == oracle::brute_mean_knn(a, b, 5));
  }
}

TEST_CASE("safety breach indicator") {
  OcclusionParams p;
  std::mt19937_64 rng(14);
  const auto c = oracle::uniform_cloud(rng, 20);
  CHECK(safety_breach(c, c, p));
  CHECK_FALSE(safety_breach(c, oracle::translated(c, Vec3(0, 0, 3)), p));
  // Every robot-line pair exactly d_sm apart (0.0625 is exact in binary).
  p.d_sm = 0.0625;
  const PointCloud robot({Vec3::Zero()});
  PointCloud line;
  for (int i = 0; i < 5; ++i) line.points.emplace_back(0.0625, 0.0, 0.0);
  CHECK(mean_knn_distance(robot, line, 5) == 0.0625);
  CHECK_FALSE(safety_breach(robot, line, p));
  p.d_sm = std::nextafter(0.0625, 1.0);
  CHECK(safety_breach(robot, line, p));
}

TEST_CASE("ee-branch distances with and without padding") {
  const PointCloud ee({Vec3::Zero()});
  PointCloud branch;
  for (double d : {0.9, 0.5, 0.7, 0.6, 0.8}) branch.points.emplace_back(0, d, 0);
  CHECK(ee_branch_distances(ee, branch, 5) == std::vector<double>{0.5, 0.6, 0.7, 0.8, 0.9});

  const PointCloud few({Vec3(0, 0.3, 0), Vec3(0, 0, 0.1), Vec3(0.2, 0, 0)});
  CHECK(ee_branch_distances(ee, few, 5) == std::vector<double>{0.1, 0.2, 0.3, 0.3, 0.3});
  CHECK_THROWS_AS(ee_branch_distances(PointCloud{}, few, 5), EmptyCloudError);

  std::mt19937_64 rng(15);
  const auto e = oracle::uniform_cloud(rng, 1), b = oracle::uniform_cloud(rng, 40);
  CHECK(ee_branch_distances(e, b, 5) == oracle::k_smallest(e, b, 5));
}
