#pragma once

// Independent reference computations used by the unit and acceptance suites.
// Nothing here calls into the library's numeric paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "declutter/point_cloud.hpp"

namespace oracle {

using declutter::PointCloud;
using declutter::Vec3;

inline PointCloud uniform_cloud(std::mt19937_64& rng, std::size_t n, double lo = 0.0,
                                double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  PointCloud c;
  c.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng), y = u(rng), z = u(rng);
    c.points.emplace_back(x, y, z);
  }
  return c;
}

inline PointCloud translated(const PointCloud& c, const Vec3& t) {
  PointCloud out = c;
  for (auto& p : out.points) p += t;
  return out;
}

inline long double rbf(const Vec3& x, const Vec3& y, long double gamma) {
  long double s = 0.0L;
  for (int i = 0; i < 3; ++i) {
    const long double d = static_cast<long double>(x[i]) - static_cast<long double>(y[i]);
    s += d * d;
  }
  return std::exp(-s / (2.0L * gamma * gamma));
}

inline long double mean_inner(const PointCloud& p, const PointCloud& q, long double gamma) {
  long double s = 0.0L;
  for (const auto& a : p.points)
    for (const auto& b : q.points) s += rbf(a, b, gamma);
  return s / (static_cast<long double>(p.size()) * static_cast<long double>(q.size()));
}

// Every cross-cloud distance, fully materialized and sorted ascending.
inline std::vector<double> all_pair_distances_sorted(const PointCloud& a, const PointCloud& b) {
  std::vector<double> d;
  d.reserve(a.size() * b.size());
  for (const auto& p : a.points)
    for (const auto& q : b.points) {
      const double dx = p.x() - q.x();
      const double dy = p.y() - q.y();
      const double dz = p.z() - q.z();
      double s = dx * dx;
      s = s + dy * dy;
      s = s + dz * dz;
      d.push_back(std::sqrt(s));
    }
  std::sort(d.begin(), d.end());
  return d;
}

inline std::vector<double> k_smallest(const PointCloud& a, const PointCloud& b, std::size_t k) {
  auto d = all_pair_distances_sorted(a, b);
  d.resize(std::min(k, d.size()));
  return d;
}

inline double brute_h(const PointCloud& a, const PointCloud& b, std::size_t k, double d_th) {
  const auto d = k_smallest(a, b, k);
  std::size_t c = 0;
  for (double v : d)
    if (v < d_th) ++c;
  return static_cast<double>(c) / static_cast<double>(d.size());
}

inline double brute_mean_knn(const PointCloud& a, const PointCloud& b, std::size_t k) {
  const auto d = k_smallest(a, b, k);
  double s = 0.0;
  for (double v : d) s += v;
  return s / static_cast<double>(d.size());
}

// Advantages from the unrolled definition A_t = sum_l (beta lambda)^l delta_{t+l},
// with the product of continuation flags cutting the sum at episode ends.
inline std::vector<double> gae_unrolled(const std::vector<double>& r, const std::vector<double>& v,
                                        const std::vector<int>& done, double bootstrap,
                                        double beta, double lambda) {
  const std::size_t n = r.size();
  auto value_at = [&](std::size_t t) { return t < n ? v[t] : bootstrap; };
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t)
    delta[t] = r[t] + beta * value_at(t + 1) * (done[t] ? 0.0 : 1.0) - v[t];
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    long double acc = 0.0L, w = 1.0L;
    for (std::size_t l = t; l < n; ++l) {
      acc += w * delta[l];
      if (done[l]) break;
      w *= beta * lambda;
    }
    adv[t] = static_cast<double>(acc);
  }
  return adv;
}

}  // namespace oracle
