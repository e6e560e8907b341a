#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "declutter/kme/rff.hpp"
#include "declutter/simd/dispatch.hpp"
#include "declutter/simd/kernels.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace declutter;

namespace {

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("backend names round-trip and unknown names are rejected") {
  CHECK(simd::backend_from_string("scalar") == simd::Backend::scalar);
  CHECK(simd::backend_from_string("avx2") == simd::Backend::avx2);
  CHECK(simd::to_string(simd::Backend::avx2) == "avx2");
  CHECK_THROWS_AS(simd::backend_from_string("neon9"), ConfigError);
}

TEST_CASE("scoped backend restores the previous selection") {
  const auto before = simd::active_backend();
  {
    simd::ScopedBackend s(simd::Backend::scalar);
    CHECK(simd::active_backend() == simd::Backend::scalar);
  }
  CHECK(simd::active_backend() == before);
}

#if defined(DECLUTTER_HAVE_AVX2)

TEST_CASE("squared distances: AVX2 is bit-identical to scalar, including tails") {
  if (!simd::avx2_available()) return;
  std::mt19937_64 rng(11);
  for (std::size_t n = 0; n < 40; ++n) {
    auto xs = uniform(rng, n, -3, 3), ys = uniform(rng, n, -3, 3), zs = uniform(rng, n, -3, 3);
    const double q[3] = {0.3, -1.7, 2.2};
    std::vector<double> a(n), b(n);
    simd::scalar::squared_distances(q, xs.data(), ys.data(), zs.data(), n, a.data());
    simd::avx2::squared_distances(q, xs.data(), ys.data(), zs.data(), n, b.data());
    CHECK(std::memcmp(a.data(), b.data(), n * sizeof(double)) == 0);
  }
}

TEST_CASE("sincos: AVX2 polynomial agrees with libm") {
  if (!simd::avx2_available()) return;
  std::mt19937_64 rng(5);
  for (double range : {1.0, 10.0, 1000.0, 1.0e6}) {
    auto x = uniform(rng, 4099, -range, range);
    std::vector<double> s(x.size()), c(x.size());
    simd::avx2::sincos(x.data(), x.size(), s.data(), c.data());
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst = std::max(worst, std::abs(s[i] - std::sin(x[i])));
      worst = std::max(worst, std::abs(c[i] - std::cos(x[i])));
    }
    INFO("range " << range);
    CHECK(worst < 1e-15 * std::max(1.0, range * 1e-6 * 10));
  }
}

TEST_CASE("sincos: exact quadrant points and non-reducible inputs") {
  if (!simd::avx2_available()) return;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> x = {0.0, -0.0, M_PI / 2, M_PI, -M_PI / 2, 3 * M_PI / 2, 2e7, -5e8, inf,
                           std::nan("")};
  std::vector<double> s(x.size()), c(x.size());
  simd::avx2::sincos(x.data(), x.size(), s.data(), c.data());
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(std::abs(s[i] - std::sin(x[i])) < 1e-15);
    CHECK(std::abs(c[i] - std::cos(x[i])) < 1e-15);
  }
  CHECK(std::isnan(s[8]));
  CHECK(std::isnan(c[9]));
}

TEST_CASE("RFF accumulation: AVX2 matches scalar for every basis width") {
  if (!simd::avx2_available()) return;
  std::mt19937_64 rng(101);
  for (std::size_t pairs : {1u, 3u, 4u, 5u, 8u, 13u, 64u}) {
    const auto basis = kme::sample_rff_basis(pairs, 0.7, pairs);
    const auto cloud = oracle::uniform_cloud(rng, 257, -1.0, 2.0);
    kme::Embedding a, b;
    {
      simd::ScopedBackend s(simd::Backend::scalar);
      a = kme::embed_cloud(cloud, basis);
    }
    {
      simd::ScopedBackend s(simd::Backend::avx2);
      b = kme::embed_cloud(cloud, basis);
    }
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-14);
  }
}

#endif
