#include <cmath>

#include "declutter/simd/kernels.hpp"

namespace declutter::simd::scalar {

void squared_distances(const double q[3], const double* xs, const double* ys, const double* zs,
                       std::size_t n, double* out) {
  const double qx = q[0], qy = q[1], qz = q[2];
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double dz = zs[i] - qz;
    double d = dx * dx;
    d = d + dy * dy;
    d = d + dz * dz;
    out[i] = d;
  }
}

void rff_accumulate(const RffKernelArgs& a) {
  for (std::size_t i = 0; i < a.num_points; ++i) {
    const double px = a.points[3 * i + 0];
    const double py = a.points[3 * i + 1];
    const double pz = a.points[3 * i + 2];
    for (std::size_t r = 0; r < a.num_freq; ++r) {
      double proj = a.wx[r] * px;
      proj = proj + a.wy[r] * py;
      proj = proj + a.wz[r] * pz;
      a.cos_sum[r] += quantize(std::cos(proj));
      a.sin_sum[r] += quantize(std::sin(proj));
    }
  }
}

void sincos(const double* x, std::size_t n, double* sin_out, double* cos_out) {
  for (std::size_t i = 0; i < n; ++i) {
    sin_out[i] = std::sin(x[i]);
    cos_out[i] = std::cos(x[i]);
  }
}

}  // namespace declutter::simd::scalar
