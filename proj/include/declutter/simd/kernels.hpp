#pragma once

#include <cmath>
#include <cstddef>

#include "declutter/simd/dispatch.hpp"

// Data-parallel inner loops. Each kernel exists as a scalar reference and as
// an AVX2 variant; the unqualified entry points dispatch on active_backend().
//
// Contracts shared by all variants:
//  * squared_distances: out[i] = (dx*dx + dy*dy) + dz*dz with d = p - q, in
//    exactly that evaluation order and without fused multiply-add, so every
//    variant returns bit-identical values.
//  * rff_accumulate: for each point and each frequency r, adds
//    quantize(cos(w_r . p)) to cos_sum[r] and quantize(sin(w_r . p)) to
//    sin_sum[r], where quantize(v) = llrint(v * 2^60). The projection is
//    evaluated as (wx*px + wy*py) + wz*pz. Integer accumulation makes the sums
//    independent of point order. Variants may differ in the last few ulps of
//    sin/cos and therefore in the low bits of the sums.
namespace declutter::simd {

using FixedAccum = __int128;
inline constexpr double kFixedScale = 1152921504606846976.0;         // 2^60
inline constexpr double kFixedInvScale = 8.6736173798840354720e-19;  // 2^-60

inline FixedAccum quantize(double v) noexcept { return std::llrint(v * kFixedScale); }

struct RffKernelArgs {
  const double* points;  // n * 3, interleaved xyz
  std::size_t num_points;
  const double* wx;  // num_freq each
  const double* wy;
  const double* wz;
  std::size_t num_freq;
  FixedAccum* cos_sum;  // num_freq, accumulated into
  FixedAccum* sin_sum;
};

void squared_distances(const double q[3], const double* xs, const double* ys, const double* zs,
                       std::size_t n, double* out);
void rff_accumulate(const RffKernelArgs& args);
void sincos(const double* x, std::size_t n, double* sin_out, double* cos_out);

namespace scalar {
void squared_distances(const double q[3], const double* xs, const double* ys, const double* zs,
                       std::size_t n, double* out);
void rff_accumulate(const RffKernelArgs& args);
void sincos(const double* x, std::size_t n, double* sin_out, double* cos_out);
}  // namespace scalar

#if defined(DECLUTTER_HAVE_AVX2)
namespace avx2 {
void squared_distances(const double q[3], const double* xs, const double* ys, const double* zs,
                       std::size_t n, double* out);
void rff_accumulate(const RffKernelArgs& args);
void sincos(const double* x, std::size_t n, double* sin_out, double* cos_out);
}  // namespace avx2
#endif

}  // namespace declutter::simd
