// AVX2 + FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after avx2_available() returned true.
#include <immintrin.h>

#include <cmath>

#include "declutter/simd/kernels.hpp"

namespace declutter::simd::avx2 {

namespace {

// Cody-Waite split of pi/4 and the minimax polynomials of the Cephes sin/cos
// routines, valid on [-pi/4, pi/4].
constexpr double kFourOverPi = 1.27323954473516268615;
constexpr double kDP1 = 7.85398125648498535156e-1;
constexpr double kDP2 = 3.77489470793079817668e-8;
constexpr double kDP3 = 2.69515142907905952645e-15;
// Beyond this the three-term reduction loses bits; such lanes go to libm.
constexpr double kMaxReducedArg = 1.0e7;

constexpr double kSinCoef[6] = {1.58962301576546568060e-10, -2.50507477628578072866e-8,
                                2.75573136213857245213e-6,  -1.98412698295895385996e-4,
                                8.33333333332211858878e-3,  -1.66666666666666307295e-1};
constexpr double kCosCoef[6] = {-1.13585365213876817300e-11, 2.08757008419747316778e-9,
                                -2.75573141792967388112e-7,  2.48015872888517045348e-5,
                                -1.38888888888730564116e-3,  4.16666666666665929218e-2};

inline __m256d horner6(__m256d x, const double (&c)[6]) {
  __m256d acc = _mm256_set1_pd(c[0]);
  for (int i = 1; i < 6; ++i) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
  return acc;
}

inline __m256d int_mask_to_pd(__m128i bits) {
  return _mm256_cmp_pd(_mm256_cvtepi32_pd(bits), _mm256_setzero_pd(), _CMP_NEQ_OQ);
}

// Four-lane sin/cos. Returns false if any lane is outside the reduction range
// (or NaN); the caller then falls back to libm for that vector.
inline bool sincos4(__m256d x, __m256d& s_out, __m256d& c_out) {
  const __m256d sign_bit = _mm256_set1_pd(-0.0);
  const __m256d sign_x = _mm256_and_pd(x, sign_bit);
  const __m256d ax = _mm256_andnot_pd(sign_bit, x);

  const __m256d in_range = _mm256_cmp_pd(ax, _mm256_set1_pd(kMaxReducedArg), _CMP_LE_OQ);
  if (_mm256_movemask_pd(in_range) != 0xF) return false;

  __m256d y = _mm256_floor_pd(_mm256_mul_pd(ax, _mm256_set1_pd(kFourOverPi)));
  __m128i j = _mm256_cvttpd_epi32(y);
  j = _mm_add_epi32(j, _mm_and_si128(j, _mm_set1_epi32(1)));
  y = _mm256_cvtepi32_pd(j);

  __m256d z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP1), ax);
  z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP2), z);
  z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP3), z);
  const __m256d zz = _mm256_mul_pd(z, z);

  const __m256d sin_poly = _mm256_fmadd_pd(_mm256_mul_pd(z, zz), horner6(zz, kSinCoef), z);
  const __m256d cos_base = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), zz, _mm256_set1_pd(1.0));
  const __m256d cos_poly =
      _mm256_fmadd_pd(_mm256_mul_pd(zz, zz), horner6(zz, kCosCoef), cos_base);

  // Quadrant q = (j / 2) mod 4 selects and signs the two polynomials.
  const __m128i q = _mm_and_si128(_mm_srli_epi32(j, 1), _mm_set1_epi32(3));
  const __m256d swap = int_mask_to_pd(_mm_and_si128(q, _mm_set1_epi32(1)));
  const __m256d sin_neg = int_mask_to_pd(_mm_and_si128(q, _mm_set1_epi32(2)));
  const __m256d cos_neg =
      int_mask_to_pd(_mm_and_si128(_mm_add_epi32(q, _mm_set1_epi32(1)), _mm_set1_epi32(2)));

  __m256d s = _mm256_blendv_pd(sin_poly, cos_poly, swap);
  __m256d c = _mm256_blendv_pd(cos_poly, sin_poly, swap);
  s = _mm256_xor_pd(s, _mm256_and_pd(sin_neg, sign_bit));
  s = _mm256_xor_pd(s, sign_x);
  c = _mm256_xor_pd(c, _mm256_and_pd(cos_neg, sign_bit));
  s_out = s;
  c_out = c;
  return true;
}

inline void sincos4_any(__m256d x, __m256d& s, __m256d& c) {
  if (sincos4(x, s, c)) return;
  alignas(32) double xv[4], sv[4], cv[4];
  _mm256_store_pd(xv, x);
  for (int i = 0; i < 4; ++i) {
    sv[i] = std::sin(xv[i]);
    cv[i] = std::cos(xv[i]);
  }
  s = _mm256_load_pd(sv);
  c = _mm256_load_pd(cv);
}

}  // namespace

void squared_distances(const double q[3], const double* xs, const double* ys, const double* zs,
                       std::size_t n, double* out) {
  const __m256d qx = _mm256_set1_pd(q[0]);
  const __m256d qy = _mm256_set1_pd(q[1]);
  const __m256d qz = _mm256_set1_pd(q[2]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), qx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), qy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), qz);
    // No FMA here: must round exactly like the scalar reference.
    __m256d d = _mm256_mul_pd(dx, dx);
    d = _mm256_add_pd(d, _mm256_mul_pd(dy, dy));
    d = _mm256_add_pd(d, _mm256_mul_pd(dz, dz));
    _mm256_storeu_pd(out + i, d);
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - q[0];
    const double dy = ys[i] - q[1];
    const double dz = zs[i] - q[2];
    double d = dx * dx;
    d = d + dy * dy;
    d = d + dz * dz;
    out[i] = d;
  }
}

void rff_accumulate(const RffKernelArgs& a) {
  const std::size_t blocks = a.num_freq / 4;
  const std::size_t tail = blocks * 4;
  for (std::size_t i = 0; i < a.num_points; ++i) {
    const double px = a.points[3 * i + 0];
    const double py = a.points[3 * i + 1];
    const double pz = a.points[3 * i + 2];
    const __m256d vx = _mm256_set1_pd(px);
    const __m256d vy = _mm256_set1_pd(py);
    const __m256d vz = _mm256_set1_pd(pz);
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t r = 4 * b;
      __m256d proj = _mm256_mul_pd(_mm256_loadu_pd(a.wx + r), vx);
      proj = _mm256_add_pd(proj, _mm256_mul_pd(_mm256_loadu_pd(a.wy + r), vy));
      proj = _mm256_add_pd(proj, _mm256_mul_pd(_mm256_loadu_pd(a.wz + r), vz));
      __m256d s, c;
      sincos4_any(proj, s, c);
      alignas(32) double sv[4], cv[4];
      _mm256_store_pd(sv, s);
      _mm256_store_pd(cv, c);
      for (int l = 0; l < 4; ++l) {
        a.cos_sum[r + l] += quantize(cv[l]);
        a.sin_sum[r + l] += quantize(sv[l]);
      }
    }
    for (std::size_t r = tail; r < a.num_freq; ++r) {
      double proj = a.wx[r] * px;
      proj = proj + a.wy[r] * py;
      proj = proj + a.wz[r] * pz;
      a.cos_sum[r] += quantize(std::cos(proj));
      a.sin_sum[r] += quantize(std::sin(proj));
    }
  }
}

void sincos(const double* x, std::size_t n, double* sin_out, double* cos_out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s, c;
    sincos4_any(_mm256_loadu_pd(x + i), s, c);
    _mm256_storeu_pd(sin_out + i, s);
    _mm256_storeu_pd(cos_out + i, c);
  }
  for (; i < n; ++i) {
    sin_out[i] = std::sin(x[i]);
    cos_out[i] = std::cos(x[i]);
  }
}

}  // namespace declutter::simd::avx2
