// Backend selection only; no intrinsics in this file.
#include "declutter/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "declutter/error.hpp"
#include "declutter/simd/kernels.hpp"

namespace declutter::simd {

namespace {

Backend detect() noexcept {
  Backend best = avx2_available() ? Backend::avx2 : Backend::scalar;
  if (const char* env = std::getenv("DECLUTTER_SIMD")) {
    std::string_view v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && avx2_available()) return Backend::avx2;
  }
  return best;
}

std::atomic<Backend>& active_slot() {
  static std::atomic<Backend> slot{detected_backend()};
  return slot;
}

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "unknown";
}

Backend backend_from_string(std::string_view name) {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  throw ConfigError("unknown SIMD backend '" + std::string(name) + "'");
}

bool avx2_available() noexcept {
#if defined(DECLUTTER_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Backend detected_backend() noexcept {
  static const Backend b = detect();
  return b;
}

Backend active_backend() noexcept { return active_slot().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_available())
    throw ConfigError("SIMD backend 'avx2' is not available on this CPU/build");
  active_slot().store(b, std::memory_order_relaxed);
}

void squared_distances(const double q[3], const double* xs, const double* ys, const double* zs,
                       std::size_t n, double* out) {
#if defined(DECLUTTER_HAVE_AVX2)
  if (active_backend() == Backend::avx2) return avx2::squared_distances(q, xs, ys, zs, n, out);
#endif
  scalar::squared_distances(q, xs, ys, zs, n, out);
}

void rff_accumulate(const RffKernelArgs& args) {
#if defined(DECLUTTER_HAVE_AVX2)
  if (active_backend() == Backend::avx2) return avx2::rff_accumulate(args);
#endif
  scalar::rff_accumulate(args);
}

void sincos(const double* x, std::size_t n, double* sin_out, double* cos_out) {
#if defined(DECLUTTER_HAVE_AVX2)
  if (active_backend() == Backend::avx2) return avx2::sincos(x, n, sin_out, cos_out);
#endif
  scalar::sincos(x, n, sin_out, cos_out);
}

}  // namespace declutter::simd
