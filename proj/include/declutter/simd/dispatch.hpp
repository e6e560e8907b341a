#pragma once

#include <string_view>

namespace declutter::simd {

// Kernel family used by the data-parallel inner loops. The scalar family is the
// reference; every other family is tested for equivalence against it.
enum class Backend { scalar, avx2 };

std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view name);

// True when the binary was built with the AVX2 variants and the CPU reports
// both AVX2 and FMA.
bool avx2_available() noexcept;

// Best available backend, detected once. DECLUTTER_SIMD=scalar|avx2 in the
// environment overrides the detected default.
Backend detected_backend() noexcept;

Backend active_backend() noexcept;

// Throws ConfigError if the requested backend is not available.
void set_backend(Backend b);

class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) : previous_(active_backend()) { set_backend(b); }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace declutter::simd
