#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace declutter::bench {

struct BenchConfig {
  std::vector<int> env_counts = {1, 64, 512};
  std::size_t cloud_size = 512;                                   // points per cloud
  std::vector<std::size_t> sweep = {512, 1024, 2048, 4096, 8192};  // N for the scaling table
  std::size_t width = 16;                                          // embedding width (2 x pairs)
  int repetitions = 25;
  int warmup = 3;
  double gamma = 0.25;
  std::size_t gram_max_n = 2048;  // the O(N^2) baseline is skipped above this size
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const;
};

struct Timing {
  double median_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
  int repetitions = 0;
};

// Times fn() `warmup` times untimed, then `repetitions` times on the steady clock.
template <class Fn>
Timing time_median(int warmup, int repetitions, Fn&& fn);

struct BatchRow {
  int env_count = 0;
  Timing kme;  // all 4 features for every env, one control step
};

struct ScalingRow {
  std::size_t n = 0;
  Timing kme;                  // 4 clouds, E = 1
  std::optional<Timing> gram;  // 4 exact Gram means of each cloud with itself
};

struct BenchReport {
  BenchConfig config;
  std::vector<BatchRow> batch;
  double gf_t_single_s = 0.0;  // E = 1 at cloud_size
  std::vector<ScalingRow> scaling;
  std::optional<double> gram_speedup;  // gram / kme at cloud_size
  std::optional<double> scaling_ratio;  // kme(max sweep N) / kme(min sweep N)
};

// Measured region: embedding of pre-generated clouds only. Cloud generation,
// basis construction and any file I/O happen before the clock starts.
BenchReport run_bench(const BenchConfig& config);

std::string report_json(const BenchReport& report, int indent = 2);
std::string report_table(const BenchReport& report);

}  // namespace declutter::bench

#include <algorithm>
#include <chrono>

namespace declutter::bench {

template <class Fn>
Timing time_median(int warmup, int repetitions, Fn&& fn) {
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(repetitions));
  for (int i = 0; i < repetitions; ++i) {
    const auto a = std::chrono::steady_clock::now();
    fn();
    const auto b = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double>(b - a).count());
  }
  std::sort(t.begin(), t.end());
  Timing r;
  r.repetitions = repetitions;
  const std::size_t n = t.size();
  r.median_s = n % 2 ? t[n / 2] : 0.5 * (t[n / 2 - 1] + t[n / 2]);
  r.min_s = t.front();
  r.max_s = t.back();
  return r;
}

}  // namespace declutter::bench
