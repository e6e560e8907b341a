#include "declutter/bench/bench.hpp"

#include <cstdio>
#include <random>

#include "declutter/error.hpp"
#include "declutter/kme/rff.hpp"
#include "declutter/util/parallel.hpp"
#include "declutter/util/seed.hpp"
#include "json.hpp"

namespace declutter::bench {

using nlohmann::ordered_json;
using namespace declutter::kme;

namespace {

constexpr int kFeatures = 4;

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  PointCloud c;
  c.points.resize(n);
  for (auto& p : c.points) p = Vec3(u(rng), u(rng), u(rng));
  return c;
}

// clouds[e * 4 + f] for env e, feature f.
std::vector<PointCloud> make_clouds(int envs, std::size_t n, std::uint64_t seed) {
  std::vector<PointCloud> out;
  out.reserve(static_cast<std::size_t>(envs) * kFeatures);
  for (int i = 0; i < envs * kFeatures; ++i) out.push_back(random_cloud(n, derive_seed(seed, static_cast<std::uint64_t>(i))));
  return out;
}

Timing time_features(const std::vector<PointCloud>& clouds, const std::vector<RffBasis>& bases,
                     const BenchConfig& cfg) {
  const std::size_t envs = clouds.size() / kFeatures;
  std::vector<Embedding> sink(clouds.size());
  return time_median(cfg.warmup, cfg.repetitions, [&] {
    parallel_for(envs, cfg.threads, [&](std::size_t e) {
      for (int f = 0; f < kFeatures; ++f) {
        const auto i = e * kFeatures + static_cast<std::size_t>(f);
        sink[i] = embed_cloud(clouds[i], bases[static_cast<std::size_t>(f)]);
      }
    });
  });
}

ordered_json timing_json(const Timing& t) {
  return {{"median_s", t.median_s}, {"min_s", t.min_s}, {"max_s", t.max_s}, {"repetitions", t.repetitions}};
}

}  // namespace

void BenchConfig::validate() const {
  if (env_counts.empty()) throw ConfigError("bench.env_counts must not be empty");
  for (int e : env_counts)
    if (e < 1) throw ConfigError("bench.env_counts entries must be >= 1");
  if (cloud_size < 1) throw ConfigError("bench.cloud_size must be >= 1");
  for (auto n : sweep)
    if (n < 1) throw ConfigError("bench.sweep entries must be >= 1");
  if (width < 2 || width % 2) throw ConfigError("bench.width must be even and >= 2");
  if (repetitions < 20) throw ConfigError("bench.repetitions must be >= 20");
  if (warmup < 3) throw ConfigError("bench.warmup must be >= 3");
  if (!(gamma > 0.0)) throw ConfigError("bench.gamma must be > 0");
  if (threads < 1) throw ConfigError("bench.threads must be >= 1");
}

BenchReport run_bench(const BenchConfig& cfg) {
  cfg.validate();
  BenchReport r;
  r.config = cfg;
  std::vector<RffBasis> bases;
  for (int f = 0; f < kFeatures; ++f)
    bases.push_back(basis_for_output_dim(cfg.width, cfg.gamma, derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(f))));

  for (int e : cfg.env_counts) {
    const auto clouds = make_clouds(e, cfg.cloud_size, derive_seed(cfg.seed, static_cast<std::uint64_t>(e)));
    r.batch.push_back({e, time_features(clouds, bases, cfg)});
  }
  const auto single = make_clouds(1, cfg.cloud_size, derive_seed(cfg.seed, 1));
  const Timing single_t = time_features(single, bases, cfg);
  r.gf_t_single_s = single_t.median_s;

  std::vector<std::size_t> sizes = cfg.sweep;
  if (std::find(sizes.begin(), sizes.end(), cfg.cloud_size) == sizes.end()) sizes.push_back(cfg.cloud_size);
  std::sort(sizes.begin(), sizes.end());
  for (auto n : sizes) {
    ScalingRow row;
    row.n = n;
    const auto clouds = make_clouds(1, n, derive_seed(cfg.seed, 1));
    row.kme = n == cfg.cloud_size ? single_t : time_features(clouds, bases, cfg);
    if (n <= cfg.gram_max_n) {
      double sink = 0.0;
      row.gram = time_median(cfg.warmup, cfg.repetitions, [&] {
        for (const auto& c : clouds) sink += exact_mean_inner(c, c, cfg.gamma);
      });
      if (!(sink > 0.0)) throw Error("bench: Gram baseline produced no value");
    }
    if (n == cfg.cloud_size && row.gram) r.gram_speedup = row.gram->median_s / row.kme.median_s;
    r.scaling.push_back(row);
  }
  if (!cfg.sweep.empty()) {
    const auto [lo, hi] = std::minmax_element(cfg.sweep.begin(), cfg.sweep.end());
    double tlo = 0.0, thi = 0.0;
    for (const auto& s : r.scaling) {
      if (s.n == *lo) tlo = s.kme.median_s;
      if (s.n == *hi) thi = s.kme.median_s;
    }
    if (*hi != *lo) r.scaling_ratio = thi / tlo;
  }
  return r;
}

std::string report_json(const BenchReport& r, int indent) {
  const auto& c = r.config;
  ordered_json j;
  j["measured_region"] =
      "embedding of 4 pre-generated clouds per env with 4 RFF bases; cloud generation, basis sampling "
      "and file I/O are outside the timed region";
  j["baseline"] =
      "exact Gram mean (O(N^2) kernel sums of each cloud with itself) substitutes for the PointNet++ and "
      "Point2Vec feature extractors, which are not reproduced";
  j["config"] = {{"env_counts", c.env_counts}, {"cloud_size", c.cloud_size}, {"sweep", c.sweep},
                 {"width", c.width},           {"repetitions", c.repetitions}, {"warmup", c.warmup},
                 {"gamma", c.gamma},           {"gram_max_n", c.gram_max_n}, {"seed", c.seed},
                 {"threads", c.threads}};
  j["gf_t"] = ordered_json::array();
  for (const auto& b : r.batch) {
    auto t = timing_json(b.kme);
    t["env_count"] = b.env_count;
    j["gf_t"].push_back(t);
  }
  j["gf_t_single_s"] = r.gf_t_single_s;
  j["scaling"] = ordered_json::array();
  for (const auto& s : r.scaling) {
    ordered_json row;
    row["n"] = s.n;
    row["kme"] = timing_json(s.kme);
    row["gram"] = s.gram ? timing_json(*s.gram) : ordered_json(nullptr);
    j["scaling"].push_back(row);
  }
  j["gram_speedup"] = r.gram_speedup ? ordered_json(*r.gram_speedup) : ordered_json(nullptr);
  j["kme_scaling_ratio"] = r.scaling_ratio ? ordered_json(*r.scaling_ratio) : ordered_json(nullptr);
  return j.dump(indent);
}

std::string report_table(const BenchReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "GF_t: 4 features, N=%zu, width=%zu, median of %d after %d warmup\n",
                r.config.cloud_size, r.config.width, r.config.repetitions, r.config.warmup);
  out += buf;
  out += "| E | median (s) | min (s) | max (s) |\n|---|---|---|---|\n";
  for (const auto& b : r.batch) {
    std::snprintf(buf, sizeof buf, "| %d | %.6g | %.6g | %.6g |\n", b.env_count, b.kme.median_s, b.kme.min_s,
                  b.kme.max_s);
    out += buf;
  }
  out += "\nScaling (E=1). Baseline: exact Gram mean, standing in for PointNet++/Point2Vec.\n";
  out += "| N | KME median (s) | Gram median (s) | Gram / KME |\n|---|---|---|---|\n";
  for (const auto& s : r.scaling) {
    if (s.gram)
      std::snprintf(buf, sizeof buf, "| %zu | %.6g | %.6g | %.1f |\n", s.n, s.kme.median_s, s.gram->median_s,
                    s.gram->median_s / s.kme.median_s);
    else
      std::snprintf(buf, sizeof buf, "| %zu | %.6g | - | - |\n", s.n, s.kme.median_s);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "\ngf_t_single: %.6g s\n", r.gf_t_single_s);
  out += buf;
  if (r.gram_speedup) {
    std::snprintf(buf, sizeof buf, "KME vs Gram at N=%zu: %.1fx\n", r.config.cloud_size, *r.gram_speedup);
    out += buf;
  }
  if (r.scaling_ratio) {
    std::snprintf(buf, sizeof buf, "KME time ratio, largest / smallest N: %.2f\n", *r.scaling_ratio);
    out += buf;
  }
  return out;
}

}  // namespace declutter::bench
