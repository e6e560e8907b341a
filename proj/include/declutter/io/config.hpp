#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "declutter/bench/bench.hpp"
#include "declutter/env/environment.hpp"
#include "declutter/rl/evaluate.hpp"
#include "declutter/rl/ppo.hpp"

namespace declutter::io {

struct EmbedConfig {
  double gamma = 1.0;
  std::size_t num_pairs = 8;  // output has 2 * num_pairs values
  std::uint64_t basis_seed = 0;

  void validate() const;
};

// Everything the CLI can configure. Commands read the sections they need.
struct RunConfig {
  std::string preset = "single_branch";  // or "full_tree"
  env::EnvConfig env;
  rl::TrainConfig train;
  rl::EvalConfig eval;
  EmbedConfig embed;
  occlusion::OcclusionParams occlusion;
  bench::BenchConfig bench;

  void validate() const;
};

RunConfig preset_config(const std::string& preset);

// Parses a JSON config. A "preset" key, if present, selects the defaults the
// remaining keys are applied on top of. Unknown keys and wrongly typed values
// throw ConfigError naming the dotted key path.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Every key with its resolved value; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

// Fingerprint of the settings that must match for a training resume
// (scenario, observation and optimizer settings; not the iteration count,
// thread count or checkpoint period).
std::uint64_t training_config_hash(const RunConfig& config);

}  // namespace declutter::io
