#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "declutter/env/environment.hpp"
#include "declutter/rl/ppo.hpp"

namespace declutter::rl {

inline constexpr int kCheckpointVersion = 1;

struct IterationRecord {
  int iteration = 0;  // 1-based
  double mean_episode_reward = 0.0;  // over episodes that finished this iteration
  int episodes = 0;
  double mean_h = 0.0;  // over all rollout steps
  double breach_fraction = 0.0;
  double mean_step_reward = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;
  double mean_log_std = 0.0;
  int divergences = 0;
};

// One JSON object, no trailing newline.
std::string to_json_line(const IterationRecord& r);

struct Checkpoint {
  PolicyParams params;
  AdamState adam;
  int iteration = 0;
  std::uint64_t config_hash = 0;
};

// Writes manifest.json, weights.bin and optimizer.bin into dir. Files are
// written under temporary names and renamed, so a crash never leaves a
// half-written checkpoint behind.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
// Throws FormatError on a missing, truncated or inconsistent checkpoint.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

std::uint64_t fnv1a64(std::string_view bytes);

struct TrainRun {
  env::EnvConfig env;
  TrainConfig train;
  std::optional<std::filesystem::path> output_dir;  // checkpoints go under output_dir/checkpoints
  std::ostream* metrics = nullptr;                  // JSON lines, one per iteration
  std::optional<std::filesystem::path> resume_from;
  std::uint64_t config_hash = 0;  // recorded in manifests; checked on resume
  std::function<void(const IterationRecord&)> on_iteration;
};

struct TrainResult {
  PolicyParams params;
  AdamState adam;
  std::vector<IterationRecord> records;
  int start_iteration = 0;  // iterations already done before this call
};

// Alternates rollout and ppo_update. Periodic checkpoints are named
// iter_NNNNNN, the final one `final`. If an update produces non-finite values
// the last good parameters are written to `last_good` and TrainingError is
// rethrown. A resumed run restarts the environments: in-flight episodes at the
// checkpoint are not continued.
TrainResult train(const TrainRun& run);

}  // namespace declutter::rl
