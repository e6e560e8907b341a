#pragma once

namespace declutter::obs {

inline constexpr int kSuccessRun = 10;

// Per-episode evaluation metrics. Feed one update per step, then close.
struct EpisodeMetrics {
  bool success = false;
  double occ_drop_pct = 0.0;
  double touch_pct = 0.0;
  int steps_in_success = 0;
  double cumulative_reward = 0.0;

  int steps = 0;
  int clear_run = 0;        // current run of consecutive h == 0 steps
  int success_onset = -1;   // first step of the qualifying run
  int breach_steps = 0;
  double h_start = 0.0;
  double h_end = 0.0;
  int last_step = -1;
  bool started = false;
  bool closed = false;
};

// Optional: records the pre-episode occlusion as h_start. Without it the h of
// the first update is used.
void begin_episode(EpisodeMetrics& m, double h_start);

// step_index must increase by exactly one per call, starting at 0.
// `occlusion free` means h == 0 exactly.
void update_episode_metrics(EpisodeMetrics& m, double h, bool breach, int step_index,
                            double reward = 0.0);

// Finalizes the percentages. touch_pct uses `horizon` as the denominator
// (defaults to the number of recorded steps).
void close_episode(EpisodeMetrics& m, int horizon = 0);

}  // namespace declutter::obs
