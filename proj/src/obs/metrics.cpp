#include "declutter/obs/metrics.hpp"

#include <algorithm>
#include <string>

#include "declutter/error.hpp"

namespace declutter::obs {

void begin_episode(EpisodeMetrics& m, double h_start) {
  if (!(h_start >= 0.0 && h_start <= 1.0)) throw DomainError("begin_episode: h must be in [0, 1]");
  m = EpisodeMetrics{};
  m.h_start = h_start;
  m.started = true;
}

void update_episode_metrics(EpisodeMetrics& m, double h, bool breach, int step_index,
                            double reward) {
  if (m.closed) throw ContractError("update_episode_metrics: episode already closed");
  if (step_index != m.last_step + 1)
    throw ContractError("update_episode_metrics: expected step " + std::to_string(m.last_step + 1) +
                        ", got " + std::to_string(step_index));
  if (!(h >= 0.0 && h <= 1.0)) throw DomainError("update_episode_metrics: h must be in [0, 1]");
  m.last_step = step_index;
  if (!m.started) {
    m.h_start = h;
    m.started = true;
  }
  m.h_end = h;
  ++m.steps;
  m.cumulative_reward += reward;
  if (breach) ++m.breach_steps;

  if (h == 0.0) {
    ++m.clear_run;
    if (m.success) {
      ++m.steps_in_success;
    } else if (m.clear_run >= kSuccessRun) {
      m.success = true;
      m.success_onset = step_index - kSuccessRun + 1;
      m.steps_in_success = kSuccessRun;
    }
  } else {
    m.clear_run = 0;
  }
}

void close_episode(EpisodeMetrics& m, int horizon) {
  const int t = std::max(horizon, m.steps);
  m.occ_drop_pct = m.h_start > 0.0 ? 100.0 * (m.h_start - m.h_end) / m.h_start : 0.0;
  m.touch_pct = t > 0 ? 100.0 * m.breach_steps / t : 0.0;
  m.closed = true;
}

}  // namespace declutter::obs
