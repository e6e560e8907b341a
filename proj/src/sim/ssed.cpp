#include "declutter/sim/ssed.hpp"

#include "declutter/error.hpp"

namespace declutter::sim {

ArmVector ssed_update(const ArmVector& desired, const ArmVector& actual, const ArmVector& action,
                      double dt, bool sync_now, const ArmModel& limits) {
  if (!desired.allFinite() || !actual.allFinite() || !action.allFinite() || !std::isfinite(dt))
    throw DomainError("ssed_update: non-finite input");
  const ArmVector base = sync_now ? actual : desired;
  return limits.clamp_position(base + action * dt);
}

SsedTrace simulate_ssed(const ArmModel& arm, const ArmVector& q0,
                        const std::vector<ArmVector>& actions, double dt, int sync_period,
                        const ArmVector& bias) {
  if (sync_period < 1) throw ConfigError("simulate_ssed: sync_period must be >= 1");
  SsedTrace trace;
  ArmVector desired = q0, actual = q0;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const bool sync = t > 0 && t % static_cast<std::size_t>(sync_period) == 0;
    if (sync) trace.sync_offsets.push_back(actual - desired);
    desired = ssed_update(desired, actual, actions[t], dt, sync, arm);
    actual = arm.clamp_position(actual + (actions[t] + bias) * dt);
    trace.desired.push_back(desired);
    trace.actual.push_back(actual);
  }
  return trace;
}

std::vector<ArmVector> integrate_desired(const ArmModel& arm, const ArmVector& q0,
                                         const std::vector<ArmVector>& actions, double dt) {
  std::vector<ArmVector> out;
  ArmVector q = q0;
  for (const auto& a : actions) {
    q = arm.clamp_position(q + a * dt);
    out.push_back(q);
  }
  return out;
}

}  // namespace declutter::sim
