#pragma once

#include <vector>

#include "declutter/sim/arm.hpp"

namespace declutter::sim {

// Segmented steady-state error control: actions integrate the desired joint
// state rather than the measured one, and the desired state is reset to the
// measured state when sync_now is set. Result is clamped to the joint limits.
ArmVector ssed_update(const ArmVector& desired, const ArmVector& actual, const ArmVector& action,
                      double dt, bool sync_now, const ArmModel& limits);

struct SsedTrace {
  std::vector<ArmVector> desired;       // after each step
  std::vector<ArmVector> actual;        // after each step
  std::vector<ArmVector> sync_offsets;  // actual - desired just before each sync
};

// Closed loop against a plant that executes every commanded velocity with a
// constant additive error `bias`. Syncs happen before steps m, 2m, ...
SsedTrace simulate_ssed(const ArmModel& arm, const ArmVector& q0,
                        const std::vector<ArmVector>& actions, double dt, int sync_period,
                        const ArmVector& bias);

// Desired-state integration with no synchronization.
std::vector<ArmVector> integrate_desired(const ArmModel& arm, const ArmVector& q0,
                                         const std::vector<ArmVector>& actions, double dt);

}  // namespace declutter::sim
