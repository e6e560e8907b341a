#pragma once

#include "declutter/sim/arm.hpp"

namespace declutter::obs {

inline constexpr double kSafetyBonus = 0.4;

struct RewardBreakdown {
  double r_h = 0.0;
  double r_q = 0.0;
  double r_sm = 0.0;
  double total = 0.0;
};

// Optional per-term weights; the default is the plain sum.
struct RewardWeights {
  double clearance = 1.0;
  double smoothness = 1.0;
  double safety = 1.0;
};

// (1 / (1 + h^2))^2; DomainError unless h is in [0, 1].
double clearance_reward(double h);
// -sum_j qdot_j^2 / 100 over the six arm joints.
double smoothness_reward(const sim::ArmVector& qdot);
// 0.4 when the safety margin holds, 0 on a breach.
double safety_reward(bool breach);

RewardBreakdown total_reward(double h, const sim::ArmVector& qdot, bool breach,
                             const RewardWeights& weights = {});

}  // namespace declutter::obs
