#include "declutter/obs/reward.hpp"

#include <cmath>

#include "declutter/error.hpp"

namespace declutter::obs {

double clearance_reward(double h) {
  if (!(h >= 0.0 && h <= 1.0)) throw DomainError("clearance_reward: h must be in [0, 1]");
  const double r = 1.0 / (1.0 + h * h);
  return r * r;
}

double smoothness_reward(const sim::ArmVector& qdot) {
  if (!qdot.allFinite()) throw DomainError("smoothness_reward: non-finite joint velocity");
  double s = 0.0;
  for (int j = 0; j < 6; ++j) s += qdot[j] * qdot[j];
  return -s / 100.0;
}

double safety_reward(bool breach) { return breach ? 0.0 : kSafetyBonus; }

RewardBreakdown total_reward(double h, const sim::ArmVector& qdot, bool breach,
                             const RewardWeights& weights) {
  RewardBreakdown r;
  r.r_h = clearance_reward(h);
  r.r_q = smoothness_reward(qdot);
  r.r_sm = safety_reward(breach);
  r.total = weights.clearance * r.r_h + weights.smoothness * r.r_q + weights.safety * r.r_sm;
  return r;
}

}  // namespace declutter::obs
