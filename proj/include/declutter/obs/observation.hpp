#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "declutter/kme/rff.hpp"
#include "declutter/occlusion/occlusion.hpp"
#include "declutter/sim/sampling.hpp"

namespace declutter::obs {

inline constexpr std::size_t kObservationDim = 88;
inline constexpr std::size_t kKmeDim = 16;
inline constexpr std::size_t kEeDistCount = 5;

// Feature groups in observation order.
enum class FeatureGroup : std::uint8_t {
  proprio_q,
  proprio_qdot,
  ee_quat,
  kme_wbr,  // whole branches
  kme_zbr,  // zoomed branches
  kme_clr,  // clearance cylinder
  kme_rob,  // robot
  touch,
  ee_branch_dists,
  safety_breach,
  occ_h,
};
inline constexpr std::size_t kGroupCount = 11;

struct GroupSpan {
  std::size_t offset;
  std::size_t width;
};

inline constexpr std::array<GroupSpan, kGroupCount> kGroups{{
    {0, 6}, {6, 6}, {12, 4}, {16, 16}, {32, 16}, {48, 16}, {64, 16}, {80, 1}, {81, 5}, {86, 1}, {87, 1},
}};

constexpr GroupSpan group_span(FeatureGroup g) { return kGroups[static_cast<std::size_t>(g)]; }
std::string_view to_string(FeatureGroup g);
FeatureGroup feature_group_from_string(std::string_view name);

// Per-group enable flags; disabled groups are written as zeros (ablations).
struct FeatureMask {
  std::array<bool, kGroupCount> enabled;
  FeatureMask() { enabled.fill(true); }
  bool operator[](FeatureGroup g) const { return enabled[static_cast<std::size_t>(g)]; }
  void set(FeatureGroup g, bool on) { enabled[static_cast<std::size_t>(g)] = on; }
};

struct ObservationConfig {
  occlusion::OcclusionParams occlusion;
  double f_u = 1.0;  // N, touch threshold
  // Cloud that h is measured on vs the clearance cloud.
  CloudTag h_source = CloudTag::zoomed_branch;
  int max_stale_steps = 30;
  FeatureMask mask;

  void validate() const;
};

// One RFF basis per cloud tag, each with output_dim 16.
struct ObservationBases {
  kme::RffBasis whole_branch;
  kme::RffBasis zoomed_branch;
  kme::RffBasis clearance;
  kme::RffBasis robot;

  static ObservationBases sample(double gamma, std::uint64_t seed);
  void validate() const;
};

struct ArmSensors {
  sim::ArmVector q = sim::ArmVector::Zero();
  sim::ArmVector qdot = sim::ArmVector::Zero();
  Vec3 ee_position = Vec3::Zero();
  sim::Quat ee_orientation = sim::Quat::Identity();
};

ArmSensors read_arm_sensors(const sim::WorldState& world);

// Last good branch features, reused when a branch cloud comes back empty.
struct ObservationMemory {
  bool has_whole = false;
  bool has_zoomed = false;
  std::array<double, kKmeDim> kme_wbr{};
  std::array<double, kKmeDim> kme_zbr{};
  std::array<double, kEeDistCount> ee_dists{};
  double h = 0.0;
  int stale_whole = 0;   // consecutive steps with an empty whole-branch cloud
  int empty_zoomed = 0;  // consecutive steps with an empty zoomed cloud
};

// Unmasked values of the scalar features, plus fallback bookkeeping.
struct ObservationDiagnostics {
  double h = 0.0;
  bool safety_breach = false;
  int touch = 0;
  bool whole_stale = false;
  bool zoomed_empty = false;
  int stale_whole = 0;
  int empty_zoomed = 0;
  std::size_t breach_count = 0;  // pairs counted by h
  double robot_clearance_knn = 0.0;
};

struct Observation {
  std::array<double, kObservationDim> values{};
  ObservationDiagnostics diagnostics;

  std::span<const double> group(FeatureGroup g) const {
    const auto s = group_span(g);
    return std::span<const double>(values).subspan(s.offset, s.width);
  }
  double occ_h() const { return diagnostics.h; }
  bool safety_breach() const { return diagnostics.safety_breach; }
  int touch() const { return diagnostics.touch; }
};

// Concatenates the feature groups in FeatureGroup order. The robot and
// clearance clouds must be non-empty. An empty zoomed cloud means no branch is
// near the line: h is 0 and the zoomed embedding repeats the last good value. An
// empty whole-branch cloud reuses the last good embedding and distances and
// throws Error after max_stale_steps consecutive occurrences. Without memory
// (memory == nullptr or nothing stored yet) the fallback values are zeros.
Observation build_observation(const ArmSensors& arm, const sim::SensedClouds& clouds,
                              const ObservationBases& bases, const ObservationConfig& config,
                              int touch, ObservationMemory* memory = nullptr);

}  // namespace declutter::obs
