#include "declutter/obs/observation.hpp"

#include <algorithm>

#include "declutter/util/seed.hpp"

namespace declutter::obs {

namespace {

constexpr std::array<std::string_view, kGroupCount> kGroupNames{
    "proprio_q", "proprio_qdot", "ee_quat",           "kme_wbr",       "kme_zbr", "kme_clr",
    "kme_rob",   "touch",        "ee_branch_dists", "safety_breach", "occ_h"};

template <std::size_t N>
void write_group(Observation& o, FeatureGroup g, const FeatureMask& mask, const std::array<double, N>& v) {
  const auto s = group_span(g);
  if (!mask[g]) return;
  std::copy(v.begin(), v.end(), o.values.begin() + static_cast<std::ptrdiff_t>(s.offset));
}

std::array<double, kKmeDim> embed16(const PointCloud& cloud, const kme::RffBasis& basis) {
  const auto e = kme::embed_cloud(cloud, basis);
  std::array<double, kKmeDim> out{};
  std::copy(e.values.begin(), e.values.end(), out.begin());
  return out;
}

}  // namespace

std::string_view to_string(FeatureGroup g) { return kGroupNames[static_cast<std::size_t>(g)]; }

FeatureGroup feature_group_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kGroupCount; ++i)
    if (kGroupNames[i] == name) return static_cast<FeatureGroup>(i);
  throw ConfigError("unknown feature group '" + std::string(name) + "'");
}

void ObservationConfig::validate() const {
  occlusion.validate();
  if (!(f_u > 0.0)) throw ConfigError("observation.f_u must be > 0");
  if (h_source != CloudTag::zoomed_branch && h_source != CloudTag::whole_branch)
    throw ConfigError("observation.h_source must be zoomed_branch or whole_branch");
  if (max_stale_steps < 1) throw ConfigError("observation.max_stale_steps must be >= 1");
}

ObservationBases ObservationBases::sample(double gamma, std::uint64_t seed) {
  return ObservationBases{kme::basis_for_output_dim(kKmeDim, gamma, derive_seed(seed, 1)),
                          kme::basis_for_output_dim(kKmeDim, gamma, derive_seed(seed, 2)),
                          kme::basis_for_output_dim(kKmeDim, gamma, derive_seed(seed, 3)),
                          kme::basis_for_output_dim(kKmeDim, gamma, derive_seed(seed, 4))};
}

void ObservationBases::validate() const {
  for (const auto* b : {&whole_branch, &zoomed_branch, &clearance, &robot})
    if (b->output_dim() != kKmeDim)
      throw ContractError("observation bases must have output_dim " + std::to_string(kKmeDim));
}

ArmSensors read_arm_sensors(const sim::WorldState& world) {
  const auto pose = sim::arm_pose(world);
  ArmSensors s;
  s.q = world.q;
  s.qdot = world.qdot;
  s.ee_position = pose.ee_position;
  s.ee_orientation = pose.ee_quaternion();
  return s;
}

Observation build_observation(const ArmSensors& arm, const sim::SensedClouds& clouds,
                              const ObservationBases& bases, const ObservationConfig& config,
                              int touch, ObservationMemory* memory) {
  bases.validate();
  require_non_empty(clouds.robot, "build_observation(robot)");
  require_non_empty(clouds.clearance, "build_observation(clearance)");
  if (touch != 0 && touch != 1) throw DomainError("build_observation: touch must be 0 or 1");
  ObservationMemory scratch;
  ObservationMemory& mem = memory ? *memory : scratch;
  const auto& mask = config.mask;
  const auto& occ = config.occlusion;

  Observation o;
  auto& diag = o.diagnostics;

  std::array<double, 6> q{}, qdot{};
  for (int j = 0; j < 6; ++j) q[j] = arm.q[j], qdot[j] = arm.qdot[j];
  const sim::Quat quat = arm.ee_orientation.normalized();
  const std::array<double, 4> ee_quat{quat.w(), quat.x(), quat.y(), quat.z()};
  write_group(o, FeatureGroup::proprio_q, mask, q);
  write_group(o, FeatureGroup::proprio_qdot, mask, qdot);
  write_group(o, FeatureGroup::ee_quat, mask, ee_quat);

  // Whole branches: embedding and end-effector distances.
  if (!clouds.whole_branch.empty()) {
    mem.kme_wbr = embed16(clouds.whole_branch, bases.whole_branch);
    const PointCloud ee({arm.ee_position});
    const auto d = occlusion::ee_branch_distances(ee, clouds.whole_branch, kEeDistCount);
    std::copy(d.begin(), d.end(), mem.ee_dists.begin());
    mem.has_whole = true;
    mem.stale_whole = 0;
  } else {
    ++mem.stale_whole;
    diag.whole_stale = true;
    if (mem.stale_whole > config.max_stale_steps)
      throw Error("build_observation: whole-branch cloud empty for " +
                  std::to_string(mem.stale_whole) + " consecutive steps");
  }
  diag.stale_whole = mem.stale_whole;

  // Zoomed branches: empty means nothing near the line.
  if (!clouds.zoomed_branch.empty()) {
    mem.kme_zbr = embed16(clouds.zoomed_branch, bases.zoomed_branch);
    mem.has_zoomed = true;
    mem.empty_zoomed = 0;
  } else {
    ++mem.empty_zoomed;
    diag.zoomed_empty = true;
  }
  diag.empty_zoomed = mem.empty_zoomed;

  write_group(o, FeatureGroup::kme_wbr, mask, mem.kme_wbr);
  write_group(o, FeatureGroup::kme_zbr, mask, mem.kme_zbr);
  write_group(o, FeatureGroup::kme_clr, mask, embed16(clouds.clearance, bases.clearance));
  write_group(o, FeatureGroup::kme_rob, mask, embed16(clouds.robot, bases.robot));

  diag.touch = touch;
  write_group(o, FeatureGroup::touch, mask, std::array<double, 1>{static_cast<double>(touch)});
  write_group(o, FeatureGroup::ee_branch_dists, mask, mem.ee_dists);

  diag.robot_clearance_knn = occlusion::mean_knn_distance(clouds.robot, clouds.clearance, occ.k_local);
  diag.safety_breach = diag.robot_clearance_knn < occ.d_sm;
  write_group(o, FeatureGroup::safety_breach, mask,
              std::array<double, 1>{diag.safety_breach ? 1.0 : 0.0});

  const PointCloud& h_cloud =
      config.h_source == CloudTag::zoomed_branch ? clouds.zoomed_branch : clouds.whole_branch;
  if (!h_cloud.empty()) {
    const auto st = occlusion::occlusion_stats(h_cloud, clouds.clearance, occ);
    diag.h = st.h;
    diag.breach_count = st.breach_count;
    mem.h = st.h;
  } else {
    diag.h = config.h_source == CloudTag::zoomed_branch ? 0.0 : mem.h;
  }
  write_group(o, FeatureGroup::occ_h, mask, std::array<double, 1>{diag.h});
  return o;
}

}  // namespace declutter::obs
