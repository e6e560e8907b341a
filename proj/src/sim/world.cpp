#include "declutter/sim/world.hpp"

#include <algorithm>
#include <cmath>

namespace declutter::sim {

namespace {

struct BodyRef {
  BodyKind kind;
  int index;
  const Capsule* capsule;
};

bool spheres_overlap(const Capsule& a, const Capsule& b) {
  const Vec3 ca = a.origin + a.axis() * (0.5 * a.length);
  const Vec3 cb = b.origin + b.axis() * (0.5 * b.length);
  const double reach = 0.5 * (a.length + b.length) + a.radius + b.radius;
  return (ca - cb).squaredNorm() <= reach * reach;
}

bool finite_vecs(const std::vector<Vec3>& v) {
  for (const auto& x : v)
    if (!is_finite(x)) return false;
  return true;
}

class Stepper {
 public:
  Stepper(WorldState& s, const ArmVector& velocity)
      : s_(s), v_(velocity), n_(s.tree.size()), dofs_(s.tree_dofs()) {
    torque_.assign(n_, Vec3::Zero());
    implicit_k_.assign(n_, Vec3::Zero());
    implicit_c_.assign(n_, Vec3::Zero());
  }

  void substep(double h, ContactReport& report, bool last) {
    pose_ = tree_pose(s_.tree, s_.theta);
    arm_ = forward_kinematics(s_.arm, s_.q);
    std::fill(torque_.begin(), torque_.end(), Vec3::Zero());
    std::fill(implicit_k_.begin(), implicit_k_.end(), Vec3::Zero());
    std::fill(implicit_c_.begin(), implicit_c_.end(), Vec3::Zero());
    if (last) report.contacts.clear();

    const BodyRef line{BodyKind::line, 0, &s_.line};
    for (std::size_t a = 0; a < kArmDof; ++a) {
      const BodyRef arm{BodyKind::arm, static_cast<int>(a), &arm_.links[a]};
      for (std::size_t t = 0; t < n_; ++t)
        collide(arm, BodyRef{BodyKind::tree, static_cast<int>(t), &pose_.links[t]}, report, last);
      collide(arm, line, report, last);
    }
    if (!s_.training_mode) {
      for (std::size_t t = 0; t < n_; ++t)
        collide(BodyRef{BodyKind::tree, static_cast<int>(t), &pose_.links[t]}, line, report, last);
    }

    integrate_tree(h);
    for (std::size_t j = 0; j < kArmDof; ++j)
      s_.q[j] = std::clamp(s_.q[j] + h * v_[j], s_.arm.joints[j].q_min, s_.arm.joints[j].q_max);
  }

 private:
  Vec3 velocity_at(const BodyRef& b, const Vec3& p) const {
    switch (b.kind) {
      case BodyKind::arm:
        return arm_point_velocity(arm_, static_cast<std::size_t>(b.index), p, v_);
      case BodyKind::tree: {
        Vec3 v = Vec3::Zero();
        for (int j = b.index; j >= 0; j = s_.tree.links[j].parent) {
          const Vec3 omega = pose_.joint_frames[j] * s_.theta_dot[j];
          v += omega.cross(p - pose_.links[j].origin);
        }
        return v;
      }
      case BodyKind::line:
        break;
    }
    return Vec3::Zero();
  }

  // Force f applied at p on tree link i: torque on every joint up to the root,
  // and the linearized contact stiffness/damping for the implicit update.
  void load_tree(int i, const Vec3& p, const Vec3& f, const Vec3& n) {
    const auto& c = s_.contact;
    for (int j = i; j >= 0; j = s_.tree.links[j].parent) {
      const Vec3 r = p - pose_.links[j].origin;
      torque_[j] += r.cross(f);
      const Vec3 rn = r.cross(n);
      for (std::size_t k = 0; k < dofs_; ++k) {
        const double g = pose_.joint_frames[j].col(k).dot(rn);
        implicit_k_[j][k] += c.stiffness * g * g;
        implicit_c_[j][k] += c.damping * g * g;
      }
    }
  }

  void collide(const BodyRef& a, const BodyRef& b, ContactReport& report, bool last) {
    const Capsule& ca = *a.capsule;
    const Capsule& cb = *b.capsule;
    if (!spheres_overlap(ca, cb)) return;
    const auto cp = closest_points(ca.origin, ca.tip(), cb.origin, cb.tip());
    const double reach = ca.radius + cb.radius;
    if (cp.dist2 >= reach * reach) return;
    const double d = std::sqrt(cp.dist2);
    const double depth = reach - d;
    const Vec3 n = d > 1e-12 ? Vec3((cp.p1 - cp.p2) / d) : any_orthogonal(ca.axis());
    const Vec3 p = cp.p1 - n * ca.radius;

    const auto& c = s_.contact;
    const Vec3 vrel = velocity_at(a, p) - velocity_at(b, p);
    const double vn = vrel.dot(n);
    const double fn = std::max(0.0, c.stiffness * depth - c.damping * vn);
    Vec3 f = fn * n;
    const Vec3 vt = vrel - vn * n;
    const double vt_norm = vt.norm();
    if (vt_norm > 1e-12) f -= std::min(c.friction * fn, c.damping * vt_norm) / vt_norm * vt;

    if (a.kind == BodyKind::arm) report.arm_force[a.index] += f;
    if (a.kind == BodyKind::tree) {
      load_tree(a.index, p, f, n);
      report.branch_contact[a.index] = 1;
    }
    if (b.kind == BodyKind::tree) {
      load_tree(b.index, p, -f, n);
      report.branch_contact[b.index] = 1;
    }
    report.max_depth = std::max(report.max_depth, depth);
    if (last) {
      report.contacts.push_back(Contact{a.kind, a.index, b.kind, b.index, p, n, depth, f});
    }
  }

  void integrate_tree(double h) {
    for (std::size_t j = 0; j < n_; ++j) {
      const auto& jt = s_.tree.joints[j];
      const Vec3 tau = pose_.joint_frames[j].transpose() * torque_[j];
      for (std::size_t k = 0; k < dofs_; ++k) {
        double& th = s_.theta[j][k];
        double& om = s_.theta_dot[j][k];
        const double inv_i = 1.0 / jt.inertia;
        const double num = om + h * (tau[k] - jt.stiffness * th) * inv_i;
        const double den = 1.0 + h * (jt.damping + implicit_c_[j][k]) * inv_i +
                           h * h * (jt.stiffness + implicit_k_[j][k]) * inv_i;
        om = num / den;
        th += h * om;
      }
    }
  }

  WorldState& s_;
  ArmVector v_;
  std::size_t n_;
  std::size_t dofs_;
  TreePose pose_;
  ArmPose arm_;
  std::vector<Vec3> torque_, implicit_k_, implicit_c_;
};

}  // namespace

void ContactParams::validate() const {
  if (!(stiffness > 0.0)) throw ConfigError("contact.stiffness must be > 0");
  if (!(damping >= 0.0)) throw ConfigError("contact.damping must be >= 0");
  if (!(friction >= 0.0)) throw ConfigError("contact.friction must be >= 0");
  if (substeps < 1 || substeps > 1000) throw ConfigError("contact.substeps must be in [1, 1000]");
}

WorldState WorldState::make(TreeModel tree, ArmModel arm, Capsule line, ContactParams contact) {
  arm.validate();
  contact.validate();
  if (tree.joints.size() != tree.links.size())
    throw ContractError("WorldState: tree joints and links differ in count");
  WorldState s;
  s.theta.assign(tree.size(), Vec3::Zero());
  s.theta_dot.assign(tree.size(), Vec3::Zero());
  s.tree = std::move(tree);
  s.arm = std::move(arm);
  s.line = line;
  s.contact = contact;
  return s;
}

bool WorldState::operator==(const WorldState& o) const {
  return tree == o.tree && theta == o.theta && theta_dot == o.theta_dot && q == o.q &&
         qdot == o.qdot && line.origin == o.line.origin && line.frame == o.line.frame &&
         line.length == o.line.length && line.radius == o.line.radius && time == o.time &&
         training_mode == o.training_mode;
}

TreePose tree_pose(const TreeModel& tree, const std::vector<Vec3>& theta) {
  const std::size_t n = tree.size();
  if (theta.size() != n) throw ContractError("tree_pose: theta size mismatch");
  TreePose pose;
  pose.links.resize(n);
  pose.joint_frames.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = tree.links[i];
    Capsule& c = pose.links[i];
    Mat3 base;
    if (l.parent < 0) {
      c.origin = tree.anchor;
      base = l.rest_relative.toRotationMatrix();
    } else {
      const Capsule& p = pose.links[l.parent];
      c.origin = p.tip();
      base = p.frame * l.rest_relative.toRotationMatrix();
    }
    pose.joint_frames[i] = base;
    c.frame = theta[i].isZero(0.0) ? base : Mat3(base * rotation_from_vector(theta[i]));
    c.length = l.length;
    c.radius = l.radius;
  }
  return pose;
}

ArmPose arm_pose(const WorldState& state) { return forward_kinematics(state.arm, state.q); }

ContactReport step_in_place(WorldState& state, const ArmVector& command, double dt) {
  if (!(dt > 0.0 && dt <= 0.05)) throw DomainError("step: dt must be in (0, 0.05]");
  if (!command.allFinite()) throw DomainError("step: non-finite command");

  ArmVector v = state.arm.clamp_velocity(command);
  ContactReport report;
  report.branch_contact.assign(state.tree.size(), 0);

  const int m = state.contact.substeps;
  const double h = dt / m;
  Stepper stepper(state, v);
  for (int i = 0; i < m; ++i) stepper.substep(h, report, i == m - 1);
  for (auto& f : report.arm_force) f /= static_cast<double>(m);

  for (std::size_t j = 0; j < kArmDof; ++j) {
    const auto& s = state.arm.joints[j];
    if ((state.q[j] >= s.q_max && v[j] > 0.0) || (state.q[j] <= s.q_min && v[j] < 0.0)) v[j] = 0.0;
  }
  state.qdot = v;
  state.time += dt;

  if (!finite_vecs(state.theta) || !finite_vecs(state.theta_dot) || !state.q.allFinite())
    throw DivergenceError("step: non-finite state at t = " + std::to_string(state.time));
  return report;
}

StepResult step(const WorldState& state, const ArmVector& command, double dt) {
  StepResult r{state, {}};
  r.report = step_in_place(r.state, command, dt);
  return r;
}

int touch_indicator(const ContactReport& report, double f_u) {
  if (!(f_u > 0.0)) throw DomainError("touch_indicator: f_u must be > 0");
  for (const auto& f : report.arm_force)
    if (f.norm() > f_u) return 1;
  return 0;
}

double tree_kinetic_energy(const WorldState& state) {
  double e = 0.0;
  for (std::size_t i = 0; i < state.tree.size(); ++i)
    e += 0.5 * state.tree.joints[i].inertia * state.theta_dot[i].squaredNorm();
  return e;
}

}  // namespace declutter::sim
