#include "armada/simcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "armada/dynamics.hpp"

namespace armada {
namespace sim {

namespace {

struct BodyAccum {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

constexpr int kArmBodyId = -2;

struct PointVel {
  Vec3 v;
};

Vec3 body_point_velocity(const RigidBodyState& b, const Vec3& point) {
  if (!b.dynamic) return Vec3::Zero();
  return b.v + b.w.cross(point - b.pose.p);
}

double pair_friction(double mu_a, double mu_b) {
  return std::sqrt(std::max(0.0, mu_a) * std::max(0.0, mu_b));
}

// Vertex-in-box probe: returns true with the face of least penetration.
// `n_out` is the box's outward face normal in world coordinates.
bool vertex_in_box(const Vec3& vertex, const RigidBodyState& box, double* depth,
                   Vec3* n_out) {
  Vec3 local = box.pose.inverse() * vertex;
  Vec3 h = box.half_extents;
  double best = std::numeric_limits<double>::infinity();
  int axis = -1;
  for (int k = 0; k < 3; ++k) {
    double d = h[k] - std::abs(local[k]);
    if (d <= 0.0) return false;
    if (d < best) {
      best = d;
      axis = k;
    }
  }
  Vec3 n_local = Vec3::Zero();
  n_local[axis] = local[axis] >= 0.0 ? 1.0 : -1.0;
  *depth = best;
  *n_out = box.pose.R * n_local;
  return true;
}

std::array<Vec3, 8> box_vertices(const RigidBodyState& box) {
  std::array<Vec3, 8> out;
  const Vec3& h = box.half_extents;
  for (int i = 0; i < 8; ++i) {
    Vec3 local((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
               (i & 4) ? h.z() : -h.z());
    out[static_cast<size_t>(i)] = box.pose * local;
  }
  return out;
}

// Sphere against a box: closest-point test, with a face push-out fallback
// when the center is inside. Normal points from the box toward the sphere.
bool sphere_box(const Vec3& center, double radius, const RigidBodyState& box,
                double* depth, Vec3* normal, Vec3* point) {
  Vec3 local = box.pose.inverse() * center;
  Vec3 h = box.half_extents;
  Vec3 clamped = local.cwiseMax(-h).cwiseMin(h);
  Vec3 d = local - clamped;
  double dist = d.norm();
  if (dist > 1e-12) {
    if (dist >= radius) return false;
    *depth = radius - dist;
    *normal = box.pose.R * (d / dist);
    *point = box.pose * clamped;
    return true;
  }
  // Center inside: push out through the nearest face.
  double best = std::numeric_limits<double>::infinity();
  int axis = 0;
  double sign = 1.0;
  for (int k = 0; k < 3; ++k) {
    double dpos = h[k] - local[k];
    double dneg = local[k] + h[k];
    if (dpos < best) { best = dpos; axis = k; sign = 1.0; }
    if (dneg < best) { best = dneg; axis = k; sign = -1.0; }
  }
  Vec3 n_local = Vec3::Zero();
  n_local[axis] = sign;
  *depth = best + radius;
  *normal = box.pose.R * n_local;
  Vec3 surf = local;
  surf[axis] = sign * h[axis];
  *point = box.pose * surf;
  return true;
}

struct Engine {
  WorldState& world;
  const RobotModel& model;
  const SimConfig& cfg;
  double dt_micro;
  std::vector<BodyAccum> accum;
  Vec6 tau_contact = Vec6::Zero();
  StepInfo* info;

  // Arm tip state, refreshed each micro step.
  Vec3 ee_pos = Vec3::Zero();
  Vec3 ee_vel = Vec3::Zero();
  Eigen::Matrix<double, 3, 6> ee_jac = Eigen::Matrix<double, 3, 6>::Zero();

  // Effective mass a body presents at a contact point along the normal,
  // 1 / (1/m + (r x n)^T I^-1 (r x n)). Off-center contacts on light flat
  // bodies (a card corner) present far less than the body mass, and the
  // stiffness clamp has to honor that or the rocking mode blows up.
  double contact_mass(int id, const Vec3& point, const Vec3& normal) const {
    if (id == kArmBodyId) return cfg.ee_contact_mass;
    const RigidBodyState& s = world.bodies[static_cast<size_t>(id)];
    if (!s.dynamic) return std::numeric_limits<double>::infinity();
    Vec3 rxn = (point - s.pose.p).cross(normal);
    Mat3 iw = s.pose.R * s.inertia * s.pose.R.transpose();
    double w = 1.0 / s.mass + rxn.dot(iw.ldlt().solve(rxn));
    return 1.0 / w;
  }

  // One penalty contact. `a`/`b` index world.bodies, kArmBodyId is the EE
  // sphere. The normal points from b into a; depth > 0.
  void resolve(int a, int b, const Vec3& point, const Vec3& normal,
               double depth, double mu) {
    Vec3 va = a == kArmBodyId
                  ? ee_vel
                  : body_point_velocity(world.bodies[static_cast<size_t>(a)], point);
    Vec3 vb = b == kArmBodyId
                  ? ee_vel
                  : body_point_velocity(world.bodies[static_cast<size_t>(b)], point);
    Vec3 v_rel = va - vb;
    double m_c = std::min(contact_mass(a, point, normal),
                          contact_mass(b, point, normal));
    if (!std::isfinite(m_c)) m_c = 1.0;
    // Keeps sqrt(k/m_c)*dt under ~1/4 so a face rest loading four vertex
    // springs at once still integrates.
    double k_eff = std::min(cfg.penalty_stiffness,
                            m_c / (16.0 * dt_micro * dt_micro));
    double c = 2.0 * cfg.damping_ratio * std::sqrt(k_eff * m_c);
    c = std::min(c, 0.25 * m_c / dt_micro);
    double vn = v_rel.dot(normal);
    double fn = k_eff * depth - c * vn;
    if (fn <= 0.0) return;

    Vec3 vt = v_rel - vn * normal;
    double vt_norm = vt.norm();
    Vec3 ft = Vec3::Zero();
    if (mu > 0.0 && vt_norm > 1e-12) {
      double ft_mag = mu * fn * std::min(1.0, vt_norm / cfg.v_reg);
      ft_mag = std::min(ft_mag, m_c * vt_norm / dt_micro);
      ft = -(ft_mag / vt_norm) * vt;
    }

    Vec3 total = fn * normal + ft;
    apply(a, total, point);
    apply(b, -total, point);
    if (info) {
      ContactRecord rec;
      rec.point = point;
      rec.normal = normal;
      rec.fn = fn;
      rec.ft = ft;
      rec.depth = depth;
      rec.stiffness = k_eff;
      rec.mu = mu;
      rec.body_a = a;
      rec.body_b = b;
      info->contacts.push_back(rec);
    }
  }

  void apply(int body, const Vec3& force, const Vec3& point) {
    if (body == kArmBodyId) {
      tau_contact += ee_jac.transpose() * force;
      return;
    }
    RigidBodyState& b = world.bodies[static_cast<size_t>(body)];
    if (!b.dynamic) return;
    BodyAccum& acc = accum[static_cast<size_t>(body)];
    acc.force += force;
    acc.torque += (point - b.pose.p).cross(force);
  }

  void collide_pair(int ia, int ib) {
    const RigidBodyState& A = world.bodies[static_cast<size_t>(ia)];
    const RigidBodyState& B = world.bodies[static_cast<size_t>(ib)];
    if (!A.dynamic && !B.dynamic) return;
    double mu = pair_friction(A.friction, B.friction);
    if (A.is_sphere() || B.is_sphere()) {
      const RigidBodyState& s = A.is_sphere() ? A : B;
      const RigidBodyState& box = A.is_sphere() ? B : A;
      int is = A.is_sphere() ? ia : ib;
      int ibox = A.is_sphere() ? ib : ia;
      if (box.is_sphere()) return;  // sphere-sphere unused at desk scale
      double depth;
      Vec3 n, p;
      if (sphere_box(s.pose.p, s.radius, box, &depth, &n, &p))
        resolve(is, ibox, p, n, depth, mu);
      return;
    }
    // Two-way vertex sampling catches face rests and corner pokes.
    for (const Vec3& v : box_vertices(A)) {
      double depth;
      Vec3 n;
      if (vertex_in_box(v, B, &depth, &n))
        resolve(ia, ib, v, n, depth, mu);
    }
    for (const Vec3& v : box_vertices(B)) {
      double depth;
      Vec3 n;
      if (vertex_in_box(v, A, &depth, &n))
        resolve(ib, ia, v, n, depth, mu);
    }
    // A face sliding across a thin strip (cube over the bump) has no vertex
    // of either box inside the other; the crossing shows up only on edge
    // interiors, so sample those too.
    sample_edges(ia, ib, mu);
    sample_edges(ib, ia, mu);
  }

  void sample_edges(int ifrom, int iinto, double mu) {
    const RigidBodyState& from = world.bodies[static_cast<size_t>(ifrom)];
    const RigidBodyState& into = world.bodies[static_cast<size_t>(iinto)];
    // Coarse enough that a flat rest keeps its four corner springs.
    double spacing = std::max(0.02, 0.5 * into.half_extents.minCoeff());
    Vec3 c = into.pose.p;
    Vec3 e = into.pose.R.cwiseAbs() * into.half_extents;  // world AABB
    auto verts = box_vertices(from);
    static constexpr int kEdges[12][2] = {{0, 1}, {2, 3}, {4, 5}, {6, 7},
                                          {0, 2}, {1, 3}, {4, 6}, {5, 7},
                                          {0, 4}, {1, 5}, {2, 6}, {3, 7}};
    for (const auto& ed : kEdges) {
      Vec3 a = verts[static_cast<size_t>(ed[0])];
      Vec3 d = verts[static_cast<size_t>(ed[1])] - a;
      double t0 = 0.0, t1 = 1.0;
      bool reject = false;
      for (int k = 0; k < 3 && !reject; ++k) {
        if (std::abs(d[k]) < 1e-12) {
          if (std::abs(a[k] - c[k]) > e[k]) reject = true;
          continue;
        }
        double ta = (c[k] - e[k] - a[k]) / d[k];
        double tb = (c[k] + e[k] - a[k]) / d[k];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) reject = true;
      }
      if (reject) continue;
      int n = static_cast<int>((t1 - t0) * d.norm() / spacing);
      for (int i = 0; i < n; ++i) {
        double t = t0 + (t1 - t0) * (i + 0.5) / n;
        Vec3 p = a + t * d;
        double depth;
        Vec3 nrm;
        if (vertex_in_box(p, into, &depth, &nrm))
          resolve(ifrom, iinto, p, nrm, depth, mu);
      }
    }
  }

  void collide_ee() {
    double mu_ee = 1.2;  // gripper tip pad
    for (size_t j = 0; j < world.bodies.size(); ++j) {
      const RigidBodyState& b = world.bodies[j];
      if (b.is_sphere()) continue;
      double depth;
      Vec3 n, p;
      if (sphere_box(ee_pos, cfg.ee_radius, b, &depth, &n, &p)) {
        double mu = pair_friction(mu_ee, b.friction);
        resolve(kArmBodyId, static_cast<int>(j), p, n, depth, mu);
      }
    }
  }
};

void check_finite(const WorldState& world) {
  auto bad = [&]() {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "non-finite state at t = %.6f s, aborting episode",
                  world.time);
    throw Error(ErrorKind::Numeric, buf);
  };
  if (!world.arm.q.allFinite() || !world.arm.qdot.allFinite()) bad();
  for (const auto& b : world.bodies) {
    if (!b.dynamic) continue;
    if (!b.pose.p.allFinite() || !b.pose.R.allFinite() || !b.v.allFinite() ||
        !b.w.allFinite())
      bad();
  }
}

}  // namespace

void step(WorldState& world, const RobotModel& model, const Vec6& tau_cmd,
          const SimConfig& cfg, Rng* rng, StepInfo* info) {
  if (cfg.dt <= 0.0 || cfg.micro_steps < 1)
    throw Error(ErrorKind::InvalidArgument, "bad sim config (dt, micro_steps)");
  if (info) info->contacts.clear();  // records cover this step only
  Vec6 tau = tau_cmd;
  if (cfg.torque_noise_std > 0.0 && rng)
    for (int i = 0; i < kNumJoints; ++i)
      tau[i] += cfg.torque_noise_std * rng->normal();

  const double dtm = cfg.dt / cfg.micro_steps;
  Vec3 gravity(0, 0, -cfg.gravity);

  for (int micro = 0; micro < cfg.micro_steps; ++micro) {
    Engine eng{world, model, cfg, dtm, {}, Vec6::Zero(), info};
    eng.accum.resize(world.bodies.size());

    if (world.arm_enabled) {
      auto fk = kin::forward_kinematics(model, world.arm.q);
      eng.ee_pos = fk.ee.p;
      eng.ee_jac =
          kin::point_jacobian(model, world.arm.q, kNumJoints - 1, fk.ee.p);
      eng.ee_vel = eng.ee_jac * world.arm.qdot;
    }

    if (cfg.contacts_enabled) {
      for (size_t i = 0; i < world.bodies.size(); ++i)
        for (size_t j = i + 1; j < world.bodies.size(); ++j)
          eng.collide_pair(static_cast<int>(i), static_cast<int>(j));
      if (world.arm_enabled) eng.collide_ee();
    }

    for (const ExternalForce& ext : world.external_forces) {
      if (ext.body >= 0 && ext.body < static_cast<int>(world.bodies.size()))
        eng.apply(ext.body, ext.force, ext.point);
    }

    if (world.arm_enabled) {
      dyn::Loads loads;
      loads.gravity = gravity;
      Vec6 qddot = dyn::forward_dynamics(model, world.arm.q, world.arm.qdot,
                                         tau + eng.tau_contact, loads);
      world.arm.qdot += dtm * qddot;
      if (cfg.velocity_limits_enabled)
        for (int i = 0; i < kNumJoints; ++i) {
          double vl = model.joints[static_cast<size_t>(i)].velocity_limit;
          world.arm.qdot[i] = std::clamp(world.arm.qdot[i], -vl, vl);
        }
      world.arm.q += dtm * world.arm.qdot;
      if (cfg.joint_stops_enabled)
        for (int i = 0; i < kNumJoints; ++i) {
          const JointSpec& js = model.joints[static_cast<size_t>(i)];
          if (world.arm.q[i] < js.lower) {
            world.arm.q[i] = js.lower;
            world.arm.qdot[i] = std::max(0.0, world.arm.qdot[i]);
          } else if (world.arm.q[i] > js.upper) {
            world.arm.q[i] = js.upper;
            world.arm.qdot[i] = std::min(0.0, world.arm.qdot[i]);
          }
        }
    }

    for (size_t i = 0; i < world.bodies.size(); ++i) {
      RigidBodyState& b = world.bodies[i];
      if (!b.dynamic) continue;
      const BodyAccum& acc = eng.accum[i];
      b.v += dtm * (acc.force / b.mass + gravity);
      Mat3 Iw = b.pose.R * b.inertia * b.pose.R.transpose();
      Vec3 wdot = Iw.ldlt().solve(acc.torque - b.w.cross(Iw * b.w));
      b.w += dtm * wdot;
      b.pose.p += dtm * b.v;
      b.pose.R = orthonormalize(rotation_exp(b.w * dtm) * b.pose.R);
    }

    world.time += dtm;
  }
  check_finite(world);
}

double arm_energy(const RobotModel& model, const WorldState& world,
                  double gravity) {
  dyn::Loads loads;
  loads.gravity = Vec3(0, 0, -gravity);
  return dyn::kinetic_energy(model, world.arm.q, world.arm.qdot) +
         dyn::potential_energy(model, world.arm.q, loads);
}

DrSample sample_dr(const DrConfig& dr, Rng& rng) {
  DrSample s;
  if (!dr.enabled) return s;
  s.table_dz = rng.uniform(-dr.table_dz, dr.table_dz);
  s.friction_scale = rng.uniform(dr.friction_lo, dr.friction_hi);
  s.mass_scale = rng.uniform(dr.mass_lo, dr.mass_hi);
  for (int i = 0; i < kNumJoints; ++i)
    s.joint_pos_noise[i] = dr.joint_pos_std * rng.normal();
  for (int i = 0; i < kNumJoints; ++i)
    s.joint_vel_noise[i] = dr.joint_vel_std * rng.normal();
  for (int i = 0; i < 3; ++i) s.ee_obs_offset[i] = dr.ee_obs_std * rng.normal();
  s.torque_noise_std = dr.torque_std;
  return s;
}

void apply_dr(WorldState& world, const DrSample& sample, int object_index) {
  for (auto& b : world.bodies) {
    if (b.name.rfind("table", 0) == 0 || b.name.rfind("bump", 0) == 0)
      b.pose.p.z() += sample.table_dz;
  }
  if (object_index >= 0 &&
      object_index < static_cast<int>(world.bodies.size())) {
    RigidBodyState& obj = world.bodies[static_cast<size_t>(object_index)];
    obj.friction *= sample.friction_scale;
    obj.mass *= sample.mass_scale;
    obj.inertia *= sample.mass_scale;
  }
  world.arm.q += sample.joint_pos_noise;
  world.arm.qdot += sample.joint_vel_noise;
}

namespace {

void put(std::ostream& out, double v, bool lead_comma = true) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  if (lead_comma) out << ',';
  out << buf;
}

}  // namespace

void write_dump_header(std::ostream& out) {
  out << "t,q1,q2,q3,q4,q5,q6,qd1,qd2,qd3,qd4,qd5,qd6,"
         "obj_x,obj_y,obj_z,obj_qw,obj_qx,obj_qy,obj_qz\n";
}

void write_dump_row(std::ostream& out, const WorldState& world,
                    int object_index) {
  put(out, world.time, false);
  for (int i = 0; i < kNumJoints; ++i) put(out, world.arm.q[i]);
  for (int i = 0; i < kNumJoints; ++i) put(out, world.arm.qdot[i]);
  Vec3 p = Vec3::Zero();
  Eigen::Quaterniond quat = Eigen::Quaterniond::Identity();
  if (object_index >= 0 &&
      object_index < static_cast<int>(world.bodies.size())) {
    const RigidBodyState& obj =
        world.bodies[static_cast<size_t>(object_index)];
    p = obj.pose.p;
    quat = Eigen::Quaterniond(obj.pose.R);
    if (quat.w() < 0) quat.coeffs() *= -1.0;
  }
  put(out, p.x());
  put(out, p.y());
  put(out, p.z());
  put(out, quat.w());
  put(out, quat.x());
  put(out, quat.y());
  put(out, quat.z());
  out << '\n';
}

}  // namespace sim
}  // namespace armada
