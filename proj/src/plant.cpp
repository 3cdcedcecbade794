#include "hapc/plant.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hapc/csv.hpp"

namespace hapc {

namespace {

// Absolute segment angles from the downward vertical: theta1 = q_hip, theta2 = q_hip - q_knee.
struct Terms {
  double m11, m12, m22;  // mass matrix in absolute angles
  double h1, h2;         // velocity terms
  double g1, g2;         // gravity terms
};

Terms terms(const PlantParams& p, const JointVec& q, const JointVec& qdot) {
  const double th1 = q[0];
  const double th2 = q[0] - q[1];
  const double w1 = qdot[0];
  const double w2 = qdot[0] - qdot[1];
  const double c1 = p.thigh.com_fraction * p.thigh.length;
  const double c2 = p.shank.com_fraction * p.shank.length;
  const double l1 = p.thigh.length;
  const double m1 = p.thigh.mass;
  const double m2 = p.shank.mass;
  const double coupling = m2 * l1 * c2;
  const double d = th1 - th2;
  Terms t;
  t.m11 = p.thigh.inertia + m1 * c1 * c1 + m2 * l1 * l1;
  t.m12 = coupling * std::cos(d);
  t.m22 = p.shank.inertia + m2 * c2 * c2;
  t.h1 = coupling * std::sin(d) * w2 * w2;
  t.h2 = -coupling * std::sin(d) * w1 * w1;
  t.g1 = (m1 * c1 + m2 * l1) * p.gravity * std::sin(th1);
  t.g2 = m2 * c2 * p.gravity * std::sin(th2);
  return t;
}

double wrap_unit(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

}  // namespace

void PlantParams::validate() const {
  for (const Segment* s : {&thigh, &shank}) {
    if (!(s->length > 0.0) || !(s->mass > 0.0)) throw ConfigError("segment length and mass must be positive");
    if (!(s->com_fraction >= 0.0 && s->com_fraction <= 1.0)) throw ConfigError("com_fraction must lie in [0, 1]");
    if (s->inertia < 0.0) throw ConfigError("segment inertia must be nonnegative");
  }
  if (gravity < 0.0) throw ConfigError("gravity must be nonnegative");
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    if (friction[j] < 0.0) throw ConfigError("joint friction must be nonnegative");
    if (!(lower_limit[j] < upper_limit[j])) throw ConfigError("joint limits are inverted");
  }
  if (substeps < 1) throw ConfigError("plant substeps must be at least 1");
}

JointVec forward_dynamics(const PlantParams& p, const LegState& s, const JointVec& tau) {
  const Terms t = terms(p, s.q, s.qdot);
  const double tau_hip = tau[0] - p.friction[0] * s.qdot[0];
  const double tau_knee = tau[1] - p.friction[1] * s.qdot[1];

  if (p.knee_locked) {
    // Both segments rotate together: project onto direction (1, 1) in absolute angles.
    const double inertia = t.m11 + 2.0 * t.m12 + t.m22;
    const double acc = (tau_hip - (t.h1 + t.h2) - (t.g1 + t.g2)) / inertia;
    return {acc, 0.0};
  }

  // Generalized forces in absolute angles.
  const double f1 = tau_hip + tau_knee - t.h1 - t.g1;
  const double f2 = -tau_knee - t.h2 - t.g2;
  const double det = t.m11 * t.m22 - t.m12 * t.m12;
  const double a1 = (t.m22 * f1 - t.m12 * f2) / det;
  const double a2 = (t.m11 * f2 - t.m12 * f1) / det;
  return {a1, a1 - a2};
}

JointVec inverse_dynamics(const PlantParams& p, const JointVec& q, const JointVec& qdot,
                          const JointVec& qddot) {
  const Terms t = terms(p, q, qdot);
  const double a1 = qddot[0];
  const double a2 = qddot[0] - qddot[1];
  const double f1 = t.m11 * a1 + t.m12 * a2 + t.h1 + t.g1;
  const double f2 = t.m12 * a1 + t.m22 * a2 + t.h2 + t.g2;
  // Joint torques are the transpose map of the absolute-angle forces.
  return {f1 + f2 + p.friction[0] * qdot[0], -f2 + p.friction[1] * qdot[1]};
}

namespace {

// Plastic stop: the blocked joint halts and the momentum conjugate to the free joint is kept.
void apply_joint_limits(const PlantParams& p, LegState& s) {
  std::array<bool, kNumJoints> hit{};
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    if (s.q[j] < p.lower_limit[j]) {
      s.q[j] = p.lower_limit[j];
      hit[j] = true;
    } else if (s.q[j] > p.upper_limit[j]) {
      s.q[j] = p.upper_limit[j];
      hit[j] = true;
    }
  }
  if (!hit[0] && !hit[1]) return;
  const Terms t = terms(p, s.q, s.qdot);
  const double w1 = s.qdot[0];
  const double w2 = s.qdot[0] - s.qdot[1];
  const double p1 = t.m11 * w1 + t.m12 * w2;
  const double p2 = t.m12 * w1 + t.m22 * w2;
  if ((hit[0] && hit[1]) || (hit[0] && !(t.m22 > 0.0))) {
    s.qdot = {0.0, 0.0};
  } else if (hit[1]) {
    s.qdot = {(p1 + p2) / (t.m11 + 2.0 * t.m12 + t.m22), 0.0};
  } else {
    s.qdot = {0.0, -p2 / t.m22};
  }
}

// Symplectic Euler on absolute-angle momenta: the momentum update is implicit in the
// new velocity (fixed-point iterated), positions then move with the new velocity.
void symplectic_substep(const PlantParams& p, LegState& s, const JointVec& tau, double h) {
  const Terms t = terms(p, s.q, s.qdot);
  const double coupling_sin =
      p.shank.mass * p.thigh.length * p.shank.com_fraction * p.shank.length * std::sin(s.q[1]);
  const double det = t.m11 * t.m22 - t.m12 * t.m12;
  double w1 = s.qdot[0];
  double w2 = s.qdot[0] - s.qdot[1];
  const double p1 = t.m11 * w1 + t.m12 * w2;
  const double p2 = t.m12 * w1 + t.m22 * w2;
  for (int it = 0; it < 4; ++it) {
    const double tau_hip = tau[0] - p.friction[0] * w1;
    const double tau_knee = tau[1] - p.friction[1] * (w1 - w2);
    const double cross = coupling_sin * w1 * w2;
    const double n1 = p1 + h * (tau_hip + tau_knee - cross - t.g1);
    const double n2 = p2 + h * (-tau_knee + cross - t.g2);
    w1 = (t.m22 * n1 - t.m12 * n2) / det;
    w2 = (t.m11 * n2 - t.m12 * n1) / det;
  }
  s.q[0] += h * w1;
  s.q[1] += h * (w1 - w2);
  // Velocity consistent with the new momentum at the new configuration.
  const Terms u = terms(p, s.q, s.qdot);
  const double n1 = t.m11 * w1 + t.m12 * w2;
  const double n2 = t.m12 * w1 + t.m22 * w2;
  const double det_new = u.m11 * u.m22 - u.m12 * u.m12;
  w1 = (u.m22 * n1 - u.m12 * n2) / det_new;
  w2 = (u.m11 * n2 - u.m12 * n1) / det_new;
  s.qdot = {w1, w1 - w2};
}

}  // namespace

LegState step_dynamics(const PlantParams& p, LegState s, const JointTorques& torques, double dt) {
  if (!(dt > 0.0)) throw ConfigError("integration step must be positive");
  const JointVec tau = torques.total();
  const double h = dt / p.substeps;
  for (int i = 0; i < p.substeps; ++i) {
    if (p.knee_locked) {
      s.qdot[0] += h * forward_dynamics(p, s, tau)[0];
      s.qdot[1] = 0.0;
      s.q[0] += h * s.qdot[0];
    } else {
      symplectic_substep(p, s, tau, h);
    }
    apply_joint_limits(p, s);
  }
  return s;
}

double mechanical_energy(const PlantParams& p, const LegState& s) {
  const Terms t = terms(p, s.q, s.qdot);
  const double w1 = s.qdot[0];
  const double w2 = s.qdot[0] - s.qdot[1];
  const double kinetic = 0.5 * (t.m11 * w1 * w1 + 2.0 * t.m12 * w1 * w2 + t.m22 * w2 * w2);
  const double c1 = p.thigh.com_fraction * p.thigh.length;
  const double c2 = p.shank.com_fraction * p.shank.length;
  const double th1 = s.q[0];
  const double th2 = s.q[0] - s.q[1];
  const double potential =
      p.gravity * (p.thigh.mass * c1 * (1.0 - std::cos(th1)) +
                   p.shank.mass * (p.thigh.length * (1.0 - std::cos(th1)) + c2 * (1.0 - std::cos(th2))));
  return kinetic + potential;
}

MuscleTorqueSpec default_torque_spec(Joint joint, Action action) {
  if (joint == Joint::Knee)
    return action == Action::Extensor ? MuscleTorqueSpec{40.0, deg2rad(45.0)}
                                      : MuscleTorqueSpec{30.0, deg2rad(30.0)};
  return action == Action::Extensor ? MuscleTorqueSpec{40.0, deg2rad(20.0)}
                                    : MuscleTorqueSpec{35.0, deg2rad(10.0)};
}

double fes_torque(const MuscleChannel& channel, const MuscleTorqueSpec& spec, double q_joint) {
  const double sign = channel.action == Action::Flexor ? 1.0 : -1.0;
  const double scaling = std::max(0.0, std::cos(q_joint - spec.q_opt));
  return sign * channel.state.effective_activation() * spec.tau_max * scaling;
}

JointVec VoluntaryProfile::at(double clock_phase) const {
  const std::size_t n = phase.size();
  clock_phase = wrap_unit(clock_phase);
  auto it = std::upper_bound(phase.begin(), phase.end(), clock_phase);
  const std::size_t hi = static_cast<std::size_t>(it - phase.begin()) % n;
  const std::size_t lo = (hi + n - 1) % n;
  double span = wrap_unit(phase[hi] - phase[lo]);
  if (span == 0.0) span = 1.0;
  const double s = wrap_unit(clock_phase - phase[lo]) / span;
  JointVec out{};
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    out[j] = torque[lo][j] + s * (torque[hi][j] - torque[lo][j]);
    out[j] = std::clamp(out[j], -torque_limit[j], torque_limit[j]);
  }
  return out;
}

VoluntaryProfile VoluntaryProfile::load(const std::string& filename, std::string label) {
  CsvTable table = read_csv(filename);
  VoluntaryProfile out;
  out.label = std::move(label);
  out.phase = table.column("phase");
  const auto hip = table.column("hip_tau_nm");
  const auto knee = table.column("knee_tau_nm");
  if (out.phase.size() < 2) throw ConfigError(filename + ": profile needs at least 2 samples");
  for (std::size_t k = 0; k < out.phase.size(); ++k) {
    if (!(out.phase[k] >= 0.0 && out.phase[k] < 1.0) || (k > 0 && out.phase[k] <= out.phase[k - 1]))
      throw ConfigError(filename + ": phase column must be sorted ascending in [0, 1)");
    out.torque.push_back({hip[k], knee[k]});
  }
  return out;
}

void VoluntaryProfile::save(const std::string& filename, const ReferencePath& path) const {
  CsvTable table({"phase", "hip_deg", "knee_deg", "hip_tau_nm", "knee_tau_nm"});
  for (std::size_t k = 0; k < phase.size(); ++k) {
    const JointVec q = path.at_phase(phase[k]);
    table.add_row({phase[k], rad2deg(q[0]), rad2deg(q[1]), torque[k][0], torque[k][1]});
  }
  write_csv(filename, table);
}

void path_derivatives(const ReferencePath& path, double cycle_period, double phase, JointVec& qdot,
                      JointVec& qddot) {
  const double h = 1.0 / static_cast<double>(path.size());
  const JointVec prev = path.at_phase(phase - h);
  const JointVec mid = path.at_phase(phase);
  const JointVec next = path.at_phase(phase + h);
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    qdot[j] = (next[j] - prev[j]) / (2.0 * h) / cycle_period;
    qddot[j] = (next[j] - 2.0 * mid[j] + prev[j]) / (h * h) / (cycle_period * cycle_period);
  }
}

VoluntaryProfile make_voluntary_profile(const ReferencePath& path, const PlantParams& params,
                                        double cycle_period, double scale, double phase_lag,
                                        std::string label) {
  if (!(cycle_period > 0.0)) throw ConfigError("cycle period must be positive");
  VoluntaryProfile out;
  out.label = std::move(label);
  std::vector<double> phases;
  for (const auto& s : path.samples()) phases.push_back(s.phase);
  std::sort(phases.begin(), phases.end());
  for (double ph : phases) {
    const double source = ph - phase_lag;
    JointVec qdot{}, qddot{};
    path_derivatives(path, cycle_period, source, qdot, qddot);
    const JointVec tau = inverse_dynamics(params, path.at_phase(source), qdot, qddot);
    out.phase.push_back(ph);
    out.torque.push_back({scale * tau[0], scale * tau[1]});
  }
  return out;
}

}  // namespace hapc
