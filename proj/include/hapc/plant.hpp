#pragma once

#include <string>
#include <vector>

#include "hapc/fes_controller.hpp"
#include "hapc/path_geometry.hpp"
#include "hapc/types.hpp"

namespace hapc {

/// Rigid segment with its mass lumped at the centre of mass.
struct Segment {
  double length = 0.0;        // m
  double mass = 0.0;          // kg
  double com_fraction = 0.5;  // distance of the COM from the proximal joint / length
  double inertia = 0.0;       // kg m^2 about the COM
};

/// Planar hip-knee leg hanging from a fixed pelvis.
struct PlantParams {
  Segment thigh{0.42, 8.1, 0.433, 0.0};
  Segment shank{0.46, 4.8, 0.55, 0.0};  // shank and foot
  double gravity = 9.81;
  JointVec friction{1.0, 0.5};          // viscous, Nm s/rad
  JointVec lower_limit{deg2rad(-30.0), deg2rad(0.0)};
  JointVec upper_limit{deg2rad(120.0), deg2rad(140.0)};
  int substeps = 20;                    // symplectic Euler steps per tick
  bool knee_locked = false;

  void validate() const;
};

struct LegState {
  JointVec q{};
  JointVec qdot{};
  bool operator==(const LegState&) const = default;
};

struct JointTorques {
  JointVec voluntary{};
  JointVec fes{};
  JointVec exo{};

  JointVec total() const {
    return {voluntary[0] + fes[0] + exo[0], voluntary[1] + fes[1] + exo[1]};
  }
};

/// Advances the leg by one control tick.
LegState step_dynamics(const PlantParams& params, LegState state, const JointTorques& torques,
                       double dt);

/// Joint accelerations for the given state and net applied joint torques.
JointVec forward_dynamics(const PlantParams& params, const LegState& state, const JointVec& tau);

/// Joint torques that produce `qddot` at the given state (friction included).
JointVec inverse_dynamics(const PlantParams& params, const JointVec& q, const JointVec& qdot,
                          const JointVec& qddot);

/// Kinetic plus potential energy, zero when hanging at rest.
double mechanical_energy(const PlantParams& params, const LegState& state);

/// Peak torque and torque-angle optimum of one stimulated muscle.
struct MuscleTorqueSpec {
  double tau_max = 40.0;  // Nm
  double q_opt = 0.0;     // rad
};

/// Default surrogate torque capacity for a muscle by joint and action.
MuscleTorqueSpec default_torque_spec(Joint joint, Action action);

/// Torque a stimulated muscle produces about its joint, signed positive for flexion.
double fes_torque(const MuscleChannel& channel, const MuscleTorqueSpec& spec, double q_joint);

/// Scripted human joint torques as a periodic function of the gait-clock phase.
struct VoluntaryProfile {
  std::string label;              // "high_error", "low_error", ...
  std::vector<double> phase;      // strictly increasing in [0, 1)
  std::vector<JointVec> torque;   // Nm
  JointVec torque_limit{80.0, 60.0};

  JointVec at(double clock_phase) const;

  /// Profile file: reference-path columns plus hip_tau_nm, knee_tau_nm.
  static VoluntaryProfile load(const std::string& filename, std::string label);
  void save(const std::string& filename, const ReferencePath& path) const;
};

/// Inverse-dynamics torque of walking the path in `cycle_period` seconds, scaled by
/// `scale` and delayed by `phase_lag` of a cycle.
VoluntaryProfile make_voluntary_profile(const ReferencePath& path, const PlantParams& params,
                                        double cycle_period, double scale, double phase_lag,
                                        std::string label);

/// Reference joint velocity and acceleration along the path at a uniform gait clock.
void path_derivatives(const ReferencePath& path, double cycle_period, double phase, JointVec& qdot,
                      JointVec& qddot);

}  // namespace hapc
