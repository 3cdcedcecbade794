#pragma once

#include <string_view>

#include "hapc/types.hpp"

namespace hapc {

/// Fatigue/activation parameters of one stimulated muscle.
///
/// Pulse widths in microseconds, time constants in seconds.
struct FatigueParams {
  double u_thr = 100.0;
  double u_sat = 700.0;
  double T_fat = 57.01;
  double T_rec = 59.87;
  double T_rise = 0.2071;
  double T_fall = 0.1370;
  double T_e = 0.0;
  double mu_min = 0.07;
  double beta = 0.0747;

  /// Throws ConfigError when the record is not physically meaningful.
  void validate() const;
  bool operator==(const FatigueParams&) const = default;
};

/// Identified rows for the four stimulated knee muscles.
namespace table1 {
FatigueParams right_quadriceps();
FatigueParams right_hamstrings();
FatigueParams left_quadriceps();
FatigueParams left_hamstrings();
}  // namespace table1

/// Looks up a row by name: "right_quadriceps", "left_hamstrings", ...
FatigueParams table1_row(std::string_view muscle);

struct MuscleState {
  double mu = 1.0;     // fitness
  double a = 0.0;      // activation
  double a_dot = 0.0;  // activation rate, 1/s
  double e = 0.0;      // last excitation

  /// Fatigue-scaled activation a_f = a * mu.
  double effective_activation() const { return a * mu; }
  bool operator==(const MuscleState&) const = default;
};

/// Default stimulation frequency in Hz.
inline constexpr double kStimulationFrequency = 25.0;
/// Upper bound on the integration step of the stepping functions.
inline constexpr double kMaxStep = 0.05;

/// Normalized excitation of a pulse width: zero below threshold, linear ramp, one above saturation.
double excitation(double pulse_width, const FatigueParams& p);

/// Frequency factor rho(f) = 1 - beta + beta (f/100)^2, defined for 0 <= f < 100 Hz.
double frequency_factor(double f, double beta);

/// Advances the second-order activation dynamics by one step with excitation held at `e`.
///
/// The time constant switches between rise and fall on `e > a` at the start of the step.
/// With a vanishing excitation time constant the first-order response is used exactly.
MuscleState step_activation(MuscleState state, double e, double dt, const FatigueParams& p);

/// Exact transition of the linear activation dynamics over a fixed step.
///
/// The operator factors as (T_e s + 1)(T s + 1), so a step with constant excitation
/// is a 2x2 linear map on (a - e, a').
class ActivationPropagator {
 public:
  ActivationPropagator(double T_e, double T, double dt);

  /// Applies the step to (a, a') with excitation `e`; a is not clamped.
  void apply(double e, double& a, double& a_dot) const;

 private:
  double m00_ = 0, m01_ = 0, m10_ = 0, m11_ = 0;
};

/// Closed-form counterpart of `step_activation` (same switching and clamping rules).
MuscleState step_activation_exact(MuscleState state, double e, double dt, const FatigueParams& p);

/// Fitness rate for a given drive rho * a_f.
double fitness_rate(double mu, double drive, const FatigueParams& p);

/// One RK4 step of the fitness ODE under a constant drive rho * a_f; mu clamped to [mu_min, 1].
double step_fitness_drive(double mu, double drive, double dt, const FatigueParams& p);

/// Explicit Euler variant of `step_fitness_drive`.
double step_fitness_drive_euler(double mu, double drive, double dt, const FatigueParams& p);

/// Advances fitness by one step, driven by a_f = a * mu taken at the start of the step.
MuscleState step_fitness(MuscleState state, double frequency, double dt, const FatigueParams& p);

/// Full per-tick muscle update for a commanded pulse width: excitation, activation, then fitness.
MuscleState step_muscle(MuscleState state, double pulse_width, double frequency, double dt,
                        const FatigueParams& p);

}  // namespace hapc
