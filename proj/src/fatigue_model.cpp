#include "hapc/fatigue_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hapc {

void FatigueParams::validate() const {
  if (!(u_thr > 0.0)) throw ConfigError("u_thr must be positive");
  if (!(u_sat > u_thr)) throw ConfigError("u_sat must exceed u_thr");
  if (!(T_fat > 0.0) || !(T_rec > 0.0)) throw ConfigError("T_fat and T_rec must be positive");
  if (T_rise < 0.0 || T_fall < 0.0 || T_e < 0.0)
    throw ConfigError("activation time constants must be nonnegative");
  if (!(mu_min >= 0.0 && mu_min < 1.0)) throw ConfigError("mu_min must lie in [0, 1)");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
}

namespace table1 {
FatigueParams right_quadriceps() { return {100, 700, 57.01, 59.87, 0.2071, 0.1370, 0.0, 0.07, 0.0747}; }
FatigueParams right_hamstrings() { return {250, 600, 64.34, 65.27, 0.2440, 0.0829, 0.06, 0.13, 0.1493}; }
FatigueParams left_quadriceps() { return {200, 600, 36.05, 69.56, 0.1428, 0.2533, 0.0, 0.17, 0.2453}; }
FatigueParams left_hamstrings() { return {250, 550, 44.58, 105.19, 0.1963, 0.1797, 0.002, 0.14, 0.2347}; }
}  // namespace table1

FatigueParams table1_row(std::string_view muscle) {
  if (muscle == "right_quadriceps") return table1::right_quadriceps();
  if (muscle == "right_hamstrings") return table1::right_hamstrings();
  if (muscle == "left_quadriceps") return table1::left_quadriceps();
  if (muscle == "left_hamstrings") return table1::left_hamstrings();
  throw ConfigError("unknown muscle '" + std::string(muscle) + "'");
}

double excitation(double pulse_width, const FatigueParams& p) {
  if (pulse_width <= p.u_thr) return 0.0;
  if (pulse_width >= p.u_sat) return 1.0;
  return (pulse_width - p.u_thr) / (p.u_sat - p.u_thr);
}

double frequency_factor(double f, double beta) {
  if (!(f >= 0.0 && f < 100.0))
    throw ConfigError("stimulation frequency must lie in [0, 100) Hz");
  const double r = f / 100.0;
  return 1.0 - beta + beta * r * r;
}

MuscleState step_activation(MuscleState state, double e, double dt, const FatigueParams& p) {
  if (!(dt > 0.0)) throw ConfigError("integration step must be positive");
  if (dt > kMaxStep) throw ConfigError("integration step exceeds 0.05 s");

  const double T = e > state.a ? p.T_rise : p.T_fall;
  const double k1 = p.T_e * T;
  const double k2 = p.T_e + T;

  if (k1 < 1e-9) {
    // First-order form k2 * a' + a = e, solved exactly over the step.
    if (k2 < 1e-9) {
      state.a = e;
      state.a_dot = 0.0;
    } else {
      const double decay = std::exp(-dt / k2);
      state.a = e + (state.a - e) * decay;
      state.a_dot = (e - state.a) / k2;
    }
  } else {
    // RK4 on (a, a'), substepped so each step stays well inside the stability region.
    const double fastest = std::min(p.T_e, T);
    const int substeps = std::max(1, static_cast<int>(std::ceil(dt / (0.5 * fastest))));
    const double h = dt / substeps;
    auto accel = [&](double a, double v) { return (e - a - k2 * v) / k1; };
    double a = state.a;
    double v = state.a_dot;
    for (int i = 0; i < substeps; ++i) {
      const double a1 = v, v1 = accel(a, v);
      const double a2 = v + 0.5 * h * v1, v2 = accel(a + 0.5 * h * a1, v + 0.5 * h * v1);
      const double a3 = v + 0.5 * h * v2, v3 = accel(a + 0.5 * h * a2, v + 0.5 * h * v2);
      const double a4 = v + h * v3, v4 = accel(a + h * a3, v + h * v3);
      a += h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
      v += h / 6.0 * (v1 + 2 * v2 + 2 * v3 + v4);
    }
    state.a = a;
    state.a_dot = v;
  }

  if (state.a > 1.0 || state.a < 0.0) {
    state.a = std::clamp(state.a, 0.0, 1.0);
    state.a_dot = 0.0;
  }
  state.e = e;
  return state;
}

ActivationPropagator::ActivationPropagator(double T_e, double T, double dt) {
  if (!(dt > 0.0)) throw ConfigError("integration step must be positive");
  const double slow = std::max(T_e, T);
  const double fast = std::min(T_e, T);
  if (slow < 1e-9) {
    // Instantaneous: a follows e.
    m00_ = m01_ = m10_ = m11_ = 0.0;
  } else if (fast < 1e-9) {
    const double d = std::exp(-dt / slow);
    m00_ = d;
    m01_ = 0.0;
    m10_ = -d / slow;
    m11_ = 0.0;
  } else if (slow - fast <= 1e-6 * slow) {
    // Repeated root r = -1/T: x(t) = (x0 + (v0 - r x0) t) e^{rt}.
    const double r = -1.0 / slow;
    const double d = std::exp(r * dt);
    m00_ = (1.0 - r * dt) * d;
    m01_ = dt * d;
    m10_ = -r * r * dt * d;
    m11_ = (1.0 + r * dt) * d;
  } else {
    const double r1 = -1.0 / fast;
    const double r2 = -1.0 / slow;
    const double d1 = std::exp(r1 * dt);
    const double d2 = std::exp(r2 * dt);
    const double w = 1.0 / (r1 - r2);
    // x(t) = c1 e^{r1 t} + c2 e^{r2 t}, c1 = (v0 - r2 x0) w, c2 = x0 - c1.
    m00_ = -r2 * w * d1 + (1.0 + r2 * w) * d2;
    m01_ = w * d1 - w * d2;
    m10_ = -r2 * w * r1 * d1 + (1.0 + r2 * w) * r2 * d2;
    m11_ = w * r1 * d1 - w * r2 * d2;
  }
}

void ActivationPropagator::apply(double e, double& a, double& a_dot) const {
  const double x = a - e;
  const double v = a_dot;
  a = e + m00_ * x + m01_ * v;
  a_dot = m10_ * x + m11_ * v;
}

MuscleState step_activation_exact(MuscleState state, double e, double dt, const FatigueParams& p) {
  if (!(dt > 0.0)) throw ConfigError("integration step must be positive");
  if (dt > kMaxStep) throw ConfigError("integration step exceeds 0.05 s");
  const double T = e > state.a ? p.T_rise : p.T_fall;
  ActivationPropagator(p.T_e, T, dt).apply(e, state.a, state.a_dot);
  if (state.a > 1.0 || state.a < 0.0) {
    state.a = std::clamp(state.a, 0.0, 1.0);
    state.a_dot = 0.0;
  }
  state.e = e;
  return state;
}

double fitness_rate(double mu, double drive, const FatigueParams& p) {
  return (p.mu_min - mu) * drive / p.T_fat + (1.0 - mu) * (1.0 - drive) / p.T_rec;
}

double step_fitness_drive(double mu, double drive, double dt, const FatigueParams& p) {
  if (!(dt > 0.0)) throw ConfigError("integration step must be positive");
  const double k1 = fitness_rate(mu, drive, p);
  const double k2 = fitness_rate(mu + 0.5 * dt * k1, drive, p);
  const double k3 = fitness_rate(mu + 0.5 * dt * k2, drive, p);
  const double k4 = fitness_rate(mu + dt * k3, drive, p);
  mu += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  return std::clamp(mu, p.mu_min, 1.0);
}

double step_fitness_drive_euler(double mu, double drive, double dt, const FatigueParams& p) {
  if (!(dt > 0.0)) throw ConfigError("integration step must be positive");
  mu += dt * fitness_rate(mu, drive, p);
  return std::clamp(mu, p.mu_min, 1.0);
}

MuscleState step_fitness(MuscleState state, double frequency, double dt, const FatigueParams& p) {
  const double drive = frequency_factor(frequency, p.beta) * state.effective_activation();
  state.mu = step_fitness_drive(state.mu, drive, dt, p);
  return state;
}

MuscleState step_muscle(MuscleState state, double pulse_width, double frequency, double dt,
                        const FatigueParams& p) {
  const double drive = frequency_factor(frequency, p.beta) * state.effective_activation();
  MuscleState next = step_activation(state, excitation(pulse_width, p), dt, p);
  next.mu = step_fitness_drive(state.mu, drive, dt, p);
  return next;
}

}  // namespace hapc
