#include "hapc/exo_controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hapc {

JointVec ExoGains::damping(GaitPhase p) const {
  const JointVec& k = stiffness(p);
  return {c_cr[0] * std::sqrt(k[0]), c_cr[1] * std::sqrt(k[1])};
}

ExoGains make_exo_gains(double k0, double c_cr, double phi_e, double torque_limit) {
  if (!(k0 >= 0.0)) throw ConfigError("baseline stiffness must be nonnegative");
  if (!(c_cr >= 0.0)) throw ConfigError("c_cr must be nonnegative");
  if (!(phi_e > 0.0 && phi_e < 1.0)) throw ConfigError("phi_e must lie in (0, 1)");
  if (!(torque_limit > 0.0)) throw ConfigError("torque limit must be positive");
  ExoGains g;
  g.k_st = {k0, k0};
  g.k_sw = {k0, k0};
  g.k0 = k0;
  g.c_cr = {c_cr, c_cr};
  g.phi_e = phi_e;
  g.torque_limit = torque_limit;
  return g;
}

JointVec exo_torque(const ExoGains& gains, GaitPhase phase, const JointVec& exo_error,
                    const JointVec& exo_error_rate) {
  const JointVec& k = gains.stiffness(phase);
  const JointVec b = gains.damping(phase);
  JointVec tau{};
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    tau[j] = std::clamp(k[j] * exo_error[j] + b[j] * exo_error_rate[j], -gains.torque_limit,
                        gains.torque_limit);
  }
  return tau;
}

ExoGains update_stiffness(ExoGains gains, GaitPhase phase, const JointVec& rms_norm_err) {
  JointVec& k = gains.stiffness(phase);
  const double learn = 1.0 - gains.phi_e;
  for (std::size_t j = 0; j < kNumJoints; ++j)
    k[j] = std::max(0.0, gains.phi_e * k[j] + learn * gains.k0 * rms_norm_err[j]);
  return gains;
}

ErrorRateFilter::ErrorRateFilter(double dt, double cutoff_hz) : dt_(dt) {
  if (!(dt > 0.0) || !(cutoff_hz > 0.0)) throw ConfigError("filter needs positive dt and cutoff");
  const double tau = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
  alpha_ = dt / (dt + tau);
}

const JointVec& ErrorRateFilter::update(const JointVec& error) {
  if (primed_) {
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      const double raw = (error[j] - previous_[j]) / dt_;
      rate_[j] += alpha_ * (raw - rate_[j]);
    }
  }
  previous_ = error;
  primed_ = true;
  return rate_;
}

void ErrorRateFilter::reset() {
  primed_ = false;
  previous_ = {};
  rate_ = {};
}

}  // namespace hapc
