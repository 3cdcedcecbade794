#pragma once

#include "hapc/types.hpp"

namespace hapc {

/// Per-joint stiffness schedule of the exoskeleton PD controller.
struct ExoGains {
  JointVec k_st{340.0, 340.0};  // Nm/rad
  JointVec k_sw{340.0, 340.0};
  double k0 = 340.0;            // baseline stiffness
  JointVec c_cr{2.0, 2.0};      // damping B = c_cr * sqrt(K)
  double phi_e = 0.95;
  double torque_limit = 35.0;   // Nm, symmetric

  const JointVec& stiffness(GaitPhase p) const { return p == GaitPhase::Stance ? k_st : k_sw; }
  JointVec& stiffness(GaitPhase p) { return p == GaitPhase::Stance ? k_st : k_sw; }
  JointVec damping(GaitPhase p) const;
};

ExoGains make_exo_gains(double k0 = 340.0, double c_cr = 2.0, double phi_e = 0.95,
                        double torque_limit = 35.0);

/// Joint torques K * dq + c_cr * sqrt(K) * dq_dot, clamped to the actuator limit.
JointVec exo_torque(const ExoGains& gains, GaitPhase phase, const JointVec& exo_error,
                    const JointVec& exo_error_rate);

/// Per-cycle stiffness ILC: K' = phi K + (1 - phi) K0 * rms_norm_err, K' >= 0.
ExoGains update_stiffness(ExoGains gains, GaitPhase phase, const JointVec& rms_norm_err);

/// Backward-difference rate estimate followed by a first-order low-pass.
class ErrorRateFilter {
 public:
  ErrorRateFilter(double dt, double cutoff_hz = 10.0);

  const JointVec& update(const JointVec& error);
  const JointVec& rate() const { return rate_; }
  void reset();

 private:
  double dt_;
  double alpha_;
  bool primed_ = false;
  JointVec previous_{};
  JointVec rate_{};
};

}  // namespace hapc
