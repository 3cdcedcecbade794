#pragma once

#include <span>
#include <vector>

#include "hapc/fatigue_model.hpp"
#include "hapc/types.hpp"

namespace hapc {

/// One stimulated muscle acting on one joint of one leg.
struct MuscleChannel {
  Joint joint = Joint::Knee;
  Side side = Side::Left;
  Action action = Action::Extensor;
  FatigueParams params;
  MuscleState state;
};

/// ILC gains and proportional stiffness of one channel.
struct ChannelGains {
  double gamma_st = 1.0;
  double gamma_sw = 1.0;
  double k_f = 0.0;  // us per radian

  double gamma(GaitPhase phase) const { return phase == GaitPhase::Stance ? gamma_st : gamma_sw; }
  double& gamma(GaitPhase phase) { return phase == GaitPhase::Stance ? gamma_st : gamma_sw; }
};

struct FesGains {
  std::vector<ChannelGains> channels;  // parallel to the leg's channel list
  double r_fesb0 = deg2rad(6.0);
  double phi_f = 0.95;
};

/// Proportional stiffness that maps twice the initial FES band onto the stimulation range.
double fes_stiffness(const FatigueParams& p, double r_fesb0);

/// Builds gains for a channel list with every gamma at `gamma0`.
FesGains make_fes_gains(std::span<const MuscleChannel> channels, double r_fesb0, double phi_f,
                        double gamma0 = 1.0);

/// Error magnitude a muscle can correct, given the banded joint error (q_ref - q_act).
///
/// Positive error (joint should flex more) engages the flexor, negative the extensor.
double muscle_error(double fes_error, Action action);

/// Commanded pulse width mu * gamma * k_f * err, clamped to [0, u_sat].
double stimulation(const MuscleChannel& channel, const ChannelGains& gains, GaitPhase phase,
                   double err);

/// Per-cycle ILC update of one phase's gammas; result clamped to [0, 1].
FesGains update_gamma(FesGains gains, GaitPhase phase, std::span<const double> rms_norm_err);

/// FES band radius scaled by the mean fitness of the stimulated muscles, never below r_db.
double fes_band_radius(double r_fesb0, double r_db, std::span<const MuscleState> states);
double fes_band_radius(const FesGains& gains, double r_db, std::span<const MuscleChannel> channels);

}  // namespace hapc
