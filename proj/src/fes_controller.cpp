#include "hapc/fes_controller.hpp"

#include <algorithm>

namespace hapc {

double fes_stiffness(const FatigueParams& p, double r_fesb0) {
  if (!(r_fesb0 > 0.0)) throw ConfigError("initial FES band radius must be positive");
  return (p.u_sat - p.u_thr) / (2.0 * r_fesb0);
}

FesGains make_fes_gains(std::span<const MuscleChannel> channels, double r_fesb0, double phi_f,
                        double gamma0) {
  if (!(phi_f > 0.0 && phi_f < 1.0)) throw ConfigError("phi_f must lie in (0, 1)");
  if (!(gamma0 >= 0.0 && gamma0 <= 1.0)) throw ConfigError("gamma0 must lie in [0, 1]");
  FesGains gains;
  gains.r_fesb0 = r_fesb0;
  gains.phi_f = phi_f;
  for (const auto& ch : channels)
    gains.channels.push_back({gamma0, gamma0, fes_stiffness(ch.params, r_fesb0)});
  return gains;
}

double muscle_error(double fes_error, Action action) {
  if (action == Action::Flexor) return fes_error > 0.0 ? fes_error : 0.0;
  return fes_error < 0.0 ? -fes_error : 0.0;
}

double stimulation(const MuscleChannel& channel, const ChannelGains& gains, GaitPhase phase,
                   double err) {
  const double u = channel.state.mu * gains.gamma(phase) * gains.k_f * err;
  return std::clamp(u, 0.0, channel.params.u_sat);
}

FesGains update_gamma(FesGains gains, GaitPhase phase, std::span<const double> rms_norm_err) {
  if (rms_norm_err.size() != gains.channels.size())
    throw ConfigError("one normalized error per channel expected");
  const double learn = 1.0 - gains.phi_f;
  for (std::size_t i = 0; i < gains.channels.size(); ++i) {
    double& g = gains.channels[i].gamma(phase);
    g = std::clamp(gains.phi_f * g + learn * rms_norm_err[i], 0.0, 1.0);
  }
  return gains;
}

double fes_band_radius(double r_fesb0, double r_db, std::span<const MuscleState> states) {
  if (states.empty()) throw ConfigError("FES band needs at least one stimulated muscle");
  double sum = 0.0;
  for (const auto& s : states) sum += s.mu;
  return std::max(r_fesb0 * sum / static_cast<double>(states.size()), r_db);
}

double fes_band_radius(const FesGains& gains, double r_db, std::span<const MuscleChannel> channels) {
  std::vector<MuscleState> states;
  states.reserve(channels.size());
  for (const auto& ch : channels) states.push_back(ch.state);
  return fes_band_radius(gains.r_fesb0, r_db, states);
}

}  // namespace hapc
