#include "hapc/gait_fsm.hpp"

#include <algorithm>
#include <cmath>

namespace hapc {

GaitPhase classify_phase(double path_phase, double stance_fraction) {
  return path_phase < stance_fraction ? GaitPhase::Stance : GaitPhase::Swing;
}

PhaseAccumulator::PhaseAccumulator(std::size_t channels, FsmConfig config)
    : config_(config), sum_sq_(channels, 0.0) {
  if (!(config_.stance_fraction > 0.0 && config_.stance_fraction < 1.0))
    throw ConfigError("stance_fraction must lie in (0, 1)");
  if (config_.hysteresis_ticks < 1) throw ConfigError("hysteresis_ticks must be at least 1");
}

FsmEvent PhaseAccumulator::close_phase() {
  FsmEvent ev;
  ev.kind = FsmEvent::Kind::PhaseEnded;
  ev.phase = phase_;
  ev.samples = n_samples_;
  ev.rms.assign(sum_sq_.size(), 0.0);
  if (n_samples_ > 0) {
    for (std::size_t i = 0; i < sum_sq_.size(); ++i)
      ev.rms[i] = std::sqrt(sum_sq_[i] / static_cast<double>(n_samples_));
  }
  ev.cycle = cycle_;
  std::fill(sum_sq_.begin(), sum_sq_.end(), 0.0);
  n_samples_ = 0;
  disagree_ = 0;
  return ev;
}

std::vector<FsmEvent> PhaseAccumulator::on_tick(double path_phase,
                                                std::span<const double> norm_errs) {
  if (norm_errs.size() != sum_sq_.size()) throw ConfigError("channel count mismatch in FSM tick");
  std::vector<FsmEvent> events;

  if (!started_) {
    started_ = true;
    phase_ = classify_phase(path_phase, config_.stance_fraction);
    last_phase_ = path_phase;
    unwrapped_ = path_phase;
    completed_floor_ = std::floor(path_phase);
  } else {
    double step = path_phase - last_phase_;
    if (step < -0.5) step += 1.0;
    if (step > 0.5) step -= 1.0;
    unwrapped_ += step;
    last_phase_ = path_phase;
  }

  for (std::size_t i = 0; i < sum_sq_.size(); ++i) sum_sq_[i] += norm_errs[i] * norm_errs[i];
  ++n_samples_;

  if (std::floor(unwrapped_) > completed_floor_) {
    completed_floor_ = std::floor(unwrapped_);
    events.push_back(close_phase());
    phase_ = GaitPhase::Stance;
    disagree_ = 0;
    ++cycle_;
    FsmEvent ev;
    ev.kind = FsmEvent::Kind::CycleEnded;
    ev.cycle = cycle_;
    events.push_back(std::move(ev));
    return events;
  }

  // Swing returns to stance only through the cycle boundary.
  const GaitPhase observed = classify_phase(path_phase, config_.stance_fraction);
  if (phase_ == GaitPhase::Stance && observed == GaitPhase::Swing) {
    if (++disagree_ >= config_.hysteresis_ticks) {
      events.push_back(close_phase());
      phase_ = observed;
    }
  } else {
    disagree_ = 0;
  }
  return events;
}

}  // namespace hapc
