#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hapc/types.hpp"

namespace hapc {

struct FsmConfig {
  double stance_fraction = 0.6;  // stance is [0, stance_fraction) of the path phase
  int hysteresis_ticks = 3;      // consecutive disagreeing ticks needed to switch phase
};

/// Stance below the split point, swing from it up to the end of the cycle.
GaitPhase classify_phase(double path_phase, double stance_fraction = 0.6);

struct FsmEvent {
  enum class Kind { PhaseEnded, CycleEnded };
  Kind kind = Kind::PhaseEnded;
  GaitPhase phase = GaitPhase::Stance;  // PhaseEnded only
  std::vector<double> rms;              // PhaseEnded only, one per channel
  std::size_t samples = 0;              // PhaseEnded only
  std::size_t cycle = 0;                // number of completed cycles after this event
};

/// Stance/swing state machine that accumulates per-channel squared errors.
///
/// A cycle ends when the unwrapped path phase passes a new integer; the phase in
/// progress is closed at that moment and the machine restarts in stance. Inside a
/// cycle only the stance-to-swing switch exists, and it needs `hysteresis_ticks`
/// consecutive swing classifications.
class PhaseAccumulator {
 public:
  PhaseAccumulator(std::size_t channels, FsmConfig config = {});

  std::vector<FsmEvent> on_tick(double path_phase, std::span<const double> norm_errs);

  GaitPhase phase() const { return phase_; }
  std::size_t cycle_index() const { return cycle_; }
  std::size_t samples() const { return n_samples_; }
  std::span<const double> sum_sq() const { return sum_sq_; }
  const FsmConfig& config() const { return config_; }

 private:
  FsmEvent close_phase();

  FsmConfig config_;
  bool started_ = false;
  GaitPhase phase_ = GaitPhase::Stance;
  int disagree_ = 0;
  double last_phase_ = 0.0;
  double unwrapped_ = 0.0;
  double completed_floor_ = 0.0;
  std::size_t cycle_ = 0;
  std::size_t n_samples_ = 0;
  std::vector<double> sum_sq_;
};

}  // namespace hapc
