#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hapc/fatigue_model.hpp"

namespace hapc {

/// Raised when the data cannot support an identification (e.g. no muscle response).
class IdentificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniformly sampled isometric stimulation record.
struct IsometricTrace {
  std::vector<double> time;         // s
  std::vector<double> pulse_width;  // us, commanded
  std::vector<double> force;        // N

  std::size_t size() const { return time.size(); }
  double dt() const;
  void validate() const;

  /// Samples [begin, end) with time shifted to start at zero.
  IsometricTrace slice(std::size_t begin, std::size_t end) const;

  /// Columns time_s, pulse_width_us, force_n.
  static IsometricTrace load(const std::string& filename);
  void save(const std::string& filename) const;
};

// ---------------------------------------------------------------------------
// Protocols and synthetic data

struct StaircaseProtocol {
  double increment = 50.0;   // us
  double max_pulse = 800.0;  // us
  double bout = 4.0;         // s
  double rest = 20.0;        // s, also precedes the first bout
};

struct FatigueProtocol {
  double fatigue_duration = 180.0;   // s of continuous stimulation at u_sat
  double recovery_duration = 120.0;  // s of intermittent pulses
  double pulse_on = 1.0;             // s
  double pulse_off = 10.0;           // s
};

/// Commanded pulse widths of the staircase, starting with a rest.
std::vector<double> staircase_pulses(const StaircaseProtocol& protocol, double dt);

/// Continuous stimulation at `u_sat`, then rest-first intermittent pulses at `u_sat`.
std::vector<double> fatigue_pulses(const FatigueProtocol& protocol, double u_sat, double dt);

/// Force G * a_f for a fresh muscle stimulated with `pulses`; `noise` is the relative
/// standard deviation of multiplicative Gaussian noise.
IsometricTrace simulate_isometric(const FatigueParams& params, double gain,
                                  std::span<const double> pulses, double dt, double noise = 0.0,
                                  std::uint64_t seed = 0, double frequency = kStimulationFrequency);

// ---------------------------------------------------------------------------
// Threshold and saturation detection

struct Bout {
  double pulse_width = 0.0;
  double plateau = 0.0;  // mean force over the last second
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct ThresholdResult {
  double u_thr = 0.0;
  double u_sat = 0.0;
  bool saturation_reached = false;
  double noise_floor = 0.0;
  double noise_sigma = 0.0;
  std::vector<Bout> bouts;
};

/// Finds threshold and saturation pulse widths from a staircase record.
///
/// u_thr is the highest bout still at the noise floor (floor + 3 sigma) just below the first
/// responding bout; u_sat is the first bout after which every step adds less than 5 %.
/// Throws IdentificationError when no bout rises above the noise floor.
ThresholdResult detect_thresholds(const IsometricTrace& staircase, double increment);

// ---------------------------------------------------------------------------
// Fatigue model fitting

/// Box bounds on the fitted quantities.
struct FitBounds {
  double time_min = 0.01;
  double time_max = 600.0;
  double T_e_max = 0.5;
  double mu_min_max = 0.5;
};

struct FitOptions {
  int starts = 5;
  int max_evaluations = 4000;  // per start
  double tolerance = 1e-10;    // relative objective spread at convergence
  std::uint64_t seed = 1;
  FitBounds bounds;
  double frequency = kStimulationFrequency;
  std::size_t residual_from = 0;  // first sample counted in the objective
  // At a single stimulation frequency beta, T_fat and mu_min enter the model through two
  // combinations only, so beta is held at the seed value unless this is set.
  bool fit_beta = false;
};

struct FitResult {
  FatigueParams params;
  double gain = 0.0;      // N per unit effective activation
  double residual = 0.0;  // RMS force error, N
  int iterations = 0;     // objective evaluations
  bool converged = false;
};

/// Model force G * a_f for a fresh muscle following the trace's pulse widths.
std::vector<double> model_force(const FatigueParams& params, double gain,
                                std::span<const double> pulses, double dt,
                                double frequency = kStimulationFrequency);

/// Least-squares gain and RMS residual of `params` against the trace.
std::pair<double, double> evaluate_fit(const IsometricTrace& trace, const FatigueParams& params,
                                       double frequency = kStimulationFrequency,
                                       std::size_t residual_from = 0);

/// Fits the time constants, mu_min, the force gain and optionally beta to a trace.
///
/// u_thr and u_sat are taken from `seed_params`. The trace must cover the protocol.
FitResult fit_fatigue(const IsometricTrace& trace, const FatigueProtocol& protocol,
                      const FatigueParams& seed_params, const FitOptions& options = {});

/// Result of identifying one muscle from a full session record.
struct Identification {
  ThresholdResult thresholds;
  FitResult fit;
};

/// Splits a session (staircase, then fatigue and recovery) at the first bout longer
/// than ten seconds; detects thresholds on the first part and fits on the whole record.
Identification identify_session(const IsometricTrace& session, const StaircaseProtocol& staircase,
                                const FatigueProtocol& protocol, const FatigueParams& seed_params,
                                const FitOptions& options = {});

// ---------------------------------------------------------------------------
// Optimizer

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Unconstrained Nelder-Mead minimization with an axis-aligned initial simplex.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, double step, int max_evaluations,
                             double tolerance);

}  // namespace hapc
