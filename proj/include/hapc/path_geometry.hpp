#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hapc/types.hpp"

namespace hapc {

/// One sample of the reference path: joint angles in radians and its cycle position.
struct PathSample {
  double phase = 0.0;
  JointVec q{};
};

/// Closed reference curve in (hip, knee) joint space.
///
/// Samples are connected by straight segments; the last sample connects back to
/// the first. Phase is strictly increasing in [0, 1) along the sample order.
class ReferencePath {
 public:
  explicit ReferencePath(std::vector<PathSample> samples);

  std::span<const PathSample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool closed() const { return true; }

  /// Point on the curve at a normalized cycle position (linear interpolation, wraps).
  JointVec at_phase(double phase) const;

  /// Same curve with the sample order rotated by `shift` positions; phases are kept.
  ReferencePath rotated(std::size_t shift) const;

  /// Loads a path file: header line, then `phase,hip_deg,knee_deg` records.
  static ReferencePath load(const std::string& filename);
  void save(const std::string& filename) const;

 private:
  std::vector<PathSample> samples_;
  std::size_t first_ = 0;  // index of the sample with the smallest phase
};

/// Gait-like closed loop shipped as the default path (200 samples).
ReferencePath default_reference_path(std::size_t n_samples = 200);

struct Projection {
  JointVec q_ref{};
  double phase = 0.0;
  double distance = 0.0;
  std::size_t segment = 0;  // segment k joins sample k to sample k+1 (mod n)
};

/// Closest point on the piecewise-linear path to `q_act`.
///
/// Equidistant segments resolve toward the one whose phase lies closest ahead of
/// `previous_phase` when given.
Projection nearest_reference(const ReferencePath& path, const JointVec& q_act,
                             std::optional<double> previous_phase = std::nullopt);

/// Soft threshold: zero inside [-radius, radius], shrunk toward zero outside.
double dead_band(double error, double radius);

struct BandedError {
  JointVec reference_point{};
  JointVec raw_error{};  // q_ref - q_act
  JointVec fes_error{};  // raw error beyond the dead band
  JointVec exo_error{};  // raw error beyond the FES band
  double phase = 0.0;
};

BandedError banded_error(const ReferencePath& path, const JointVec& q_act, double r_db,
                         double r_fesb, std::optional<double> previous_phase = std::nullopt);

/// Banding of an already projected point.
BandedError banded_error(const Projection& proj, const JointVec& q_act, double r_db,
                         double r_fesb);

}  // namespace hapc
