#include "hapc/path_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hapc/csv.hpp"

namespace hapc {

namespace {

double wrap_unit(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

// Forward distance from `from` to `to` on the unit circle, in [0, 1).
double ahead(double from, double to) { return wrap_unit(to - from); }

double periodic_bump(double phase, double centre, double width) {
  double d = wrap_unit(phase - centre + 0.5) - 0.5;
  return std::exp(-0.5 * (d / width) * (d / width));
}

}  // namespace

ReferencePath::ReferencePath(std::vector<PathSample> samples) : samples_(std::move(samples)) {
  const std::size_t n = samples_.size();
  if (n < 3) throw ConfigError("reference path needs at least 3 samples");
  std::size_t descents = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = samples_[k];
    const auto& b = samples_[(k + 1) % n];
    if (!(a.phase >= 0.0 && a.phase < 1.0)) throw ConfigError("path phase outside [0, 1)");
    if (!std::isfinite(a.q[0]) || !std::isfinite(a.q[1]))
      throw ConfigError("path sample is not finite");
    if (a.q == b.q) throw ConfigError("consecutive path samples coincide");
    if (b.phase <= a.phase) {
      ++descents;
      first_ = (k + 1) % n;
    }
  }
  if (descents != 1) throw ConfigError("path phase must increase strictly along the samples");
}

JointVec ReferencePath::at_phase(double phase) const {
  const std::size_t n = samples_.size();
  phase = wrap_unit(phase);
  // Samples in phase order start at first_.
  std::size_t lo = n - 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (samples_[(first_ + k) % n].phase > phase) break;
    lo = k;
  }
  const auto& a = samples_[(first_ + lo) % n];
  const auto& b = samples_[(first_ + lo + 1) % n];
  double span = ahead(a.phase, b.phase);
  if (span == 0.0) span = 1.0;
  double s = ahead(a.phase, phase) / span;
  return {a.q[0] + s * (b.q[0] - a.q[0]), a.q[1] + s * (b.q[1] - a.q[1])};
}

ReferencePath ReferencePath::rotated(std::size_t shift) const {
  std::vector<PathSample> out(samples_.size());
  for (std::size_t k = 0; k < samples_.size(); ++k)
    out[k] = samples_[(k + shift) % samples_.size()];
  return ReferencePath(std::move(out));
}

ReferencePath ReferencePath::load(const std::string& filename) {
  CsvTable table = read_csv(filename);
  const auto phase = table.column("phase");
  const auto hip = table.column("hip_deg");
  const auto knee = table.column("knee_deg");
  std::vector<PathSample> samples;
  samples.reserve(phase.size());
  for (std::size_t k = 0; k < phase.size(); ++k) {
    if (k > 0 && phase[k] <= phase[k - 1])
      throw ConfigError(filename + ": phase column must be sorted ascending");
    samples.push_back({phase[k], {deg2rad(hip[k]), deg2rad(knee[k])}});
  }
  return ReferencePath(std::move(samples));
}

void ReferencePath::save(const std::string& filename) const {
  CsvTable table({"phase", "hip_deg", "knee_deg"});
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    const auto& s = samples_[(first_ + k) % samples_.size()];
    table.add_row({s.phase, rad2deg(s.q[0]), rad2deg(s.q[1])});
  }
  write_csv(filename, table);
}

ReferencePath default_reference_path(std::size_t n_samples) {
  std::vector<PathSample> samples;
  samples.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    double phase = static_cast<double>(k) / static_cast<double>(n_samples);
    // Hip peaks in late swing; the knee has a small loading bump and a swing peak.
    double hip = 8.0 + 18.4 * std::cos(2.0 * std::numbers::pi * (phase - 0.93));
    double knee = 3.0 + 3.0 * periodic_bump(phase, 0.12, 0.06) +
                  57.0 * periodic_bump(phase, 0.71, 0.11);
    samples.push_back({phase, {deg2rad(hip), deg2rad(knee)}});
  }
  return ReferencePath(std::move(samples));
}

Projection nearest_reference(const ReferencePath& path, const JointVec& q_act,
                             std::optional<double> previous_phase) {
  const auto samples = path.samples();
  const std::size_t n = samples.size();

  struct Candidate {
    double dist2;
    JointVec point;
    double phase;
    std::size_t segment;
  };
  Candidate best{std::numeric_limits<double>::infinity(), {}, 0.0, 0};

  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = samples[k];
    const auto& b = samples[(k + 1) % n];
    const double dx = b.q[0] - a.q[0];
    const double dy = b.q[1] - a.q[1];
    const double len2 = dx * dx + dy * dy;
    double s = ((q_act[0] - a.q[0]) * dx + (q_act[1] - a.q[1]) * dy) / len2;
    s = std::clamp(s, 0.0, 1.0);
    const JointVec p{a.q[0] + s * dx, a.q[1] + s * dy};
    const double ex = q_act[0] - p[0];
    const double ey = q_act[1] - p[1];
    const double d2 = ex * ex + ey * ey;
    const double phase = wrap_unit(a.phase + s * ahead(a.phase, b.phase));

    // Equidistant candidates (typically a shared vertex) resolve by phase.
    const double tol = k == 0 ? 0.0 : 1e-15 * std::max(1.0, best.dist2);
    if (k == 0 || d2 < best.dist2 - tol) {
      best = {d2, p, phase, k};
    } else if (std::abs(d2 - best.dist2) <= tol) {
      bool take = previous_phase
                      ? ahead(*previous_phase, phase) < ahead(*previous_phase, best.phase)
                      : phase < best.phase;
      if (take) best = {d2, p, phase, k};
    }
  }
  return {best.point, best.phase, std::sqrt(best.dist2), best.segment};
}

double dead_band(double error, double radius) {
  if (error > radius) return error - radius;
  if (error < -radius) return error + radius;
  return 0.0;
}

BandedError banded_error(const Projection& proj, const JointVec& q_act, double r_db,
                         double r_fesb) {
  if (r_db < 0.0 || r_fesb < 0.0) throw ConfigError("band radii must be nonnegative");
  BandedError out;
  out.reference_point = proj.q_ref;
  out.phase = proj.phase;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    out.raw_error[j] = proj.q_ref[j] - q_act[j];
    out.fes_error[j] = dead_band(out.raw_error[j], r_db);
    out.exo_error[j] = dead_band(out.raw_error[j], r_fesb);
  }
  return out;
}

BandedError banded_error(const ReferencePath& path, const JointVec& q_act, double r_db,
                         double r_fesb, std::optional<double> previous_phase) {
  return banded_error(nearest_reference(path, q_act, previous_phase), q_act, r_db, r_fesb);
}

}  // namespace hapc
