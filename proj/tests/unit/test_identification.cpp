#include <cmath>
#include <vector>

#include "doctest.h"
#include "hapc/identification.hpp"

using namespace hapc;

namespace {

constexpr double kDt = 0.01;

IsometricTrace session(const FatigueParams& p, double noise = 0.0, std::uint64_t seed = 1) {
  auto pulses = staircase_pulses({}, kDt);
  const auto fat = fatigue_pulses({}, p.u_sat, kDt);
  pulses.insert(pulses.end(), fat.begin(), fat.end());
  return simulate_isometric(p, 300.0, pulses, kDt, noise, seed);
}

IsometricTrace staircase(const FatigueParams& p) {
  return simulate_isometric(p, 300.0, staircase_pulses({}, kDt), kDt);
}

}  // namespace

TEST_CASE("staircase thresholds for every table row") {
  for (const char* m : {"right_quadriceps", "right_hamstrings", "left_quadriceps", "left_hamstrings"}) {
    const auto p = table1_row(m);
    const auto r = detect_thresholds(staircase(p), 50.0);
    CHECK(std::abs(r.u_thr - p.u_thr) <= 50.0);
    CHECK(std::abs(r.u_sat - p.u_sat) <= 50.0);
    CHECK(r.bouts.size() == 16);
  }
}

TEST_CASE("flat record has no threshold") {
  auto t = staircase(table1::right_quadriceps());
  std::fill(t.force.begin(), t.force.end(), 0.0);
  CHECK_THROWS_AS(detect_thresholds(t, 50.0), IdentificationError);
}

TEST_CASE("ramp without a plateau reports the last bout") {
  auto t = staircase(table1::right_quadriceps());
  for (std::size_t i = 0; i < t.size(); ++i) t.force[i] = t.pulse_width[i] * t.pulse_width[i] * 1e-3;
  const auto r = detect_thresholds(t, 50.0);
  CHECK(r.u_sat == 800.0);
  CHECK_FALSE(r.saturation_reached);
}

TEST_CASE("objective absorbs a force rescale into the gain") {
  const auto p = table1::left_hamstrings();
  auto t = session(p, 0.02, 4);
  FatigueParams guess = p;
  guess.T_fat *= 1.3;
  const auto [g1, r1] = evaluate_fit(t, guess);
  for (auto& f : t.force) f *= 3.0;
  const auto [g3, r3] = evaluate_fit(t, guess);
  CHECK(g3 == doctest::Approx(3.0 * g1));
  CHECK(r3 == doctest::Approx(3.0 * r1));
}

TEST_CASE("true parameters are a fixed point of the fit") {
  const auto p = table1::left_hamstrings();
  const auto t = session(p);
  FitOptions opts;
  opts.starts = 1;
  const auto fit = fit_fatigue(t, {}, p, opts);
  CHECK(fit.converged);
  CHECK(std::abs(fit.params.T_fat / p.T_fat - 1.0) < 0.01);
  CHECK(std::abs(fit.params.T_rec / p.T_rec - 1.0) < 0.01);
  CHECK(std::abs(fit.params.T_rise / p.T_rise - 1.0) < 0.01);
  CHECK(std::abs(fit.params.T_fall / p.T_fall - 1.0) < 0.01);
  CHECK(std::abs(fit.gain / 300.0 - 1.0) < 0.01);

  // Regenerated force matches the record.
  const auto regen = model_force(fit.params, fit.gain, t.pulse_width, kDt);
  double peak = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    peak = std::max(peak, t.force[i]);
    sum += (regen[i] - t.force[i]) * (regen[i] - t.force[i]);
  }
  CHECK(std::sqrt(sum / static_cast<double>(t.size())) < 0.01 * peak);
}

TEST_CASE("fitted parameters stay inside the bounds") {
  const auto t = session(table1::right_hamstrings(), 0.05, 9);
  FatigueParams seed = table1::right_hamstrings();
  seed.T_fat = 590.0;
  seed.T_rise = 0.011;
  seed.mu_min = 0.49;
  FitOptions opts;
  opts.starts = 2;
  opts.max_evaluations = 300;
  opts.fit_beta = true;
  const auto fit = fit_fatigue(t, {}, seed, opts);
  const auto& q = fit.params;
  for (double T : {q.T_fat, q.T_rec, q.T_rise, q.T_fall}) {
    CHECK(T >= opts.bounds.time_min);
    CHECK(T <= opts.bounds.time_max);
  }
  CHECK(q.T_e >= 0.0);
  CHECK(q.T_e <= opts.bounds.T_e_max);
  CHECK(q.mu_min >= 0.0);
  CHECK(q.mu_min <= opts.bounds.mu_min_max);
  CHECK(q.beta >= 0.0);
  CHECK(q.beta <= 1.0);
  CHECK(fit.residual >= 0.0);
  CHECK(fit.iterations <= opts.starts * 2 * opts.max_evaluations);
}

TEST_CASE("nelder mead finds a quadratic minimum") {
  const auto r = nelder_mead([](std::span<const double> x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + 10.0 * (x[1] + 2.0) * (x[1] + 2.0);
  }, {0.0, 0.0}, 0.5, 2000, 1e-14);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-5));
}

TEST_CASE("trace file round trip and validation") {
  const auto t = staircase(table1::left_quadriceps());
  const std::string file = "hapc_trace_roundtrip.csv";
  t.save(file);
  const auto back = IsometricTrace::load(file);
  CHECK(back.time == t.time);
  CHECK(back.force == t.force);
  CHECK(back.pulse_width == t.pulse_width);
  std::remove(file.c_str());
  IsometricTrace bad = t;
  bad.time[3] += 0.004;
  CHECK_THROWS(bad.validate());
}
