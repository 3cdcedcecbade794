#include "hapc/identification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hapc/csv.hpp"

namespace hapc {

// ---------------------------------------------------------------------------
// IsometricTrace

double IsometricTrace::dt() const {
  if (time.size() < 2) throw ConfigError("trace needs at least two samples");
  return time[1] - time[0];
}

void IsometricTrace::validate() const {
  if (pulse_width.size() != time.size() || force.size() != time.size())
    throw ConfigError("trace columns differ in length");
  const double step = dt();
  if (!(step > 0.0)) throw ConfigError("trace time must increase");
  for (std::size_t k = 1; k < time.size(); ++k) {
    if (std::abs(time[k] - time[k - 1] - step) > 1e-6 * step)
      throw ConfigError("trace sampling is not uniform at row " + std::to_string(k + 1));
  }
  for (std::size_t k = 0; k < force.size(); ++k) {
    if (force[k] < 0.0) throw ConfigError("negative force at row " + std::to_string(k + 1));
    if (pulse_width[k] < 0.0) throw ConfigError("negative pulse width at row " + std::to_string(k + 1));
  }
}

IsometricTrace IsometricTrace::slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, size());
  IsometricTrace out;
  for (std::size_t k = begin; k < end; ++k) {
    out.time.push_back(time[k] - time[begin]);
    out.pulse_width.push_back(pulse_width[k]);
    out.force.push_back(force[k]);
  }
  return out;
}

IsometricTrace IsometricTrace::load(const std::string& filename) {
  CsvTable table = read_csv(filename);
  IsometricTrace trace{table.column("time_s"), table.column("pulse_width_us"),
                       table.column("force_n")};
  trace.validate();
  return trace;
}

void IsometricTrace::save(const std::string& filename) const {
  CsvTable table({"time_s", "pulse_width_us", "force_n"});
  for (std::size_t k = 0; k < size(); ++k) table.add_row({time[k], pulse_width[k], force[k]});
  write_csv(filename, table);
}

// ---------------------------------------------------------------------------
// Protocols

namespace {

std::size_t samples_for(double seconds, double dt) {
  return static_cast<std::size_t>(std::llround(seconds / dt));
}

}  // namespace

std::vector<double> staircase_pulses(const StaircaseProtocol& protocol, double dt) {
  if (!(protocol.increment > 0.0)) throw ConfigError("staircase increment must be positive");
  std::vector<double> out;
  const std::size_t rest = samples_for(protocol.rest, dt);
  const std::size_t bout = samples_for(protocol.bout, dt);
  for (double pw = protocol.increment; pw <= protocol.max_pulse + 1e-9; pw += protocol.increment) {
    out.insert(out.end(), rest, 0.0);
    out.insert(out.end(), bout, pw);
  }
  out.insert(out.end(), rest, 0.0);
  return out;
}

std::vector<double> fatigue_pulses(const FatigueProtocol& protocol, double u_sat, double dt) {
  std::vector<double> out(samples_for(protocol.fatigue_duration, dt), u_sat);
  const std::size_t recovery = samples_for(protocol.recovery_duration, dt);
  const std::size_t period = samples_for(protocol.pulse_on + protocol.pulse_off, dt);
  const std::size_t off = samples_for(protocol.pulse_off, dt);
  for (std::size_t k = 0; k < recovery; ++k) out.push_back(k % period >= off ? u_sat : 0.0);
  return out;
}

IsometricTrace simulate_isometric(const FatigueParams& params, double gain,
                                  std::span<const double> pulses, double dt, double noise,
                                  std::uint64_t seed, double frequency) {
  params.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  IsometricTrace trace;
  MuscleState state;
  for (std::size_t k = 0; k < pulses.size(); ++k) {
    trace.time.push_back(static_cast<double>(k) * dt);
    trace.pulse_width.push_back(pulses[k]);
    double f = gain * state.effective_activation();
    if (noise > 0.0) f *= 1.0 + noise * normal(rng);
    trace.force.push_back(std::max(0.0, f));
    state = step_muscle(state, pulses[k], frequency, dt, params);
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Threshold detection

ThresholdResult detect_thresholds(const IsometricTrace& staircase, double increment) {
  staircase.validate();
  if (!(increment > 0.0)) throw ConfigError("increment must be positive");
  const double dt = staircase.dt();
  const std::size_t n = staircase.size();
  const auto& pw = staircase.pulse_width;
  ThresholdResult out;

  std::size_t first_on = 0;
  while (first_on < n && pw[first_on] <= 0.0) ++first_on;
  if (first_on < 2) throw IdentificationError("staircase must start with a rest period");
  {
    const auto begin = staircase.force.begin();
    const double mean = std::accumulate(begin, begin + first_on, 0.0) / first_on;
    double var = 0.0;
    for (std::size_t k = 0; k < first_on; ++k) var += std::pow(staircase.force[k] - mean, 2);
    out.noise_floor = mean;
    out.noise_sigma = std::sqrt(var / (first_on - 1));
  }

  const std::size_t plateau_len = std::max<std::size_t>(1, samples_for(1.0, dt));
  for (std::size_t k = first_on; k < n;) {
    if (pw[k] <= 0.0) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end < n && pw[end] == pw[k]) ++end;
    const std::size_t from = end - std::min(plateau_len, end - k);
    double sum = 0.0;
    for (std::size_t i = from; i < end; ++i) sum += staircase.force[i];
    out.bouts.push_back({pw[k], sum / static_cast<double>(end - from), k, end});
    k = end;
  }
  if (out.bouts.empty()) throw IdentificationError("staircase contains no stimulation bouts");
  for (std::size_t b = 1; b < out.bouts.size(); ++b) {
    const double step = out.bouts[b].pulse_width - out.bouts[b - 1].pulse_width;
    if (std::abs(step - increment) > 1e-6 * increment)
      throw IdentificationError("staircase bouts are not spaced by the increment");
  }

  double peak = 0.0;
  for (const auto& b : out.bouts) peak = std::max(peak, b.plateau);
  const double level = out.noise_floor + std::max(3.0 * out.noise_sigma, 1e-9 * peak);
  std::size_t thr = out.bouts.size();
  for (std::size_t b = 0; b < out.bouts.size(); ++b) {
    if (out.bouts[b].plateau > level) {
      thr = b;
      break;
    }
  }
  if (thr == out.bouts.size()) throw IdentificationError("no bout exceeds the noise floor");
  // Force starts at the threshold itself, so the last silent bout marks it.
  out.u_thr = thr > 0 ? out.bouts[thr - 1].pulse_width : out.bouts[thr].pulse_width;

  // Saturation: every later step raises the plateau by less than 5 %.
  out.u_sat = out.bouts.back().pulse_width;
  out.saturation_reached = false;
  for (std::size_t b = thr; b + 1 < out.bouts.size(); ++b) {
    bool flat = true;
    for (std::size_t c = b; c + 1 < out.bouts.size(); ++c) {
      const double base = out.bouts[c].plateau - out.noise_floor;
      const double next = out.bouts[c + 1].plateau - out.noise_floor;
      if (next >= 1.05 * base) {
        flat = false;
        break;
      }
    }
    if (flat) {
      out.u_sat = out.bouts[b].pulse_width;
      out.saturation_reached = true;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

std::vector<double> model_force(const FatigueParams& params, double gain,
                                std::span<const double> pulses, double dt, double frequency) {
  const ActivationPropagator rise(params.T_e, params.T_rise, dt);
  const ActivationPropagator fall(params.T_e, params.T_fall, dt);
  const double rho = frequency_factor(frequency, params.beta);
  std::vector<double> out(pulses.size());
  double a = 0.0, a_dot = 0.0, mu = 1.0;
  for (std::size_t k = 0; k < pulses.size(); ++k) {
    out[k] = gain * a * mu;
    const double e = excitation(pulses[k], params);
    const double drive = rho * a * mu;
    (e > a ? rise : fall).apply(e, a, a_dot);
    if (a > 1.0 || a < 0.0) {
      a = std::clamp(a, 0.0, 1.0);
      a_dot = 0.0;
    }
    mu = step_fitness_drive_euler(mu, drive, dt, params);
  }
  return out;
}

namespace {

struct GainFit {
  double gain;
  double rms;
};

GainFit best_gain(std::span<const double> measured, std::span<const double> unit_force,
                  std::size_t from) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = from; k < measured.size(); ++k) {
    num += measured[k] * unit_force[k];
    den += unit_force[k] * unit_force[k];
  }
  const double gain = den > 0.0 ? std::max(0.0, num / den) : 0.0;
  double ss = 0.0;
  for (std::size_t k = from; k < measured.size(); ++k)
    ss += std::pow(measured[k] - gain * unit_force[k], 2);
  const std::size_t count = measured.size() - from;
  return {gain, std::sqrt(ss / static_cast<double>(count))};
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) {
  p = std::clamp(p, 1e-9, 1.0 - 1e-9);
  return std::log(p / (1.0 - p));
}

// Free parameters in optimizer coordinates: four log-scaled time constants, T_e, mu_min, beta.
constexpr std::size_t kFree = 7;

struct Transform {
  FitBounds b;
  FatigueParams base;
  bool fit_beta = false;

  FatigueParams to_params(std::span<const double> z) const {
    FatigueParams p = base;
    const double lo = std::log(b.time_min), hi = std::log(b.time_max);
    auto time = [&](double zi) { return std::exp(lo + (hi - lo) * logistic(zi)); };
    p.T_fat = time(z[0]);
    p.T_rec = time(z[1]);
    p.T_rise = time(z[2]);
    p.T_fall = time(z[3]);
    p.T_e = b.T_e_max * logistic(z[4]);
    p.mu_min = b.mu_min_max * logistic(z[5]);
    if (fit_beta) p.beta = logistic(z[6]);
    return p;
  }

  std::vector<double> to_z(const FatigueParams& p) const {
    const double lo = std::log(b.time_min), hi = std::log(b.time_max);
    auto time = [&](double t) { return logit((std::log(std::max(t, b.time_min)) - lo) / (hi - lo)); };
    std::vector<double> z{time(p.T_fat), time(p.T_rec), time(p.T_rise), time(p.T_fall),
                          logit(p.T_e / b.T_e_max), logit(p.mu_min / b.mu_min_max)};
    if (fit_beta) z.push_back(logit(p.beta));
    return z;
  }
};

}  // namespace

std::pair<double, double> evaluate_fit(const IsometricTrace& trace, const FatigueParams& params,
                                       double frequency, std::size_t residual_from) {
  if (residual_from >= trace.size()) throw ConfigError("residual window is empty");
  const auto unit = model_force(params, 1.0, trace.pulse_width, trace.dt(), frequency);
  const GainFit g = best_gain(trace.force, unit, residual_from);
  return {g.gain, g.rms};
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, double step, int max_evaluations,
                             double tolerance) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  std::vector<double> values(n + 1);
  NelderMeadResult out;
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);
  out.evaluations = static_cast<int>(n + 1);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    double extent = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        extent = std::max(extent, std::abs(simplex[i][j] - simplex[best][j]));
    if (values[worst] - values[best] <= tolerance && extent <= 1e-7) {
      out.converged = true;
      break;
    }
    if (out.evaluations >= max_evaluations) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    }
    auto along = [&](double t, std::vector<double>& dst) {
      for (std::size_t j = 0; j < n; ++j) dst[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
      ++out.evaluations;
      return f(dst);
    };

    const double fr = along(-1.0, trial);
    if (fr < values[best]) {
      const double fe = along(-2.0, trial2);
      if (fe < fr) {
        simplex[worst] = trial2;
        values[worst] = fe;
      } else {
        simplex[worst] = trial;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = trial;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const double fc = along(outside ? -0.5 : 0.5, trial2);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j)
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      values[i] = f(simplex[i]);
      ++out.evaluations;
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  out.x = simplex[best];
  out.value = values[best];
  return out;
}

FitResult fit_fatigue(const IsometricTrace& trace, const FatigueProtocol& protocol,
                      const FatigueParams& seed_params, const FitOptions& options) {
  trace.validate();
  seed_params.validate();
  const double dt = trace.dt();
  const double needed = protocol.fatigue_duration + protocol.recovery_duration;
  if (static_cast<double>(trace.size() - options.residual_from) * dt < needed - dt)
    throw ConfigError("trace does not cover the fatigue and recovery protocol");
  if (options.starts < 1) throw ConfigError("at least one start is required");

  const double peak = *std::max_element(trace.force.begin(), trace.force.end());
  if (!(peak > 0.0)) throw IdentificationError("trace has no force response");

  const Transform tf{options.bounds, seed_params, options.fit_beta};
  auto objective = [&](std::span<const double> z) {
    const FatigueParams p = tf.to_params(z);
    const auto unit = model_force(p, 1.0, trace.pulse_width, dt, options.frequency);
    return best_gain(trace.force, unit, options.residual_from).rms / peak;
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 0.7);
  const std::vector<double> z_seed = tf.to_z(seed_params);

  FitResult result;
  NelderMeadResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (int s = 0; s < options.starts; ++s) {
    std::vector<double> z0 = z_seed;
    if (s > 0)
      for (double& zi : z0) zi += normal(rng);
    // A converged simplex is restarted once from its best vertex to escape premature collapse.
    NelderMeadResult run = nelder_mead(objective, z0, 0.5, options.max_evaluations / 2,
                                       options.tolerance);
    int used = run.evaluations;
    NelderMeadResult polish = nelder_mead(objective, run.x, 0.1, options.max_evaluations - used,
                                          options.tolerance);
    polish.evaluations += used;
    result.iterations += polish.evaluations;
    if (polish.value < best.value) best = polish;
  }

  result.params = tf.to_params(best.x);
  const auto unit = model_force(result.params, 1.0, trace.pulse_width, dt, options.frequency);
  const GainFit g = best_gain(trace.force, unit, options.residual_from);
  result.gain = g.gain;
  result.residual = g.rms;
  result.converged = best.converged;
  return result;
}

Identification identify_session(const IsometricTrace& session, const StaircaseProtocol& staircase,
                                const FatigueProtocol& protocol, const FatigueParams& seed_params,
                                const FitOptions& options) {
  session.validate();
  const double dt = session.dt();
  const std::size_t long_bout = samples_for(10.0, dt);
  std::size_t split = session.size();
  for (std::size_t k = 0; k < session.size();) {
    if (session.pulse_width[k] <= 0.0) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end < session.size() && session.pulse_width[end] > 0.0) ++end;
    if (end - k > long_bout) {
      split = k;
      break;
    }
    k = end;
  }
  if (split == session.size()) throw IdentificationError("session has no fatigue bout");

  Identification out;
  out.thresholds = detect_thresholds(session.slice(0, split), staircase.increment);
  FatigueParams seed = seed_params;
  seed.u_thr = out.thresholds.u_thr;
  seed.u_sat = out.thresholds.u_sat;
  if (seed.u_thr >= seed.u_sat) seed.u_thr = std::max(0.5 * seed.u_sat, seed.u_sat - staircase.increment);
  FitOptions opts = options;
  opts.residual_from = split;
  out.fit = fit_fatigue(session, protocol, seed, opts);
  return out;
}

}  // namespace hapc
