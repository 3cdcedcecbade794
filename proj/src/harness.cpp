#include "hapc/harness.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <random>
#include <sstream>

#include "hapc/csv.hpp"

namespace hapc {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string channel_label(Joint joint, Action action) {
  if (joint == Joint::Knee) return action == Action::Extensor ? "quad" : "ham";
  return action == Action::Flexor ? "hipflex" : "hipext";
}

bool finite(const JointVec& v) { return std::isfinite(v[0]) && std::isfinite(v[1]); }

// Running sums for one leg over one gait-clock cycle.
struct CycleAccumulator {
  std::size_t n = 0;
  JointVec err_sq{};
  JointVec tau_sq{};
  std::vector<double> pw_sq;
  std::vector<double> mu_sum;

  void reset(std::size_t channels) {
    n = 0;
    err_sq = {};
    tau_sq = {};
    pw_sq.assign(channels, 0.0);
    mu_sum.assign(channels, 0.0);
  }
};

struct Leg {
  Side side;
  double clock_offset;
  LegState state;
  std::vector<MuscleChannel> channels;
  std::vector<MuscleTorqueSpec> torque;
  std::vector<std::string> labels;
  FesGains fes;
  ExoGains exo;
  ErrorRateFilter rate;
  PhaseAccumulator fsm;
  double r_fesb;
  std::optional<double> previous_phase;
  std::optional<std::vector<double>> last_rms[2];  // indexed by GaitPhase
  CycleAccumulator cycle;
};

std::size_t phase_index(GaitPhase p) { return p == GaitPhase::Stance ? 0 : 1; }

double wrap_unit(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

}  // namespace

ReferencePath intended_path(const ReferencePath& path, const BehaviorSpec& behavior) {
  JointVec mean{};
  for (const auto& s : path.samples())
    for (std::size_t j = 0; j < kNumJoints; ++j) mean[j] += s.q[j] / static_cast<double>(path.size());
  std::vector<PathSample> out;
  for (const auto& s : path.samples()) {
    double w = 1.0;
    if (behavior.offset_width > 0.0) {
      const double d = s.phase - behavior.offset_phase - std::round(s.phase - behavior.offset_phase);
      w = std::exp(-0.5 * (d / behavior.offset_width) * (d / behavior.offset_width));
    }
    PathSample p = s;
    for (std::size_t j = 0; j < kNumJoints; ++j)
      p.q[j] = mean[j] + behavior.amplitude[j] * (s.q[j] - mean[j]) + w * behavior.offset[j];
    out.push_back(p);
  }
  return ReferencePath(std::move(out));
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols{
      "t_s",       "side",      "hip_q",        "knee_q",       "hip_qref", "knee_qref",
      "hip_eps",   "knee_eps",  "hip_tau_exo",  "knee_tau_exo", "pw_quad",  "pw_ham",
      "mu_quad",   "mu_ham",    "a_quad",       "a_ham",        "phase",    "r_fesb"};
  return cols;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const VariantGating gate = gating(cfg.variant);
  const ReferencePath path =
      cfg.path_file.empty() ? default_reference_path(cfg.path_samples) : ReferencePath::load(cfg.path_file);

  std::map<std::string, VoluntaryProfile> profiles;
  std::map<std::string, ReferencePath> intended;
  for (const auto& [name, b] : cfg.behaviors) {
    const ReferencePath target = intended_path(path, b);
    profiles.emplace(name, b.file.empty() ? make_voluntary_profile(target, cfg.plant, cfg.cycle_period,
                                                                   b.scale, b.phase_lag, name)
                                          : VoluntaryProfile::load(b.file, name));
    intended.emplace(name, target);
  }

  // Legs start on the path at their clock phase, moving at the path velocity.
  std::vector<Leg> legs;
  for (Side side : cfg.sides) {
    const double offset = side == Side::Left ? 0.0 : 0.5;
    Leg leg{side,
            offset,
            {},
            {},
            {},
            {},
            {},
            make_exo_gains(cfg.baseline_stiffness, cfg.c_cr, cfg.phi_e, cfg.torque_limit),
            ErrorRateFilter(cfg.dt, cfg.rate_cutoff_hz),
            PhaseAccumulator(0, cfg.fsm),
            gate.band_collapsed ? cfg.r_db : cfg.r_fesb0,
            std::nullopt,
            {},
            {}};
    leg.state.q = path.at_phase(offset);
    JointVec qddot{};
    path_derivatives(path, cfg.cycle_period, offset, leg.state.qdot, qddot);
    for (const auto& cc : cfg.leg_channels(side)) {
      MuscleChannel ch{cc.joint, cc.side, cc.action, cc.params, {}};
      leg.channels.push_back(ch);
      leg.torque.push_back(cc.torque);
      leg.labels.push_back(channel_label(cc.joint, cc.action));
    }
    leg.fes = make_fes_gains(leg.channels, cfg.r_fesb0, cfg.phi_f, cfg.gamma0);
    const auto leg_cfg = cfg.leg_channels(side);
    for (std::size_t i = 0; i < leg_cfg.size(); ++i) {
      if (leg_cfg[i].gamma0) leg.fes.channels[i].gamma_st = leg.fes.channels[i].gamma_sw = *leg_cfg[i].gamma0;
    }
    leg.fsm = PhaseAccumulator(leg.channels.size() + kNumJoints, cfg.fsm);
    leg.cycle.reset(leg.channels.size());
    legs.push_back(std::move(leg));
  }

  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  ScenarioResult result;
  ScenarioSummary& sum = result.summary;
  sum.variant = cfg.variant;
  double err_sq = 0.0, tau_sq = 0.0, pw_sq = 0.0, fatigue = 0.0, knee_fatigue = 0.0;
  std::size_t err_n = 0, pw_n = 0, knee_n = 0;

  std::ostringstream trace;
  if (options.keep_trace) {
    const auto& cols = trace_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) trace << (i ? "," : "") << cols[i];
    trace << '\n';
  }

  const auto ticks = static_cast<std::size_t>(std::llround(cfg.n_cycles * cfg.cycle_period / cfg.dt));
  const std::size_t ticks_per_cycle = static_cast<std::size_t>(std::llround(cfg.cycle_period / cfg.dt));
  std::vector<double> norm_errs;

  for (std::size_t tick = 0; tick < ticks; ++tick) {
    const double t = static_cast<double>(tick) * cfg.dt;
    const int cycle = static_cast<int>(std::min<std::size_t>(tick / ticks_per_cycle,
                                                             static_cast<std::size_t>(cfg.n_cycles - 1))) + 1;
    const BehaviorSpec& behavior = cfg.behavior_for_cycle(cycle);
    const VoluntaryProfile& profile = profiles.at(behavior.name);

    for (Leg& leg : legs) {
      const Projection proj = nearest_reference(path, leg.state.q, leg.previous_phase);
      leg.previous_phase = proj.phase;
      const BandedError band = banded_error(proj, leg.state.q, cfg.r_db, leg.r_fesb);
      const GaitPhase gait = leg.fsm.phase();

      // FES: per-muscle pulse widths, then muscle state and torque.
      JointTorques torques;
      std::vector<double> pulses(leg.channels.size(), 0.0);
      norm_errs.assign(leg.channels.size() + kNumJoints, 0.0);
      for (std::size_t i = 0; i < leg.channels.size(); ++i) {
        MuscleChannel& ch = leg.channels[i];
        const double err = muscle_error(band.fes_error[index(ch.joint)], ch.action);
        norm_errs[i] = err / cfg.r_db;
        if (gate.fes) pulses[i] = stimulation(ch, leg.fes.channels[i], gait, err);
        ch.state = step_muscle(ch.state, pulses[i], cfg.frequency, cfg.dt, ch.params);
        torques.fes[index(ch.joint)] += fes_torque(ch, leg.torque[i], leg.state.q[index(ch.joint)]);
      }

      // Exoskeleton: rate of the banded error counts only outside the band.
      JointVec rate = leg.rate.update(band.exo_error);
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        if (band.exo_error[j] == 0.0) rate[j] = 0.0;
        norm_errs[leg.channels.size() + j] = std::abs(band.exo_error[j]) / cfg.r_db;
      }
      if (gate.exo) torques.exo = exo_torque(leg.exo, gait, band.exo_error, rate);

      const double clock = wrap_unit(t / cfg.cycle_period + leg.clock_offset);
      torques.voluntary = profile.at(clock);
      {
        const ReferencePath& human = intended.at(behavior.name);
        const double target = clock - behavior.phase_lag;
        const JointVec q_h = human.at_phase(wrap_unit(target));
        JointVec qdot_h{}, qddot_h{};
        path_derivatives(human, cfg.cycle_period, target, qdot_h, qddot_h);
        for (std::size_t j = 0; j < kNumJoints; ++j)
          torques.voluntary[j] += behavior.stiffness[j] * (q_h[j] - leg.state.q[j]) +
                                  behavior.damping[j] * (qdot_h[j] - leg.state.qdot[j]);
      }
      if (cfg.voluntary_noise > 0.0)
        for (double& v : torques.voluntary) v += cfg.voluntary_noise * normal(rng);

      // Bookkeeping on the state the controllers acted on.
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        if (torques.exo[j] != 0.0 && !(std::abs(band.raw_error[j]) > leg.r_fesb)) ++sum.hierarchy_violations;
        err_sq += band.raw_error[j] * band.raw_error[j];
        tau_sq += torques.exo[j] * torques.exo[j];
        leg.cycle.err_sq[j] += band.raw_error[j] * band.raw_error[j];
        leg.cycle.tau_sq[j] += torques.exo[j] * torques.exo[j];
      }
      err_n += kNumJoints;
      for (std::size_t i = 0; i < leg.channels.size(); ++i) {
        const double mu = leg.channels[i].state.mu;
        pw_sq += pulses[i] * pulses[i];
        fatigue += 1.0 - mu;
        if (leg.channels[i].joint == Joint::Knee) {
          knee_fatigue += 1.0 - mu;
          ++knee_n;
        }
        leg.cycle.pw_sq[i] += pulses[i] * pulses[i];
        leg.cycle.mu_sum[i] += mu;
      }
      pw_n += leg.channels.size();
      ++leg.cycle.n;

      if (options.keep_trace) {
        auto channel_value = [&](const char* label, auto field) {
          for (std::size_t i = 0; i < leg.channels.size(); ++i)
            if (leg.labels[i] == label) return field(i);
          return 0.0;
        };
        auto pw = [&](std::size_t i) { return pulses[i]; };
        auto mu = [&](std::size_t i) { return leg.channels[i].state.mu; };
        auto act = [&](std::size_t i) { return leg.channels[i].state.a; };
        trace << fmt(t) << ',' << to_string(leg.side) << ',' << fmt(rad2deg(leg.state.q[0])) << ','
              << fmt(rad2deg(leg.state.q[1])) << ',' << fmt(rad2deg(band.reference_point[0])) << ','
              << fmt(rad2deg(band.reference_point[1])) << ',' << fmt(rad2deg(band.raw_error[0])) << ','
              << fmt(rad2deg(band.raw_error[1])) << ',' << fmt(torques.exo[0]) << ',' << fmt(torques.exo[1])
              << ',' << fmt(channel_value("quad", pw)) << ',' << fmt(channel_value("ham", pw)) << ','
              << fmt(channel_value("quad", mu)) << ',' << fmt(channel_value("ham", mu)) << ','
              << fmt(channel_value("quad", act)) << ',' << fmt(channel_value("ham", act)) << ','
              << fmt(proj.phase) << ',' << fmt(rad2deg(leg.r_fesb)) << '\n';
      }

      leg.state = step_dynamics(cfg.plant, leg.state, torques, cfg.dt);
      if (!finite(leg.state.q) || !finite(leg.state.qdot)) {
        std::ostringstream msg;
        msg << "numeric divergence at t=" << t << " s on the " << to_string(leg.side) << " leg";
        throw DivergenceError(msg.str());
      }

      for (FsmEvent& ev : leg.fsm.on_tick(proj.phase, norm_errs)) {
        if (ev.kind == FsmEvent::Kind::PhaseEnded) {
          leg.last_rms[phase_index(ev.phase)] = std::move(ev.rms);
          continue;
        }
        ++sum.cycles_detected;
        for (GaitPhase p : {GaitPhase::Stance, GaitPhase::Swing}) {
          auto& rms = leg.last_rms[phase_index(p)];
          if (!rms) continue;
          const std::span<const double> all(*rms);
          if (gate.adapt_gamma && !leg.channels.empty())
            leg.fes = update_gamma(leg.fes, p, all.first(leg.channels.size()));
          if (gate.adapt_stiffness)
            leg.exo = update_stiffness(leg.exo, p, {all[leg.channels.size()], all[leg.channels.size() + 1]});
          rms.reset();
        }
        if (gate.adapt_band && !leg.channels.empty())
          leg.r_fesb = fes_band_radius(leg.fes, cfg.r_db, leg.channels);
      }
    }

    // Close the gait-clock cycle for every leg.
    if ((tick + 1) % ticks_per_cycle == 0 || tick + 1 == ticks) {
      for (Leg& leg : legs) {
        CycleMetrics m;
        m.cycle = cycle;
        m.side = leg.side;
        const double n = static_cast<double>(std::max<std::size_t>(leg.cycle.n, 1));
        for (std::size_t j = 0; j < kNumJoints; ++j) {
          m.rms_err[j] = std::sqrt(leg.cycle.err_sq[j] / n);
          m.rms_exo_torque[j] = std::sqrt(leg.cycle.tau_sq[j] / n);
        }
        for (std::size_t i = 0; i < leg.channels.size(); ++i) {
          m.rms_pulse_width.push_back(std::sqrt(leg.cycle.pw_sq[i] / n));
          m.mean_fitness.push_back(leg.cycle.mu_sum[i] / n);
          m.gamma_st.push_back(leg.fes.channels[i].gamma_st);
          m.gamma_sw.push_back(leg.fes.channels[i].gamma_sw);
        }
        m.k_st = leg.exo.k_st;
        m.k_sw = leg.exo.k_sw;
        m.r_fesb = leg.r_fesb;
        result.metrics.push_back(std::move(m));
        leg.cycle.reset(leg.channels.size());
      }
    }
  }

  sum.ticks = ticks;
  sum.rms_error = err_n ? std::sqrt(err_sq / err_n) : 0.0;
  sum.rms_exo_torque = err_n ? std::sqrt(tau_sq / err_n) : 0.0;
  sum.rms_pulse_width = pw_n ? std::sqrt(pw_sq / pw_n) : 0.0;
  sum.mean_fatigue = pw_n ? fatigue / pw_n : 0.0;
  sum.mean_knee_fatigue = knee_n ? knee_fatigue / knee_n : 0.0;

  if (options.keep_trace) result.trace_csv = trace.str();

  // Metrics table; channel columns follow the first leg's channel labels.
  std::ostringstream mcsv;
  std::vector<std::string> labels = legs.empty() ? std::vector<std::string>{} : legs.front().labels;
  mcsv << "cycle,side,rms_err_hip_deg,rms_err_knee_deg,rms_tau_hip,rms_tau_knee";
  for (const auto& l : labels) mcsv << ",rms_pw_" << l;
  for (const auto& l : labels) mcsv << ",mean_mu_" << l;
  for (const auto& l : labels) mcsv << ",gamma_st_" << l << ",gamma_sw_" << l;
  mcsv << ",k_st_hip,k_st_knee,k_sw_hip,k_sw_knee,r_fesb_deg\n";
  for (const auto& m : result.metrics) {
    mcsv << m.cycle << ',' << to_string(m.side) << ',' << fmt(rad2deg(m.rms_err[0])) << ','
         << fmt(rad2deg(m.rms_err[1])) << ',' << fmt(m.rms_exo_torque[0]) << ',' << fmt(m.rms_exo_torque[1]);
    for (double v : m.rms_pulse_width) mcsv << ',' << fmt(v);
    for (double v : m.mean_fitness) mcsv << ',' << fmt(v);
    for (std::size_t i = 0; i < m.gamma_st.size(); ++i) mcsv << ',' << fmt(m.gamma_st[i]) << ',' << fmt(m.gamma_sw[i]);
    mcsv << ',' << fmt(m.k_st[0]) << ',' << fmt(m.k_st[1]) << ',' << fmt(m.k_sw[0]) << ',' << fmt(m.k_sw[1])
         << ',' << fmt(rad2deg(m.r_fesb)) << '\n';
  }
  result.metrics_csv = mcsv.str();
  return result;
}

// ---------------------------------------------------------------------------
// Comparison

std::vector<ScenarioConfig> variant_sweep(const ScenarioConfig& base) {
  std::vector<ScenarioConfig> out;
  for (Variant v : {Variant::EPC, Variant::FPC, Variant::HPC, Variant::HAPC}) {
    ScenarioConfig c = base;
    c.variant = v;
    out.push_back(c);
  }
  return out;
}

Comparison compare_variants(const std::vector<ScenarioConfig>& cfgs, const RunOptions& options) {
  if (cfgs.empty()) throw ConfigError("nothing to compare");
  auto without_variant = [](ScenarioConfig c) {
    c.variant = Variant::HAPC;
    return scenario_to_json_text(c);
  };
  const std::string reference = without_variant(cfgs.front());
  bool has_hapc = false;
  for (const auto& c : cfgs) {
    if (without_variant(c) != reference)
      throw ConfigError("compared scenarios must differ only in the controller variant");
    has_hapc = has_hapc || c.variant == Variant::HAPC;
  }
  if (!has_hapc) throw ConfigError("comparison needs an HAPC run as the normalization baseline");

  std::vector<std::future<ScenarioResult>> jobs;
  for (const auto& c : cfgs)
    jobs.push_back(std::async(std::launch::async, [&c, &options] { return run_scenario(c, options); }));

  Comparison out;
  for (auto& j : jobs) out.results.push_back(j.get());

  const ScenarioSummary* base = nullptr;
  for (const auto& r : out.results)
    if (r.summary.variant == Variant::HAPC) base = &r.summary;
  auto norm = [](double v, double b) { return b > 0.0 ? v / b : (v > 0.0 ? INFINITY : 0.0); };
  for (const auto& r : out.results) {
    ComparisonRow row;
    row.variant = r.summary.variant;
    row.raw = r.summary;
    row.error = norm(r.summary.rms_error, base->rms_error);
    row.robot = norm(r.summary.rms_exo_torque, base->rms_exo_torque);
    row.stimulation = norm(r.summary.rms_pulse_width, base->rms_pulse_width);
    row.fatigue = norm(r.summary.mean_fatigue, base->mean_fatigue);
    row.cost = row.error + row.robot + row.stimulation + row.fatigue;
    out.rows.push_back(row);
  }
  return out;
}

const ComparisonRow& Comparison::row(Variant v) const {
  for (const auto& r : rows)
    if (r.variant == v) return r;
  throw ConfigError("variant '" + std::string(to_string(v)) + "' not in comparison");
}

std::string Comparison::csv() const {
  std::ostringstream out;
  out << "variant,rms_error_deg,rms_exo_torque_nm,rms_pulse_width_us,mean_fatigue,"
         "norm_error,norm_robot,norm_stimulation,norm_fatigue,norm_cost\n";
  for (const auto& r : rows) {
    out << to_string(r.variant) << ',' << fmt(rad2deg(r.raw.rms_error)) << ',' << fmt(r.raw.rms_exo_torque)
        << ',' << fmt(r.raw.rms_pulse_width) << ',' << fmt(r.raw.mean_fatigue) << ',' << fmt(r.error) << ','
        << fmt(r.robot) << ',' << fmt(r.stimulation) << ',' << fmt(r.fatigue) << ',' << fmt(r.cost) << '\n';
  }
  return out.str();
}

std::string summary_json(const ScenarioSummary& s) {
  std::ostringstream out;
  out << "{\n"
      << "  \"variant\": \"" << to_string(s.variant) << "\",\n"
      << "  \"rms_error_deg\": " << fmt(rad2deg(s.rms_error)) << ",\n"
      << "  \"rms_exo_torque_nm\": " << fmt(s.rms_exo_torque) << ",\n"
      << "  \"rms_pulse_width_us\": " << fmt(s.rms_pulse_width) << ",\n"
      << "  \"mean_fatigue\": " << fmt(s.mean_fatigue) << ",\n"
      << "  \"mean_knee_fatigue\": " << fmt(s.mean_knee_fatigue) << ",\n"
      << "  \"ticks\": " << s.ticks << ",\n"
      << "  \"cycles_detected\": " << s.cycles_detected << ",\n"
      << "  \"hierarchy_violations\": " << s.hierarchy_violations << "\n"
      << "}\n";
  return out.str();
}

}  // namespace hapc
