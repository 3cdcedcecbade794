// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hapc/harness.hpp"
#include "hapc/identification.hpp"

using namespace hapc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<std::string> kMuscles = {"right_quadriceps", "right_hamstrings", "left_quadriceps",
                                           "left_hamstrings"};

Outcome fatigue_closed_form() {
  double worst = 0.0;
  for (const auto& m : kMuscles) {
    const auto p = table1_row(m);
    double mu = 1.0;
    for (int i = 1; i <= 18000; ++i) {
      mu = step_fitness_drive(mu, 1.0, 0.01, p);
      const double exact = p.mu_min + (1.0 - p.mu_min) * std::exp(-0.01 * i / p.T_fat);
      worst = std::max(worst, std::abs(mu - exact));
    }
  }
  return {worst < 1e-4, fmt("max |mu - closed form| = %.2e over 180 s, 4 rows", worst)};
}

Outcome ilc_fixed_points() {
  const std::vector<MuscleChannel> ch = {
      {Joint::Knee, Side::Right, Action::Extensor, table1::right_quadriceps(), {}},
      {Joint::Knee, Side::Right, Action::Flexor, table1::right_hamstrings(), {}}};
  double worst_g = 0.0, worst_k = 0.0;
  for (double c : {0.0, 0.3, 1.0}) {
    auto fes = make_fes_gains(ch, deg2rad(6.0), 0.95);
    auto exo = make_exo_gains();
    const std::vector<double> err{c, c};
    for (int z = 0; z < 200; ++z) {
      for (auto ph : {GaitPhase::Stance, GaitPhase::Swing}) {
        fes = update_gamma(fes, ph, err);
        exo = update_stiffness(exo, ph, {c, c});
      }
    }
    for (const auto& g : fes.channels)
      for (double v : {g.gamma_st, g.gamma_sw}) worst_g = std::max(worst_g, std::abs(v - c) / std::max(c, 1.0));
    for (double v : {exo.k_st[0], exo.k_st[1], exo.k_sw[0], exo.k_sw[1]})
      worst_k = std::max(worst_k, std::abs(v - 340.0 * c) / (340.0 * std::max(c, 1.0)));
  }
  return {worst_g <= 1e-3 && worst_k <= 1e-3,
          fmt("relative gap after 200 cycles: gamma %.1e, K %.1e", worst_g, worst_k)};
}

// Per-cycle average of a metric over both legs.
std::map<int, double> per_cycle(const std::vector<CycleMetrics>& metrics,
                                const std::function<double(const CycleMetrics&)>& f) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& m : metrics) {
    acc[m.cycle].first += f(m);
    acc[m.cycle].second += 1;
  }
  std::map<int, double> out;
  for (const auto& [c, v] : acc) out[c] = v.first / v.second;
  return out;
}

double window_mean(const std::map<int, double>& s, int first, int last) {
  double sum = 0.0;
  int n = 0;
  for (const auto& [c, v] : s)
    if (c >= first && c <= last) sum += v, ++n;
  return n > 0 ? sum / n : NAN;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Outcome cost_orderings(const Comparison& c) {
  const auto& e = c.row(Variant::EPC);
  const auto& f = c.row(Variant::FPC);
  const auto& h = c.row(Variant::HPC);
  const bool a = e.robot >= 3.0;
  const bool b = f.error > 1.0 && f.stimulation > 1.0 && f.fatigue > 1.0;
  const bool cc = h.robot > 1.0;
  const bool d = h.cost > 4.0;
  return {a && b && cc && d,
          fmt("(a) EPC/HAPC robot %.2f%s (b) FPC/HAPC error %.3f stim %.3f fatigue %.3f%s "
              "(c) HPC/HAPC robot %.3f%s (d) cost HPC %.3f vs HAPC 4%s",
              e.robot, a ? "" : " FAIL", f.error, f.stimulation, f.fatigue, b ? "" : " FAIL", h.robot,
              cc ? "" : " FAIL", h.cost, d ? "" : " FAIL")};
}

Outcome transient_shape(const ScenarioResult& r, int n_cycles) {
  const auto k = per_cycle(r.metrics, [](const CycleMetrics& m) {
    return 0.25 * (m.k_st[0] + m.k_st[1] + m.k_sw[0] + m.k_sw[1]);
  });
  const auto g = per_cycle(r.metrics, [](const CycleMetrics& m) {
    return 0.5 * (mean_of(m.gamma_st) + mean_of(m.gamma_sw));
  });
  const auto mu = per_cycle(r.metrics, [](const CycleMetrics& m) { return mean_of(m.mean_fitness); });
  const int late = n_cycles - 15;
  const double k_early = window_mean(k, 1, 16), k_late = window_mean(k, late, n_cycles);
  const double g_early = window_mean(g, 1, 16), g_late = window_mean(g, late, n_cycles);
  double mu_min = INFINITY;
  for (const auto& [cy, v] : mu) mu_min = std::min(mu_min, v);
  const double mu_last = window_mean(mu, n_cycles - 7, n_cycles);
  const bool a = k_late < k_early, b = g_late < g_early, c = mu_last > mu_min;
  return {a && b && c, fmt("(a) K %.1f -> %.1f%s (b) gamma %.3f -> %.3f%s (c) fitness last-8 %.6f vs min %.6f%s",
                           k_early, k_late, a ? "" : " FAIL", g_early, g_late, b ? "" : " FAIL", mu_last,
                           mu_min, c ? "" : " FAIL")};
}

Outcome adaptive_vs_fixed(const Comparison& c) {
  const auto& a = c.row(Variant::HAPC).raw;
  const auto& h = c.row(Variant::HPC).raw;
  const double robot = 1.0 - a.rms_exo_torque / h.rms_exo_torque;
  const double fatigue = h.mean_knee_fatigue > 0 ? 1.0 - a.mean_knee_fatigue / h.mean_knee_fatigue : 0.0;
  const double error = std::abs(a.rms_error / h.rms_error - 1.0);
  return {robot >= 0.2 && fatigue >= 0.1 && error <= 0.25,
          fmt("HAPC vs HPC: robot -%.1f%%, knee fatigue -%.1f%%, error change %.1f%%", 100 * robot,
              100 * fatigue, 100 * error)};
}

Outcome identification_round_trip() {
  std::string detail;
  bool ok = true;
  double slowest = 0.0;
  for (const auto& m : kMuscles) {
    const auto truth = table1_row(m);
    FatigueParams seed = truth;
    seed.T_fat *= 1.4;
    seed.T_rec *= 0.7;
    seed.T_rise *= 1.5;
    seed.T_fall *= 0.6;
    seed.mu_min = 0.25;
    seed.T_e = 0.01;
    const auto t0 = std::chrono::steady_clock::now();
    for (double noise : {0.0, 0.02}) {
      auto pulses = staircase_pulses({}, 0.01);
      const auto fat = fatigue_pulses({}, truth.u_sat, 0.01);
      pulses.insert(pulses.end(), fat.begin(), fat.end());
      const auto session = simulate_isometric(truth, 300.0, pulses, 0.01, noise, 7);
      const auto id = identify_session(session, {}, {}, seed);
      const double e_fat = std::abs(id.fit.params.T_fat / truth.T_fat - 1.0);
      const double e_rec = std::abs(id.fit.params.T_rec / truth.T_rec - 1.0);
      const double tol = noise == 0.0 ? 0.05 : 0.15;
      const bool thr = std::abs(id.thresholds.u_thr - truth.u_thr) <= 50.0 &&
                       std::abs(id.thresholds.u_sat - truth.u_sat) <= 50.0;
      const bool pass = e_fat <= tol && e_rec <= tol && thr;
      ok = ok && pass;
      detail += fmt("%s%s@%g%%: T_fat %.2f%% T_rec %.2f%% thr %g/%g%s", detail.empty() ? "" : "; ",
                    m.c_str(), 100 * noise, 100 * e_fat, 100 * e_rec, id.thresholds.u_thr,
                    id.thresholds.u_sat, pass ? "" : " FAIL");
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    slowest = std::max(slowest, secs);
  }
  const bool fast = slowest < 30.0;
  detail += fmt("; slowest muscle %.1f s%s", slowest, fast ? "" : " FAIL");
  return {ok && fast, detail};
}

Outcome geometry_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> radius(0.3, 1.0), u(-1.5, 1.5);
  std::vector<PathSample> samples;
  for (int i = 0; i < 200; ++i) {
    const double phase = i / 200.0, ang = 2.0 * std::numbers::pi * phase, r = radius(rng);
    samples.push_back({phase, {r * std::cos(ang), r * std::sin(ang)}});
  }
  const ReferencePath path(samples);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const JointVec q{u(rng), u(rng)};
    double best = INFINITY;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const auto& a = samples[k].q;
      const auto& b = samples[(k + 1) % samples.size()].q;
      const double vx = b[0] - a[0], vy = b[1] - a[1];
      const double t = std::clamp(((q[0] - a[0]) * vx + (q[1] - a[1]) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
      best = std::min(best, std::hypot(q[0] - a[0] - t * vx, q[1] - a[1] - t * vy));
    }
    worst = std::max(worst, std::abs(nearest_reference(path, q).distance - best));
  }
  return {worst <= 1e-12, fmt("max distance gap %.1e over 1000 queries", worst)};
}

std::string everything(const Comparison& c) {
  std::string s = c.csv();
  for (const auto& r : c.results) s += r.trace_csv + r.metrics_csv + summary_json(r.summary);
  return s;
}

}  // namespace

int main() {
  const ScenarioConfig base = default_scenario();
  const auto sweep = variant_sweep(base);
  Comparison first, second;
  bool compare_ok = true;
  std::string compare_error;
  auto compare_once = [&](Comparison& out) {
    try {
      out = compare_variants(sweep);
    } catch (const std::exception& e) {
      compare_ok = false;
      compare_error = e.what();
    }
  };

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const auto need_compare = [&](auto f) {
    return [&, f]() -> Outcome {
      if (!compare_ok) return {false, "comparison failed: " + compare_error};
      return f();
    };
  };
  const std::vector<Criterion> criteria = {
      {1, "fatigue ODE closed form", fatigue_closed_form},
      {2, "ILC fixed points", ilc_fixed_points},
      {3, "variant orderings", [&]() -> Outcome {
         compare_once(first);
         if (!compare_ok) return {false, "comparison failed: " + compare_error};
         return cost_orderings(first);
       }},
      {4, "adaptation transient", need_compare([&] {
         return transient_shape(first.results[static_cast<std::size_t>(
                                    &first.row(Variant::HAPC) - first.rows.data())],
                                base.n_cycles);
       })},
      {5, "adaptive vs fixed hybrid", need_compare([&] { return adaptive_vs_fixed(first); })},
      {6, "identification round trip", identification_round_trip},
      {7, "nearest point oracle", geometry_oracle},
      {8, "determinism", need_compare([&]() -> Outcome {
         compare_once(second);
         if (!compare_ok) return {false, "second comparison failed: " + compare_error};
         const bool same = everything(first) == everything(second);
         return {same, same ? "two comparisons byte-identical (tables, traces, metrics)" : "outputs differ"};
       })},
      {9, "hierarchy invariant", need_compare([&]() -> Outcome {
         std::size_t violations = 0, ticks = 0;
         for (const auto* c : {&first, &second})
           for (const auto& r : c->results) violations += r.summary.hierarchy_violations, ticks += r.summary.ticks;
         return {violations == 0, fmt("%zu violations over %zu leg-ticks checked", violations, 2 * ticks)};
       })},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
