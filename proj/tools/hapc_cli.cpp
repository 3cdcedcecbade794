// hapc: run, compare and identify from the command line.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "hapc/harness.hpp"
#include "hapc/identification.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

struct ScenarioFlags {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> cycles;
  std::string variant;
  bool no_trace = false;
};

void add_scenario_flags(CLI::App* app, ScenarioFlags& f, bool with_variant) {
  app->add_option("--config", f.config, "Scenario file (JSON)")->check(CLI::ExistingFile);
  app->add_option("--out-dir", f.out_dir, "Output directory");
  app->add_option("--seed", f.seed, "Voluntary-noise seed");
  app->add_option("--cycles", f.cycles, "Number of gait cycles");
  if (with_variant) app->add_option("--variant", f.variant, "EPC, FPC, HPC or HAPC");
  app->add_flag("--no-trace", f.no_trace, "Skip the per-tick trace file");
}

hapc::ScenarioConfig build_config(const ScenarioFlags& f) {
  hapc::ScenarioConfig cfg = f.config.empty() ? hapc::default_scenario() : hapc::load_scenario(f.config);
  if (f.seed) cfg.rng_seed = *f.seed;
  if (f.cycles) {
    // Stretch the schedule so the behavior switch stays at the same fraction of the run.
    const int old_n = cfg.n_cycles;
    cfg.n_cycles = *f.cycles;
    for (auto& e : cfg.schedule) {
      e.first_cycle = 1 + (e.first_cycle - 1) * cfg.n_cycles / old_n;
      e.last_cycle = e.last_cycle * cfg.n_cycles / old_n;
    }
    std::erase_if(cfg.schedule, [](const auto& e) { return e.last_cycle < e.first_cycle; });
    if (!cfg.schedule.empty()) cfg.schedule.back().last_cycle = cfg.n_cycles;
  }
  if (!f.variant.empty()) cfg.variant = hapc::variant_from_string(f.variant);
  cfg.validate();
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_result(const fs::path& dir, const hapc::ScenarioResult& r) {
  const std::string tag(hapc::to_string(r.summary.variant));
  if (!r.trace_csv.empty()) write_file(dir / ("trace_" + tag + ".csv"), r.trace_csv);
  write_file(dir / ("metrics_" + tag + ".csv"), r.metrics_csv);
  write_file(dir / ("summary_" + tag + ".json"), hapc::summary_json(r.summary));
}

int cmd_run(const ScenarioFlags& f) {
  const auto cfg = build_config(f);
  fs::create_directories(f.out_dir);
  const auto result = hapc::run_scenario(cfg, {.keep_trace = !f.no_trace});
  write_result(f.out_dir, result);
  std::cout << hapc::summary_json(result.summary);
  return 0;
}

int cmd_compare(const ScenarioFlags& f) {
  const auto cfg = build_config(f);
  fs::create_directories(f.out_dir);
  const auto cmp = hapc::compare_variants(hapc::variant_sweep(cfg), {.keep_trace = !f.no_trace});
  for (const auto& r : cmp.results) write_result(f.out_dir, r);
  write_file(fs::path(f.out_dir) / "comparison.csv", cmp.csv());
  std::cout << cmp.csv();
  return 0;
}

struct IdentifyFlags {
  std::string trace;
  std::string muscle = "right_quadriceps";
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_identify(const IdentifyFlags& f) {
  const auto session = hapc::IsometricTrace::load(f.trace);
  hapc::FitOptions opts;
  opts.seed = f.seed;
  const auto id = hapc::identify_session(session, {}, {}, hapc::table1_row(f.muscle), opts);
  const std::string text = hapc::muscle_config_json(id.fit.params, f.muscle);
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_file(f.out, text);
  }
  std::cerr << "gain " << id.fit.gain << " N, residual " << id.fit.residual << " N, "
            << (id.fit.converged ? "converged" : "not converged") << " after " << id.fit.iterations
            << " evaluations\n";
  if (!id.thresholds.saturation_reached) std::cerr << "warning: saturation not reached in staircase\n";
  return 0;
}

struct SynthFlags {
  std::string muscle = "right_quadriceps";
  std::uint64_t seed = 1;
  double noise = 0.0;
  double gain = 300.0;
  double dt = 0.01;
  std::string out;
};

int cmd_synthesize(const SynthFlags& f) {
  const auto params = hapc::table1_row(f.muscle);
  auto pulses = hapc::staircase_pulses({}, f.dt);
  const auto fatigue = hapc::fatigue_pulses({}, params.u_sat, f.dt);
  pulses.insert(pulses.end(), fatigue.begin(), fatigue.end());
  hapc::simulate_isometric(params, f.gain, pulses, f.dt, f.noise, f.seed).save(f.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid exoskeleton/FES gait-assistance simulator"};
  app.require_subcommand(1);

  ScenarioFlags run_flags, compare_flags;
  auto* run = app.add_subcommand("run", "Run one scenario");
  add_scenario_flags(run, run_flags, true);
  auto* compare = app.add_subcommand("compare", "Run all four controller variants");
  add_scenario_flags(compare, compare_flags, false);

  IdentifyFlags id_flags;
  auto* identify = app.add_subcommand("identify", "Fit muscle parameters to an isometric session");
  identify->add_option("--trace", id_flags.trace, "Session trace (time_s, pulse_width_us, force_n)")
      ->required()
      ->check(CLI::ExistingFile);
  identify->add_option("--muscle", id_flags.muscle, "Table row used as the fit seed");
  identify->add_option("--seed", id_flags.seed, "Multi-start seed");
  identify->add_option("--out", id_flags.out, "Muscle-config output file");

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synthesize", "Write a synthetic identification session");
  synth->add_option("--muscle", synth_flags.muscle, "Table row to simulate");
  synth->add_option("--seed", synth_flags.seed, "Noise seed");
  synth->add_option("--noise", synth_flags.noise, "Relative force noise");
  synth->add_option("--gain", synth_flags.gain, "Force gain, N");
  synth->add_option("--out", synth_flags.out, "Trace output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*compare) return cmd_compare(compare_flags);
    if (*identify) return cmd_identify(id_flags);
    if (*synth) return cmd_synthesize(synth_flags);
  } catch (const hapc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hapc::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
