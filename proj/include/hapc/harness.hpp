#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hapc/exo_controller.hpp"
#include "hapc/fes_controller.hpp"
#include "hapc/gait_fsm.hpp"
#include "hapc/path_geometry.hpp"
#include "hapc/plant.hpp"

namespace hapc {

enum class Variant { EPC, FPC, HPC, HAPC };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);

/// Which actuators and adaptation laws a controller variant enables.
struct VariantGating {
  bool fes = true;
  bool exo = true;
  bool adapt_gamma = true;
  bool adapt_stiffness = true;
  bool adapt_band = true;
  bool band_collapsed = false;  // exo engages at the dead band (no FES band)
};
VariantGating gating(Variant v);

/// How the scripted human moves.
///
/// The intended trajectory is the reference path with each joint's excursion about its
/// mean scaled by `amplitude` and shifted by `offset`, followed `phase_lag` late. With a
/// positive `offset_width` the shift is a periodic Gaussian window centred on `offset_phase`. Voluntary torque is `scale` times
/// its inverse dynamics (or a profile file) plus PD tracking of the intended position.
struct BehaviorSpec {
  std::string name;
  double scale = 1.0;
  double phase_lag = 0.0;     // fraction of a cycle
  std::string file;           // replaces the inverse-dynamics feedforward when set
  JointVec stiffness{};       // Nm/rad
  JointVec damping{};         // Nm s/rad
  JointVec amplitude{1.0, 1.0};
  JointVec offset{};          // rad
  double offset_phase = 0.0;
  double offset_width = 0.0;  // fraction of a cycle; 0 shifts the whole cycle
};

/// The path a behavior intends to follow.
ReferencePath intended_path(const ReferencePath& path, const BehaviorSpec& behavior);

/// Inclusive 1-based cycle range mapped to a named behavior.
struct ScheduleEntry {
  int first_cycle = 1;
  int last_cycle = 1;
  std::string behavior;
};

struct ChannelConfig {
  Side side = Side::Left;
  Joint joint = Joint::Knee;
  Action action = Action::Extensor;
  FatigueParams params;
  std::optional<double> gamma0;  // overrides the scenario-wide value
  MuscleTorqueSpec torque;
};

struct ScenarioConfig {
  Variant variant = Variant::HAPC;
  int n_cycles = 64;
  double dt = 0.01;
  double cycle_period = 1.2;  // s per gait cycle of the human clock
  std::uint64_t rng_seed = 1;
  double voluntary_noise = 0.3;  // Nm, white, per tick
  double r_db = deg2rad(2.0);
  double r_fesb0 = deg2rad(6.0);
  double frequency = kStimulationFrequency;
  bool hip_fes = false;
  std::vector<Side> sides{Side::Left, Side::Right};

  std::string path_file;  // empty: built-in path
  std::size_t path_samples = 200;

  std::map<std::string, BehaviorSpec> behaviors;
  std::vector<ScheduleEntry> schedule;

  double phi_f = 0.95;
  double gamma0 = 1.0;
  std::vector<ChannelConfig> channels;

  double baseline_stiffness = 340.0;
  double c_cr = 2.0;
  double torque_limit = 35.0;
  double phi_e = 0.95;
  double rate_cutoff_hz = 10.0;

  FsmConfig fsm;
  PlantParams plant;

  /// Throws ConfigError on any inconsistency.
  void validate() const;
  /// Behavior active in a 1-based cycle.
  const BehaviorSpec& behavior_for_cycle(int cycle) const;
  /// Channels of one leg, hip channels dropped unless enabled.
  std::vector<ChannelConfig> leg_channels(Side side) const;
};

/// Defaults: knee muscles from the identified table, half-split behavior at cycle 32.
ScenarioConfig default_scenario(Variant variant = Variant::HAPC);

/// Nested JSON configuration; missing keys keep their defaults.
ScenarioConfig load_scenario(const std::string& filename);
ScenarioConfig scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioConfig& cfg);

/// Muscle-config record: the FatigueParams fields as a flat JSON object, optionally
/// with a "muscle" key naming a table row that the other keys override.
std::string muscle_config_json(const FatigueParams& params, const std::string& muscle = {});
FatigueParams muscle_config_from_json_text(const std::string& text);

/// Per-leg, per-gait-clock-cycle summary.
struct CycleMetrics {
  int cycle = 0;  // 1-based
  Side side = Side::Left;
  JointVec rms_err{};         // rad
  JointVec rms_exo_torque{};  // Nm
  std::vector<double> rms_pulse_width;  // per channel, us
  std::vector<double> mean_fitness;     // per channel
  std::vector<double> gamma_st, gamma_sw;
  JointVec k_st{}, k_sw{};
  double r_fesb = 0.0;  // rad, at the end of the cycle
};

/// Whole-run aggregates used for controller comparison.
struct ScenarioSummary {
  Variant variant = Variant::HAPC;
  double rms_error = 0.0;           // rad, all joints and legs
  double rms_exo_torque = 0.0;      // Nm
  double rms_pulse_width = 0.0;     // us, all channels
  double mean_fatigue = 0.0;        // mean of 1 - mu over channels and ticks
  double mean_knee_fatigue = 0.0;   // knee channels only
  std::size_t ticks = 0;
  std::size_t cycles_detected = 0;  // FSM cycle completions, summed over legs
  std::size_t hierarchy_violations = 0;
};

struct ScenarioResult {
  std::vector<CycleMetrics> metrics;
  ScenarioSummary summary;
  std::string trace_csv;    // filled when a trace is requested
  std::string metrics_csv;
};

struct RunOptions {
  bool keep_trace = true;
};

/// Executes one scenario at the control tick. Throws DivergenceError on NaN/inf state.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

/// Per-tick trace column names.
const std::vector<std::string>& trace_columns();

struct ComparisonRow {
  Variant variant = Variant::HAPC;
  ScenarioSummary raw;
  double error = 0.0;  // normalized so HAPC = 1
  double robot = 0.0;
  double stimulation = 0.0;
  double fatigue = 0.0;
  double cost = 0.0;   // sum of the four normalized columns
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<ScenarioResult> results;  // parallel to rows
  std::string csv() const;
  const ComparisonRow& row(Variant v) const;
};

/// Runs every config (concurrently) and normalizes against the HAPC entry.
///
/// Configs must be identical apart from the variant.
Comparison compare_variants(const std::vector<ScenarioConfig>& cfgs, const RunOptions& options = {});

/// The four variants of one base configuration.
std::vector<ScenarioConfig> variant_sweep(const ScenarioConfig& base);

/// Writes summary values as a flat JSON object.
std::string summary_json(const ScenarioSummary& s);

}  // namespace hapc
