#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "hapc/csv.hpp"
#include "hapc/harness.hpp"

using namespace hapc;

namespace {

ScenarioConfig short_config(Variant v, int cycles = 6) {
  ScenarioConfig cfg = default_scenario(v);
  cfg.n_cycles = cycles;
  cfg.schedule = {{1, cycles / 2, "high_error"}, {cycles / 2 + 1, cycles, "low_error"}};
  return cfg;
}

CsvTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

}  // namespace

TEST_CASE("variant names and gating") {
  for (auto v : {Variant::EPC, Variant::FPC, Variant::HPC, Variant::HAPC})
    CHECK(variant_from_string(to_string(v)) == v);
  CHECK_THROWS_AS(variant_from_string("PID"), ConfigError);
  CHECK_FALSE(gating(Variant::EPC).fes);
  CHECK_FALSE(gating(Variant::FPC).exo);
  CHECK_FALSE(gating(Variant::HPC).adapt_gamma);
  CHECK_FALSE(gating(Variant::HPC).adapt_stiffness);
  CHECK_FALSE(gating(Variant::HPC).adapt_band);
}

TEST_CASE("config text round trip") {
  ScenarioConfig cfg = default_scenario(Variant::FPC);
  cfg.rng_seed = 42;
  cfg.r_db = deg2rad(1.5);
  const std::string text = scenario_to_json_text(cfg);
  const ScenarioConfig back = scenario_from_json_text(text);
  CHECK(back.variant == Variant::FPC);
  CHECK(back.rng_seed == 42);
  CHECK(back.r_db == doctest::Approx(deg2rad(1.5)));
  CHECK(scenario_to_json_text(back) == text);
  CHECK(scenario_from_json_text("{}").n_cycles == 64);
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(scenario_from_json_text("{not json"), ConfigError);
  CHECK_THROWS_AS(scenario_from_json_text(R"({"scenario": {"n_cycles": 0}})"), ConfigError);
  CHECK_THROWS_AS(scenario_from_json_text(R"({"scenario": {"dt": 0.2}})"), ConfigError);
  auto cfg = default_scenario();
  cfg.r_fesb0 = 0.5 * cfg.r_db;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_scenario();
  cfg.schedule = {{1, 10, "high_error"}};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_scenario();
  cfg.schedule.back().behavior = "sprint";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_scenario();
  cfg.frequency = 120.0;
  CHECK_THROWS_AS(run_scenario(cfg), ConfigError);
}

TEST_CASE("muscle config round trip") {
  auto p = table1::left_quadriceps();
  p.T_fat = 71.25;
  const auto back = muscle_config_from_json_text(muscle_config_json(p, "left_quadriceps"));
  CHECK(back == p);
  CHECK(muscle_config_from_json_text(R"({"muscle": "right_hamstrings"})") == table1::right_hamstrings());
}

TEST_CASE("runs are deterministic") {
  const auto cfg = short_config(Variant::HAPC);
  const auto a = run_scenario(cfg), b = run_scenario(cfg);
  CHECK(a.trace_csv == b.trace_csv);
  CHECK(a.metrics_csv == b.metrics_csv);
  auto other = cfg;
  other.rng_seed = 2;
  CHECK(run_scenario(other).trace_csv != a.trace_csv);
}

TEST_CASE("trace layout") {
  const auto r = run_scenario(short_config(Variant::HAPC, 2));
  const auto t = parse(r.trace_csv);
  CHECK(t.header() == trace_columns());
  CHECK(t.rows() == 2 * r.summary.ticks);
  CHECK(r.summary.hierarchy_violations == 0);
}

TEST_CASE("exoskeleton-only variant never stimulates") {
  const auto r = run_scenario(short_config(Variant::EPC));
  const auto t = parse(r.trace_csv);
  for (const char* c : {"pw_quad", "pw_ham"})
    for (double v : t.column(c)) CHECK(v == 0.0);
  CHECK(r.summary.rms_pulse_width == 0.0);
  CHECK(r.summary.rms_exo_torque > 0.0);
}

TEST_CASE("stimulation-only variant never drives the exoskeleton") {
  const auto r = run_scenario(short_config(Variant::FPC));
  const auto t = parse(r.trace_csv);
  for (const char* c : {"hip_tau_exo", "knee_tau_exo"})
    for (double v : t.column(c)) CHECK(v == 0.0);
  CHECK(r.summary.rms_exo_torque == 0.0);
}

TEST_CASE("non-adaptive hybrid keeps its gains") {
  const auto cfg = short_config(Variant::HPC);
  const auto r = run_scenario(cfg);
  REQUIRE(!r.metrics.empty());
  for (const auto& m : r.metrics) {
    CHECK(m.k_st == JointVec{cfg.baseline_stiffness, cfg.baseline_stiffness});
    CHECK(m.k_sw == JointVec{cfg.baseline_stiffness, cfg.baseline_stiffness});
    for (double g : m.gamma_st) CHECK(g == cfg.gamma0);
    for (double g : m.gamma_sw) CHECK(g == cfg.gamma0);
    CHECK(m.r_fesb == cfg.r_fesb0);
  }
}

TEST_CASE("dry run with everything switched off") {
  auto cfg = short_config(Variant::HAPC, 1);
  cfg.schedule = {{1, 1, "idle"}};
  cfg.behaviors["idle"] = {"idle", 0.0, 0.0, "", {0, 0}, {0, 0}, {1, 1}, {0, 0}, 0.0, 0.0};
  cfg.voluntary_noise = 0.0;
  cfg.gamma0 = 0.0;
  cfg.baseline_stiffness = 0.0;
  const auto r = run_scenario(cfg);
  const auto t = parse(r.trace_csv);
  for (const auto& name : t.header()) {
    if (name == "side") continue;
    for (double v : t.column(name)) CHECK(std::isfinite(v));
  }
  CHECK(r.summary.cycles_detected <= cfg.sides.size());
  CHECK(r.summary.rms_exo_torque == 0.0);
  CHECK(r.summary.rms_pulse_width == 0.0);
}

TEST_CASE("non-finite state raises a divergence error") {
  auto cfg = short_config(Variant::HAPC, 2);
  cfg.behaviors["high_error"].stiffness = {std::numeric_limits<double>::infinity(), 0.0};
  CHECK_THROWS_AS(run_scenario(cfg), DivergenceError);
}

TEST_CASE("comparison normalizes to the adaptive hybrid") {
  const auto cmp = compare_variants(variant_sweep(short_config(Variant::HAPC)), {.keep_trace = false});
  REQUIRE(cmp.rows.size() == 4);
  const auto& h = cmp.row(Variant::HAPC);
  CHECK(h.error == doctest::Approx(1.0));
  CHECK(h.robot == doctest::Approx(1.0));
  CHECK(h.cost == doctest::Approx(4.0));
  CHECK(cmp.row(Variant::FPC).robot == 0.0);
  const auto table = parse(cmp.csv());
  CHECK(table.rows() == 4);
  CHECK(table.has_column("norm_cost"));
}

TEST_CASE("comparison rejects configs that differ beyond the variant") {
  auto cfgs = variant_sweep(short_config(Variant::HAPC, 2));
  cfgs[1].rng_seed = 99;
  CHECK_THROWS_AS(compare_variants(cfgs), ConfigError);
  auto no_hapc = variant_sweep(short_config(Variant::HAPC, 2));
  no_hapc.pop_back();
  CHECK_THROWS_AS(compare_variants(no_hapc), ConfigError);
}

TEST_CASE("csv numbers round trip") {
  CsvTable t({"a", "b"});
  const double x = 0.1 + 0.2, y = -1.0 / 3.0;
  t.add_row(std::vector<double>{x, y});
  std::ostringstream out;
  write_csv(out, t);
  const auto back = parse(out.str());
  CHECK(back.column("a")[0] == x);
  CHECK(back.column("b")[0] == y);
  CHECK_THROWS_AS(back.column("c"), ConfigError);
}
