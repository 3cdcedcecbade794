#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hapc/harness.hpp"
#include "hapc/identification.hpp"

namespace py = pybind11;
using namespace hapc;

namespace {

py::dict summary_dict(const ScenarioSummary& s) {
  py::dict d;
  d["variant"] = std::string(to_string(s.variant));
  d["rms_error_deg"] = rad2deg(s.rms_error);
  d["rms_exo_torque_nm"] = s.rms_exo_torque;
  d["rms_pulse_width_us"] = s.rms_pulse_width;
  d["mean_fatigue"] = s.mean_fatigue;
  d["mean_knee_fatigue"] = s.mean_knee_fatigue;
  d["ticks"] = s.ticks;
  d["cycles_detected"] = s.cycles_detected;
  d["hierarchy_violations"] = s.hierarchy_violations;
  return d;
}

py::dict params_dict(const FatigueParams& p) {
  py::dict d;
  d["u_thr"] = p.u_thr;
  d["u_sat"] = p.u_sat;
  d["T_fat"] = p.T_fat;
  d["T_rec"] = p.T_rec;
  d["T_rise"] = p.T_rise;
  d["T_fall"] = p.T_fall;
  d["T_e"] = p.T_e;
  d["mu_min"] = p.mu_min;
  d["beta"] = p.beta;
  return d;
}

ScenarioConfig config_from(const std::string& text, const std::string& variant) {
  ScenarioConfig cfg = text.empty() ? default_scenario() : scenario_from_json_text(text);
  if (!variant.empty()) cfg.variant = variant_from_string(variant);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_hapc, m) {
  m.doc() = "Hybrid exoskeleton/FES gait-assistance simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<IdentificationError>(m, "IdentificationError", PyExc_RuntimeError);

  m.def("default_config", [](const std::string& variant) {
    return scenario_to_json_text(default_scenario(variant_from_string(variant)));
  }, py::arg("variant") = "HAPC", "Default scenario as JSON text.");

  m.def("run", [](const std::string& config, const std::string& variant, bool trace) {
    ScenarioResult r;
    const ScenarioConfig cfg = config_from(config, variant);
    {
      py::gil_scoped_release release;
      r = run_scenario(cfg, {.keep_trace = trace});
    }
    py::dict out;
    out["summary"] = summary_dict(r.summary);
    out["metrics_csv"] = r.metrics_csv;
    out["trace_csv"] = r.trace_csv;
    return out;
  }, py::arg("config") = "", py::arg("variant") = "", py::arg("trace") = false,
     "Runs one scenario from JSON text (empty for defaults).");

  m.def("compare", [](const std::string& config) {
    Comparison c;
    const ScenarioConfig cfg = config_from(config, "");
    {
      py::gil_scoped_release release;
      c = compare_variants(variant_sweep(cfg), {.keep_trace = false});
    }
    py::dict out;
    for (const auto& row : c.rows) {
      py::dict d = summary_dict(row.raw);
      d["norm_error"] = row.error;
      d["norm_robot"] = row.robot;
      d["norm_stimulation"] = row.stimulation;
      d["norm_fatigue"] = row.fatigue;
      d["norm_cost"] = row.cost;
      out[py::str(std::string(to_string(row.variant)))] = d;
    }
    return out;
  }, py::arg("config") = "", "Runs the four variants and returns HAPC-normalized rows.");

  m.def("nearest_reference", [](std::pair<double, double> q, std::optional<double> previous_phase) {
    static const ReferencePath path = default_reference_path();
    const Projection p = nearest_reference(path, {q.first, q.second}, previous_phase);
    return py::make_tuple(py::make_tuple(p.q_ref[0], p.q_ref[1]), p.phase, p.distance);
  }, py::arg("q"), py::arg("previous_phase") = py::none(),
     "Projects (hip, knee) in radians onto the default path: (q_ref, phase, distance).");

  m.def("dead_band", &dead_band, py::arg("error"), py::arg("radius"));

  m.def("table1_row", [](const std::string& muscle) { return params_dict(table1_row(muscle)); },
        py::arg("muscle"));

  m.def("excitation", [](double pulse_width, const std::string& muscle) {
    return excitation(pulse_width, table1_row(muscle));
  }, py::arg("pulse_width"), py::arg("muscle"));

  m.def("simulate_session", [](const std::string& muscle, double gain, double noise, std::uint64_t seed) {
    const FatigueParams p = table1_row(muscle);
    auto pulses = staircase_pulses({}, 0.01);
    const auto fatigue = fatigue_pulses({}, p.u_sat, 0.01);
    pulses.insert(pulses.end(), fatigue.begin(), fatigue.end());
    const IsometricTrace t = simulate_isometric(p, gain, pulses, 0.01, noise, seed);
    py::dict out;
    out["time_s"] = t.time;
    out["pulse_width_us"] = t.pulse_width;
    out["force_n"] = t.force;
    return out;
  }, py::arg("muscle"), py::arg("gain") = 300.0, py::arg("noise") = 0.0, py::arg("seed") = 1,
     "Synthetic staircase + fatigue + recovery record for a table row.");

  m.def("identify", [](std::vector<double> time, std::vector<double> pulse_width, std::vector<double> force,
                       const std::string& seed_muscle, std::uint64_t seed) {
    IsometricTrace t{std::move(time), std::move(pulse_width), std::move(force)};
    FitOptions opts;
    opts.seed = seed;
    Identification id;
    {
      py::gil_scoped_release release;
      id = identify_session(t, {}, {}, table1_row(seed_muscle), opts);
    }
    py::dict out = params_dict(id.fit.params);
    out["gain"] = id.fit.gain;
    out["residual"] = id.fit.residual;
    out["converged"] = id.fit.converged;
    out["saturation_reached"] = id.thresholds.saturation_reached;
    return out;
  }, py::arg("time"), py::arg("pulse_width"), py::arg("force"), py::arg("seed_muscle") = "right_quadriceps",
     py::arg("seed") = 1, "Thresholds and fatigue fit for a session record.");
}
