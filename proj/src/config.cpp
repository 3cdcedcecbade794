#include <fstream>
#include <set>
#include <sstream>

#include "hapc/harness.hpp"
#include "json.hpp"

namespace hapc {

using nlohmann::json;

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::EPC: return "EPC";
    case Variant::FPC: return "FPC";
    case Variant::HPC: return "HPC";
    case Variant::HAPC: return "HAPC";
  }
  return "?";
}

Variant variant_from_string(std::string_view s) {
  if (s == "EPC") return Variant::EPC;
  if (s == "FPC") return Variant::FPC;
  if (s == "HPC") return Variant::HPC;
  if (s == "HAPC") return Variant::HAPC;
  throw ConfigError("unknown controller variant '" + std::string(s) + "'");
}

VariantGating gating(Variant v) {
  switch (v) {
    case Variant::EPC: return {false, true, false, true, false, true};
    case Variant::FPC: return {true, false, true, false, true, false};
    case Variant::HPC: return {true, true, false, false, false, false};
    case Variant::HAPC: return {true, true, true, true, true, false};
  }
  return {};
}

ScenarioConfig default_scenario(Variant variant) {
  ScenarioConfig cfg;
  cfg.variant = variant;
  // Mid-stance knee flexion (crouch) of 12 deg, reduced to 3 deg once the user improves.
  cfg.behaviors["high_error"] = {"high_error", 0.6, 0.04, "", {150.0, 55.0}, {15.0, 5.5},
                                 {1.0, 1.0}, {0.0, deg2rad(13.0)}, 0.28, 0.09};
  cfg.behaviors["low_error"] = {"low_error", 0.95, 0.01, "", {150.0, 55.0}, {15.0, 5.5},
                                {1.0, 1.0}, {0.0, deg2rad(3.0)}, 0.28, 0.09};
  cfg.schedule = {{1, 32, "high_error"}, {33, 64, "low_error"}};
  for (Side side : {Side::Left, Side::Right}) {
    const bool left = side == Side::Left;
    const FatigueParams quad = left ? table1::left_quadriceps() : table1::right_quadriceps();
    const FatigueParams ham = left ? table1::left_hamstrings() : table1::right_hamstrings();
    cfg.channels.push_back({side, Joint::Knee, Action::Extensor, quad, std::nullopt,
                            default_torque_spec(Joint::Knee, Action::Extensor)});
    cfg.channels.push_back({side, Joint::Knee, Action::Flexor, ham, std::nullopt,
                            default_torque_spec(Joint::Knee, Action::Flexor)});
    cfg.channels.push_back({side, Joint::Hip, Action::Flexor, quad, std::nullopt,
                            default_torque_spec(Joint::Hip, Action::Flexor)});
    cfg.channels.push_back({side, Joint::Hip, Action::Extensor, ham, std::nullopt,
                            default_torque_spec(Joint::Hip, Action::Extensor)});
  }
  return cfg;
}

void ScenarioConfig::validate() const {
  if (n_cycles < 1) throw ConfigError("n_cycles must be at least 1");
  if (!(dt > 0.0 && dt <= kMaxStep)) throw ConfigError("dt must lie in (0, 0.05]");
  if (!(cycle_period > 10.0 * dt)) throw ConfigError("cycle_period must span at least ten ticks");
  if (!(r_db >= 0.0)) throw ConfigError("r_db must be nonnegative");
  if (!(r_fesb0 >= r_db)) throw ConfigError("r_fesb0 must be at least r_db");
  if (!(r_fesb0 > 0.0)) throw ConfigError("r_fesb0 must be positive");
  if (voluntary_noise < 0.0) throw ConfigError("voluntary_noise must be nonnegative");
  frequency_factor(frequency, 0.0);
  if (!(phi_f > 0.0 && phi_f < 1.0)) throw ConfigError("phi_f must lie in (0, 1)");
  if (!(phi_e > 0.0 && phi_e < 1.0)) throw ConfigError("phi_e must lie in (0, 1)");
  if (!(gamma0 >= 0.0 && gamma0 <= 1.0)) throw ConfigError("gamma0 must lie in [0, 1]");
  if (baseline_stiffness < 0.0 || c_cr < 0.0 || !(torque_limit > 0.0))
    throw ConfigError("exoskeleton gains must be nonnegative with a positive torque limit");
  if (!(rate_cutoff_hz > 0.0)) throw ConfigError("rate_cutoff_hz must be positive");
  if (sides.empty()) throw ConfigError("at least one leg must be simulated");
  plant.validate();

  for (int c = 1; c <= n_cycles; ++c) behavior_for_cycle(c);
  for (const auto& [name, b] : behaviors) {
    if (b.file.empty() && !(b.scale >= 0.0)) throw ConfigError("behavior scale must be nonnegative");
    for (std::size_t j = 0; j < kNumJoints; ++j)
      if (!(b.stiffness[j] >= 0.0) || !(b.damping[j] >= 0.0))
        throw ConfigError("behavior '" + name + "' has negative tracking gains");
    if (!(b.amplitude[0] > 0.0) || !(b.amplitude[1] > 0.0))
      throw ConfigError("behavior '" + name + "' needs positive amplitudes");
    if (!(b.offset_width >= 0.0)) throw ConfigError("behavior '" + name + "' has a negative offset width");
  }

  for (Side side : sides) {
    auto chans = leg_channels(side);
    if (gating(variant).fes && chans.empty())
      throw ConfigError("leg '" + std::string(to_string(side)) + "' has no stimulated muscles");
    std::set<std::pair<int, int>> seen;
    for (const auto& ch : chans) {
      ch.params.validate();
      if (!(ch.torque.tau_max > 0.0)) throw ConfigError("tau_max must be positive");
      if (ch.gamma0 && !(*ch.gamma0 >= 0.0 && *ch.gamma0 <= 1.0))
        throw ConfigError("channel gamma0 must lie in [0, 1]");
      if (!seen.insert({static_cast<int>(ch.joint), static_cast<int>(ch.action)}).second)
        throw ConfigError("duplicate channel for one joint action on one leg");
    }
  }
}

const BehaviorSpec& ScenarioConfig::behavior_for_cycle(int cycle) const {
  for (const auto& e : schedule) {
    if (cycle >= e.first_cycle && cycle <= e.last_cycle) {
      auto it = behaviors.find(e.behavior);
      if (it == behaviors.end()) throw ConfigError("schedule names unknown behavior '" + e.behavior + "'");
      return it->second;
    }
  }
  throw ConfigError("behavior schedule does not cover cycle " + std::to_string(cycle));
}

std::vector<ChannelConfig> ScenarioConfig::leg_channels(Side side) const {
  std::vector<ChannelConfig> out;
  for (const auto& ch : channels)
    if (ch.side == side && (hip_fes || ch.joint == Joint::Knee)) out.push_back(ch);
  return out;
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void get_deg(const json& j, const char* key, double& dst_rad) {
  if (j.contains(key)) dst_rad = deg2rad(j.at(key).get<double>());
}

json params_to_json(const FatigueParams& p) {
  return {{"u_thr", p.u_thr}, {"u_sat", p.u_sat},   {"T_fat", p.T_fat},
          {"T_rec", p.T_rec}, {"T_rise", p.T_rise}, {"T_fall", p.T_fall},
          {"T_e", p.T_e},     {"mu_min", p.mu_min}, {"beta", p.beta}};
}

FatigueParams params_from_json(const json& j, FatigueParams p) {
  if (j.contains("muscle")) p = table1_row(j.at("muscle").get<std::string>());
  get_if(j, "u_thr", p.u_thr);
  get_if(j, "u_sat", p.u_sat);
  get_if(j, "T_fat", p.T_fat);
  get_if(j, "T_rec", p.T_rec);
  get_if(j, "T_rise", p.T_rise);
  get_if(j, "T_fall", p.T_fall);
  get_if(j, "T_e", p.T_e);
  get_if(j, "mu_min", p.mu_min);
  get_if(j, "beta", p.beta);
  return p;
}

json segment_to_json(const Segment& s) {
  return {{"length", s.length}, {"mass", s.mass}, {"com_fraction", s.com_fraction}, {"inertia", s.inertia}};
}

void segment_from_json(const json& j, Segment& s) {
  get_if(j, "length", s.length);
  get_if(j, "mass", s.mass);
  get_if(j, "com_fraction", s.com_fraction);
  get_if(j, "inertia", s.inertia);
}

json to_json_doc(const ScenarioConfig& c) {
  json doc;
  json sides = json::array();
  for (Side s : c.sides) sides.push_back(std::string(to_string(s)));
  doc["scenario"] = {{"variant", std::string(to_string(c.variant))},
                     {"n_cycles", c.n_cycles},
                     {"dt", c.dt},
                     {"cycle_period", c.cycle_period},
                     {"rng_seed", c.rng_seed},
                     {"voluntary_noise_nm", c.voluntary_noise},
                     {"r_db_deg", rad2deg(c.r_db)},
                     {"r_fesb0_deg", rad2deg(c.r_fesb0)},
                     {"frequency_hz", c.frequency},
                     {"hip_fes", c.hip_fes},
                     {"sides", sides}};
  doc["path"] = {{"file", c.path_file}, {"samples", c.path_samples}};
  json behaviors = json::object();
  for (const auto& [name, b] : c.behaviors)
    behaviors[name] = {{"scale", b.scale},
                       {"phase_lag", b.phase_lag},
                       {"file", b.file},
                       {"stiffness", b.stiffness},
                       {"damping", b.damping},
                       {"amplitude", b.amplitude},
                       {"offset_deg", JointVec{rad2deg(b.offset[0]), rad2deg(b.offset[1])}},
                       {"offset_phase", b.offset_phase},
                       {"offset_width", b.offset_width}};
  json schedule = json::array();
  for (const auto& e : c.schedule)
    schedule.push_back({{"first_cycle", e.first_cycle}, {"last_cycle", e.last_cycle}, {"behavior", e.behavior}});
  doc["behavior"] = {{"profiles", behaviors}, {"schedule", schedule}};

  json channels = json::array();
  for (const auto& ch : c.channels) {
    json jc = {{"side", std::string(to_string(ch.side))},
               {"joint", std::string(to_string(ch.joint))},
               {"action", std::string(to_string(ch.action))},
               {"params", params_to_json(ch.params)},
               {"tau_max_nm", ch.torque.tau_max},
               {"q_opt_deg", rad2deg(ch.torque.q_opt)}};
    if (ch.gamma0) jc["gamma0"] = *ch.gamma0;
    channels.push_back(jc);
  }
  doc["fes"] = {{"phi_f", c.phi_f}, {"gamma0", c.gamma0}, {"channels", channels}};
  doc["exo"] = {{"baseline_stiffness", c.baseline_stiffness},
                {"c_cr", c.c_cr},
                {"torque_limit", c.torque_limit},
                {"phi_e", c.phi_e},
                {"rate_cutoff_hz", c.rate_cutoff_hz}};
  doc["fsm"] = {{"stance_fraction", c.fsm.stance_fraction}, {"hysteresis_ticks", c.fsm.hysteresis_ticks}};
  const PlantParams& p = c.plant;
  doc["plant"] = {{"thigh", segment_to_json(p.thigh)},
                  {"shank", segment_to_json(p.shank)},
                  {"gravity", p.gravity},
                  {"friction", {p.friction[0], p.friction[1]}},
                  {"lower_limit_deg", {rad2deg(p.lower_limit[0]), rad2deg(p.lower_limit[1])}},
                  {"upper_limit_deg", {rad2deg(p.upper_limit[0]), rad2deg(p.upper_limit[1])}},
                  {"substeps", p.substeps}};
  return doc;
}

ScenarioConfig from_json_doc(const json& doc) {
  const Variant variant = doc.contains("scenario") && doc["scenario"].contains("variant")
                              ? variant_from_string(doc["scenario"]["variant"].get<std::string>())
                              : Variant::HAPC;
  ScenarioConfig c = default_scenario(variant);

  if (doc.contains("scenario")) {
    const json& s = doc["scenario"];
    get_if(s, "n_cycles", c.n_cycles);
    get_if(s, "dt", c.dt);
    get_if(s, "cycle_period", c.cycle_period);
    get_if(s, "rng_seed", c.rng_seed);
    get_if(s, "voluntary_noise_nm", c.voluntary_noise);
    get_deg(s, "r_db_deg", c.r_db);
    get_deg(s, "r_fesb0_deg", c.r_fesb0);
    get_if(s, "frequency_hz", c.frequency);
    get_if(s, "hip_fes", c.hip_fes);
    if (s.contains("sides")) {
      c.sides.clear();
      for (const auto& v : s["sides"]) c.sides.push_back(side_from_string(v.get<std::string>()));
    }
  }
  if (doc.contains("path")) {
    get_if(doc["path"], "file", c.path_file);
    get_if(doc["path"], "samples", c.path_samples);
  }
  if (doc.contains("behavior")) {
    const json& b = doc["behavior"];
    if (b.contains("profiles")) {
      for (const auto& [name, jb] : b["profiles"].items()) {
        BehaviorSpec spec = c.behaviors.count(name) ? c.behaviors[name] : BehaviorSpec{name, 1.0, 0.0, {}, {}, {}, {1.0, 1.0}, {}, 0.0, 0.0};
        spec.name = name;
        get_if(jb, "scale", spec.scale);
        get_if(jb, "phase_lag", spec.phase_lag);
        get_if(jb, "stiffness", spec.stiffness);
        get_if(jb, "damping", spec.damping);
        get_if(jb, "amplitude", spec.amplitude);
        if (jb.contains("offset_deg")) {
          const auto off = jb.at("offset_deg").get<JointVec>();
          spec.offset = {deg2rad(off[0]), deg2rad(off[1])};
        }
        get_if(jb, "offset_phase", spec.offset_phase);
        get_if(jb, "offset_width", spec.offset_width);
        get_if(jb, "file", spec.file);
        c.behaviors[name] = spec;
      }
    }
    if (b.contains("schedule")) {
      c.schedule.clear();
      for (const auto& e : b["schedule"])
        c.schedule.push_back({e.at("first_cycle").get<int>(), e.at("last_cycle").get<int>(),
                              e.at("behavior").get<std::string>()});
    }
  }
  if (doc.contains("fes")) {
    const json& f = doc["fes"];
    get_if(f, "phi_f", c.phi_f);
    get_if(f, "gamma0", c.gamma0);
    if (f.contains("channels")) {
      c.channels.clear();
      for (const auto& jc : f["channels"]) {
        ChannelConfig ch;
        ch.side = side_from_string(jc.at("side").get<std::string>());
        ch.joint = joint_from_string(jc.at("joint").get<std::string>());
        ch.action = action_from_string(jc.at("action").get<std::string>());
        ch.torque = default_torque_spec(ch.joint, ch.action);
        ch.params = params_from_json(jc.value("params", json::object()), ch.params);
        if (jc.contains("gamma0")) ch.gamma0 = jc["gamma0"].get<double>();
        get_if(jc, "tau_max_nm", ch.torque.tau_max);
        get_deg(jc, "q_opt_deg", ch.torque.q_opt);
        c.channels.push_back(ch);
      }
    }
  }
  if (doc.contains("exo")) {
    const json& e = doc["exo"];
    get_if(e, "baseline_stiffness", c.baseline_stiffness);
    get_if(e, "c_cr", c.c_cr);
    get_if(e, "torque_limit", c.torque_limit);
    get_if(e, "phi_e", c.phi_e);
    get_if(e, "rate_cutoff_hz", c.rate_cutoff_hz);
  }
  if (doc.contains("fsm")) {
    get_if(doc["fsm"], "stance_fraction", c.fsm.stance_fraction);
    get_if(doc["fsm"], "hysteresis_ticks", c.fsm.hysteresis_ticks);
  }
  if (doc.contains("plant")) {
    const json& p = doc["plant"];
    if (p.contains("thigh")) segment_from_json(p["thigh"], c.plant.thigh);
    if (p.contains("shank")) segment_from_json(p["shank"], c.plant.shank);
    get_if(p, "gravity", c.plant.gravity);
    get_if(p, "substeps", c.plant.substeps);
    if (p.contains("friction")) c.plant.friction = {p["friction"][0].get<double>(), p["friction"][1].get<double>()};
    if (p.contains("lower_limit_deg"))
      c.plant.lower_limit = {deg2rad(p["lower_limit_deg"][0].get<double>()),
                             deg2rad(p["lower_limit_deg"][1].get<double>())};
    if (p.contains("upper_limit_deg"))
      c.plant.upper_limit = {deg2rad(p["upper_limit_deg"][0].get<double>()),
                             deg2rad(p["upper_limit_deg"][1].get<double>())};
  }
  return c;
}

}  // namespace

ScenarioConfig scenario_from_json_text(const std::string& text) {
  try {
    ScenarioConfig c = from_json_doc(json::parse(text));
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw ConfigError("cannot open config '" + filename + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

std::string scenario_to_json_text(const ScenarioConfig& cfg) { return to_json_doc(cfg).dump(2); }

std::string muscle_config_json(const FatigueParams& params, const std::string& muscle) {
  json j = params_to_json(params);
  if (!muscle.empty()) j["muscle"] = muscle;
  return j.dump(2) + "\n";
}

FatigueParams muscle_config_from_json_text(const std::string& text) {
  try {
    FatigueParams p = params_from_json(json::parse(text), FatigueParams{});
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("muscle config: ") + e.what());
  }
}

}  // namespace hapc
