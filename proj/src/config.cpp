#include "softwrist/config.hpp"

#include "softwrist/errors.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace softwrist {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Keys whose default is null accept any value; objects are merged key by key.
void merge(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown configuration key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object() && !slot.empty()) {
      merge(slot, *it, key);
    } else {
      slot = *it;
    }
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& section) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("configuration key '" + section + "." + key + "' has the wrong type");
  }
}

Eigen::Vector2d vec2(const json& j, const char* key, const std::string& section) {
  const auto v = get<std::vector<double>>(j, key, section);
  if (v.size() != 2) throw ConfigError("'" + section + "." + key + "' must have two entries");
  return {v[0], v[1]};
}

template <class E, std::size_t N>
E pick(const std::string& value, const std::array<std::pair<const char*, E>, N>& table, const std::string& key) {
  for (const auto& [name, e] : table) {
    if (value == name) return e;
  }
  std::string allowed;
  for (const auto& [name, e] : table) allowed += std::string(allowed.empty() ? "" : ", ") + name;
  throw ConfigError("'" + key + "' must be one of: " + allowed + " (got '" + value + "')");
}

WristModel parse_wrist(const json& j) {
  const std::string s = "wrist";
  WristModel w;
  const auto lengths = get<std::vector<double>>(j, "segment_lengths_m", s);
  w.geometry.clear();
  for (std::size_t i = 0; i < lengths.size(); ++i) w.geometry.push_back({lengths[i], static_cast<int>(i + 1)});
  w.chord_mass = get<double>(j, "chord_mass_kg", s);
  w.stiffness = get<double>(j, "stiffness_Nm_per_rad", s);
  w.damping = get<double>(j, "damping_Nms_per_rad", s);
  w.augmented_damping = get<double>(j, "augmented_damping", s);
  w.gravity = vec2(j, "gravity_m_s2", s);
  w.tendon_radius = get<double>(j, "tendon_radius_m", s);
  const json& routing = j.at("tendon_routing_m");
  if (!routing.is_null()) {
    const auto rows = get<std::vector<std::vector<double>>>(j, "tendon_routing_m", s);
    if (rows.size() != lengths.size() || rows.empty() || rows[0].empty()) {
      throw ConfigError("'wrist.tendon_routing_m' needs one row of moment arms per segment");
    }
    w.tendon_routing.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size()) throw ConfigError("'wrist.tendon_routing_m' rows differ in length");
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        w.tendon_routing(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
  }
  w.coordinates = pick(get<std::string>(j, "coordinates", s),
                       std::array{std::pair{"shared", CoordinateMode::kShared},
                                  std::pair{"independent", CoordinateMode::kIndependent}},
                       "wrist.coordinates");
  return w;
}

template <class F>
auto wrap(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

json default_config_json() {
  return json::parse(R"({
  "wrist": {
    "segment_lengths_m": [0.02, 0.02, 0.02, 0.02],
    "chord_mass_kg": 0.01,
    "stiffness_Nm_per_rad": 0.615,
    "damping_Nms_per_rad": 0.105,
    "augmented_damping": 0.0,
    "gravity_m_s2": [-9.81, 0.0],
    "tendon_radius_m": 0.01,
    "tendon_routing_m": null,
    "coordinates": "shared"
  },
  "scenario": {
    "controller": "smc",
    "direction": "ulnar",
    "target_deg": 30.0,
    "duration_s": 5.0,
    "step_s": 0.0001,
    "control_period_s": 0.0,
    "integrator": "radau",
    "reference": "step",
    "ramp_time_s": 0.5,
    "disturbances": [],
    "force_estimate_N": [0.0, 0.0],
    "ik_model": null,
    "seed": 1
  },
  "smc": {
    "P1": 0.001,
    "P2": 1000.0,
    "P3": 1000.0,
    "gain_layout": "rate_first",
    "switching": "tanh",
    "equivalent_solve": "matrix",
    "coriolis": "printed"
  },
  "pid": {
    "Kp": 10000.0,
    "Ki": 5000.0,
    "Kd": 2000.0
  },
  "training": {
    "samples": 1000,
    "train_samples": 750,
    "theta_max_deg": 50.0,
    "outputs": 1,
    "dataset_seed": 7,
    "hidden": [200, 100, 100],
    "activation": "sigmoid",
    "batch_size": 100,
    "epochs": 100,
    "learning_rate": 0.01,
    "final_learning_rate": 0.003,
    "beta1": 0.9,
    "beta2": 0.999,
    "epsilon": 1e-8,
    "weight_decay": 0.01,
    "seed": 11
  },
  "tuning": {
    "swarm_size": 20,
    "iterations": 50,
    "inertia": 0.72,
    "cognitive": 1.49,
    "social": 1.49,
    "lower": [0.0001, 0.0001, 0.0001],
    "upper": [10000.0, 10000.0, 10000.0],
    "max_velocity_fraction": 0.2,
    "initial": [1.0, 1.0, 1.0],
    "error_weight": 1.0,
    "chattering_weight": 0.01,
    "seed": 2024,
    "duration_s": 3.0,
    "step_s": 0.0005
  }
})");
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json patch = value;
  std::vector<std::string> keys;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    keys.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (auto k = keys.rbegin(); k != keys.rend(); ++k) patch = json{{*k, patch}};
  merge(doc, patch, "");
}

RunConfig parse_config(const json& document) {
  RunConfig rc;
  rc.effective = default_config_json();
  merge(rc.effective, document, "");
  const json& doc = rc.effective;

  rc.scenario.wrist = parse_wrist(doc.at("wrist"));
  wrap([&] { rc.scenario.wrist.validate(); return 0; });

  const json& sc = doc.at("scenario");
  const std::string s = "scenario";
  Scenario& out = rc.scenario;
  out.controller = wrap([&] { return controller_from_string(get<std::string>(sc, "controller", s)); });
  out.direction = wrap([&] { return direction_from_string(get<std::string>(sc, "direction", s)); });
  out.target = get<double>(sc, "target_deg", s) * kDeg;
  out.duration = get<double>(sc, "duration_s", s);
  out.step = get<double>(sc, "step_s", s);
  out.control_period = get<double>(sc, "control_period_s", s);
  out.integrator = wrap([&] { return integrator_from_string(get<std::string>(sc, "integrator", s)); });
  out.reference = wrap([&] { return reference_from_string(get<std::string>(sc, "reference", s)); });
  out.ramp_time = get<double>(sc, "ramp_time_s", s);
  out.force_estimate = vec2(sc, "force_estimate_N", s);
  out.seed = get<std::uint64_t>(sc, "seed", s);
  const json& dist = sc.at("disturbances");
  if (!dist.is_array()) throw ConfigError("'scenario.disturbances' must be a list");
  for (const json& d : dist) {
    const std::string ds = "scenario.disturbances[]";
    if (!d.is_object()) throw ConfigError(ds + " entries must be objects");
    for (auto it = d.begin(); it != d.end(); ++it) {
      if (it.key() != "start_s" && it.key() != "end_s" && it.key() != "force_N" && it.key() != "opposing_N") {
        throw ConfigError("unknown configuration key '" + ds + "." + it.key() + "'");
      }
    }
    if (d.contains("force_N") == d.contains("opposing_N")) {
      throw ConfigError(ds + " needs exactly one of force_N or opposing_N");
    }
    const double t0 = get<double>(d, "start_s", ds), t1 = get<double>(d, "end_s", ds);
    if (d.contains("force_N")) {
      out.disturbances.push_back({t0, t1, vec2(d, "force_N", ds)});
    } else {
      out.disturbances.push_back(opposing_pulse(out, t0, t1, get<double>(d, "opposing_N", ds)));
    }
  }
  if (!sc.at("ik_model").is_null()) rc.ik_model_path = get<std::string>(sc, "ik_model", s);

  const json& smc = doc.at("smc");
  out.smc.gains = {get<double>(smc, "P1", "smc"), get<double>(smc, "P2", "smc"), get<double>(smc, "P3", "smc")};
  out.smc.layout = pick(get<std::string>(smc, "gain_layout", "smc"),
                        std::array{std::pair{"rate_first", GainLayout::kRateFirst},
                                   std::pair{"error_first", GainLayout::kErrorFirst}},
                        "smc.gain_layout");
  out.smc.switching = pick(get<std::string>(smc, "switching", "smc"),
                           std::array{std::pair{"tanh", SwitchingFunction::kTanh},
                                      std::pair{"sign", SwitchingFunction::kSign}},
                           "smc.switching");
  out.smc.solve = pick(get<std::string>(smc, "equivalent_solve", "smc"),
                       std::array{std::pair{"matrix", EquivalentSolve::kMatrix},
                                  std::pair{"per_channel", EquivalentSolve::kPerChannel}},
                       "smc.equivalent_solve");
  out.smc.coriolis = pick(get<std::string>(smc, "coriolis", "smc"),
                          std::array{std::pair{"printed", CoriolisModel::kPrinted},
                                     std::pair{"consistent", CoriolisModel::kConsistent}},
                          "smc.coriolis");
  const json& pid = doc.at("pid");
  out.pid = {get<double>(pid, "Kp", "pid"), get<double>(pid, "Ki", "pid"), get<double>(pid, "Kd", "pid")};
  // Both controllers' gains are checked, whichever one runs.
  wrap([&] {
    out.smc.gains.validate();
    out.pid.validate();
    out.validate();
    return 0;
  });

  const json& tr = doc.at("training");
  const std::string t = "training";
  rc.dataset.samples = get<int>(tr, "samples", t);
  rc.dataset.train_samples = get<int>(tr, "train_samples", t);
  rc.dataset.theta_max = get<double>(tr, "theta_max_deg", t) * kDeg;
  rc.dataset.outputs = get<int>(tr, "outputs", t);
  rc.dataset.seed = get<std::uint64_t>(tr, "dataset_seed", t);
  if (rc.dataset.samples < 1 || rc.dataset.train_samples < 1 || rc.dataset.train_samples > rc.dataset.samples) {
    throw ConfigError("training needs 1 <= train_samples <= samples");
  }
  if (!(rc.dataset.theta_max > 0.0)) throw ConfigError("'training.theta_max_deg' must be positive");
  if (rc.dataset.outputs != 1 && rc.dataset.outputs != rc.scenario.wrist.segments()) {
    throw ConfigError("'training.outputs' must be 1 or the number of segments");
  }
  rc.training.hidden = get<std::vector<int>>(tr, "hidden", t);
  rc.training.activation = wrap([&] { return activation_from_string(get<std::string>(tr, "activation", t)); });
  rc.training.batch_size = get<int>(tr, "batch_size", t);
  rc.training.epochs = get<int>(tr, "epochs", t);
  rc.training.learning_rate = get<double>(tr, "learning_rate", t);
  rc.training.final_learning_rate = get<double>(tr, "final_learning_rate", t);
  rc.training.beta1 = get<double>(tr, "beta1", t);
  rc.training.beta2 = get<double>(tr, "beta2", t);
  rc.training.epsilon = get<double>(tr, "epsilon", t);
  rc.training.weight_decay = get<double>(tr, "weight_decay", t);
  rc.training.seed = get<std::uint64_t>(tr, "seed", t);
  wrap([&] { rc.training.validate(rc.dataset.train_samples); return 0; });

  const json& tu = doc.at("tuning");
  const std::string u = "tuning";
  rc.pso.swarm_size = get<int>(tu, "swarm_size", u);
  rc.pso.iterations = get<int>(tu, "iterations", u);
  rc.pso.inertia = get<double>(tu, "inertia", u);
  rc.pso.cognitive = get<double>(tu, "cognitive", u);
  rc.pso.social = get<double>(tu, "social", u);
  auto triple = [&](const char* key) {
    const auto v = get<std::vector<double>>(tu, key, u);
    if (v.size() != 3) throw ConfigError("'tuning." + std::string(key) + "' must have three entries");
    return std::array<double, 3>{v[0], v[1], v[2]};
  };
  rc.pso.lower = triple("lower");
  rc.pso.upper = triple("upper");
  const auto init = triple("initial");
  rc.pso.initial = {init[0], init[1], init[2]};
  rc.pso.max_velocity_fraction = get<double>(tu, "max_velocity_fraction", u);
  rc.pso.weights = {get<double>(tu, "error_weight", u), get<double>(tu, "chattering_weight", u)};
  rc.pso.seed = get<std::uint64_t>(tu, "seed", u);
  rc.tuning_duration = get<double>(tu, "duration_s", u);
  rc.tuning_step = get<double>(tu, "step_s", u);
  wrap([&] {
    rc.pso.validate();
    tuning_scenario(rc).validate();
    return 0;
  });
  return rc;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("configuration file " + path + " is not valid JSON: " + e.what());
  }
}

RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (path) doc = read_config_file(*path);
  // Overrides go through the same merge, so they hit the same key checks.
  json merged = default_config_json();
  merge(merged, doc, "");
  for (const auto& o : overrides) apply_override(merged, o);
  return parse_config(merged);
}

void load_ik_model(RunConfig& config) {
  if (!config.ik_model_path) return;
  auto net = std::make_shared<MlpNetwork>(load_network(*config.ik_model_path));
  if (net->inputs() != 2) throw ConfigError("IK model " + *config.ik_model_path + " does not take (x, y)");
  config.scenario.ik = std::move(net);
}

Scenario tuning_scenario(const RunConfig& config) {
  Scenario s = config.scenario;
  s.controller = ControllerKind::kSmc;
  s.duration = config.tuning_duration;
  s.step = config.tuning_step;
  if (s.control_period > 0.0 && s.control_period < s.step) s.control_period = s.step;
  // Pulses beyond the tuning horizon simply never fire.
  return s;
}

void write_config_echo(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write configuration echo " + path);
  out << config.effective.dump(2) << '\n';
}

}  // namespace softwrist
