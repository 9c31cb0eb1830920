#include "vsds/scenario_config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace vsds {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void check_keys(const YAML::Node& node, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail(path, "expected a key/value map");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (allowed.count(key) == 0) fail(path + "." + key, "unknown key");
  }
}

template <typename T>
void read(const YAML::Node& node, const std::string& path, const char* key, T* out) {
  if (!node[key]) return;
  try {
    *out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    fail(path + "." + key, "bad value");
  }
}

void parse_ds(const YAML::Node& node, DsConfig* ds) {
  check_keys(node, "ds",
             {"type", "preset", "x0", "gain_diag", "avg_speed", "radius", "sweep", "speed",
              "waypoints", "speeds", "waypoints_csv", "correction_gain", "blend_radius",
              "blend_gain"});
  read(node, "ds", "type", &ds->type);
  read(node, "ds", "preset", &ds->preset);
  read(node, "ds", "x0", &ds->x0);
  read(node, "ds", "gain_diag", &ds->gain_diag);
  read(node, "ds", "avg_speed", &ds->avg_speed);
  read(node, "ds", "radius", &ds->radius);
  read(node, "ds", "sweep", &ds->sweep);
  read(node, "ds", "speed", &ds->speed);
  read(node, "ds", "waypoints", &ds->waypoints);
  read(node, "ds", "speeds", &ds->speeds);
  read(node, "ds", "waypoints_csv", &ds->waypoints_csv);
  read(node, "ds", "correction_gain", &ds->correction_gain);
  read(node, "ds", "blend_radius", &ds->blend_radius);
  read(node, "ds", "blend_gain", &ds->blend_gain);
}

void parse_stiffness(const YAML::Node& node, StiffnessConfig* st) {
  check_keys(node, "stiffness",
             {"type", "diag", "offset", "amplitude", "freq", "phase", "table_x", "table_k"});
  read(node, "stiffness", "type", &st->type);
  read(node, "stiffness", "diag", &st->diag);
  read(node, "stiffness", "offset", &st->offset);
  read(node, "stiffness", "amplitude", &st->amplitude);
  read(node, "stiffness", "freq", &st->freq);
  read(node, "stiffness", "phase", &st->phase);
  read(node, "stiffness", "table_x", &st->table_x);
  read(node, "stiffness", "table_k", &st->table_k);
}

}  // namespace

void ScenarioConfig::validate() const {
  auto expect = [](bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field + ": " + what);
  };

  const std::set<std::string> ds_types = {"preset", "linear", "min-jerk-line", "curve", "polyline"};
  expect(ds_types.count(ds.type) == 1, "ds.type",
         "must be one of preset|linear|min-jerk-line|curve|polyline");
  if (ds.type == "preset") {
    const std::set<std::string> names = {"line", "curve", "angle", "wshape"};
    expect(names.count(ds.preset) == 1, "ds.preset", "unknown preset name");
  }
  if (ds.type == "linear") {
    expect(!ds.x0.empty(), "ds.x0", "required for a linear field");
    expect(ds.gain_diag.size() == ds.x0.size(), "ds.gain_diag", "size must match x0");
  }
  if (ds.type == "min-jerk-line") expect(!ds.x0.empty(), "ds.x0", "required for min-jerk-line");
  if (ds.type == "polyline") {
    expect(!ds.waypoints.empty() || !ds.waypoints_csv.empty(), "ds.waypoints",
           "polyline needs waypoints or waypoints_csv");
  }
  expect(ds.avg_speed > 0 && ds.speed > 0, "ds", "speeds must be positive");
  expect(ds.blend_radius > 0 && ds.blend_gain > 0 && ds.correction_gain >= 0, "ds",
         "path-field gains must be positive");

  const std::set<std::string> st_types = {"constant", "sinusoidal", "tabulated"};
  expect(st_types.count(stiffness.type) == 1, "stiffness.type",
         "must be one of constant|sinusoidal|tabulated");

  expect(vsds.n_springs >= 2, "vsds.n_springs", "needs at least 2 springs");
  expect(vsds.eps_scale > 0, "vsds.eps_scale", "must be positive");
  expect(!vsds.damping_eigs.empty(), "vsds.damping_eigs", "required");
  for (double d : vsds.damping_eigs) expect(d > 0, "vsds.damping_eigs", "must be positive");

  expect(passifier.k_o > 0, "passifier.k_o", "must be positive");
  expect(passifier.zeta > 0, "passifier.zeta", "must be positive");
  expect(passifier.tau_min > 0, "passifier.tau_min", "must be positive");
  expect(passifier.kappa_rate > 0, "passifier.kappa_rate", "must be positive");
  expect(passifier.s0 >= 0, "passifier.s0", "must be nonnegative");
  expect(passifier.s_max > 0, "passifier.s_max", "must be positive");
  expect(passifier.s0 <= passifier.s_max, "passifier.s0", "exceeds s_max");
  expect(passifier.eta > 1, "passifier.eta", "must exceed 1");
  expect(passifier.alpha_fill >= 0 && passifier.alpha_fill < 1, "passifier.alpha_fill",
         "must lie in [0,1)");

  const std::set<std::string> ff_methods = {"org", "vf", "qp"};
  expect(ff_methods.count(ff.method) == 1, "ff.method", "must be one of org|vf|qp");
  expect(ff.gamma_min < ff.gamma_max, "ff.gamma_min", "must be below gamma_max");
  expect(ff.f_min > 0, "ff.f_min", "must be positive");

  const std::set<std::string> ctrl_types = {"vsds", "flow-baseline"};
  expect(ctrl_types.count(controller.type) == 1, "controller.type",
         "must be one of vsds|flow-baseline");
  for (double d : controller.flow_d_eigs) expect(d > 0, "controller.flow_d_eigs", "must be positive");

  expect(sim.dt > 0, "sim.dt", "must be positive");
  expect(sim.t_final >= sim.dt, "sim.t_final", "must be at least dt");
  expect(!sim.mass.empty(), "sim.mass", "required");
  for (double mval : sim.mass) expect(mval > 0, "sim.mass", "must be positive");

  double prev_end = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < perturbations.size(); ++i) {
    const auto& pe = perturbations[i];
    const std::string field = "perturbations[" + std::to_string(i) + "]";
    expect(pe.t_start < pe.t_end, field, "t_start must be before t_end");
    expect(pe.t_start >= prev_end, field, "intervals must not overlap");
    prev_end = pe.t_end;
    if (pe.perpendicular) {
      expect(pe.magnitude > 0, field + ".magnitude", "required in perpendicular mode");
    } else {
      expect(!pe.force.empty(), field + ".force", "required unless perpendicular");
    }
  }

  if (wall.present) {
    expect(wall.stiffness > 0, "wall.stiffness", "must be positive");
    expect(wall.damping >= 0, "wall.damping", "must be nonnegative");
    expect(wall.axis >= 0, "wall.axis", "must be a valid axis index");
  }
}

ScenarioConfig parse_scenario_config_text(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("yaml parse error: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config root must be a key/value map");
  check_keys(root, "config", {"ds", "stiffness", "vsds", "passifier", "ff", "controller", "sim",
                              "perturbations", "wall", "output"});
  if (!root["ds"]) throw ConfigError("missing required section: ds");

  ScenarioConfig cfg;
  parse_ds(root["ds"], &cfg.ds);
  if (root["stiffness"]) parse_stiffness(root["stiffness"], &cfg.stiffness);

  if (root["vsds"]) {
    const auto n = root["vsds"];
    check_keys(n, "vsds", {"n_springs", "eps_scale", "damping_eigs"});
    read(n, "vsds", "n_springs", &cfg.vsds.n_springs);
    read(n, "vsds", "eps_scale", &cfg.vsds.eps_scale);
    read(n, "vsds", "damping_eigs", &cfg.vsds.damping_eigs);
  }
  if (root["passifier"]) {
    const auto n = root["passifier"];
    check_keys(n, "passifier",
               {"k_o", "zeta", "tau_min", "kappa_rate", "s0", "s_max", "eta", "alpha_fill",
                "enabled"});
    read(n, "passifier", "k_o", &cfg.passifier.k_o);
    read(n, "passifier", "zeta", &cfg.passifier.zeta);
    read(n, "passifier", "tau_min", &cfg.passifier.tau_min);
    read(n, "passifier", "kappa_rate", &cfg.passifier.kappa_rate);
    read(n, "passifier", "s0", &cfg.passifier.s0);
    read(n, "passifier", "s_max", &cfg.passifier.s_max);
    read(n, "passifier", "eta", &cfg.passifier.eta);
    read(n, "passifier", "alpha_fill", &cfg.passifier.alpha_fill);
    read(n, "passifier", "enabled", &cfg.passifier.enabled);
  }
  if (root["ff"]) {
    const auto n = root["ff"];
    check_keys(n, "ff", {"method", "gamma_min", "gamma_max", "f_min"});
    read(n, "ff", "method", &cfg.ff.method);
    read(n, "ff", "gamma_min", &cfg.ff.gamma_min);
    read(n, "ff", "gamma_max", &cfg.ff.gamma_max);
    read(n, "ff", "f_min", &cfg.ff.f_min);
  }
  if (root["controller"]) {
    const auto n = root["controller"];
    check_keys(n, "controller", {"type", "flow_d_eigs"});
    read(n, "controller", "type", &cfg.controller.type);
    read(n, "controller", "flow_d_eigs", &cfg.controller.flow_d_eigs);
  }
  if (root["sim"]) {
    const auto n = root["sim"];
    check_keys(n, "sim", {"dt", "t_final", "mass", "x_start", "v0"});
    read(n, "sim", "dt", &cfg.sim.dt);
    read(n, "sim", "t_final", &cfg.sim.t_final);
    read(n, "sim", "mass", &cfg.sim.mass);
    read(n, "sim", "x_start", &cfg.sim.x_start);
    read(n, "sim", "v0", &cfg.sim.v0);
  }
  if (root["perturbations"]) {
    const auto list = root["perturbations"];
    if (!list.IsSequence()) throw ConfigError("perturbations: expected a list");
    int i = 0;
    for (const auto& item : list) {
      const std::string path = "perturbations[" + std::to_string(i++) + "]";
      check_keys(item, path, {"t_start", "t_end", "force", "perpendicular", "magnitude"});
      PerturbationConfig pe;
      read(item, path, "t_start", &pe.t_start);
      read(item, path, "t_end", &pe.t_end);
      read(item, path, "force", &pe.force);
      read(item, path, "perpendicular", &pe.perpendicular);
      read(item, path, "magnitude", &pe.magnitude);
      cfg.perturbations.push_back(std::move(pe));
    }
  }
  if (root["wall"]) {
    const auto n = root["wall"];
    check_keys(n, "wall", {"axis", "position", "stiffness", "damping"});
    cfg.wall.present = true;
    read(n, "wall", "axis", &cfg.wall.axis);
    read(n, "wall", "position", &cfg.wall.position);
    read(n, "wall", "stiffness", &cfg.wall.stiffness);
    read(n, "wall", "damping", &cfg.wall.damping);
  }
  if (root["output"]) {
    const auto n = root["output"];
    check_keys(n, "output", {"csv_path", "model_json_path", "metrics_json_path"});
    read(n, "output", "csv_path", &cfg.output.csv_path);
    read(n, "output", "model_json_path", &cfg.output.model_json_path);
    read(n, "output", "metrics_json_path", &cfg.output.metrics_json_path);
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_config_text(ss.str());
}

std::string serialize_scenario_config(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "ds" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << cfg.ds.type;
  out << YAML::Key << "preset" << YAML::Value << cfg.ds.preset;
  out << YAML::Key << "x0" << YAML::Value << YAML::Flow << cfg.ds.x0;
  out << YAML::Key << "gain_diag" << YAML::Value << YAML::Flow << cfg.ds.gain_diag;
  out << YAML::Key << "avg_speed" << YAML::Value << cfg.ds.avg_speed;
  out << YAML::Key << "radius" << YAML::Value << cfg.ds.radius;
  out << YAML::Key << "sweep" << YAML::Value << cfg.ds.sweep;
  out << YAML::Key << "speed" << YAML::Value << cfg.ds.speed;
  out << YAML::Key << "waypoints" << YAML::Value << YAML::Flow << cfg.ds.waypoints;
  out << YAML::Key << "speeds" << YAML::Value << YAML::Flow << cfg.ds.speeds;
  out << YAML::Key << "waypoints_csv" << YAML::Value << cfg.ds.waypoints_csv;
  out << YAML::Key << "correction_gain" << YAML::Value << cfg.ds.correction_gain;
  out << YAML::Key << "blend_radius" << YAML::Value << cfg.ds.blend_radius;
  out << YAML::Key << "blend_gain" << YAML::Value << cfg.ds.blend_gain;
  out << YAML::EndMap;

  out << YAML::Key << "stiffness" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << cfg.stiffness.type;
  out << YAML::Key << "diag" << YAML::Value << YAML::Flow << cfg.stiffness.diag;
  out << YAML::Key << "offset" << YAML::Value << YAML::Flow << cfg.stiffness.offset;
  out << YAML::Key << "amplitude" << YAML::Value << YAML::Flow << cfg.stiffness.amplitude;
  out << YAML::Key << "freq" << YAML::Value << cfg.stiffness.freq;
  out << YAML::Key << "phase" << YAML::Value << cfg.stiffness.phase;
  out << YAML::Key << "table_x" << YAML::Value << YAML::Flow << cfg.stiffness.table_x;
  out << YAML::Key << "table_k" << YAML::Value << YAML::Flow << cfg.stiffness.table_k;
  out << YAML::EndMap;

  out << YAML::Key << "vsds" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_springs" << YAML::Value << cfg.vsds.n_springs;
  out << YAML::Key << "eps_scale" << YAML::Value << cfg.vsds.eps_scale;
  out << YAML::Key << "damping_eigs" << YAML::Value << YAML::Flow << cfg.vsds.damping_eigs;
  out << YAML::EndMap;

  out << YAML::Key << "passifier" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "k_o" << YAML::Value << cfg.passifier.k_o;
  out << YAML::Key << "zeta" << YAML::Value << cfg.passifier.zeta;
  out << YAML::Key << "tau_min" << YAML::Value << cfg.passifier.tau_min;
  out << YAML::Key << "kappa_rate" << YAML::Value << cfg.passifier.kappa_rate;
  out << YAML::Key << "s0" << YAML::Value << cfg.passifier.s0;
  out << YAML::Key << "s_max" << YAML::Value << cfg.passifier.s_max;
  out << YAML::Key << "eta" << YAML::Value << cfg.passifier.eta;
  out << YAML::Key << "alpha_fill" << YAML::Value << cfg.passifier.alpha_fill;
  out << YAML::Key << "enabled" << YAML::Value << cfg.passifier.enabled;
  out << YAML::EndMap;

  out << YAML::Key << "ff" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << cfg.ff.method;
  out << YAML::Key << "gamma_min" << YAML::Value << cfg.ff.gamma_min;
  out << YAML::Key << "gamma_max" << YAML::Value << cfg.ff.gamma_max;
  out << YAML::Key << "f_min" << YAML::Value << cfg.ff.f_min;
  out << YAML::EndMap;

  out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << cfg.controller.type;
  out << YAML::Key << "flow_d_eigs" << YAML::Value << YAML::Flow << cfg.controller.flow_d_eigs;
  out << YAML::EndMap;

  out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << cfg.sim.dt;
  out << YAML::Key << "t_final" << YAML::Value << cfg.sim.t_final;
  out << YAML::Key << "mass" << YAML::Value << YAML::Flow << cfg.sim.mass;
  out << YAML::Key << "x_start" << YAML::Value << YAML::Flow << cfg.sim.x_start;
  out << YAML::Key << "v0" << YAML::Value << YAML::Flow << cfg.sim.v0;
  out << YAML::EndMap;

  out << YAML::Key << "perturbations" << YAML::Value << YAML::BeginSeq;
  for (const auto& pe : cfg.perturbations) {
    out << YAML::BeginMap;
    out << YAML::Key << "t_start" << YAML::Value << pe.t_start;
    out << YAML::Key << "t_end" << YAML::Value << pe.t_end;
    out << YAML::Key << "force" << YAML::Value << YAML::Flow << pe.force;
    out << YAML::Key << "perpendicular" << YAML::Value << pe.perpendicular;
    out << YAML::Key << "magnitude" << YAML::Value << pe.magnitude;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  if (cfg.wall.present) {
    out << YAML::Key << "wall" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "axis" << YAML::Value << cfg.wall.axis;
    out << YAML::Key << "position" << YAML::Value << cfg.wall.position;
    out << YAML::Key << "stiffness" << YAML::Value << cfg.wall.stiffness;
    out << YAML::Key << "damping" << YAML::Value << cfg.wall.damping;
    out << YAML::EndMap;
  }

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "csv_path" << YAML::Value << cfg.output.csv_path;
  out << YAML::Key << "model_json_path" << YAML::Value << cfg.output.model_json_path;
  out << YAML::Key << "metrics_json_path" << YAML::Value << cfg.output.metrics_json_path;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace vsds
