#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsds/types.hpp"

namespace vsds {

/// Plain-data mirror of the scenario file. Parsing validates ranges and
/// rejects unknown keys with their field path; run_scenario() turns this
/// into the domain objects.
struct DsConfig {
  std::string type = "preset";  // preset | linear | min-jerk-line | curve | polyline
  std::string preset = "line";
  std::vector<double> x0;  // start (defaults to the preset's natural start)
  // linear
  std::vector<double> gain_diag = {1.0, 1.0};
  // min-jerk-line
  double avg_speed = 0.12;
  // curve
  double radius = 0.28;
  double sweep = 1.9;
  double speed = 0.15;
  // polyline
  std::vector<std::vector<double>> waypoints;
  std::vector<double> speeds;
  std::string waypoints_csv;
  // shared path-field tuning
  double correction_gain = 8.0;
  double blend_radius = 0.05;
  double blend_gain = 4.0;

  bool operator==(const DsConfig&) const = default;
};

struct StiffnessConfig {
  std::string type = "constant";  // constant | sinusoidal | tabulated
  std::vector<double> diag = {1200.0, 1500.0};
  std::vector<double> offset = {950.0, 1200.0};
  std::vector<double> amplitude = {150.0, 200.0};
  double freq = 15.0;
  double phase = 0.8;
  std::vector<double> table_x;
  std::vector<std::vector<double>> table_k;

  bool operator==(const StiffnessConfig&) const = default;
};

struct VsdsConfig {
  int n_springs = 20;
  double eps_scale = 0.8;
  std::vector<double> damping_eigs = {250.0, 250.0};

  bool operator==(const VsdsConfig&) const = default;
};

struct PassifierConfig {
  double k_o = 0.4;
  double zeta = 0.006;
  double tau_min = 1.0;
  double kappa_rate = 10.0;
  double s0 = 30.0;
  double s_max = 60.0;
  double eta = 1.05;
  double alpha_fill = 0.5;
  bool enabled = true;  // false runs the raw law (no kappa, no potential, no tank)

  bool operator==(const PassifierConfig&) const = default;
};

struct FfConfig {
  std::string method = "org";  // org | vf | qp
  double gamma_min = -40.0;
  double gamma_max = 40.0;
  double f_min = 10.0;

  bool operator==(const FfConfig&) const = default;
};

struct ControllerConfig {
  std::string type = "vsds";  // vsds | flow-baseline
  std::vector<double> flow_d_eigs = {250.0, 250.0};

  bool operator==(const ControllerConfig&) const = default;
};

struct SimSectionConfig {
  double dt = 1e-3;
  double t_final = 20.0;
  std::vector<double> mass = {1.0, 1.0};
  std::vector<double> x_start;  // defaults to ds start
  std::vector<double> v0;       // defaults to zero

  bool operator==(const SimSectionConfig&) const = default;
};

struct PerturbationConfig {
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<double> force;  // constant force, or
  bool perpendicular = false;  // magnitude applied perpendicular to the motion
  double magnitude = 0.0;

  bool operator==(const PerturbationConfig&) const = default;
};

struct WallConfig {
  bool present = false;
  int axis = 0;
  double position = 0.15;
  double stiffness = 5000.0;
  double damping = 50.0;

  bool operator==(const WallConfig&) const = default;
};

struct OutputConfig {
  std::string csv_path;
  std::string model_json_path;
  std::string metrics_json_path;

  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  DsConfig ds;
  StiffnessConfig stiffness;
  VsdsConfig vsds;
  PassifierConfig passifier;
  FfConfig ff;
  ControllerConfig controller;
  SimSectionConfig sim;
  std::vector<PerturbationConfig> perturbations;
  WallConfig wall;
  OutputConfig output;
  /// Debug-only mutation switch (not a config-file key): drops the tank
  /// decay term so the stability checks can prove they would catch it.
  bool debug_disable_tank_decay = false;

  bool operator==(const ScenarioConfig&) const = default;

  void validate() const;  // range checks; throws ConfigError naming the field
};

ScenarioConfig parse_scenario_config_text(const std::string& yaml_text);
ScenarioConfig load_scenario_config(const std::string& path);
std::string serialize_scenario_config(const ScenarioConfig& config);

}  // namespace vsds
