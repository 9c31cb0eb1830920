#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsds/feedforward.hpp"
#include "vsds/scenario_config.hpp"
#include "vsds/types.hpp"

namespace vsds {

/// Constant diagonal inertia; the configuration-dependent terms of the full
/// rigid-body model vanish for it.
struct MassModel {
  Vec diag;

  Mat matrix() const { return diag.asDiagonal(); }
  void validate() const {
    if (diag.size() < 1 || diag.minCoeff() <= 0.0) {
      throw std::invalid_argument("mass diagonal must be strictly positive");
    }
  }
};

/// Scripted external push, optionally perpendicular to the motion at the
/// instant it activates (then held constant over the interval).
struct Perturbation {
  double t_start = 0.0;
  double t_end = 0.0;
  Vec force;
  bool perpendicular = false;
  double magnitude = 0.0;
};

/// Penalty wall across one axis. `side` is the half-space the mass lives in
/// (+1: above `position`); the contact force never points into the wall.
struct ContactWall {
  int axis = 0;
  double position = 0.0;
  double stiffness = 5000.0;
  double damping = 50.0;
  int side = +1;
};

struct SimRow {
  double t = 0.0;
  Vec x, v, x_d, f_g, force, f_ext;
  double s = 0.0;       // tank energy
  double z = 0.0;       // gated power term
  double kappa = 0.0;
  double storage = 0.0;  // W = kinetic + potential + tank
  double wall_pen = 0.0;
};

struct SimLog {
  double dt = 0.0;
  int dim = 2;
  std::vector<SimRow> rows;
  long tank_clamp_events = 0;

  void to_csv(const std::string& path) const;
  bool bit_identical(const SimLog& other) const;
};

struct MetricReport {
  double rms_velocity_error = 0.0;
  double max_path_deviation = 0.0;
  double convergence_time = -1.0;  // first time |x| stays below 1e-3 (-1: never)
  double max_f_ext = 0.0;
  double steady_f_ext = 0.0;  // mean |F_ext| over the last 2 s
  double tank_final = 0.0;
  double max_passivity_violation = 0.0;  // max_k [dW - F_ext . dx]
  double final_distance = 0.0;

  std::string to_json() const;
};

/// Semi-implicit Euler step of M vdot = F + F_ext.
std::pair<Vec, Vec> step_dynamics(const MassModel& mass, const Vec& x, const Vec& v, const Vec& force,
                                  const Vec& f_ext, double dt);

Vec wall_force(const ContactWall& wall, const Vec& x, const Vec& v);

/// Flow-tracking baseline F = D_PI(x) (f_g(x) - v) with the first eigenvector
/// of D_PI aligned to the motion direction. Falls back to an isotropic damper
/// (first eigenvalue) where f_g vanishes.
Vec baseline_passive_control(const MotionField& field, const Vec& d_pi_eigs, const Vec& x,
                             const Vec& v);

/// Everything run_scenario produced: the log plus the compiled controller
/// pieces, for inspection and file export.
struct ScenarioResult {
  SimLog log;
  VsdsModel model;
  FeedForwardField ff;
  PathPolyline reference_path;
  std::optional<QpSolution> qp_solution;
  double qp_seconds = 0.0;       // wall-clock assemble + solve time
  double scenario_seconds = 0.0; // wall-clock of the whole run
};

ScenarioResult run_scenario(const ScenarioConfig& config);

MetricReport metrics(const SimLog& log, const PathPolyline& reference_path);

}  // namespace vsds
