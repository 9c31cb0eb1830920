#include "vsds/simulator.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "vsds/energy_tank.hpp"

namespace vsds {

namespace {

Vec to_vec(const std::vector<double>& v) {
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

MotionField build_field(const DsConfig& ds) {
  PathFieldParams pp;
  pp.correction_gain = ds.correction_gain;
  pp.blend_radius = ds.blend_radius;
  pp.blend_gain = ds.blend_gain;

  if (ds.type == "preset") return MotionField::preset(ds.preset);
  if (ds.type == "linear") {
    return MotionField::linear(Vec(to_vec(ds.gain_diag)).asDiagonal());
  }
  if (ds.type == "min-jerk-line") return MotionField::min_jerk_line(to_vec(ds.x0), ds.avg_speed, pp);
  if (ds.type == "curve") return MotionField::curve_preset(ds.radius, ds.sweep, ds.speed, pp);
  if (ds.type == "polyline") {
    if (!ds.waypoints_csv.empty()) {
      return MotionField::polyline_from_csv(ds.waypoints_csv, ds.speed, pp);
    }
    std::vector<Vec> pts;
    pts.reserve(ds.waypoints.size());
    for (const auto& w : ds.waypoints) pts.push_back(to_vec(w));
    const std::vector<double> speeds = ds.speeds.empty() ? std::vector<double>{ds.speed} : ds.speeds;
    return MotionField::polyline(pts, speeds, pp);
  }
  throw ConfigError("ds.type: unknown field type " + ds.type);
}

StiffnessProfile build_stiffness(const StiffnessConfig& st) {
  if (st.type == "constant") return StiffnessProfile::constant(to_vec(st.diag));
  if (st.type == "sinusoidal") {
    return StiffnessProfile::sinusoidal(to_vec(st.offset), to_vec(st.amplitude), st.freq, st.phase);
  }
  if (st.type == "tabulated") {
    std::vector<Vec> rows;
    rows.reserve(st.table_k.size());
    for (const auto& r : st.table_k) rows.push_back(to_vec(r));
    return StiffnessProfile::tabulated(st.table_x, rows);
  }
  throw ConfigError("stiffness.type: unknown profile " + st.type);
}

PassifierParams build_passifier(const PassifierConfig& pc) {
  PassifierParams p;
  p.k_o = pc.k_o;
  p.zeta = pc.zeta;
  p.tau_min = pc.tau_min;
  p.kappa_rate = pc.kappa_rate;
  p.s0 = pc.s0;
  p.s_max = pc.s_max;
  p.eta = pc.eta;
  p.alpha_fill = pc.alpha_fill;
  p.validate();
  return p;
}

}  // namespace

std::pair<Vec, Vec> step_dynamics(const MassModel& mass, const Vec& x, const Vec& v,
                                  const Vec& force, const Vec& f_ext, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!force.allFinite() || !f_ext.allFinite()) {
    throw SimulationError("non-finite force in dynamics step");
  }
  const Vec v_next = v + dt * (force + f_ext).cwiseQuotient(mass.diag);
  const Vec x_next = x + dt * v_next;
  return {x_next, v_next};
}

Vec wall_force(const ContactWall& wall, const Vec& x, const Vec& v) {
  Vec f = Vec::Zero(x.size());
  const double pen = static_cast<double>(wall.side) * (wall.position - x(wall.axis));
  if (pen <= 0.0) return f;
  const double v_approach = -static_cast<double>(wall.side) * v(wall.axis);
  double magnitude = wall.stiffness * pen;
  if (v_approach > 0.0) magnitude += wall.damping * v_approach;
  f(wall.axis) = static_cast<double>(wall.side) * magnitude;
  return f;
}

Vec baseline_passive_control(const MotionField& field, const Vec& d_pi_eigs, const Vec& x,
                             const Vec& v) {
  const Vec f_g = field.eval(x);
  if (f_g.norm() <= 1e-9) {
    return -d_pi_eigs(0) * v;
  }
  const Mat q = build_rotation(f_g);
  const Mat d_pi = q * d_pi_eigs.asDiagonal() * q.transpose();
  return d_pi * (f_g - v);
}

void SimLog::to_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write log CSV: " + path);
  out << "t";
  for (int j = 1; j <= dim; ++j) out << ",x" << j;
  for (int j = 1; j <= dim; ++j) out << ",v" << j;
  for (int j = 1; j <= dim; ++j) out << ",xd" << j;
  for (int j = 1; j <= dim; ++j) out << ",fg" << j;
  for (int j = 1; j <= dim; ++j) out << ",F" << j;
  for (int j = 1; j <= dim; ++j) out << ",Fext" << j;
  out << ",s,z,kappa,W,wall_pen\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.t;
    auto emit = [&](const Vec& vec) {
      for (int j = 0; j < dim; ++j) out << "," << vec(j);
    };
    emit(r.x);
    emit(r.v);
    emit(r.x_d);
    emit(r.f_g);
    emit(r.force);
    emit(r.f_ext);
    out << "," << r.s << "," << r.z << "," << r.kappa << "," << r.storage << "," << r.wall_pen
        << "\n";
  }
}

bool SimLog::bit_identical(const SimLog& other) const {
  if (dt != other.dt || dim != other.dim || rows.size() != other.rows.size()) return false;
  auto same_vec = [](const Vec& a, const Vec& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
  };
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = other.rows[i];
    if (std::memcmp(&a.t, &b.t, sizeof(double)) != 0 || !same_vec(a.x, b.x) ||
        !same_vec(a.v, b.v) || !same_vec(a.x_d, b.x_d) || !same_vec(a.f_g, b.f_g) ||
        !same_vec(a.force, b.force) || !same_vec(a.f_ext, b.f_ext) || a.s != b.s || a.z != b.z ||
        a.kappa != b.kappa || a.storage != b.storage || a.wall_pen != b.wall_pen) {
      return false;
    }
  }
  return true;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  const auto t_begin = std::chrono::steady_clock::now();
  config.validate();

  ScenarioResult result;
  const MotionField field = build_field(config.ds);
  const int m = field.dim();
  const StiffnessProfile stiffness = build_stiffness(config.stiffness);
  PassifierParams passifier = build_passifier(config.passifier);
  passifier.decay_enabled = !config.debug_disable_tank_decay;

  const Vec ds_start = config.ds.x0.empty() ? field.default_start() : to_vec(config.ds.x0);
  const Vec x_start = config.sim.x_start.empty() ? ds_start : to_vec(config.sim.x_start);
  const Vec v_start = config.sim.v0.empty() ? Vec::Zero(m) : to_vec(config.sim.v0);
  if (ds_start.size() != m || x_start.size() != m || v_start.size() != m) {
    throw ConfigError("sim.x_start/v0: dimension mismatch with the motion field");
  }

  MassModel mass{to_vec(config.sim.mass)};
  mass.validate();
  if (mass.diag.size() != m) throw ConfigError("sim.mass: dimension mismatch");

  const bool flow_baseline = config.controller.type == "flow-baseline";
  const Vec flow_eigs = to_vec(config.controller.flow_d_eigs);
  if (flow_baseline && flow_eigs.size() != m) {
    throw ConfigError("controller.flow_d_eigs: dimension mismatch");
  }

  const Vec damping_eigs = to_vec(config.vsds.damping_eigs);
  if (damping_eigs.size() != m) throw ConfigError("vsds.damping_eigs: dimension mismatch");

  if (!flow_baseline) {
    result.model = build_vsds(field, stiffness, damping_eigs, ds_start, config.vsds.n_springs,
                              config.vsds.eps_scale, config.sim.dt);
  }

  result.ff = FeedForwardField::none();
  if (!flow_baseline && config.ff.method == "vf") {
    result.ff = FeedForwardField::velocity_feedback(field);
  } else if (!flow_baseline && config.ff.method == "qp") {
    const auto t_qp = std::chrono::steady_clock::now();
    const ReferenceDataset dataset = simulate_reference(field, stiffness, mass.diag, ds_start,
                                                        config.sim.dt, config.sim.t_final);
    const Vec lo = Vec::Constant(m, config.ff.gamma_min);
    const Vec hi = Vec::Constant(m, config.ff.gamma_max);
    const Vec f_min = Vec::Constant(m, config.ff.f_min);
    QpSolution sol;
    result.ff = solve_feedforward_qp(dataset, result.model, passifier, lo, hi, f_min, &sol);
    result.qp_solution = std::move(sol);
    result.qp_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_qp).count();
  }

  // Open-loop reference, logged per step and (as a polyline) used by the
  // path-deviation metrics. Held at the attractor once converged.
  const auto reference = integrate_open_loop(field, ds_start, config.sim.dt, config.sim.t_final);
  {
    std::vector<Vec> ref_pts;
    const size_t stride = std::max<size_t>(1, reference.size() / 2000);
    for (size_t i = 0; i < reference.size(); i += stride) ref_pts.push_back(reference[i].x);
    ref_pts.push_back(reference.back().x);
    ref_pts.push_back(Vec::Zero(m));
    result.reference_path = PathPolyline::from_points(std::move(ref_pts));
  }

  std::optional<ContactWall> wall;
  if (config.wall.present) {
    if (config.wall.axis >= m) throw ConfigError("wall.axis: out of range");
    ContactWall w;
    w.axis = config.wall.axis;
    w.position = config.wall.position;
    w.stiffness = config.wall.stiffness;
    w.damping = config.wall.damping;
    w.side = x_start(w.axis) >= w.position ? +1 : -1;
    wall = w;
  }

  struct ActivePerturbation {
    Perturbation spec;
    bool resolved = false;
    Vec direction;
  };
  std::vector<ActivePerturbation> pushes;
  for (const auto& pc : config.perturbations) {
    Perturbation pe;
    pe.t_start = pc.t_start;
    pe.t_end = pc.t_end;
    pe.perpendicular = pc.perpendicular;
    pe.magnitude = pc.magnitude;
    if (!pc.force.empty()) {
      pe.force = to_vec(pc.force);
      if (pe.force.size() != m) throw ConfigError("perturbations.force: dimension mismatch");
    } else {
      pe.force = Vec::Zero(m);
    }
    pushes.push_back({pe, false, Vec::Zero(m)});
  }

  const double dt = config.sim.dt;
  const long steps = std::lround(config.sim.t_final / dt);

  SimLog& log = result.log;
  log.dt = dt;
  log.dim = m;
  log.rows.reserve(steps + 1);

  Vec x = x_start;
  Vec v = v_start;
  TankState tank;
  tank.s = (config.passifier.enabled && !flow_baseline) ? passifier.s0 : 0.0;
  const Vec origin = Vec::Zero(m);

  for (long k = 0; k <= steps; ++k) {
    const double t = k * dt;

    SimRow row;
    row.t = t;
    row.x = x;
    row.v = v;
    row.x_d = k < static_cast<long>(reference.size()) ? reference[k].x : origin;
    row.f_g = field.eval(x);
    row.s = tank.s;
    row.kappa = activation(passifier, x);

    Vec force;
    double z = 0.0;
    if (flow_baseline) {
      force = baseline_passive_control(field, flow_eigs, x, v);
    } else if (config.passifier.enabled) {
      const ControlEval ctrl = passive_control(result.model, result.ff, passifier, tank, x, v);
      force = ctrl.force;
      z = ctrl.z;
    } else {
      // Raw law: unit smoothing gain, no activation, no potential, no tank.
      const Vec f_vso_ff =
          eval_vsds_org(result.model, x) + eval_feedforward(result.ff, result.model, x);
      z = v.dot(f_vso_ff);
      force = f_vso_ff - eval_damping(result.model, x) * v;
      row.kappa = 1.0;
    }
    row.z = z;

    Vec f_ext = Vec::Zero(m);
    for (auto& push : pushes) {
      if (t >= push.spec.t_start && t < push.spec.t_end) {
        if (push.spec.perpendicular) {
          if (!push.resolved) {
            Vec dir = v;
            if (dir.norm() <= 1e-9) dir = row.f_g;
            if (dir.norm() <= 1e-9) dir = Vec::Unit(m, 0);
            push.direction = build_rotation(dir).col(m > 1 ? 1 : 0);
            push.resolved = true;
          }
          f_ext += push.spec.magnitude * push.direction;
        } else {
          f_ext += push.spec.force;
        }
      }
    }
    if (wall) {
      f_ext += wall_force(*wall, x, v);
      const double pen = wall->side * (wall->position - x(wall->axis));
      row.wall_pen = std::max(0.0, pen);
    }
    row.f_ext = f_ext;
    row.force = force;
    row.storage = 0.5 * v.dot(mass.diag.cwiseProduct(v)) + potential_value(passifier, x) + tank.s;
    log.rows.push_back(std::move(row));
    if (k == steps) break;

    if (config.passifier.enabled && !flow_baseline) {
      const Mat damping = eval_damping(result.model, x);
      PassifierParams tank_params = passifier;
      tank_params.decay_enabled = passifier.decay_enabled;
      tank = tank_step(tank_params, tank, x, v, damping, z, dt);
    }

    try {
      std::tie(x, v) = step_dynamics(mass, x, v, force, f_ext, dt);
    } catch (const SimulationError& e) {
      throw SimulationError(std::string(e.what()) + " (step " + std::to_string(k) + ")");
    }
    if (!x.allFinite() || !v.allFinite()) {
      throw SimulationError("simulation state became non-finite at step " + std::to_string(k));
    }
  }
  log.tank_clamp_events = tank.clamp_events;

  result.scenario_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return result;
}

MetricReport metrics(const SimLog& log, const PathPolyline& reference_path) {
  MetricReport rep;
  if (log.rows.empty()) return rep;

  double sq_sum = 0.0;
  double max_dev = 0.0;
  for (const auto& row : log.rows) {
    sq_sum += (row.f_g - row.v).squaredNorm();
    if (!reference_path.pts.empty()) {
      max_dev = std::max(max_dev, reference_path.project(row.x).distance);
    }
    rep.max_f_ext = std::max(rep.max_f_ext, row.f_ext.norm());
  }
  rep.rms_velocity_error = std::sqrt(sq_sum / static_cast<double>(log.rows.size()));
  rep.max_path_deviation = max_dev;

  // First time after which the state stays inside the 1e-3 ball.
  rep.convergence_time = -1.0;
  for (auto it = log.rows.rbegin(); it != log.rows.rend(); ++it) {
    if (it->x.norm() >= 1e-3) break;
    rep.convergence_time = it->t;
  }

  const double t_last = log.rows.back().t;
  double steady_sum = 0.0;
  long steady_count = 0;
  for (const auto& row : log.rows) {
    if (row.t >= t_last - 2.0) {
      steady_sum += row.f_ext.norm();
      ++steady_count;
    }
  }
  rep.steady_f_ext = steady_count > 0 ? steady_sum / steady_count : 0.0;
  rep.tank_final = log.rows.back().s;
  rep.final_distance = log.rows.back().x.norm();

  double violation = 0.0;
  for (size_t k = 0; k + 1 < log.rows.size(); ++k) {
    const auto& a = log.rows[k];
    const auto& b = log.rows[k + 1];
    const double external_work = a.f_ext.dot(b.x - a.x);
    violation = std::max(violation, (b.storage - a.storage) - external_work);
  }
  rep.max_passivity_violation = violation;
  return rep;
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["rms_velocity_error"] = rms_velocity_error;
  j["max_path_deviation"] = max_path_deviation;
  j["convergence_time"] = convergence_time;
  j["max_f_ext"] = max_f_ext;
  j["steady_f_ext"] = steady_f_ext;
  j["tank_final"] = tank_final;
  j["max_passivity_violation"] = max_passivity_violation;
  j["final_distance"] = final_distance;
  return j.dump(2);
}

}  // namespace vsds
