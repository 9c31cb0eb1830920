#include "vsds/feedforward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vsds {

void ReferenceDataset::validate() const {
  if (times.size() != positions.size() || times.size() != spring_forces.size()) {
    throw std::invalid_argument("reference dataset column lengths differ");
  }
  for (size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw std::invalid_argument("reference dataset times must be strictly increasing");
    }
    if (!std::isfinite(times[i]) || !positions[i].allFinite() || !spring_forces[i].allFinite()) {
      throw std::invalid_argument("reference dataset contains non-finite values");
    }
  }
}

void dataset_to_csv(const ReferenceDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset CSV: " + path);
  const int m = ds.size() > 0 ? static_cast<int>(ds.positions.front().size()) : 2;
  out << "t";
  for (int j = 1; j <= m; ++j) out << ",x" << j;
  for (int j = 1; j <= m; ++j) out << ",Fs" << j;
  out << "\n";
  out.precision(17);
  for (int i = 0; i < ds.size(); ++i) {
    out << ds.times[i];
    for (int j = 0; j < m; ++j) out << "," << ds.positions[i](j);
    for (int j = 0; j < m; ++j) out << "," << ds.spring_forces[i](j);
    out << "\n";
  }
}

ReferenceDataset dataset_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": missing header row");
  const size_t cols = 1 + std::count(line.begin(), line.end(), ',');
  if (cols < 3 || cols % 2 == 0) throw ConfigError(path + ": expected columns t,x1..xm,Fs1..Fsm");
  const int m = static_cast<int>((cols - 1) / 2);
  ReferenceDataset ds;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad numeric value");
      }
    }
    if (vals.size() != cols) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": wrong column count");
    }
    ds.times.push_back(vals[0]);
    Vec x(m), f(m);
    for (int j = 0; j < m; ++j) x(j) = vals[1 + j];
    for (int j = 0; j < m; ++j) f(j) = vals[1 + m + j];
    ds.positions.push_back(std::move(x));
    ds.spring_forces.push_back(std::move(f));
  }
  ds.validate();
  return ds;
}

FeedForwardField FeedForwardField::velocity_feedback(MotionField f) {
  FeedForwardField ff;
  ff.method = FfMethod::VelocityFeedback;
  ff.field = std::move(f);
  return ff;
}

Vec ff_velocity_feedback(const VsdsModel& model, const MotionField& field, const Vec& x) {
  return eval_damping(model, x) * field.eval(x);
}

Vec eval_ff_qp(const FeedForwardField& ff, const VsdsModel& model, const Vec& x) {
  if (ff.method != FfMethod::Qp || !ff.solved) {
    throw std::logic_error("feed-forward field is not a solved qp field");
  }
  if (static_cast<int>(ff.gammas.size()) != model.size()) {
    throw std::invalid_argument("gamma count does not match the spring count");
  }
  const WeightEval we = weights(model, x);
  Vec f = Vec::Zero(model.dim);
  for (int i = 0; i < model.size(); ++i) f += we.w(i) * ff.gammas[i];
  return f;
}

Vec eval_feedforward(const FeedForwardField& ff, const VsdsModel& model, const Vec& x) {
  switch (ff.method) {
    case FfMethod::None:
      return Vec::Zero(model.dim);
    case FfMethod::VelocityFeedback:
      return ff_velocity_feedback(model, *ff.field, x);
    case FfMethod::Qp:
      return eval_ff_qp(ff, model, x);
  }
  throw std::logic_error("unreachable feed-forward kind");
}

ReferenceDataset simulate_reference(const MotionField& field, const StiffnessProfile& stiffness,
                                    const Vec& mass_diag, const Vec& x0, double dt, double t_final,
                                    int max_rows) {
  const int m = field.dim();
  if (mass_diag.size() != m || mass_diag.minCoeff() <= 0.0) {
    throw std::invalid_argument("mass must be positive definite diagonal");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (max_rows < 2) throw std::invalid_argument("max_rows must be at least 2");

  const auto reference = integrate_open_loop(field, x0, dt, t_final);
  const bool truncated = reference.back().x.norm() >= 1e-4 * 0.999;

  const long steps = std::lround(t_final / dt);
  std::vector<double> times;
  std::vector<Vec> positions, forces;
  times.reserve(steps + 1);

  Vec x = x0;
  Vec v = Vec::Zero(m);
  const Vec origin = Vec::Zero(m);
  for (long k = 0; k <= steps; ++k) {
    const Vec& xd = k < static_cast<long>(reference.size()) ? reference[k].x : origin;
    const Vec k_diag = stiffness.diagonal(x);
    const Vec f_spring = k_diag.cwiseProduct(xd - x);

    times.push_back(k * dt);
    positions.push_back(x);
    forces.push_back(f_spring);
    if (k == steps) break;

    // Per-axis critical damping of the diagonal mass/stiffness pair.
    const Vec d_diag = 2.0 * mass_diag.cwiseSqrt().cwiseProduct(k_diag.cwiseSqrt());
    const Vec accel = (f_spring - d_diag.cwiseProduct(v)).cwiseQuotient(mass_diag);
    v += dt * accel;
    x += dt * v;
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 2.0) {
      throw SimulationError("reference simulation diverged at step " + std::to_string(k + 1));
    }
  }

  const long total = static_cast<long>(times.size());
  const long stride = (total + max_rows - 1) / max_rows;
  ReferenceDataset ds;
  ds.truncated = truncated;
  for (long k = 0; k < total; k += stride) {
    ds.times.push_back(times[k]);
    ds.positions.push_back(std::move(positions[k]));
    ds.spring_forces.push_back(std::move(forces[k]));
  }
  return ds;
}

QpAssembly assemble_qp(const ReferenceDataset& dataset, const VsdsModel& model,
                       const PassifierParams& passifier, const Vec& gamma_lower,
                       const Vec& gamma_upper, const Vec& f_min) {
  dataset.validate();
  if (dataset.size() == 0) throw std::invalid_argument("empty reference dataset");
  const int n_springs = model.size();
  const int m = model.dim;
  if (gamma_lower.size() != m || gamma_upper.size() != m || f_min.size() != m) {
    throw std::invalid_argument("bound dimension mismatch");
  }
  if ((gamma_upper - gamma_lower).minCoeff() < 0.0) {
    throw std::invalid_argument("gamma bounds are inverted");
  }
  if (f_min.minCoeff() <= 0.0) throw std::invalid_argument("f_min must be componentwise positive");

  const int t_count = dataset.size();
  Mat w(t_count, n_springs);
  Mat f_shift(t_count, m);  // F_{sh,t} = F_{s,t} - f_s(x_t)
  for (int t = 0; t < t_count; ++t) {
    const Vec& x = dataset.positions[t];
    const double kappa = activation(passifier, x);
    w.row(t) = kappa * weights(model, x).w.transpose();
    const Vec f_s = eval_vsds_org(model, x) + potential_force(passifier, x);
    f_shift.row(t) = (dataset.spring_forces[t] - f_s).transpose();
  }
  if (w.cwiseAbs().maxCoeff() < 1e-12) {
    throw std::invalid_argument("degenerate feed-forward fit: zero activation at every sample");
  }

  const Vec& x0 = dataset.positions.front();
  const Vec f_s0 = eval_vsds_org(model, x0) + potential_force(passifier, x0);
  const double kappa0 = activation(passifier, x0);
  Vec sigma(m);
  for (int j = 0; j < m; ++j) sigma(j) = f_s0(j) >= 0.0 ? 1.0 : -1.0;

  const int n = m * n_springs;
  QpAssembly out;
  out.sigma = sigma;
  out.f_s0 = f_s0;
  out.kappa0 = kappa0;
  QpProblem& qp = out.problem;
  qp.H = Mat::Zero(n, n);
  qp.c = Vec::Zero(n);
  qp.A = Mat::Zero(m, n);
  qp.b = Vec::Zero(m);
  qp.lb = Vec::Zero(n);
  qp.ub = Vec::Zero(n);

  const Mat wtw = w.transpose() * w;
  // Enforced as kappa(x0) f_vso(x0) + Phi(x0) so that the row is exactly
  // |f_vs(x0)| >= f_min under the full control law; a small interior margin
  // keeps the solved field strictly feasible at solver tolerance.
  const Vec f_s0_scaled = kappa0 * eval_vsds_org(model, x0) + potential_force(passifier, x0);
  constexpr double kMargin = 1e-6;
  for (int j = 0; j < m; ++j) {
    const int off = j * n_springs;
    qp.H.block(off, off, n_springs, n_springs) = wtw;
    qp.c.segment(off, n_springs) = -w.transpose() * f_shift.col(j);
    qp.A.block(j, off, 1, n_springs) = sigma(j) * w.row(0);
    qp.b(j) = f_min(j) - sigma(j) * f_s0_scaled(j) + kMargin;
    qp.lb.segment(off, n_springs).setConstant(gamma_lower(j));
    qp.ub.segment(off, n_springs).setConstant(gamma_upper(j));
  }
  qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
  return out;
}

FeedForwardField solve_feedforward_qp(const ReferenceDataset& dataset, const VsdsModel& model,
                                      const PassifierParams& passifier, const Vec& gamma_lower,
                                      const Vec& gamma_upper, const Vec& f_min,
                                      QpSolution* solution_out) {
  const QpAssembly assembly = assemble_qp(dataset, model, passifier, gamma_lower, gamma_upper, f_min);
  const QpSolution sol = solve_qp(assembly.problem);
  if (solution_out != nullptr) *solution_out = sol;
  if (sol.status == QpStatus::Infeasible) {
    throw SimulationError("feed-forward QP is infeasible");
  }
  if (sol.status != QpStatus::Optimal) {
    throw SimulationError("feed-forward QP did not reach the requested tolerance");
  }

  const int n_springs = model.size();
  const int m = model.dim;
  FeedForwardField ff;
  ff.method = FfMethod::Qp;
  ff.gamma_lower = gamma_lower;
  ff.gamma_upper = gamma_upper;
  ff.f_min = f_min;
  ff.gammas.resize(n_springs, Vec::Zero(m));
  for (int i = 0; i < n_springs; ++i) {
    for (int j = 0; j < m; ++j) ff.gammas[i](j) = sol.z(j * n_springs + i);
  }
  ff.solved = true;
  return ff;
}

}  // namespace vsds
