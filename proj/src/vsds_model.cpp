#include "vsds/vsds_model.hpp"

#include <cmath>

#include "json.hpp"

namespace vsds {

namespace {
constexpr double kKernelUnderflow = 1e-280;
}

Mat build_rotation(const Vec& direction) {
  require_finite(direction, "direction");
  const int m = static_cast<int>(direction.size());
  const double norm = direction.norm();
  if (norm <= 1e-12) throw std::invalid_argument("degenerate direction for rotation frame");
  const Vec d = direction / norm;

  if (m == 1) return Mat::Ones(1, 1);
  Mat q(m, m);
  if (m == 2) {
    q.col(0) = d;
    q(0, 1) = -d(1);
    q(1, 1) = d(0);
    return q;
  }
  q.col(0) = d;
  int filled = 1;
  for (int b = 0; b < m && filled < m; ++b) {
    Vec cand = Vec::Unit(m, b);
    for (int j = 0; j < filled; ++j) cand -= q.col(j).dot(cand) * q.col(j);
    const double n = cand.norm();
    if (n > 1e-8) q.col(filled++) = cand / n;
  }
  if (filled < m) throw std::logic_error("orthonormal completion failed");
  if (q.determinant() < 0.0) q.col(m - 1) = -q.col(m - 1);
  return q;
}

VsdsModel build_vsds(const MotionField& field, const StiffnessProfile& stiffness,
                     const Vec& damping_eigs, const Vec& x0, int n, double eps_scale,
                     double sample_dt) {
  const int m = field.dim();
  if (stiffness.dim() != m || damping_eigs.size() != m || x0.size() != m) {
    throw std::invalid_argument("dimension mismatch in VSDS construction");
  }
  if (damping_eigs.minCoeff() <= 0.0) {
    throw std::invalid_argument("damping eigenvalues must be strictly positive");
  }
  if (!(eps_scale > 0.0)) throw std::invalid_argument("eps_scale must be positive");

  const std::vector<Vec> attractors = sample_local_attractors(field, x0, n, sample_dt);

  VsdsModel model;
  model.dim = m;
  model.springs.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec dir = field.eval(attractors[i]);
    if (i == n - 1) {
      // The motion field vanishes at the global attractor; use the approach
      // tangent for the final frame.
      dir = attractors[i] - attractors[i - 1];
    } else if (dir.norm() <= 1e-12) {
      throw SimulationError("motion field vanishes at local attractor " + std::to_string(i));
    }
    const Mat q = build_rotation(dir);
    const Vec k_diag = stiffness.diagonal(attractors[i]);
    Mat a = -q * k_diag.asDiagonal() * q.transpose();
    Mat d = q * damping_eigs.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose());
    d = 0.5 * (d + d.transpose());

    LocalSpring spring;
    spring.x_l = attractors[i];
    spring.x_cen = i == 0 ? attractors[0] : Vec(0.5 * (attractors[i - 1] + attractors[i]));
    const double spacing = i == 0 ? (attractors[1] - attractors[0]).norm()
                                  : (attractors[i] - attractors[i - 1]).norm();
    spring.eps = eps_scale * spacing;
    if (!(spring.eps > 0.0)) {
      throw SimulationError("zero kernel width at local attractor " + std::to_string(i));
    }
    spring.A = std::move(a);
    spring.D = std::move(d);
    model.springs.push_back(std::move(spring));
  }
  return model;
}

WeightEval weights(const VsdsModel& model, const Vec& x) {
  require_finite(x, "x");
  const int n = model.size();
  WeightEval out;
  out.w = Vec::Zero(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d2 = (x - model.springs[i].x_cen).squaredNorm();
    const double e = model.springs[i].eps;
    out.w(i) = std::exp(-d2 / (2.0 * e * e));
    sum += out.w(i);
  }
  if (sum < kKernelUnderflow) {
    // Far from every kernel the quotient is 0/0; the nearest spring is the
    // only meaningful limit.
    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double d = (x - model.springs[i].x_cen).norm();
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    out.w.setZero();
    out.w(nearest) = 1.0;
    out.underflow = true;
    return out;
  }
  out.w /= sum;
  return out;
}

Vec eval_vsds_org(const VsdsModel& model, const Vec& x) {
  const WeightEval we = weights(model, x);
  Vec f = Vec::Zero(model.dim);
  for (int i = 0; i < model.size(); ++i) {
    if (we.w(i) == 0.0) continue;
    f += we.w(i) * (model.springs[i].A * (x - model.springs[i].x_l));
  }
  return f;
}

Mat eval_damping(const VsdsModel& model, const Vec& x) {
  const WeightEval we = weights(model, x);
  Mat d = Mat::Zero(model.dim, model.dim);
  for (int i = 0; i < model.size(); ++i) {
    if (we.w(i) == 0.0) continue;
    d += we.w(i) * model.springs[i].D;
  }
  return d;
}

std::string model_to_json(const VsdsModel& model, const std::vector<Vec>* gammas) {
  nlohmann::json j;
  j["dim"] = model.dim;
  j["n_springs"] = model.size();
  auto to_array = [](const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  auto mat_rows = [&](const Mat& m) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_array(m.row(r)));
    return rows;
  };
  j["springs"] = nlohmann::json::array();
  for (const auto& s : model.springs) {
    nlohmann::json js;
    js["x_l"] = to_array(s.x_l);
    js["x_cen"] = to_array(s.x_cen);
    js["eps"] = s.eps;
    js["A"] = mat_rows(s.A);
    js["D"] = mat_rows(s.D);
    j["springs"].push_back(std::move(js));
  }
  if (gammas != nullptr) {
    j["gamma"] = nlohmann::json::array();
    for (const Vec& g : *gammas) j["gamma"].push_back(to_array(g));
  }
  return j.dump(2);
}

}  // namespace vsds
