#include "vsds/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace vsds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stacked constraint operator C = [A; I] with interval image set
// [b, +inf) x [lb, ub].
struct Splitting {
  Mat c_op;    // (p + n) x n
  Vec lower;   // p + n
  Vec upper;   // p + n
};

Splitting make_splitting(const QpProblem& qp) {
  const int n = qp.n();
  const int p = qp.p();
  Splitting s;
  s.c_op.resize(p + n, n);
  if (p > 0) s.c_op.topRows(p) = qp.A;
  s.c_op.bottomRows(n) = Mat::Identity(n, n);
  s.lower.resize(p + n);
  s.upper.resize(p + n);
  for (int i = 0; i < p; ++i) {
    s.lower(i) = qp.b(i);
    s.upper(i) = kInf;
  }
  s.lower.tail(n) = qp.lb;
  s.upper.tail(n) = qp.ub;
  return s;
}

Vec project_interval(const Vec& v, const Vec& lower, const Vec& upper) {
  return v.cwiseMax(lower).cwiseMin(upper);
}

// Primal infeasibility certificate on an accumulated dual direction:
// C'dy ~ 0 with negative support value over the image interval.
bool is_infeasibility_certificate(const Splitting& s, const Vec& dy, double tol,
                                  double* certificate_residual) {
  const double scale = dy.cwiseAbs().maxCoeff();
  if (scale <= 0.0) return false;
  const Vec d = dy / scale;
  const double ct_norm = (s.c_op.transpose() * d).cwiseAbs().maxCoeff();
  if (ct_norm > tol) return false;
  double support = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    if (d(i) > tol) {
      if (std::isinf(s.upper(i))) return false;
      support += s.upper(i) * d(i);
    } else if (d(i) < -tol) {
      if (std::isinf(s.lower(i))) return false;
      support += s.lower(i) * d(i);
    }
  }
  if (support < -tol) {
    *certificate_residual = ct_norm;
    return true;
  }
  return false;
}

struct ActiveConstraint {
  // Gradient column g and target value: g'z = value at the active face.
  Vec gradient;
  double value;
  double slack;  // signed distance to the face at the candidate point
};

// Gradients are oriented so that stationarity reads Hz + c = sum mu_i g_i
// with mu_i >= 0.
std::vector<ActiveConstraint> active_set(const QpProblem& qp, const Vec& z, double act_tol) {
  std::vector<ActiveConstraint> act;
  const int n = qp.n();
  for (int i = 0; i < qp.p(); ++i) {
    const double slack = qp.A.row(i).dot(z) - qp.b(i);
    if (std::abs(slack) <= act_tol * (1.0 + std::abs(qp.b(i)))) {
      act.push_back({qp.A.row(i).transpose(), qp.b(i), slack});
    }
  }
  for (int j = 0; j < n; ++j) {
    if (!std::isinf(qp.lb(j))) {
      const double slack = z(j) - qp.lb(j);
      if (std::abs(slack) <= act_tol * (1.0 + std::abs(qp.lb(j)))) {
        act.push_back({Vec::Unit(n, j), qp.lb(j), slack});
      }
    }
    if (!std::isinf(qp.ub(j))) {
      const double slack = qp.ub(j) - z(j);
      if (std::abs(slack) <= act_tol * (1.0 + std::abs(qp.ub(j)))) {
        act.push_back({-Vec::Unit(n, j), -qp.ub(j), slack});
      }
    }
  }
  return act;
}

// Equality-constrained polish on the active set detected from the splitting
// iterate. Returns true when the polished point is primal feasible with
// sign-correct multipliers.
bool polish_solution(const QpProblem& qp, const Splitting& s, const Vec& y, const Vec& lam,
                     double tol, Vec* z_out) {
  const int n = qp.n();
  std::vector<int> lower_active, upper_active;
  for (int i = 0; i < s.lower.size(); ++i) {
    if (!std::isinf(s.lower(i)) && (y(i) - s.lower(i) <= 1e3 * tol * (1.0 + std::abs(s.lower(i))) ||
                                    lam(i) < -10.0 * tol)) {
      lower_active.push_back(i);
    } else if (!std::isinf(s.upper(i)) &&
               (s.upper(i) - y(i) <= 1e3 * tol * (1.0 + std::abs(s.upper(i))) ||
                lam(i) > 10.0 * tol)) {
      upper_active.push_back(i);
    }
  }

  for (int pass = 0; pass < 5; ++pass) {
    const int k = static_cast<int>(lower_active.size() + upper_active.size());
    Mat g(k, n);
    Vec target(k);
    int r = 0;
    for (int i : lower_active) {
      g.row(r) = s.c_op.row(i);
      target(r++) = s.lower(i);
    }
    for (int i : upper_active) {
      g.row(r) = s.c_op.row(i);
      target(r++) = s.upper(i);
    }

    Mat kkt = Mat::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = qp.H;
    if (k > 0) {
      kkt.topRightCorner(n, k) = g.transpose();
      kkt.bottomLeftCorner(k, n) = g;
      kkt.bottomRightCorner(k, k) = -1e-12 * Mat::Identity(k, k);
    }
    Vec rhs(n + k);
    rhs.head(n) = -qp.c;
    if (k > 0) rhs.tail(k) = target;

    Eigen::FullPivLU<Mat> lu(kkt);
    if (!lu.isInvertible()) return false;
    Vec sol = lu.solve(rhs);
    // One round of iterative refinement against the regularized system.
    sol += lu.solve(rhs - kkt * sol);
    const Vec z = sol.head(n);
    const Vec nu = sol.tail(k);
    if (!z.allFinite()) return false;

    // Multiplier signs: nu <= 0 on lower faces, nu >= 0 on upper faces.
    bool signs_ok = true;
    std::vector<int> keep_lower, keep_upper;
    r = 0;
    for (int i : lower_active) {
      if (nu(r++) <= 10.0 * tol) {
        keep_lower.push_back(i);
      } else {
        signs_ok = false;
      }
    }
    for (int i : upper_active) {
      if (nu(r++) >= -10.0 * tol) {
        keep_upper.push_back(i);
      } else {
        signs_ok = false;
      }
    }
    if (!signs_ok) {
      lower_active = std::move(keep_lower);
      upper_active = std::move(keep_upper);
      continue;
    }

    const Vec image = s.c_op * z;
    const double feas =
        std::max((s.lower - image).maxCoeff(), (image - s.upper).maxCoeff());
    if (feas > 10.0 * tol) return false;
    *z_out = z;
    return true;
  }
  return false;
}

}  // namespace

void QpProblem::validate() const {
  const int nn = n();
  if (H.rows() != nn || H.cols() != nn) throw std::invalid_argument("H/c dimension mismatch");
  if (lb.size() != nn || ub.size() != nn) throw std::invalid_argument("box bound size mismatch");
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != nn)) {
    throw std::invalid_argument("A/b dimension mismatch");
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("H is not symmetric");
  }
  for (int j = 0; j < nn; ++j) {
    if (lb(j) > ub(j)) throw std::invalid_argument("lb > ub at component " + std::to_string(j));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  if (es.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw std::invalid_argument("H has negative curvature; problem is not convex");
  }
}

QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings) {
  qp.validate();
  const int n = qp.n();
  const Splitting s = make_splitting(qp);
  const int rows = static_cast<int>(s.lower.size());

  double rho = settings.rho;
  Eigen::LLT<Mat> llt(Mat(qp.H + rho * (s.c_op.transpose() * s.c_op)));

  Vec z = Vec::Zero(n);
  Vec y = project_interval(Vec::Zero(rows), s.lower, s.upper);
  Vec lam = Vec::Zero(rows);

  QpSolution out;
  out.fixed_point_residuals.reserve(256);
  Vec fixed_point_prev = y + lam / rho;

  int infeas_anchor = -1;
  Vec lam_anchor;

  int k = 0;
  for (; k < settings.max_iter; ++k) {
    const Vec rhs = -qp.c + s.c_op.transpose() * (rho * y - lam);
    z = llt.solve(rhs);
    const Vec image = s.c_op * z;
    y = project_interval(image + lam / rho, s.lower, s.upper);
    lam += rho * (image - y);

    const Vec fixed_point = y + lam / rho;
    out.fixed_point_residuals.push_back((fixed_point - fixed_point_prev).norm());
    fixed_point_prev = fixed_point;

    const double r_prim = (image - y).cwiseAbs().maxCoeff();
    const double r_dual = (qp.H * z + qp.c + s.c_op.transpose() * lam).cwiseAbs().maxCoeff();
    if (r_prim <= settings.tol && r_dual <= settings.tol) {
      out.status = QpStatus::Optimal;
      ++k;
      break;
    }

    if (infeas_anchor < 0) {
      infeas_anchor = k;
      lam_anchor = lam;
    } else if (k - infeas_anchor >= settings.infeasibility_window) {
      double cert = 0.0;
      if (is_infeasibility_certificate(s, lam - lam_anchor, 1e-6, &cert)) {
        out.status = QpStatus::Infeasible;
        out.z = z;
        out.iterations = k + 1;
        out.primal_residual = r_prim;
        out.dual_residual = cert;
        return out;
      }
      infeas_anchor = k;
      lam_anchor = lam;
    }

    if (settings.adaptive_rho && (k + 1) % settings.rho_update_interval == 0 && r_dual > 0.0 &&
        r_prim > 0.0) {
      const double ratio = std::sqrt(r_prim / r_dual);
      if (ratio > 5.0 || ratio < 0.2) {
        rho = std::clamp(rho * ratio, 1e-6, 1e6);
        llt.compute(Mat(qp.H + rho * (s.c_op.transpose() * s.c_op)));
        // The fixed-point metric changes with rho; restart the trace.
        out.fixed_point_residuals.clear();
        fixed_point_prev = y + lam / rho;
      }
    }
  }
  out.iterations = k;

  if (settings.polish) {
    Vec z_polished;
    if (polish_solution(qp, s, y, lam, settings.tol, &z_polished)) {
      const KktResidual polished = kkt_residual(qp, z_polished);
      const KktResidual raw = kkt_residual(qp, z);
      const double worst_polished =
          std::max({polished.stationarity, polished.primal, polished.complementarity});
      const double worst_raw = std::max({raw.stationarity, raw.primal, raw.complementarity});
      if (worst_polished <= worst_raw) {
        z = z_polished;
        out.polished = true;
      }
    }
  }

  out.z = z;
  out.objective = qp.objective(z);
  const Vec image = s.c_op * z;
  out.primal_residual =
      std::max(0.0, std::max((s.lower - image).maxCoeff(), (image - s.upper).maxCoeff()));
  out.dual_residual = (qp.H * z + qp.c + s.c_op.transpose() * lam).cwiseAbs().maxCoeff();
  const KktResidual kkt = kkt_residual(qp, z);
  out.stationarity_residual = kkt.stationarity;
  out.complementarity_residual = kkt.complementarity;
  if (out.status != QpStatus::Infeasible) {
    const bool ok = kkt.stationarity <= settings.tol && kkt.primal <= settings.tol &&
                    kkt.complementarity <= settings.tol;
    out.status = ok ? QpStatus::Optimal : QpStatus::MaxIter;
  }
  return out;
}

QpSolution solve_qp(const QpProblem& problem, double tol, int max_iter) {
  QpSettings settings;
  settings.tol = tol;
  settings.max_iter = max_iter;
  return solve_qp(problem, settings);
}

Vec nonnegative_least_squares(const Mat& g, const Vec& r, double tol) {
  // Lawson-Hanson active set iteration on min |g mu - r|, mu >= 0.
  const int k = static_cast<int>(g.cols());
  Vec mu = Vec::Zero(k);
  if (k == 0) return mu;
  std::vector<bool> passive(k, false);
  Vec residual = r;

  for (int outer = 0; outer < 3 * k + 30; ++outer) {
    const Vec w = g.transpose() * residual;
    int best = -1;
    double best_w = tol * (1.0 + r.norm());
    for (int i = 0; i < k; ++i) {
      if (!passive[i] && w(i) > best_w) {
        best_w = w(i);
        best = i;
      }
    }
    if (best < 0) break;
    passive[best] = true;

    for (int inner = 0; inner < 3 * k + 30; ++inner) {
      std::vector<int> idx;
      for (int i = 0; i < k; ++i) {
        if (passive[i]) idx.push_back(i);
      }
      Mat gp(g.rows(), idx.size());
      for (size_t j = 0; j < idx.size(); ++j) gp.col(j) = g.col(idx[j]);
      const Vec sol = gp.colPivHouseholderQr().solve(r);

      double min_sol = idx.empty() ? 1.0 : sol.minCoeff();
      if (min_sol > -tol) {
        mu.setZero();
        for (size_t j = 0; j < idx.size(); ++j) mu(idx[j]) = std::max(0.0, sol(j));
        break;
      }
      // Step toward the subproblem solution until a component hits zero.
      double alpha = 1.0;
      for (size_t j = 0; j < idx.size(); ++j) {
        if (sol(j) < 0.0) {
          const double cur = mu(idx[j]);
          alpha = std::min(alpha, cur / (cur - sol(j)));
        }
      }
      for (size_t j = 0; j < idx.size(); ++j) {
        mu(idx[j]) += alpha * (sol(j) - mu(idx[j]));
        if (mu(idx[j]) <= tol) {
          mu(idx[j]) = 0.0;
          passive[idx[j]] = false;
        }
      }
    }
    residual = r - g * mu;
  }
  return mu;
}

KktResidual kkt_residual(const QpProblem& qp, const Vec& z) {
  require_finite(z, "z");
  KktResidual out;

  double primal = 0.0;
  for (int i = 0; i < qp.p(); ++i) primal = std::max(primal, qp.b(i) - qp.A.row(i).dot(z));
  for (int j = 0; j < qp.n(); ++j) {
    if (!std::isinf(qp.lb(j))) primal = std::max(primal, qp.lb(j) - z(j));
    if (!std::isinf(qp.ub(j))) primal = std::max(primal, z(j) - qp.ub(j));
  }
  out.primal = std::max(0.0, primal);

  const auto act = active_set(qp, z, 1e-7);
  const Vec grad = qp.H * z + qp.c;
  if (act.empty()) {
    out.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
    out.complementarity = 0.0;
    return out;
  }
  Mat g(qp.n(), act.size());
  for (size_t i = 0; i < act.size(); ++i) g.col(static_cast<int>(i)) = act[i].gradient;
  const Vec mu = nonnegative_least_squares(g, grad);
  out.stationarity = (grad - g * mu).cwiseAbs().maxCoeff();
  double compl_res = 0.0;
  for (size_t i = 0; i < act.size(); ++i) {
    compl_res = std::max(compl_res, std::abs(mu(static_cast<int>(i)) * act[i].slack));
  }
  out.complementarity = compl_res;
  return out;
}

std::string qp_to_json(const QpProblem& qp) {
  nlohmann::json j;
  auto vec_arr = [](const Vec& v) {
    std::vector<double> out(v.size());
    for (int i = 0; i < v.size(); ++i) {
      out[i] = std::isinf(v(i)) ? (v(i) > 0 ? 1e300 : -1e300) : v(i);
    }
    return out;
  };
  auto mat_arr = [&](const Mat& m) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      rows.emplace_back(m.cols());
      for (Eigen::Index c = 0; c < m.cols(); ++c) rows.back()[c] = m(r, c);
    }
    return rows;
  };
  j["n"] = qp.n();
  j["p"] = qp.p();
  j["H"] = mat_arr(qp.H);
  j["c"] = vec_arr(qp.c);
  j["A"] = mat_arr(qp.A);
  j["b"] = vec_arr(qp.b);
  j["lb"] = vec_arr(qp.lb);
  j["ub"] = vec_arr(qp.ub);
  return j.dump(2);
}

QpProblem qp_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  QpProblem qp;
  const int n = j.at("n").get<int>();
  const int p = j.at("p").get<int>();
  auto read_vec = [&](const char* key, int size) {
    const auto arr = j.at(key).get<std::vector<double>>();
    if (static_cast<int>(arr.size()) != size) {
      throw std::invalid_argument(std::string("qp json: bad size for ") + key);
    }
    Vec v(size);
    for (int i = 0; i < size; ++i) {
      v(i) = arr[i] >= 1e300 ? kInf : (arr[i] <= -1e300 ? -kInf : arr[i]);
    }
    return v;
  };
  auto read_mat = [&](const char* key, int rows, int cols) {
    const auto arr = j.at(key).get<std::vector<std::vector<double>>>();
    if (static_cast<int>(arr.size()) != rows) {
      throw std::invalid_argument(std::string("qp json: bad rows for ") + key);
    }
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      if (static_cast<int>(arr[r].size()) != cols) {
        throw std::invalid_argument(std::string("qp json: bad cols for ") + key);
      }
      for (int c = 0; c < cols; ++c) m(r, c) = arr[r][c];
    }
    return m;
  };
  qp.H = read_mat("H", n, n);
  qp.c = read_vec("c", n);
  qp.A = read_mat("A", p, n);
  qp.b = read_vec("b", p);
  qp.lb = read_vec("lb", n);
  qp.ub = read_vec("ub", n);
  qp.validate();
  return qp;
}

}  // namespace vsds
