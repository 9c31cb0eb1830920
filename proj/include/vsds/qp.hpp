#pragma once

#include <string>
#include <vector>

#include "vsds/types.hpp"

namespace vsds {

/// Convex QP:  min 0.5 z'Hz + c'z  s.t.  A z >= b,  lb <= z <= ub.
/// H symmetric positive semi-definite; A may have zero rows; box bounds may
/// be +-infinity.
struct QpProblem {
  Mat H;
  Vec c;
  Mat A;
  Vec b;
  Vec lb;
  Vec ub;

  int n() const { return static_cast<int>(c.size()); }
  int p() const { return static_cast<int>(b.size()); }

  /// Throws std::invalid_argument on dimension mismatch, asymmetry beyond
  /// 1e-10, lb > ub, or negative curvature in H.
  void validate() const;

  double objective(const Vec& z) const { return 0.5 * z.dot(H * z) + c.dot(z); }
};

enum class QpStatus { Optimal, MaxIter, Infeasible };

struct QpSolution {
  Vec z;
  double objective = 0.0;
  QpStatus status = QpStatus::MaxIter;
  double primal_residual = 0.0;
  double dual_residual = 0.0;        // splitting dual residual at termination
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
  int iterations = 0;
  bool polished = false;
  /// |w_{k+1} - w_k| of the splitting fixed-point iterate, recorded while
  /// rho is held constant (non-increasing for the fixed-point iteration).
  std::vector<double> fixed_point_residuals;
};

struct QpSettings {
  double tol = 1e-8;
  int max_iter = 20000;
  double rho = 1.0;
  bool adaptive_rho = true;
  int rho_update_interval = 100;
  bool polish = true;
  /// Window length for the divergence-based infeasibility certificate.
  int infeasibility_window = 100;
};

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings);
QpSolution solve_qp(const QpProblem& problem, double tol = 1e-8, int max_iter = 20000);

struct KktResidual {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
};

/// KKT residuals of a candidate point, with multipliers recovered by
/// nonnegative least squares over the active constraint gradients.
KktResidual kkt_residual(const QpProblem& problem, const Vec& z);

/// min |G' mu - r| s.t. mu >= 0 (Lawson-Hanson). G is d x k: one column per
/// constraint gradient. Returns mu (size k).
Vec nonnegative_least_squares(const Mat& g, const Vec& r, double tol = 1e-12);

std::string qp_to_json(const QpProblem& problem);
QpProblem qp_from_json(const std::string& text);

}  // namespace vsds
