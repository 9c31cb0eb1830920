#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsds/energy_tank.hpp"
#include "vsds/motion_field.hpp"
#include "vsds/qp.hpp"
#include "vsds/stiffness.hpp"
#include "vsds/types.hpp"
#include "vsds/vsds_model.hpp"

namespace vsds {

/// Position/spring-force samples of the critically damped reference system,
/// used as the target behavior for the optimized feed-forward field.
struct ReferenceDataset {
  std::vector<double> times;
  std::vector<Vec> positions;      // x_t
  std::vector<Vec> spring_forces;  // F_{s,t} = K_d(x_t) (x_d(t) - x_t)
  bool truncated = false;          // open-loop reference ended before t_final

  int size() const { return static_cast<int>(times.size()); }
  void validate() const;
};

void dataset_to_csv(const ReferenceDataset& ds, const std::string& path);
ReferenceDataset dataset_from_csv(const std::string& path);

enum class FfMethod { None, VelocityFeedback, Qp };

/// Feed-forward force field f_f(x). The velocity-feedback kind carries its
/// motion field; the qp kind carries the blended constant forces Gamma_i.
struct FeedForwardField {
  FfMethod method = FfMethod::None;

  std::optional<MotionField> field;  // VelocityFeedback

  std::vector<Vec> gammas;  // Qp, one force per spring
  Vec gamma_lower;          // per-component bounds (same for every spring)
  Vec gamma_upper;
  Vec f_min;                // componentwise lower bound on |f_vs(x0)|
  bool solved = false;

  static FeedForwardField none() { return {}; }
  static FeedForwardField velocity_feedback(MotionField f);
};

/// f_f(x) = D(x) f_g(x).
Vec ff_velocity_feedback(const VsdsModel& model, const MotionField& field, const Vec& x);

/// f_f(x) = sum_i w_i(x) Gamma_i (requires a solved qp field).
Vec eval_ff_qp(const FeedForwardField& ff, const VsdsModel& model, const Vec& x);

/// Dispatch on the field kind (zero force for FfMethod::None).
Vec eval_feedforward(const FeedForwardField& ff, const VsdsModel& model, const Vec& x);

/// Simulates M xdd = K_d(x)(x_d(t) - x) - D_d(x) xd with the per-axis
/// critically damped profile D_d = 2 sqrt(M) sqrt(K_d(x)); x_d(t) is the
/// open-loop integral of the motion field from x0 (held at the attractor
/// after convergence). Samples are thinned to at most max_rows.
ReferenceDataset simulate_reference(const MotionField& field, const StiffnessProfile& stiffness,
                                    const Vec& mass_diag, const Vec& x0, double dt, double t_final,
                                    int max_rows = 2000);

struct QpAssembly {
  QpProblem problem;
  Vec sigma;      // +-1 per axis, sign of f_s(x0)
  Vec f_s0;       // f_vso(x0) + Phi(x0)
  double kappa0;  // kappa(|x0|)
};

/// Builds the QP of the feed-forward fit: stacked weight matrix
/// W(x) of kappa(|x_t|) w_i(x_t), H = Wa'Wa, c = -Wa'F_sh, the
/// sigma-activated initial-force row, and the box bounds.
QpAssembly assemble_qp(const ReferenceDataset& dataset, const VsdsModel& model,
                       const PassifierParams& passifier, const Vec& gamma_lower,
                       const Vec& gamma_upper, const Vec& f_min);

/// assemble + solve + pack the blended-force field.
FeedForwardField solve_feedforward_qp(const ReferenceDataset& dataset, const VsdsModel& model,
                                      const PassifierParams& passifier, const Vec& gamma_lower,
                                      const Vec& gamma_upper, const Vec& f_min,
                                      QpSolution* solution_out = nullptr);

}  // namespace vsds
