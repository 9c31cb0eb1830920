#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsds/motion_field.hpp"
#include "vsds/stiffness.hpp"
#include "vsds/types.hpp"

namespace vsds {

/// One linear spring of the blended field: attractor x_l, Gaussian kernel
/// (center x_cen, width eps), stiffness map A (symmetric negative definite)
/// and damping map D (symmetric positive definite).
struct LocalSpring {
  Vec x_l;
  Vec x_cen;
  double eps = 0.0;
  Mat A;
  Mat D;
};

/// Compiled spring field along one integral curve of the motion field.
struct VsdsModel {
  std::vector<LocalSpring> springs;
  int dim = 2;

  int size() const { return static_cast<int>(springs.size()); }
};

struct WeightEval {
  Vec w;                  // normalized kernel weights, sum = 1
  bool underflow = false; // all raw kernels vanished; nearest-center one-hot used
};

/// Orthonormal frame whose first column is direction/|direction|. For m = 2
/// the second column is the +90 degree rotation of the first; for m > 2 the
/// completion comes from Gram-Schmidt over the canonical basis. det Q = +1.
Mat build_rotation(const Vec& direction);

/// Compiles the spring field: n local attractors equally spaced by arc
/// length along the integral curve from x0, per-spring stiffness from the
/// profile rotated into the local motion frame, kernel centers at midpoints
/// of consecutive attractors (the first kernel sits on x0 itself).
VsdsModel build_vsds(const MotionField& field, const StiffnessProfile& stiffness,
                     const Vec& damping_eigs, const Vec& x0, int n, double eps_scale = 0.8,
                     double sample_dt = 1e-3);

/// Normalized Gaussian kernel weights at x.
WeightEval weights(const VsdsModel& model, const Vec& x);

/// Original spring field: sum_i w_i(x) A_i (x - x_{l,i}).
Vec eval_vsds_org(const VsdsModel& model, const Vec& x);

/// State-dependent damping: sum_i w_i(x) D_i.
Mat eval_damping(const VsdsModel& model, const Vec& x);

/// JSON export (springs, centers, widths, matrices, optional solved
/// feed-forward force set) for inspection and cross-implementation tests.
std::string model_to_json(const VsdsModel& model,
                          const std::vector<Vec>* gammas = nullptr);

}  // namespace vsds
