#pragma once

#include <vector>

#include "vsds/types.hpp"

namespace vsds {

enum class StiffnessKind { ConstantDiagonal, SinusoidalDiagonal, Tabulated };

/// Diagonal desired-stiffness profile K_d(x) with strictly positive entries.
/// The sinusoidal and tabulated kinds vary with the first state component.
class StiffnessProfile {
 public:
  static StiffnessProfile constant(const Vec& diag_entries);

  /// K^j(x) = offset_j + amplitude_j * sin(spatial_freq * x^1 + phase).
  static StiffnessProfile sinusoidal(const Vec& offset, const Vec& amplitude,
                                     double spatial_freq, double phase);

  /// Linear interpolation over samples of x^1 (clamped at the ends).
  static StiffnessProfile tabulated(const std::vector<double>& x1_samples,
                                    const std::vector<Vec>& diag_samples);

  Vec diagonal(const Vec& x) const;
  Mat matrix(const Vec& x) const;

  int dim() const { return dim_; }
  StiffnessKind kind() const { return kind_; }

 private:
  StiffnessProfile() = default;

  StiffnessKind kind_ = StiffnessKind::ConstantDiagonal;
  int dim_ = 2;
  Vec diag_;
  Vec offset_, amplitude_;
  double freq_ = 0.0, phase_ = 0.0;
  std::vector<double> table_x_;
  std::vector<Vec> table_k_;
};

}  // namespace vsds
