#include "vsds/stiffness.hpp"

#include <algorithm>
#include <cmath>

namespace vsds {

StiffnessProfile StiffnessProfile::constant(const Vec& diag_entries) {
  if (diag_entries.size() < 1 || diag_entries.minCoeff() <= 0.0) {
    throw std::invalid_argument("constant stiffness entries must be strictly positive");
  }
  StiffnessProfile p;
  p.kind_ = StiffnessKind::ConstantDiagonal;
  p.dim_ = static_cast<int>(diag_entries.size());
  p.diag_ = diag_entries;
  return p;
}

StiffnessProfile StiffnessProfile::sinusoidal(const Vec& offset, const Vec& amplitude,
                                              double spatial_freq, double phase) {
  if (offset.size() != amplitude.size() || offset.size() < 1) {
    throw std::invalid_argument("sinusoidal stiffness offset/amplitude size mismatch");
  }
  if ((offset - amplitude.cwiseAbs()).minCoeff() <= 0.0) {
    throw std::invalid_argument("sinusoidal stiffness would reach a non-positive value");
  }
  StiffnessProfile p;
  p.kind_ = StiffnessKind::SinusoidalDiagonal;
  p.dim_ = static_cast<int>(offset.size());
  p.offset_ = offset;
  p.amplitude_ = amplitude;
  p.freq_ = spatial_freq;
  p.phase_ = phase;
  return p;
}

StiffnessProfile StiffnessProfile::tabulated(const std::vector<double>& x1_samples,
                                             const std::vector<Vec>& diag_samples) {
  if (x1_samples.size() != diag_samples.size() || x1_samples.size() < 2) {
    throw std::invalid_argument("tabulated stiffness needs at least 2 matching samples");
  }
  for (size_t i = 1; i < x1_samples.size(); ++i) {
    if (!(x1_samples[i] > x1_samples[i - 1])) {
      throw std::invalid_argument("tabulated stiffness x1 samples must be strictly increasing");
    }
  }
  const auto m = diag_samples.front().size();
  for (const Vec& k : diag_samples) {
    if (k.size() != m || k.minCoeff() <= 0.0) {
      throw std::invalid_argument("tabulated stiffness entries must be strictly positive");
    }
  }
  StiffnessProfile p;
  p.kind_ = StiffnessKind::Tabulated;
  p.dim_ = static_cast<int>(m);
  p.table_x_ = x1_samples;
  p.table_k_ = diag_samples;
  return p;
}

Vec StiffnessProfile::diagonal(const Vec& x) const {
  require_finite(x, "x");
  switch (kind_) {
    case StiffnessKind::ConstantDiagonal:
      return diag_;
    case StiffnessKind::SinusoidalDiagonal: {
      const double s = std::sin(freq_ * x(0) + phase_);
      return offset_ + s * amplitude_;
    }
    case StiffnessKind::Tabulated: {
      const double q = x(0);
      if (q <= table_x_.front()) return table_k_.front();
      if (q >= table_x_.back()) return table_k_.back();
      const auto it = std::upper_bound(table_x_.begin(), table_x_.end(), q);
      const size_t i = std::distance(table_x_.begin(), it);
      const double w = (q - table_x_[i - 1]) / (table_x_[i] - table_x_[i - 1]);
      return (1.0 - w) * table_k_[i - 1] + w * table_k_[i];
    }
  }
  throw std::logic_error("unreachable stiffness kind");
}

Mat StiffnessProfile::matrix(const Vec& x) const { return diagonal(x).asDiagonal(); }

}  // namespace vsds
