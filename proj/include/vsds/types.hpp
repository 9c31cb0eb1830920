#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace vsds {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Error in a scenario configuration file (bad value, unknown key,
/// missing section). Maps to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Runtime failure of an integration or closed-loop run (divergence,
/// non-finite force). Maps to exit code 3 in the CLI.
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

inline bool is_finite(const Vec& v) { return v.allFinite(); }

inline void require_finite(const Vec& v, const char* name) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(name) + " contains non-finite values");
  }
}

/// C1 ramp: 0 for u <= 0, 1 for u >= 1, 3u^2 - 2u^3 in between.
inline double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace vsds
