#pragma once

#include "vsds/types.hpp"
#include "vsds/vsds_model.hpp"

namespace vsds {

struct FeedForwardField;

/// Parameters of the conservative potential, the activation function and
/// the energy tank.
struct PassifierParams {
  double k_o = 0.4;         // J, potential height near the attractor
  double zeta = 0.006;      // m^2, potential width
  double tau_min = 1.0;     // N/m, far-field spring
  double kappa_rate = 10.0; // 1/m, rate of the activation kappa
  double s0 = 30.0;         // J, initial tank energy
  double s_max = 60.0;      // J, tank capacity
  double eta = 1.05;        // > 1, tank decay factor
  double alpha_fill = 0.5;  // in [0,1), dissipation harvesting gain
  bool decay_enabled = true;  // debug switch for the -(eta - kappa) s term

  void validate() const;
};

struct TankState {
  double s = 0.0;         // J
  long clamp_events = 0;  // times the explicit-Euler update hit a limit
};

struct Gates {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// phi(x) = k_o (1 - exp(-x'x / 2 zeta)) + tau_min x'x.
double potential_value(const PassifierParams& p, const Vec& x);

/// Phi(x) = -grad phi = -(k_o/zeta) exp(-x'x / 2 zeta) x - 2 tau_min x.
Vec potential_force(const PassifierParams& p, const Vec& x);

/// kappa(|x|) = 1 - exp(-kappa_rate |x|), in [0, 1).
double activation(const PassifierParams& p, const Vec& x);

/// Tank gates. alpha harvests dissipation below capacity, beta blocks
/// extraction from an empty tank and refill of a full one, gamma scales the
/// non-conservative control term (gamma = beta for z >= 0, gamma = 1
/// otherwise). Hard switches are smoothed over a band of 0.02 s_max.
Gates gates(const PassifierParams& p, double s, double z);

/// Explicit-Euler update of
///   sdot = alpha(s) v'Dv - beta(z,s) z - (eta - kappa(|x|)) s,
/// clamped to [0, s_max].
TankState tank_step(const PassifierParams& p, TankState state, const Vec& x, const Vec& v,
                    const Mat& damping, double z, double dt);

struct ControlEval {
  Vec force;   // F = f_vs - D(x) v
  Vec f_vs;    // Phi + gamma kappa (f_vso + f_f)
  double z = 0.0;
  double kappa = 0.0;
  Gates gate;
};

/// Passified control law evaluated at (x, v) with the current tank level.
ControlEval passive_control(const VsdsModel& model, const FeedForwardField& ff,
                            const PassifierParams& p, const TankState& tank, const Vec& x,
                            const Vec& v);

}  // namespace vsds
