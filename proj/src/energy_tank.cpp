#include "vsds/energy_tank.hpp"

#include <cmath>

#include "vsds/feedforward.hpp"

namespace vsds {

void PassifierParams::validate() const {
  if (!(k_o > 0.0) || !(zeta > 0.0) || !(tau_min > 0.0) || !(kappa_rate > 0.0) || !(s0 >= 0.0) ||
      !(s_max > 0.0)) {
    throw std::invalid_argument("passifier parameters must be positive");
  }
  if (!(eta > 1.0)) throw std::invalid_argument("eta must exceed 1");
  if (!(alpha_fill >= 0.0 && alpha_fill < 1.0)) {
    throw std::invalid_argument("alpha_fill must lie in [0, 1)");
  }
  if (s0 > s_max) throw std::invalid_argument("s0 exceeds the tank capacity");
}

double potential_value(const PassifierParams& p, const Vec& x) {
  require_finite(x, "x");
  const double q = x.squaredNorm();
  return p.k_o * (1.0 - std::exp(-q / (2.0 * p.zeta))) + p.tau_min * q;
}

Vec potential_force(const PassifierParams& p, const Vec& x) {
  require_finite(x, "x");
  const double q = x.squaredNorm();
  return -(p.k_o / p.zeta) * std::exp(-q / (2.0 * p.zeta)) * x - 2.0 * p.tau_min * x;
}

double activation(const PassifierParams& p, const Vec& x) {
  require_finite(x, "x");
  return 1.0 - std::exp(-p.kappa_rate * x.norm());
}

Gates gates(const PassifierParams& p, double s, double z) {
  const double band = 0.02 * p.s_max;
  Gates g;
  const double top = smoothstep((s - (p.s_max - band)) / band);  // 1 at/above capacity
  g.alpha = p.alpha_fill * (1.0 - top);
  if (z >= 0.0) {
    g.beta = smoothstep(s / band);  // extraction fades out toward the empty tank
    g.gamma = g.beta;
  } else {
    g.beta = 1.0 - top;  // refill through -beta z fades out toward capacity
    g.gamma = 1.0;
  }
  return g;
}

TankState tank_step(const PassifierParams& p, TankState state, const Vec& x, const Vec& v,
                    const Mat& damping, double z, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const Gates g = gates(p, state.s, z);
  double sdot = g.alpha * v.dot(damping * v) - g.beta * z;
  if (p.decay_enabled) sdot -= (p.eta - activation(p, x)) * state.s;
  double s_next = state.s + dt * sdot;
  if (s_next < 0.0) {
    s_next = 0.0;
    ++state.clamp_events;
  } else if (s_next > p.s_max) {
    s_next = p.s_max;
    ++state.clamp_events;
  }
  state.s = s_next;
  return state;
}

ControlEval passive_control(const VsdsModel& model, const FeedForwardField& ff,
                            const PassifierParams& p, const TankState& tank, const Vec& x,
                            const Vec& v) {
  require_finite(x, "x");
  require_finite(v, "v");
  const Vec f_vso_ff = eval_vsds_org(model, x) + eval_feedforward(ff, model, x);
  ControlEval out;
  out.kappa = activation(p, x);
  out.z = out.kappa * v.dot(f_vso_ff);
  out.gate = gates(p, tank.s, out.z);
  out.f_vs = potential_force(p, x) + out.gate.gamma * out.kappa * f_vso_ff;
  out.force = out.f_vs - eval_damping(model, x) * v;
  return out;
}

}  // namespace vsds
