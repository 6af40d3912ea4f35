#pragma once

#include <utility>

#include "vessel/types.hpp"

namespace vessel {

/// Three-element RCR lumped model of the downstream circulation: proximal
/// resistance in series with a parallel compliance/distal-resistance pair
/// held at the venous reference pressure. Pressures in dyn/cm^2, flow in
/// cm^3/s per unit depth.
template <typename Scalar>
struct WindkesselParams {
  Scalar R_p;       // proximal resistance, >= 0
  Scalar C;         // compliance, > 0
  Scalar R_d;       // distal resistance, > 0
  Scalar P_venous;  // distal reference pressure
};

template <typename Scalar>
struct WindkesselState {
  Scalar P_c = 0;  // compliance-node pressure
  Scalar t = 0;
};

/// One implicit Euler step of C dP_c/dt = Q - (P_c - P_venous)/R_d, returning
/// the new state and the outflow pressure P_out = P_c + R_p*Q the fluid
/// applies as outflow traction on the next step (staggered exchange).
template <typename Scalar>
std::pair<WindkesselState<Scalar>, Scalar> windkessel_step(
    const WindkesselState<Scalar>& state, Scalar Q, Scalar dt,
    const WindkesselParams<Scalar>& p) {
  if (!(dt > Scalar(0)))
    throw std::invalid_argument("windkessel_step: dt must be positive");
  if (!(p.R_p >= Scalar(0)) || !(p.C > Scalar(0)) || !(p.R_d > Scalar(0)))
    throw std::invalid_argument(
        "windkessel params: need R_p >= 0, C > 0, R_d > 0");

  const Scalar cap = p.C / dt;
  const Scalar P_c_new =
      (cap * state.P_c + Q + p.P_venous / p.R_d) / (cap + Scalar(1) / p.R_d);
  WindkesselState<Scalar> out{P_c_new, state.t + dt};
  return {out, P_c_new + p.R_p * Q};
}

}  // namespace vessel
