#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "vessel/sparse.hpp"
#include "vessel/types.hpp"

namespace vessel {

/// Radial wall displacement, velocity, and acceleration on the wall grid.
/// The triple is kept Newmark-consistent by newmark_step.
template <typename Scalar>
struct WallState {
  VectorX<Scalar> eta;       // displacement (cm)
  VectorX<Scalar> eta_dot;   // velocity (cm/s)
  VectorX<Scalar> eta_ddot;  // acceleration (cm/s^2)
  Scalar t = 0;              // time (s)
};

template <typename Scalar>
WallState<Scalar> zero_wall_state(Index n) {
  return {VectorX<Scalar>::Zero(n), VectorX<Scalar>::Zero(n),
          VectorX<Scalar>::Zero(n), Scalar(0)};
}

/// Coefficients of the wall displacement equation
///   eta_tt - a eta_zz + b eta - c eta_t_zz = H.
/// b = 0 and c = 0 are accepted here so the undamped/unsupported regimes
/// remain testable; scenario-level validation is stricter about b.
template <typename Scalar>
struct StringParams {
  Scalar a;      // wave coefficient (cm^2/s^2), > 0
  Scalar b;      // elastic foundation coefficient (1/s^2), >= 0
  Scalar c;      // viscoelastic coefficient (cm^2/s), >= 0
  Scalar rho_w;  // wall density (g/cm^3), > 0
  Scalar h0;     // wall thickness (cm), > 0
};

/// Unconstrained P1 operators of the wall equation on its 1D grid, plus the
/// indices where eta = 0 is enforced (grid ends). Constraints are applied to
/// the effective matrices at solve time, so M, K_a, M_b, K_c keep their raw
/// element-integral values (M rows sum to the nodal element-length weights).
template <typename Scalar>
struct WallOperators {
  SparseMatrix<Scalar> M;    // consistent mass
  SparseMatrix<Scalar> K_a;  // a * first-derivative stiffness
  SparseMatrix<Scalar> M_b;  // b * mass
  SparseMatrix<Scalar> K_c;  // c * first-derivative stiffness
  std::vector<Index> clamped;
  VectorX<Scalar> z;  // grid coordinates, strictly increasing
};

template <typename Scalar>
WallOperators<Scalar> assemble_string_operators(const VectorX<Scalar>& z,
                                                const StringParams<Scalar>& p) {
  if (!(p.a > Scalar(0)))
    throw std::invalid_argument("string params: a must be positive");
  if (!(p.b >= Scalar(0)) || !(p.c >= Scalar(0)))
    throw std::invalid_argument("string params: b and c must be non-negative");
  if (!(p.rho_w > Scalar(0)) || !(p.h0 > Scalar(0)))
    throw std::invalid_argument("string params: rho_w and h0 must be positive");
  const Index n = z.size();
  if (n < 3)
    throw std::invalid_argument("string operators: need at least 3 grid nodes");

  std::vector<Triplet<Scalar>> tm, tk;
  tm.reserve(4 * (n - 1));
  tk.reserve(4 * (n - 1));
  for (Index e = 0; e + 1 < n; ++e) {
    const Scalar h = z[e + 1] - z[e];
    if (!(h > Scalar(0)))
      throw std::invalid_argument("string operators: degenerate grid spacing");
    const Scalar m_diag = h / Scalar(3), m_off = h / Scalar(6);
    const Scalar k = Scalar(1) / h;
    tm.emplace_back(e, e, m_diag);
    tm.emplace_back(e + 1, e + 1, m_diag);
    tm.emplace_back(e, e + 1, m_off);
    tm.emplace_back(e + 1, e, m_off);
    tk.emplace_back(e, e, k);
    tk.emplace_back(e + 1, e + 1, k);
    tk.emplace_back(e, e + 1, -k);
    tk.emplace_back(e + 1, e, -k);
  }
  WallOperators<Scalar> ops;
  ops.M = assemble<Scalar>(n, n, tm);
  const SparseMatrix<Scalar> K1 = assemble<Scalar>(n, n, tk);
  ops.K_a = (p.a * K1).eval();
  ops.M_b = (p.b * ops.M).eval();
  ops.K_c = (p.c * K1).eval();
  ops.clamped = {Index(0), n - 1};
  ops.z = z;
  return ops;
}

namespace detail {

/// c_m*M + c_c*K_c + c_k*(K_a + M_b) with clamped rows/columns replaced by
/// the identity (symmetric elimination; prescribed values are zero).
template <typename Scalar>
SparseMatrix<Scalar> effective_matrix(const WallOperators<Scalar>& ops,
                                      Scalar c_m, Scalar c_c, Scalar c_k) {
  const Index n = ops.M.rows();
  std::vector<bool> clamp(static_cast<std::size_t>(n), false);
  for (Index i : ops.clamped) clamp[static_cast<std::size_t>(i)] = true;

  std::vector<Triplet<Scalar>> trip;
  trip.reserve(static_cast<std::size_t>(ops.M.nonZeros()) + ops.clamped.size());
  const auto accumulate = [&](const SparseMatrix<Scalar>& A, Scalar coeff) {
    if (coeff == Scalar(0)) return;
    for (Index r = 0; r < A.outerSize(); ++r)
      for (typename SparseMatrix<Scalar>::InnerIterator it(A, r); it; ++it) {
        if (clamp[static_cast<std::size_t>(it.row())] ||
            clamp[static_cast<std::size_t>(it.col())])
          continue;
        trip.emplace_back(it.row(), it.col(), coeff * it.value());
      }
  };
  accumulate(ops.M, c_m);
  accumulate(ops.K_c, c_c);
  accumulate(ops.K_a, c_k);
  accumulate(ops.M_b, c_k);
  for (Index i : ops.clamped) trip.emplace_back(i, i, Scalar(1));
  return assemble<Scalar>(n, n, trip);
}

template <typename Scalar>
void zero_clamped(const WallOperators<Scalar>& ops, VectorX<Scalar>& v) {
  for (Index i : ops.clamped) v[i] = Scalar(0);
}

}  // namespace detail

/// Acceleration consistent with the wall equation at the given state:
/// solves M eta_ddot = M H - K_c eta_dot - (K_a + M_b) eta with clamps.
template <typename Scalar>
VectorX<Scalar> initial_acceleration(const WallOperators<Scalar>& ops,
                                     const VectorX<Scalar>& eta,
                                     const VectorX<Scalar>& eta_dot,
                                     const VectorX<Scalar>& H,
                                     Scalar tol = Scalar(1e-13)) {
  VectorX<Scalar> rhs =
      ops.M * H - ops.K_c * eta_dot - ops.K_a * eta - ops.M_b * eta;
  detail::zero_clamped(ops, rhs);
  const SparseMatrix<Scalar> A =
      detail::effective_matrix(ops, Scalar(1), Scalar(0), Scalar(0));
  auto [x, report] = solve_spd<Scalar>(A, rhs, tol);
  if (!report.converged)
    throw SolverError("wall initial acceleration solve did not converge");
  return x;
}

/// One average-acceleration Newmark step (beta = 1/4, gamma = 1/2) of
/// M eta_ddot + K_c eta_dot + (K_a + M_b) eta = M H, unconditionally stable
/// and energy-conserving for the undamped homogeneous system.
template <typename Scalar>
WallState<Scalar> newmark_step(const WallOperators<Scalar>& ops,
                               const WallState<Scalar>& state,
                               const VectorX<Scalar>& H, Scalar dt,
                               Scalar tol = Scalar(1e-13)) {
  if (!(dt > Scalar(0)))
    throw std::invalid_argument("newmark_step: dt must be positive");
  const Index n = ops.M.rows();
  if (state.eta.size() != n || H.size() != n)
    throw std::invalid_argument("newmark_step: field size mismatch");

  // Displacement/velocity predictors with the new acceleration factored out:
  //   eta^{n+1} = pred_eta + (dt^2/4) a^{n+1},  eta_dot^{n+1} = pred_vel + (dt/2) a^{n+1}
  const VectorX<Scalar> pred_eta = state.eta + dt * state.eta_dot +
                                   (dt * dt / Scalar(4)) * state.eta_ddot;
  const VectorX<Scalar> pred_vel = state.eta_dot + (dt / Scalar(2)) * state.eta_ddot;

  VectorX<Scalar> rhs = ops.M * H - ops.K_c * pred_vel - ops.K_a * pred_eta -
                        ops.M_b * pred_eta;
  detail::zero_clamped(ops, rhs);
  const SparseMatrix<Scalar> A = detail::effective_matrix(
      ops, Scalar(1), dt / Scalar(2), dt * dt / Scalar(4));
  auto [a_new, report] = solve_spd<Scalar>(A, rhs, tol);
  if (!report.converged)
    throw SolverError("wall Newmark solve did not converge (residual " +
                      std::to_string(report.final_residual) + ")");

  WallState<Scalar> out;
  out.eta = pred_eta + (dt * dt / Scalar(4)) * a_new;
  out.eta_dot = pred_vel + (dt / Scalar(2)) * a_new;
  out.eta_ddot = std::move(a_new);
  out.t = state.t + dt;
  detail::zero_clamped(ops, out.eta);
  detail::zero_clamped(ops, out.eta_dot);
  detail::zero_clamped(ops, out.eta_ddot);
  return out;
}

/// Steady solution of (K_a + M_b) eta = M H with clamped ends.
template <typename Scalar>
VectorX<Scalar> static_solution(const WallOperators<Scalar>& ops,
                                const VectorX<Scalar>& H,
                                Scalar tol = Scalar(1e-13)) {
  VectorX<Scalar> rhs = ops.M * H;
  detail::zero_clamped(ops, rhs);
  const SparseMatrix<Scalar> A =
      detail::effective_matrix(ops, Scalar(0), Scalar(0), Scalar(1));
  auto [x, report] = solve_spd<Scalar>(A, rhs, tol);
  if (!report.converged)
    throw SolverError("wall static solve did not converge");
  return x;
}

/// E = (eta_dot' M eta_dot + eta' (K_a + M_b) eta) / 2.
template <typename Scalar>
Scalar wall_energy(const WallOperators<Scalar>& ops,
                   const WallState<Scalar>& state) {
  const Scalar kinetic = state.eta_dot.dot(ops.M * state.eta_dot);
  const Scalar potential =
      state.eta.dot(ops.K_a * state.eta) + state.eta.dot(ops.M_b * state.eta);
  return (kinetic + potential) / Scalar(2);
}

/// Mass-matrix-weighted discrete L2 norm sqrt(v' M v) on the wall grid.
template <typename Scalar>
Scalar wall_l2_norm(const WallOperators<Scalar>& ops, const VectorX<Scalar>& v) {
  return std::sqrt(std::max(Scalar(0), v.dot(ops.M * v)));
}

}  // namespace vessel
