#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "vessel/ale.hpp"
#include "vessel/fluid.hpp"
#include "vessel/mesh.hpp"
#include "vessel/types.hpp"
#include "vessel/wall.hpp"

namespace vessel {

template <typename Scalar>
struct CouplingConfig {
  Scalar tau;        // interface convergence tolerance (mixed cm + cm/s), > 0
  Scalar theta;      // relaxation weight on the old iterate, 0 < theta <= 1
  int max_subiters;  // >= 1
  Scalar dt;         // time step (s), > 0
  Scalar t_end;      // simulation horizon (s)
};

template <typename Scalar>
void validate_coupling_config(const CouplingConfig<Scalar>& cfg) {
  if (!(cfg.tau > Scalar(0)))
    throw std::invalid_argument("coupling config: tau must be positive");
  if (!(cfg.theta > Scalar(0)) || !(cfg.theta <= Scalar(1)))
    throw std::invalid_argument("coupling config: need 0 < theta <= 1");
  if (cfg.max_subiters < 1)
    throw std::invalid_argument("coupling config: max_subiters must be >= 1");
  if (!(cfg.dt > Scalar(0)))
    throw std::invalid_argument("coupling config: dt must be positive");
}

/// Coupled solution at the end of a time slab. Invariants after a converged
/// step: the wall trace of ale.y_new equals the reference wall lifted by
/// eta*e_r exactly, and the fluid wall velocity matches eta_dot up to the
/// tolerance implied by tau.
template <typename Scalar>
struct CoupledState {
  FluidState<Scalar> fluid;
  WallState<Scalar> wall;
  AleState<Scalar> ale;
  Index step_index = 0;
};

template <typename Scalar>
struct SubiterationRecord {
  int j;                  // subiteration number, starting at 1
  Scalar disp_residual;   // ||eta* - eta_j||_M
  Scalar vel_residual;    // ||eta_dot* - eta_dot_j||_M
  int fluid_iterations;   // linear iterations of the fluid solve
};

template <typename Scalar>
struct CoupledStepResult {
  CoupledState<Scalar> state;
  std::vector<SubiterationRecord<Scalar>> history;
};

/// Subiteration loop exhausted without meeting the interface tolerance.
class CouplingFailure : public std::runtime_error {
 public:
  CouplingFailure(const std::string& what,
                  std::vector<std::array<double, 3>> history)
      : std::runtime_error(what), history_(std::move(history)) {}

  /// One row per subiteration: {j, displacement residual, velocity residual}.
  const std::vector<std::array<double, 3>>& history() const { return history_; }

 private:
  std::vector<std::array<double, 3>> history_;
};

/// Start-of-step interface prediction: eta_0 = eta + dt*eta_dot, keeping the
/// velocity. Exact for linear-in-time wall motion.
template <typename Scalar>
std::pair<VectorX<Scalar>, VectorX<Scalar>> extrapolate(
    const WallState<Scalar>& wall, Scalar dt) {
  return {wall.eta + dt * wall.eta_dot, wall.eta_dot};
}

/// Relaxed update theta*current + (1-theta)*candidate for both fields.
template <typename Scalar>
std::pair<VectorX<Scalar>, VectorX<Scalar>> relax(
    const std::pair<VectorX<Scalar>, VectorX<Scalar>>& current,
    const std::pair<VectorX<Scalar>, VectorX<Scalar>>& candidate,
    Scalar theta) {
  return {theta * current.first + (Scalar(1) - theta) * candidate.first,
          theta * current.second + (Scalar(1) - theta) * candidate.second};
}

/// Interface convergence criterion: sum of mass-weighted L2 norms of the
/// displacement and velocity increments is at most tau.
template <typename Scalar>
bool convergence_test(
    const std::pair<VectorX<Scalar>, VectorX<Scalar>>& candidate,
    const std::pair<VectorX<Scalar>, VectorX<Scalar>>& iterate,
    Scalar tau, const WallOperators<Scalar>& ops) {
  const Scalar d = wall_l2_norm<Scalar>(ops, candidate.first - iterate.first);
  const Scalar v = wall_l2_norm<Scalar>(ops, candidate.second - iterate.second);
  return d + v <= tau;
}

/// One strongly coupled time step:
///   predict the interface, then loop { move the mesh from the displacement
///   iterate, advance the fluid with the velocity iterate as wall data,
///   advance the wall from the t^k state under the resulting traction, test
///   the interface increment, relax } until the increment is within tau.
/// On convergence the starred wall triple and the last fluid iterate are
/// promoted, and the slab geometry is rebuilt from the promoted displacement
/// so the state invariants hold exactly.
///
/// outflow_pressure is the absolute outflow traction for this slab (held
/// fixed across subiterations; the downstream model exchanges once per step).
template <typename Scalar>
CoupledStepResult<Scalar> coupled_step(const ReferenceMesh<Scalar>& mesh,
                                       const WallOperators<Scalar>& wall_ops,
                                       const FluidConfig<Scalar>& fluid_cfg,
                                       const PhysicalParams<Scalar>& phys,
                                       const CouplingConfig<Scalar>& cfg,
                                       const CoupledState<Scalar>& state,
                                       Scalar outflow_pressure) {
  validate_coupling_config(cfg);
  const Scalar dt = cfg.dt;
  const Scalar t_old = state.fluid.t;

  auto iterate = extrapolate<Scalar>(state.wall, dt);

  std::vector<SubiterationRecord<Scalar>> history;
  history.reserve(static_cast<std::size_t>(cfg.max_subiters));

  const auto build_slab = [&](const VectorX<Scalar>& eta) {
    const NodalField2<Scalar> disp =
        harmonic_extension<Scalar>(mesh, wall_boundary_displacement(mesh, eta));
    return make_ale_state<Scalar>(state.ale.y_new,
                                  checked_coordinates(mesh, disp), dt, t_old);
  };

  for (int j = 1; j <= cfg.max_subiters; ++j) {
    const AleState<Scalar> ale_j = build_slab(iterate.first);
    FluidStepResult<Scalar> fluid_j = advance_fluid<Scalar>(
        mesh, state.fluid, ale_j, iterate.second, outflow_pressure, fluid_cfg);
    const VectorX<Scalar> H =
        wall_traction_forcing<Scalar>(mesh, fluid_j.state, ale_j, phys);
    WallState<Scalar> wall_star = newmark_step<Scalar>(wall_ops, state.wall, H, dt);

    const Scalar disp_res =
        wall_l2_norm<Scalar>(wall_ops, wall_star.eta - iterate.first);
    const Scalar vel_res =
        wall_l2_norm<Scalar>(wall_ops, wall_star.eta_dot - iterate.second);
    history.push_back({j, disp_res, vel_res, fluid_j.report.iterations});

    if (disp_res + vel_res <= cfg.tau) {
      CoupledStepResult<Scalar> out;
      out.state.wall = std::move(wall_star);
      out.state.fluid = std::move(fluid_j.state);
      out.state.ale = build_slab(out.state.wall.eta);
      out.state.step_index = state.step_index + 1;
      out.history = std::move(history);
      return out;
    }
    iterate = relax<Scalar>(iterate, {wall_star.eta, wall_star.eta_dot},
                            cfg.theta);
  }

  std::vector<std::array<double, 3>> diag;
  diag.reserve(history.size());
  for (const auto& r : history)
    diag.push_back({static_cast<double>(r.j),
                    static_cast<double>(r.disp_residual),
                    static_cast<double>(r.vel_residual)});
  throw CouplingFailure(
      "coupled step " + std::to_string(state.step_index + 1) + " at t = " +
          std::to_string(t_old + dt) + " did not converge in " +
          std::to_string(cfg.max_subiters) + " subiterations (last residual " +
          std::to_string(history.back().disp_residual +
                         history.back().vel_residual) +
          ", tau " + std::to_string(cfg.tau) + ")",
      std::move(diag));
}

}  // namespace vessel
