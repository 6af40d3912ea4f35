#pragma once

#include <cmath>
#include <unordered_set>
#include <vector>

#include "vessel/fem.hpp"
#include "vessel/mesh.hpp"
#include "vessel/sparse.hpp"
#include "vessel/types.hpp"

namespace vessel {

/// One time slab of the piecewise-linear-in-time mesh motion: current
/// coordinates at both slab ends and the (slab-constant) domain velocity.
template <typename Scalar>
struct AleState {
  NodalField2<Scalar> y_old;  // coordinates at t^k (cm)
  NodalField2<Scalar> y_new;  // coordinates at t^{k+1} (cm)
  NodalField2<Scalar> w;      // domain velocity, w*dt = y_new - y_old (cm/s)
  Scalar dt = 0;              // slab length (s)
  Scalar t_old = 0;           // slab start time t^k (s)
};

/// Domain velocity of the linear-in-time map: (y_new - y_old)/dt per node.
template <typename Scalar>
NodalField2<Scalar> domain_velocity(const NodalField2<Scalar>& y_old,
                                    const NodalField2<Scalar>& y_new,
                                    Scalar dt) {
  if (!(dt > Scalar(0)))
    throw std::invalid_argument("domain_velocity: dt must be positive");
  return ((y_new - y_old) / dt).eval();
}

template <typename Scalar>
AleState<Scalar> make_ale_state(NodalField2<Scalar> y_old,
                                NodalField2<Scalar> y_new, Scalar dt,
                                Scalar t_old) {
  AleState<Scalar> s;
  s.w = domain_velocity(y_old, y_new, dt);
  s.y_old = std::move(y_old);
  s.y_new = std::move(y_new);
  s.dt = dt;
  s.t_old = t_old;
  return s;
}

/// Slab with the mesh frozen at the reference configuration (w = 0).
template <typename Scalar>
AleState<Scalar> rigid_ale_state(const ReferenceMesh<Scalar>& mesh, Scalar dt,
                                 Scalar t_old) {
  return make_ale_state<Scalar>(mesh.nodes(), mesh.nodes(), dt, t_old);
}

/// Coordinates at time t inside the slab, by linear interpolation:
/// ((t-t^k)/dt)*y_new - ((t-t^{k+1})/dt)*y_old.
template <typename Scalar>
NodalField2<Scalar> interpolate_map(const AleState<Scalar>& ale, Scalar t) {
  const Scalar t_new = ale.t_old + ale.dt;
  if (t < ale.t_old || t > t_new)
    throw std::domain_error("interpolate_map: t outside the current slab");
  if (t == ale.t_old) return ale.y_old;  // exact at the slab ends
  if (t == t_new) return ale.y_new;
  const Scalar s_new = (t - ale.t_old) / ale.dt;
  const Scalar s_old = (t - t_new) / ale.dt;
  return (s_new * ale.y_new - s_old * ale.y_old).eval();
}

/// Test utility for the chain rule linking the two time derivatives: returns
/// |(f_new - f_old)/dt - (df_dt_eulerian + w.grad_f)| for a manufactured
/// field sampled on one moving node. Not used in the solver path.
template <typename Scalar>
Scalar ale_derivative_check(Scalar f_old, Scalar f_new, Scalar dt,
                            Scalar df_dt_eulerian,
                            const Vector2<Scalar>& grad_f,
                            const Vector2<Scalar>& w) {
  return std::abs((f_new - f_old) / dt - (df_dt_eulerian + w.dot(grad_f)));
}

/// Dirichlet data for the mesh-motion problem from the wall displacement eta
/// (one value per wall node, ordered by z). Wall nodes move radially by eta;
/// inflow/outflow nodes stay at fixed z with the r-displacement interpolated
/// linearly between the axis (0) and the adjacent wall corner; axis nodes are
/// pinned. Only boundary rows of the returned field are meaningful.
template <typename Scalar>
NodalField2<Scalar> wall_boundary_displacement(const ReferenceMesh<Scalar>& mesh,
                                               const VectorX<Scalar>& eta) {
  const auto& wall = mesh.wall_nodes();
  if (eta.size() != static_cast<Index>(wall.size()))
    throw std::invalid_argument(
        "wall_boundary_displacement: eta size must match the wall grid");

  NodalField2<Scalar> disp = NodalField2<Scalar>::Zero(mesh.num_nodes(), 2);
  const Scalar R0 = mesh.radius();
  const Scalar eta_front = eta[0];
  const Scalar eta_back = eta[eta.size() - 1];

  for (const auto& e : mesh.boundary_edges()) {
    for (Index n : {e.a, e.b}) {
      switch (e.tag) {
        case BoundaryTag::Axis:
          disp.row(n).setZero();
          break;
        case BoundaryTag::Inflow:
          disp(n, 0) = Scalar(0);
          disp(n, 1) = mesh.nodes()(n, 1) / R0 * eta_front;
          break;
        case BoundaryTag::Outflow:
          disp(n, 0) = Scalar(0);
          disp(n, 1) = mesh.nodes()(n, 1) / R0 * eta_back;
          break;
        case BoundaryTag::Wall:
          break;  // set below from eta, indexed along the wall grid
      }
    }
  }
  for (std::size_t i = 0; i < wall.size(); ++i) {
    disp(wall[i], 0) = Scalar(0);
    disp(wall[i], 1) = eta[static_cast<Index>(i)];
  }
  return disp;
}

/// Harmonic extension of boundary displacement data into the interior: one
/// P1 Laplace solve per displacement component with Dirichlet data taken
/// from the boundary rows of boundary_disp. Returns the full nodal field.
template <typename Scalar>
NodalField2<Scalar> harmonic_extension(const ReferenceMesh<Scalar>& mesh,
                                       const NodalField2<Scalar>& boundary_disp,
                                       Scalar tol = Scalar(1e-13)) {
  const Index n = mesh.num_nodes();
  if (boundary_disp.rows() != n)
    throw std::invalid_argument(
        "harmonic_extension: boundary_disp must have one row per node");

  std::vector<bool> on_boundary(static_cast<std::size_t>(n), false);
  for (const auto& e : mesh.boundary_edges()) {
    on_boundary[static_cast<std::size_t>(e.a)] = true;
    on_boundary[static_cast<std::size_t>(e.b)] = true;
  }

  std::vector<Index> interior_of(static_cast<std::size_t>(n), -1);
  std::vector<Index> boundary_of(static_cast<std::size_t>(n), -1);
  Index n_int = 0, n_bnd = 0;
  for (Index i = 0; i < n; ++i) {
    if (on_boundary[static_cast<std::size_t>(i)])
      boundary_of[static_cast<std::size_t>(i)] = n_bnd++;
    else
      interior_of[static_cast<std::size_t>(i)] = n_int++;
  }

  NodalField2<Scalar> disp = NodalField2<Scalar>::Zero(n, 2);
  for (Index i = 0; i < n; ++i)
    if (on_boundary[static_cast<std::size_t>(i)])
      disp.row(i) = boundary_disp.row(i);
  if (n_int == 0) return disp;

  // Split the stiffness form into interior-interior and interior-boundary
  // blocks; eliminating the Dirichlet block keeps the solve symmetric.
  std::vector<Triplet<Scalar>> trip_ii, trip_ib;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const auto g = triangle_geometry<Scalar>(
        mesh.nodes().row(tri[0]).transpose(),
        mesh.nodes().row(tri[1]).transpose(),
        mesh.nodes().row(tri[2]).transpose());
    for (int i = 0; i < 3; ++i) {
      const Index gi = tri[i];
      if (on_boundary[static_cast<std::size_t>(gi)]) continue;
      for (int j = 0; j < 3; ++j) {
        const Index gj = tri[j];
        const Scalar v = g.area * g.grad[i].dot(g.grad[j]);
        if (on_boundary[static_cast<std::size_t>(gj)])
          trip_ib.emplace_back(interior_of[static_cast<std::size_t>(gi)],
                               boundary_of[static_cast<std::size_t>(gj)], v);
        else
          trip_ii.emplace_back(interior_of[static_cast<std::size_t>(gi)],
                               interior_of[static_cast<std::size_t>(gj)], v);
      }
    }
  }
  const SparseMatrix<Scalar> K_ii = assemble<Scalar>(n_int, n_int, trip_ii);
  const SparseMatrix<Scalar> K_ib = assemble<Scalar>(n_int, n_bnd, trip_ib);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> g_bnd(n_bnd, 2);
  for (Index i = 0; i < n; ++i)
    if (on_boundary[static_cast<std::size_t>(i)])
      g_bnd.row(boundary_of[static_cast<std::size_t>(i)]) =
          boundary_disp.row(i);

  for (int c = 0; c < 2; ++c) {
    const VectorX<Scalar> rhs = -(K_ib * g_bnd.col(c));
    auto [x, report] = solve_spd<Scalar>(K_ii, rhs, tol);
    if (!report.converged)
      throw SolverError("harmonic_extension: Laplace solve did not converge "
                        "(residual " + std::to_string(report.final_residual) +
                        ")");
    for (Index i = 0; i < n; ++i)
      if (!on_boundary[static_cast<std::size_t>(i)])
        disp(i, c) = x[interior_of[static_cast<std::size_t>(i)]];
  }
  return disp;
}

/// Displaced coordinates mesh.nodes() + displacement, certified valid.
/// Throws MeshValidityError when any triangle area becomes non-positive.
template <typename Scalar>
NodalField2<Scalar> checked_coordinates(const ReferenceMesh<Scalar>& mesh,
                                        const NodalField2<Scalar>& displacement) {
  NodalField2<Scalar> coords = mesh.nodes() + displacement;
  const Scalar min_area = min_signed_area(mesh, coords);
  if (!(min_area > Scalar(0)))
    throw MeshValidityError(
        "mesh motion produced a non-positive triangle area (" +
        std::to_string(min_area) + ")");
  return coords;
}

}  // namespace vessel
