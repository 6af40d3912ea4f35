#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "vessel/ale.hpp"
#include "vessel/fem.hpp"
#include "vessel/mesh.hpp"
#include "vessel/sparse.hpp"
#include "vessel/types.hpp"

namespace vessel {

/// Fluid unknowns on the current configuration. The pressure is stored in
/// kinematic form relative to the external pressure: p = (p_phys - p0)/rho,
/// so the rest state is identically zero. External reports convert back.
template <typename Scalar>
struct FluidState {
  NodalField2<Scalar> u;  // velocity (cm/s), columns (z, r)
  VectorX<Scalar> p;      // kinematic relative pressure (cm^2/s^2)
  Scalar t = 0;           // time (s)
};

template <typename Scalar>
FluidState<Scalar> zero_fluid_state(Index num_nodes) {
  return {NodalField2<Scalar>::Zero(num_nodes, 2),
          VectorX<Scalar>::Zero(num_nodes), Scalar(0)};
}

template <typename Scalar>
struct FluidConfig {
  Scalar nu = Scalar(0.035);  // kinematic viscosity (cm^2/s), > 0
  Scalar rho = Scalar(1);     // fluid density (g/cm^3), > 0
  Vector2<Scalar> f_body = Vector2<Scalar>::Zero();  // body force (cm/s^2)
  Scalar stab_delta = Scalar(0.05);  // pressure stabilization weight, >= 0
  std::function<Scalar(Scalar)> inflow_pulse;  // t -> inflow pressure
                                               // (absolute, dyn/cm^2);
                                               // empty means constant p0
  Scalar p0 = Scalar(0);      // external pressure (dyn/cm^2)
  Scalar lin_tol = Scalar(1e-10);
  int lin_max_iters = -1;     // default cap when negative
};

template <typename Scalar>
struct FluidStepResult {
  FluidState<Scalar> state;
  SolverReport<Scalar> report;  // linear solver diagnostics of the step
};

namespace detail {

template <typename Scalar>
struct EdgeFrame {
  Scalar length;
  Vector2<Scalar> normal;  // outward unit normal
};

/// Length and outward normal of a boundary edge at the given coordinates.
/// Boundary edges walk the boundary counter-clockwise (domain on the left),
/// so the outward normal is the tangent rotated clockwise.
template <typename Scalar>
EdgeFrame<Scalar> edge_frame(const BoundaryEdge& e,
                             const NodalField2<Scalar>& coords) {
  const Vector2<Scalar> d =
      (coords.row(e.b) - coords.row(e.a)).transpose();
  const Scalar len = d.norm();
  return {len, Vector2<Scalar>(d[1] / len, -d[0] / len)};
}

template <typename Scalar>
Scalar longest_edge(const Vector2<Scalar>& p0, const Vector2<Scalar>& p1,
                    const Vector2<Scalar>& p2) {
  using std::max;
  return max((p1 - p0).norm(), max((p2 - p1).norm(), (p0 - p2).norm()));
}

}  // namespace detail

/// One implicit Euler step of the moving-domain momentum/continuity system.
///
/// Discretization: nodal ALE time derivative (u_new - u_old)/dt on matching
/// reference nodes, semi-implicit convection (u_old - w).grad(u_new), viscous
/// term nu*(grad u + grad u^T) against grad v, P1/P1 with a cell-fluctuation
/// pressure-gradient stabilization at weight delta*h^2/nu, everything
/// integrated on the t^{k+1} configuration. In/outflow sections carry normal-traction data via the
/// gradient-form boundary correction (the grad u^T flux is subtracted on
/// those sections), so the natural condition is nu du/dn - p n = -p_data n
/// and uniform-section data reproduces Poiseuille exactly. Wall nodes get
/// Dirichlet u = (0, wall_velocity); axis nodes slip (u_r = 0).
///
/// wall_velocity is indexed like mesh.wall_nodes(); outflow_pressure and the
/// inflow pulse are absolute physical pressures (dyn/cm^2).
template <typename Scalar>
FluidStepResult<Scalar> advance_fluid(const ReferenceMesh<Scalar>& mesh,
                                      const FluidState<Scalar>& state,
                                      const AleState<Scalar>& ale,
                                      const VectorX<Scalar>& wall_velocity,
                                      Scalar outflow_pressure,
                                      const FluidConfig<Scalar>& cfg) {
  const Index n = mesh.num_nodes();
  if (!(cfg.nu > Scalar(0)) || !(cfg.rho > Scalar(0)) ||
      !(cfg.stab_delta >= Scalar(0)))
    throw std::invalid_argument(
        "fluid config: need nu > 0, rho > 0, stab_delta >= 0");
  if (state.u.rows() != n || state.p.size() != n)
    throw std::invalid_argument("advance_fluid: state size mismatch");
  if (wall_velocity.size() != static_cast<Index>(mesh.wall_nodes().size()))
    throw std::invalid_argument(
        "advance_fluid: wall_velocity must match the wall grid");
  const Scalar dt = ale.dt;
  if (!(dt > Scalar(0)))
    throw std::invalid_argument("advance_fluid: ale.dt must be positive");

  const NodalField2<Scalar>& coords = ale.y_new;
  if (!(min_signed_area(mesh, coords) > Scalar(0)))
    throw MeshValidityError("advance_fluid: invalid mesh configuration");

  // Dof layout: u_z 0..n-1, u_r n..2n-1, p 2n..3n-1.
  const auto dof_u = [n](Index node, int comp) { return comp * n + node; };
  const auto dof_p = [n](Index node) { return 2 * n + node; };
  const Index ndof = 3 * n;


  std::vector<Triplet<Scalar>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 200);
  VectorX<Scalar> rhs = VectorX<Scalar>::Zero(ndof);

  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const Vector2<Scalar> p0 = coords.row(tri[0]).transpose();
    const Vector2<Scalar> p1 = coords.row(tri[1]).transpose();
    const Vector2<Scalar> p2 = coords.row(tri[2]).transpose();
    const auto g = triangle_geometry<Scalar>(p0, p1, p2);
    const Scalar A = g.area;

    // Convective velocity a = u_old - w and element consistent mass.
    Vector2<Scalar> a[3];
    for (int m = 0; m < 3; ++m)
      a[m] = (state.u.row(tri[m]) - ale.w.row(tri[m])).transpose();

    for (int i = 0; i < 3; ++i) {
      const Index ni = tri[i];
      for (int j = 0; j < 3; ++j) {
        const Index nj = tri[j];
        const Scalar mass_ij = A / Scalar(12) * (i == j ? Scalar(2) : Scalar(1));

        // Time term and right-hand side transport of the old velocity.
        for (int d = 0; d < 2; ++d) {
          trip.emplace_back(dof_u(ni, d), dof_u(nj, d), mass_ij / dt);
          rhs[dof_u(ni, d)] += mass_ij / dt * state.u(nj, d);
        }

        // Convection: integral of phi_i * (a . grad phi_j) via element mass.
        const Vector2<Scalar> a_avg =
            (A / Scalar(12)) *
            (a[0] + a[1] + a[2] + a[i]);  // sum_m M^e_im a_m
        const Scalar conv = g.grad[j].dot(a_avg);
        for (int d = 0; d < 2; ++d)
          trip.emplace_back(dof_u(ni, d), dof_u(nj, d), conv);

        // Viscous symmetric-gradient block.
        const Scalar lap = cfg.nu * A * g.grad[i].dot(g.grad[j]);
        for (int d = 0; d < 2; ++d) {
          trip.emplace_back(dof_u(ni, d), dof_u(nj, d), lap);
          for (int e = 0; e < 2; ++e)
            trip.emplace_back(dof_u(ni, d), dof_u(nj, e),
                              cfg.nu * A * g.grad[i][e] * g.grad[j][d]);
        }

        // Pressure gradient -p div v and continuity div u q (skew pair).
        for (int d = 0; d < 2; ++d) {
          trip.emplace_back(dof_u(ni, d), dof_p(nj),
                            -(A / Scalar(3)) * g.grad[i][d]);
          trip.emplace_back(dof_p(ni), dof_u(nj, d),
                            (A / Scalar(3)) * g.grad[j][d]);
        }

      }
      for (int d = 0; d < 2; ++d)
        rhs[dof_u(ni, d)] += cfg.f_body[d] * A / Scalar(3);
    }
  }

  // Pressure stabilization: per quad cell (triangle pair 2k, 2k+1), penalize
  // the fluctuation of grad p about its cell mean at weight delta*h^2/nu.
  // The operator has zero row and column sums (global mass balance stays
  // exact) and annihilates globally linear pressure (uniform-gradient flows
  // see no perturbation), while the checkerboard mode, whose gradient flips
  // inside every cell, is penalized at full strength.
  for (Index t = 0; t + 1 < mesh.num_triangles(); t += 2) {
    TriangleGeometry<Scalar> g2[2];
    Scalar h_cell = Scalar(0);
    for (int s = 0; s < 2; ++s) {
      const auto tri = mesh.triangles().row(t + s);
      const Vector2<Scalar> p0 = coords.row(tri[0]).transpose();
      const Vector2<Scalar> p1 = coords.row(tri[1]).transpose();
      const Vector2<Scalar> p2 = coords.row(tri[2]).transpose();
      g2[s] = triangle_geometry<Scalar>(p0, p1, p2);
      h_cell = std::max(h_cell, detail::longest_edge(p0, p1, p2));
    }
    const Scalar stab = cfg.stab_delta * h_cell * h_cell / cfg.nu;
    const Scalar A_cell = g2[0].area + g2[1].area;
    for (int si = 0; si < 2; ++si)
      for (int sj = 0; sj < 2; ++sj) {
        const Scalar w = (si == sj ? g2[si].area : Scalar(0)) -
                         g2[si].area * g2[sj].area / A_cell;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            trip.emplace_back(dof_p(mesh.triangles()(t + si, i)),
                              dof_p(mesh.triangles()(t + sj, j)),
                              stab * w * g2[si].grad[i].dot(g2[sj].grad[j]));
      }
  }

  // In/outflow sections: gradient-form correction and traction data, both in
  // kinematic relative pressure units.
  const Scalar t_new = state.t + dt;
  const Scalar p_in_abs = cfg.inflow_pulse ? cfg.inflow_pulse(t_new) : cfg.p0;
  const Scalar p_data[2] = {(p_in_abs - cfg.p0) / cfg.rho,
                            (outflow_pressure - cfg.p0) / cfg.rho};
  bool has_open_section = false;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag != BoundaryTag::Inflow && e.tag != BoundaryTag::Outflow) continue;
    has_open_section = true;
    const auto frame = detail::edge_frame<Scalar>(e, coords);
    const auto tri = mesh.triangles().row(e.tri);
    const auto g = triangle_geometry<Scalar>(coords.row(tri[0]).transpose(),
                                             coords.row(tri[1]).transpose(),
                                             coords.row(tri[2]).transpose());
    const Scalar w_node = frame.length / Scalar(2);
    const Scalar p_val = p_data[e.tag == BoundaryTag::Outflow ? 1 : 0];

    for (Index node : {e.a, e.b}) {
      for (int d = 0; d < 2; ++d) {
        rhs[dof_u(node, d)] -= p_val * frame.normal[d] * w_node;
        // Subtract the grad u^T flux so only nu du/dn - p n remains natural.
        for (int j = 0; j < 3; ++j)
          for (int q = 0; q < 2; ++q)
            trip.emplace_back(dof_u(node, d), dof_u(tri[j], q),
                              -cfg.nu * frame.normal[q] * g.grad[j][d] * w_node);
      }
    }
  }

  // Dirichlet rows: axis slip first, wall data second (wall wins on shared
  // nodes). Rows are replaced by the identity; columns stay, which keeps the
  // prescribed values correctly coupled into neighbouring equations.
  std::vector<char> is_dirichlet(static_cast<std::size_t>(ndof), 0);
  VectorX<Scalar> dirichlet = VectorX<Scalar>::Zero(ndof);
  const auto prescribe = [&](Index dof, Scalar value) {
    is_dirichlet[static_cast<std::size_t>(dof)] = 1;
    dirichlet[dof] = value;
  };
  for (const auto& e : mesh.boundary_edges())
    if (e.tag == BoundaryTag::Axis)
      for (Index node : {e.a, e.b}) prescribe(dof_u(node, 1), Scalar(0));
  const auto& wall = mesh.wall_nodes();
  for (std::size_t k = 0; k < wall.size(); ++k) {
    prescribe(dof_u(wall[k], 0), Scalar(0));
    prescribe(dof_u(wall[k], 1), wall_velocity[static_cast<Index>(k)]);
  }
  // Fully enclosed flows leave the pressure defined only up to a constant.
  if (!has_open_section) prescribe(dof_p(0), Scalar(0));

  std::vector<Triplet<Scalar>> kept;
  kept.reserve(trip.size() + static_cast<std::size_t>(ndof));
  for (const auto& tr : trip)
    if (!is_dirichlet[static_cast<std::size_t>(tr.row())]) kept.push_back(tr);
  for (Index d = 0; d < ndof; ++d)
    if (is_dirichlet[static_cast<std::size_t>(d)]) {
      kept.emplace_back(d, d, Scalar(1));
      rhs[d] = dirichlet[d];
    }

  const SparseMatrix<Scalar> A = assemble<Scalar>(ndof, ndof, kept);
  auto [x, report] = solve_general<Scalar>(A, rhs, cfg.lin_tol, cfg.lin_max_iters);
  if (!report.converged)
    throw SolverError("fluid step linear solve did not converge (residual " +
                      std::to_string(report.final_residual) + " after " +
                      std::to_string(report.iterations) + " iterations)");

  FluidStepResult<Scalar> out;
  out.state.u.resize(n, 2);
  out.state.u.col(0) = x.segment(0, n);
  out.state.u.col(1) = x.segment(n, n);
  out.state.p = x.segment(2 * n, n);
  out.state.t = t_new;
  out.report = report;
  return out;
}

/// Radial wall forcing H = g*(rho/(rho_w h0))*[(p - p0) n - T(u) n] . e_r
/// evaluated per deformed wall edge and averaged to the wall grid nodes.
/// g is the deformed/reference edge-length ratio, n the outward wall normal,
/// and the stress bracket is evaluated from the stored kinematic fields
/// (p and nu*(grad u + grad u^T)) scaled back by rho.
template <typename Scalar>
VectorX<Scalar> wall_traction_forcing(const ReferenceMesh<Scalar>& mesh,
                                      const FluidState<Scalar>& state,
                                      const AleState<Scalar>& ale,
                                      const PhysicalParams<Scalar>& params) {
  const auto& wall = mesh.wall_nodes();
  std::vector<Index> wall_index_of(static_cast<std::size_t>(mesh.num_nodes()),
                                   -1);
  for (std::size_t k = 0; k < wall.size(); ++k)
    wall_index_of[static_cast<std::size_t>(wall[k])] = static_cast<Index>(k);

  VectorX<Scalar> H = VectorX<Scalar>::Zero(static_cast<Index>(wall.size()));
  VectorX<Scalar> count = VectorX<Scalar>::Zero(static_cast<Index>(wall.size()));
  const NodalField2<Scalar>& coords = ale.y_new;
  const Scalar scale = params.rho / (params.rho_w * params.h0);

  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag != BoundaryTag::Wall) continue;
    const auto frame = detail::edge_frame<Scalar>(e, coords);
    const Scalar ref_len =
        (mesh.nodes().row(e.b) - mesh.nodes().row(e.a)).norm();
    const Scalar metric_g = frame.length / ref_len;

    const auto tri = mesh.triangles().row(e.tri);
    const auto geo = triangle_geometry<Scalar>(coords.row(tri[0]).transpose(),
                                               coords.row(tri[1]).transpose(),
                                               coords.row(tri[2]).transpose());
    Eigen::Matrix<Scalar, 2, 2> grad_u = Eigen::Matrix<Scalar, 2, 2>::Zero();
    for (int m = 0; m < 3; ++m)
      grad_u += state.u.row(tri[m]).transpose() * geo.grad[m].transpose();
    const Eigen::Matrix<Scalar, 2, 2> T_kin =
        params.nu * (grad_u + grad_u.transpose());

    const Scalar p_edge = (state.p[e.a] + state.p[e.b]) / Scalar(2);
    const Scalar traction_r =
        p_edge * frame.normal[1] - (T_kin * frame.normal)[1];
    const Scalar H_edge = metric_g * scale * traction_r;

    for (Index node : {e.a, e.b}) {
      const Index k = wall_index_of[static_cast<std::size_t>(node)];
      if (k < 0)
        throw std::logic_error("wall edge endpoint missing from wall grid");
      H[k] += H_edge;
      count[k] += Scalar(1);
    }
  }
  for (Index k = 0; k < H.size(); ++k)
    if (count[k] > Scalar(0)) H[k] /= count[k];
  return H;
}

/// Section flow rate: trapezoidal integral of u . n over edges with the given
/// tag on the current configuration; positive means out of the domain.
template <typename Scalar>
Scalar flow_rate(const ReferenceMesh<Scalar>& mesh,
                 const FluidState<Scalar>& state, const AleState<Scalar>& ale,
                 BoundaryTag section) {
  if (section != BoundaryTag::Inflow && section != BoundaryTag::Outflow)
    throw std::invalid_argument("flow_rate: section must be Inflow or Outflow");
  Scalar Q = 0;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag != section) continue;
    const auto frame = detail::edge_frame<Scalar>(e, ale.y_new);
    const Scalar un_a = state.u.row(e.a).dot(frame.normal);
    const Scalar un_b = state.u.row(e.b).dot(frame.normal);
    Q += frame.length / Scalar(2) * (un_a + un_b);
  }
  return Q;
}

/// Length-weighted mean physical pressure (dyn/cm^2) over a tagged section.
template <typename Scalar>
Scalar section_mean_pressure(const ReferenceMesh<Scalar>& mesh,
                             const FluidState<Scalar>& state,
                             const AleState<Scalar>& ale, BoundaryTag section,
                             Scalar rho, Scalar p0) {
  Scalar total = 0, length = 0;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag != section) continue;
    const auto frame = detail::edge_frame<Scalar>(e, ale.y_new);
    total += frame.length * (state.p[e.a] + state.p[e.b]) / Scalar(2);
    length += frame.length;
  }
  if (length == Scalar(0)) return p0;
  return rho * (total / length) + p0;
}

/// L2 norm of the elementwise divergence on the given configuration.
template <typename Scalar>
Scalar divergence_l2(const ReferenceMesh<Scalar>& mesh,
                     const FluidState<Scalar>& state,
                     const NodalField2<Scalar>& coords) {
  Scalar acc = 0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const auto g = triangle_geometry<Scalar>(coords.row(tri[0]).transpose(),
                                             coords.row(tri[1]).transpose(),
                                             coords.row(tri[2]).transpose());
    Scalar div = 0;
    for (int m = 0; m < 3; ++m)
      div += state.u(tri[m], 0) * g.grad[m][0] + state.u(tri[m], 1) * g.grad[m][1];
    acc += g.area * div * div;
  }
  return std::sqrt(acc);
}

/// L2 norm of the velocity gradient on the given configuration.
template <typename Scalar>
Scalar gradient_l2(const ReferenceMesh<Scalar>& mesh,
                   const FluidState<Scalar>& state,
                   const NodalField2<Scalar>& coords) {
  Scalar acc = 0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const auto g = triangle_geometry<Scalar>(coords.row(tri[0]).transpose(),
                                             coords.row(tri[1]).transpose(),
                                             coords.row(tri[2]).transpose());
    Eigen::Matrix<Scalar, 2, 2> grad_u = Eigen::Matrix<Scalar, 2, 2>::Zero();
    for (int m = 0; m < 3; ++m)
      grad_u += state.u.row(tri[m]).transpose() * g.grad[m].transpose();
    acc += g.area * grad_u.squaredNorm();
  }
  return std::sqrt(acc);
}

}  // namespace vessel
