#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "vessel/fluid.hpp"
#include "vessel/mesh.hpp"
#include "vessel/types.hpp"

namespace vessel {

namespace detail {

/// Shortest round-trip decimal form; keeps snapshot bytes reproducible.
inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace detail

/// Legacy ASCII VTK unstructured-grid snapshot of one fluid state on its
/// current configuration: triangle connectivity, nodal velocity vectors, and
/// the physical pressure (rho * p_stored + p0, dyn/cm^2).
template <typename Scalar>
void write_vtk_snapshot(std::ostream& out, const ReferenceMesh<Scalar>& mesh,
                        const NodalField2<Scalar>& coords,
                        const FluidState<Scalar>& state, Scalar rho,
                        Scalar p0) {
  const Index n = mesh.num_nodes();
  const Index m = mesh.num_triangles();
  out << "# vtk DataFile Version 3.0\n"
      << "compliant vessel flow t=" << detail::fmt_g(double(state.t)) << "\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << n << " double\n";
  for (Index i = 0; i < n; ++i)
    out << detail::fmt_g(double(coords(i, 0))) << " "
        << detail::fmt_g(double(coords(i, 1))) << " 0\n";

  out << "CELLS " << m << " " << 4 * m << "\n";
  for (Index t = 0; t < m; ++t)
    out << "3 " << mesh.triangles()(t, 0) << " " << mesh.triangles()(t, 1)
        << " " << mesh.triangles()(t, 2) << "\n";
  out << "CELL_TYPES " << m << "\n";
  for (Index t = 0; t < m; ++t) out << "5\n";

  out << "POINT_DATA " << n << "\n"
      << "VECTORS velocity double\n";
  for (Index i = 0; i < n; ++i)
    out << detail::fmt_g(double(state.u(i, 0))) << " "
        << detail::fmt_g(double(state.u(i, 1))) << " 0\n";
  out << "SCALARS pressure double 1\n"
      << "LOOKUP_TABLE default\n";
  for (Index i = 0; i < n; ++i)
    out << detail::fmt_g(double(rho * state.p[i] + p0)) << "\n";
}

}  // namespace vessel
