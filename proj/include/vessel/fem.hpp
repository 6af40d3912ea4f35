#pragma once

#include "vessel/mesh.hpp"
#include "vessel/sparse.hpp"
#include "vessel/types.hpp"

namespace vessel {

/// Geometry of one linear triangle: area and the (constant) gradients of its
/// three nodal basis functions, in the coordinate system of the given points.
template <typename Scalar>
struct TriangleGeometry {
  Scalar area;
  Vector2<Scalar> grad[3];
};

template <typename Scalar>
TriangleGeometry<Scalar> triangle_geometry(const Vector2<Scalar>& p0,
                                           const Vector2<Scalar>& p1,
                                           const Vector2<Scalar>& p2) {
  TriangleGeometry<Scalar> g;
  g.area = triangle_signed_area(p0, p1, p2);
  const Scalar inv2A = Scalar(1) / (Scalar(2) * g.area);
  g.grad[0] = Vector2<Scalar>(p1[1] - p2[1], p2[0] - p1[0]) * inv2A;
  g.grad[1] = Vector2<Scalar>(p2[1] - p0[1], p0[0] - p2[0]) * inv2A;
  g.grad[2] = Vector2<Scalar>(p0[1] - p1[1], p1[0] - p0[0]) * inv2A;
  return g;
}

/// P1 stiffness matrix (grad-grad bilinear form) on the given coordinates.
template <typename Scalar, typename Derived>
SparseMatrix<Scalar> assemble_p1_stiffness(
    const ReferenceMesh<Scalar>& mesh,
    const Eigen::MatrixBase<Derived>& coords) {
  std::vector<Triplet<Scalar>> trip;
  trip.reserve(9 * mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const auto g = triangle_geometry<Scalar>(coords.row(tri[0]).transpose(),
                                             coords.row(tri[1]).transpose(),
                                             coords.row(tri[2]).transpose());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tri[i], tri[j], g.area * g.grad[i].dot(g.grad[j]));
  }
  return assemble<Scalar>(mesh.num_nodes(), mesh.num_nodes(), trip);
}

}  // namespace vessel
