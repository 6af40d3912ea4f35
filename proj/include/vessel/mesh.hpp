#pragma once

#include <algorithm>
#include <vector>

#include "vessel/types.hpp"

namespace vessel {

enum class BoundaryTag { Inflow, Outflow, Wall, Axis };

/// Boundary edge of the triangulation. Node order (a, b) walks the boundary
/// counter-clockwise (fluid on the left); tri is the owning triangle.
struct BoundaryEdge {
  Index a = 0;
  Index b = 0;
  BoundaryTag tag = BoundaryTag::Wall;
  Index tri = 0;
};

/// Immutable structured triangulation of the reference half-channel
/// [0,L] x [0,R0] in (z, r) coordinates. Safe to share across threads.
template <typename Scalar>
class ReferenceMesh {
 public:
  ReferenceMesh(NodalField2<Scalar> nodes,
                Eigen::Matrix<Index, Eigen::Dynamic, 3> triangles,
                std::vector<BoundaryEdge> boundary_edges,
                std::vector<Index> wall_nodes, Scalar length, Scalar radius)
      : nodes_(std::move(nodes)),
        triangles_(std::move(triangles)),
        boundary_edges_(std::move(boundary_edges)),
        wall_nodes_(std::move(wall_nodes)),
        length_(length),
        radius_(radius) {}

  Index num_nodes() const { return nodes_.rows(); }
  Index num_triangles() const { return triangles_.rows(); }

  const NodalField2<Scalar>& nodes() const { return nodes_; }
  const Eigen::Matrix<Index, Eigen::Dynamic, 3>& triangles() const {
    return triangles_;
  }
  const std::vector<BoundaryEdge>& boundary_edges() const {
    return boundary_edges_;
  }

  /// Wall-node indices ordered by increasing z; the trace of the fluid
  /// triangulation on the wall coincides node-for-node with this grid.
  const std::vector<Index>& wall_nodes() const { return wall_nodes_; }

  Scalar length() const { return length_; }
  Scalar radius() const { return radius_; }

  bool is_boundary_node(Index n) const {
    for (const auto& e : boundary_edges_)
      if (e.a == n || e.b == n) return true;
    return false;
  }

 private:
  NodalField2<Scalar> nodes_;
  Eigen::Matrix<Index, Eigen::Dynamic, 3> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<Index> wall_nodes_;
  Scalar length_;
  Scalar radius_;
};

template <typename Scalar>
Scalar triangle_signed_area(const Vector2<Scalar>& p0,
                            const Vector2<Scalar>& p1,
                            const Vector2<Scalar>& p2) {
  return Scalar(0.5) * ((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                        (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

/// Structured triangulation of [0,L] x [0,R0]: nz x nr rectangles, each split
/// along the (i,j)-(i+1,j+1) diagonal into two right (hence non-obtuse)
/// triangles. Boundary tags: z=0 Inflow, z=L Outflow, r=0 Axis, r=R0 Wall.
/// Triangles 2k and 2k+1 are the two halves of one rectangle; consumers may
/// rely on this pairing.
template <typename Scalar>
ReferenceMesh<Scalar> build_channel_mesh(Scalar length_L, Scalar radius_R0,
                                         Index nz, Index nr) {
  if (!(length_L > Scalar(0)) || !(radius_R0 > Scalar(0)))
    throw std::invalid_argument("build_channel_mesh: dimensions must be positive");
  if (nz < 1 || nr < 1)
    throw std::invalid_argument("build_channel_mesh: need nz >= 1 and nr >= 1");

  const Index nnz = nz + 1, nnr = nr + 1;
  const auto node_id = [nnz](Index i, Index j) { return j * nnz + i; };

  NodalField2<Scalar> nodes(nnz * nnr, 2);
  for (Index j = 0; j < nnr; ++j)
    for (Index i = 0; i < nnz; ++i) {
      nodes(node_id(i, j), 0) = length_L * Scalar(i) / Scalar(nz);
      nodes(node_id(i, j), 1) = radius_R0 * Scalar(j) / Scalar(nr);
    }

  Eigen::Matrix<Index, Eigen::Dynamic, 3> tris(2 * nz * nr, 3);
  for (Index j = 0; j < nr; ++j)
    for (Index i = 0; i < nz; ++i) {
      const Index t = 2 * (j * nz + i);
      tris.row(t) << node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1);
      tris.row(t + 1) << node_id(i, j), node_id(i + 1, j + 1), node_id(i, j + 1);
    }

  std::vector<BoundaryEdge> edges;
  edges.reserve(2 * (nz + nr));
  for (Index i = 0; i < nz; ++i)  // axis, walking +z
    edges.push_back({node_id(i, 0), node_id(i + 1, 0), BoundaryTag::Axis,
                     2 * (0 * nz + i)});
  for (Index j = 0; j < nr; ++j)  // outflow, walking +r
    edges.push_back({node_id(nz, j), node_id(nz, j + 1), BoundaryTag::Outflow,
                     2 * (j * nz + nz - 1)});
  for (Index i = nz; i > 0; --i)  // wall, walking -z
    edges.push_back({node_id(i, nr), node_id(i - 1, nr), BoundaryTag::Wall,
                     2 * ((nr - 1) * nz + i - 1) + 1});
  for (Index j = nr; j > 0; --j)  // inflow, walking -r
    edges.push_back({node_id(0, j), node_id(0, j - 1), BoundaryTag::Inflow,
                     2 * ((j - 1) * nz + 0) + 1});

  std::vector<Index> wall;
  wall.reserve(nnz);
  for (Index i = 0; i < nnz; ++i) wall.push_back(node_id(i, nr));

  return ReferenceMesh<Scalar>(std::move(nodes), std::move(tris),
                               std::move(edges), std::move(wall), length_L,
                               radius_R0);
}

/// Minimum signed triangle area of the mesh evaluated at the given nodal
/// coordinates; a positive value certifies an orientation-preserving map.
template <typename Scalar, typename Derived>
Scalar min_signed_area(const ReferenceMesh<Scalar>& mesh,
                       const Eigen::MatrixBase<Derived>& displaced_coords) {
  Scalar min_area = std::numeric_limits<Scalar>::max();
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const Vector2<Scalar> p0 = displaced_coords.row(tri[0]).transpose();
    const Vector2<Scalar> p1 = displaced_coords.row(tri[1]).transpose();
    const Vector2<Scalar> p2 = displaced_coords.row(tri[2]).transpose();
    min_area = std::min(min_area, triangle_signed_area(p0, p1, p2));
  }
  return min_area;
}

/// Total signed area of the triangulation at the given coordinates.
template <typename Scalar, typename Derived>
Scalar domain_area(const ReferenceMesh<Scalar>& mesh,
                   const Eigen::MatrixBase<Derived>& coords) {
  Scalar area = 0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const Vector2<Scalar> p0 = coords.row(tri[0]).transpose();
    const Vector2<Scalar> p1 = coords.row(tri[1]).transpose();
    const Vector2<Scalar> p2 = coords.row(tri[2]).transpose();
    area += triangle_signed_area(p0, p1, p2);
  }
  return area;
}

}  // namespace vessel
