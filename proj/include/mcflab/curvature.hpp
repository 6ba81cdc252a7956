#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mcflab/mesh.hpp"

namespace mcflab {

/// Per-vertex second-order geometry. Curvatures are positive on convex
/// regions with respect to the outward normal (unit sphere: H = 2).
struct CurvatureField {
  std::vector<Vec3> normal;
  std::vector<Vec3> tangent_u;  // orthonormal frame of the shape operator
  std::vector<Vec3> tangent_v;
  std::vector<Eigen::Matrix2d> shape_operator;
  std::vector<double> lambda1;  // lambda1 <= lambda2
  std::vector<double> lambda2;
  std::vector<double> H;
  std::vector<double> normA;
  std::vector<double> vertex_area;

  int size() const { return static_cast<int>(H.size()); }
  double max_H() const;
  double max_A() const;
  int argmax_A() const;
};

/// Barycentric vertex areas (one third of each incident face).
std::vector<double> barycentric_areas(const TriMesh& mesh);

/// Area-weighted vertex normals (unit).
std::vector<Vec3> area_weighted_normals(const TriMesh& mesh, const MeshTopology& topo);

/// Two stages over the 2-ring. Normals come from a least-squares quadric in
/// the tangent plane (height h replaced by h*|t|^2/(|t|^2+h^2), exact on
/// spheres), fitted twice with the refined normal. The shape operator is
/// then the symmetric least-squares fit of how those normals vary across the
/// ring, which is second order on smooth surfaces.
CurvatureField estimate_curvature(const TriMesh& mesh, const MeshTopology& topo);
CurvatureField estimate_curvature(const TriMesh& mesh);

/// Sum over vertices of field(v) * vertex_area(v).
double surface_integral(std::span<const double> vertex_area, std::span<const double> field);
double surface_integral(const TriMesh& mesh, std::span<const double> field);

}  // namespace mcflab
