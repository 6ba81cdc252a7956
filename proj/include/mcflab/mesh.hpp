#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mcflab/error.hpp"

namespace mcflab {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Closed, consistently oriented triangle surface. Face winding is
/// counter-clockwise seen from outside (outward normals).
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
};

double face_area(const TriMesh& mesh, int f);
Vec3 face_normal(const TriMesh& mesh, int f);  // unit
double total_area(const TriMesh& mesh);
double signed_volume(const TriMesh& mesh);
double mean_edge_length(const TriMesh& mesh);

/// 4*sqrt(3)*area / (sum of squared edge lengths); 1 for equilateral.
double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c);
double min_triangle_quality(const TriMesh& mesh);

TriMesh scaled(const TriMesh& mesh, double s);
TriMesh transformed(const TriMesh& mesh, const Eigen::Matrix3d& rotation, const Vec3& shift);

/// Flips every face when the enclosed signed volume is negative.
void orient_outward(TriMesh& mesh);

/// Adjacency built once per face list. Construction validates the closed,
/// orientable, non-degenerate invariants and throws on violation.
class MeshTopology {
 public:
  explicit MeshTopology(const TriMesh& mesh);

  int num_vertices() const { return num_vertices_; }
  std::span<const int> one_ring(int v) const;
  std::span<const int> two_ring(int v) const;
  std::span<const int> vertex_faces(int v) const;
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }

  int num_components() const { return num_components_; }
  const std::vector<int>& component_of() const { return component_; }
  int euler_characteristic(int num_faces) const {
    return num_vertices_ - static_cast<int>(edges_.size()) + num_faces;
  }

 private:
  int num_vertices_ = 0;
  std::vector<int> ring1_offsets_, ring1_;
  std::vector<int> ring2_offsets_, ring2_;
  std::vector<int> vface_offsets_, vface_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<int> component_;
  int num_components_ = 0;
};

/// Checks every TriMesh invariant; throws Error on the first violation.
void validate(const TriMesh& mesh);

/// One mesh per connected component, vertices renumbered.
std::vector<TriMesh> split_components(const TriMesh& mesh);

}  // namespace mcflab
