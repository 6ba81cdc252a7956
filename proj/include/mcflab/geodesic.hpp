#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "mcflab/mesh.hpp"

namespace mcflab {

enum class DiameterMethod { ExactGraph, Landmark };

/// Weighted graph whose shortest paths approximate intrinsic distance. With
/// midpoint refinement every edge midpoint becomes a node and the six nodes
/// of each face are joined by straight in-face segments.
class DistanceGraph {
 public:
  DistanceGraph(const TriMesh& mesh, const MeshTopology& topo, bool midpoint_refinement);

  int num_nodes() const { return static_cast<int>(offsets_.size()) - 1; }
  int num_mesh_vertices() const { return num_mesh_vertices_; }

  /// Distances from `source` to all nodes; optional predecessor array.
  /// Nodes with allowed[node] == 0 are never entered; search stops beyond
  /// max_distance (remaining nodes stay infinite).
  std::vector<double> dijkstra(int source, std::vector<int>* predecessor = nullptr,
                               const std::vector<char>* allowed = nullptr,
                               double max_distance = std::numeric_limits<double>::infinity()) const;

  /// Mask over graph nodes from a mask over mesh vertices: a midpoint node
  /// is allowed when both ends of its edge are.
  std::vector<char> node_mask(const std::vector<char>& vertex_mask) const;

 private:
  int num_mesh_vertices_ = 0;
  std::vector<int> offsets_;
  std::vector<int> targets_;
  std::vector<double> weights_;
  std::vector<std::array<int, 2>> midpoint_edges_;
};

struct DiameterOptions {
  DiameterMethod method = DiameterMethod::Landmark;
  int n_landmarks = 16;
  bool midpoint_refinement = true;
};

struct DiameterResult {
  double diameter = 0.0;
  int sources_used = 0;
  /// Upper bound on (true graph diameter - reported value): covering radius of
  /// the landmark set. Zero for the exact method.
  double sampling_gap = 0.0;
  /// Max ratio of graph distance to chord length over 2-ring pairs of a
  /// vertex sample; the graph metric overestimates smooth distance by at most
  /// roughly this factor.
  double graph_stretch = 1.0;
};

/// Throws DisconnectedMesh for meshes with more than one component.
DiameterResult intrinsic_diameter(const TriMesh& mesh, const DiameterOptions& opts = {});
DiameterResult intrinsic_diameter(const TriMesh& mesh, const MeshTopology& topo,
                                  const DiameterOptions& opts = {});

/// Greedy farthest-point sample of `count` vertices among those accepted by
/// `keep` (all when empty), seeded at the lowest-index accepted vertex.
std::vector<int> farthest_point_sample(const DistanceGraph& graph, int count,
                                       const std::function<bool(int)>& keep = {});

}  // namespace mcflab
