#include "mcflab/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace mcflab {

DistanceGraph::DistanceGraph(const TriMesh& mesh, const MeshTopology& topo, bool midpoint_refinement)
    : num_mesh_vertices_(mesh.num_vertices()) {
  const int nv = mesh.num_vertices();
  std::vector<std::vector<std::pair<int, double>>> adj;
  if (!midpoint_refinement) {
    adj.resize(nv);
    for (const auto& [a, b] : topo.edges()) {
      const double len = (mesh.vertices[a] - mesh.vertices[b]).norm();
      adj[a].push_back({b, len});
      adj[b].push_back({a, len});
    }
  } else {
    const auto& edges = topo.edges();
    midpoint_edges_ = edges;
    std::vector<Vec3> pos(mesh.vertices);
    std::map<std::pair<int, int>, int> edge_node;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      edge_node[{edges[e][0], edges[e][1]}] = nv + static_cast<int>(e);
      pos.push_back(0.5 * (mesh.vertices[edges[e][0]] + mesh.vertices[edges[e][1]]));
    }
    adj.resize(pos.size());
    auto link = [&](int a, int b) {
      const double len = (pos[a] - pos[b]).norm();
      adj[a].push_back({b, len});
      adj[b].push_back({a, len});
    };
    for (const auto& f : mesh.faces) {
      std::array<int, 6> nodes;
      for (int k = 0; k < 3; ++k) {
        nodes[k] = f[k];
        const int a = f[k], b = f[(k + 1) % 3];
        nodes[3 + k] = edge_node.at({std::min(a, b), std::max(a, b)});
      }
      for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) {
          if (j < 3) continue;  // vertex-vertex: covered by the two half edges
          if (i < 3) {
            const int k = j - 3;  // midpoint of edge f[k] -> f[k+1]
            const bool on_edge = (k == i || (k + 1) % 3 == i);
            // half edges lie on a mesh edge shared by two faces: add once
            if (on_edge && f[k] > f[(k + 1) % 3]) continue;
          }
          link(nodes[i], nodes[j]);
        }
    }
  }
  offsets_.assign(adj.size() + 1, 0);
  for (std::size_t i = 0; i < adj.size(); ++i) offsets_[i + 1] = offsets_[i] + static_cast<int>(adj[i].size());
  targets_.reserve(offsets_.back());
  weights_.reserve(offsets_.back());
  for (const auto& l : adj)
    for (const auto& [t, w] : l) {
      targets_.push_back(t);
      weights_.push_back(w);
    }
}

std::vector<char> DistanceGraph::node_mask(const std::vector<char>& vertex_mask) const {
  std::vector<char> mask(num_nodes(), 0);
  for (int v = 0; v < num_mesh_vertices_; ++v) mask[v] = vertex_mask[v];
  for (std::size_t e = 0; e < midpoint_edges_.size(); ++e)
    mask[num_mesh_vertices_ + e] = vertex_mask[midpoint_edges_[e][0]] && vertex_mask[midpoint_edges_[e][1]];
  return mask;
}

std::vector<double> DistanceGraph::dijkstra(int source, std::vector<int>* predecessor,
                                            const std::vector<char>* allowed, double max_distance) const {
  const int n = num_nodes();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  if (predecessor) predecessor->assign(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (int k = offsets_[u]; k < offsets_[u + 1]; ++k) {
      const int v = targets_[k];
      if (allowed && !(*allowed)[v]) continue;
      const double nd = d + weights_[k];
      if (nd > max_distance) continue;
      if (nd < dist[v]) {
        dist[v] = nd;
        if (predecessor) (*predecessor)[v] = u;
        pq.push({nd, v});
      }
    }
  }
  return dist;
}

std::vector<int> farthest_point_sample(const DistanceGraph& graph, int count,
                                       const std::function<bool(int)>& keep) {
  const int nv = graph.num_mesh_vertices();
  std::vector<int> chosen;
  int first = -1;
  for (int v = 0; v < nv && first < 0; ++v)
    if (!keep || keep(v)) first = v;
  if (first < 0 || count <= 0) return chosen;
  std::vector<double> mind(nv, std::numeric_limits<double>::infinity());
  int next = first;
  while (static_cast<int>(chosen.size()) < count && next >= 0) {
    chosen.push_back(next);
    const auto d = graph.dijkstra(next);
    next = -1;
    double best = 0.0;
    for (int v = 0; v < nv; ++v) {
      if (keep && !keep(v)) continue;
      mind[v] = std::min(mind[v], d[v]);
      if (mind[v] > best && std::isfinite(mind[v])) {
        best = mind[v];
        next = v;
      }
    }
  }
  return chosen;
}

namespace {

double graph_stretch(const TriMesh& mesh, const MeshTopology& topo, const DistanceGraph& graph) {
  const int nv = mesh.num_vertices();
  const int stride = std::max(1, nv / 32);
  double worst = 1.0;
  for (int v = 0; v < nv; v += stride) {
    double reach = 0.0;
    for (int u : topo.two_ring(v)) reach = std::max(reach, (mesh.vertices[u] - mesh.vertices[v]).norm());
    const auto d = graph.dijkstra(v, nullptr, nullptr, 4.0 * reach);
    for (int u : topo.two_ring(v)) {
      const double chord = (mesh.vertices[u] - mesh.vertices[v]).norm();
      if (chord > 0.0) worst = std::max(worst, d[u] / chord);
    }
  }
  return worst;
}

}  // namespace

DiameterResult intrinsic_diameter(const TriMesh& mesh, const MeshTopology& topo, const DiameterOptions& opts) {
  if (topo.num_components() != 1)
    throw Error(ErrorCode::DisconnectedMesh,
                "mesh has " + std::to_string(topo.num_components()) + " components; split it first");
  const DistanceGraph graph(mesh, topo, opts.midpoint_refinement);
  const int nv = mesh.num_vertices();
  DiameterResult res;
  auto eccentricity = [&](int s) {
    const auto d = graph.dijkstra(s);
    return *std::max_element(d.begin(), d.begin() + nv);
  };
  if (opts.method == DiameterMethod::ExactGraph) {
    for (int s = 0; s < nv; ++s) res.diameter = std::max(res.diameter, eccentricity(s));
    res.sources_used = nv;
    res.sampling_gap = 0.0;
  } else {
    // farthest-point landmarks; each landmark's distances also serve the max
    std::vector<double> cover(nv, std::numeric_limits<double>::infinity());
    int next = 0;
    const int count = std::min(opts.n_landmarks, nv);
    while (res.sources_used < count) {
      const auto d = graph.dijkstra(next);
      ++res.sources_used;
      double far = 0.0;
      for (int v = 0; v < nv; ++v) {
        cover[v] = std::min(cover[v], d[v]);
        res.diameter = std::max(res.diameter, d[v]);
        if (cover[v] > far) {
          far = cover[v];
          next = v;
        }
      }
    }
    res.sampling_gap = *std::max_element(cover.begin(), cover.end());
  }
  res.graph_stretch = graph_stretch(mesh, topo, graph);
  return res;
}

DiameterResult intrinsic_diameter(const TriMesh& mesh, const DiameterOptions& opts) {
  const MeshTopology topo(mesh);
  return intrinsic_diameter(mesh, topo, opts);
}

}  // namespace mcflab
