#include <algorithm>
#include <cmath>
#include <limits>

#include "mcflab/functionals.hpp"
#include "mcflab/geodesic.hpp"
#include "mcflab/necks.hpp"

namespace mcflab {

ReductionResult reduction_quantities(const TriMesh& mesh, const CurvatureField& curv, double Hbar,
                                     const std::vector<Tube>& tubes, int n_sources) {
  if (!(Hbar > 0.0)) throw Error(ErrorCode::InvalidParams, "reduction_quantities: Hbar must be positive");
  ReductionResult res;
  const int nv = mesh.num_vertices();

  std::vector<char> in_set(nv, 0);
  int first = -1;
  for (int v = 0; v < nv; ++v)
    if (curv.H[v] > 2.0 * Hbar) {
      in_set[v] = 1;
      ++res.superlevel_vertices;
      if (first < 0) first = v;
    }

  if (first >= 0) {
    const MeshTopology topo(mesh);
    const DistanceGraph graph(mesh, topo, true);
    const auto mask = graph.node_mask(in_set);
    // farthest-point sources inside the set; an unreached vertex (another
    // component) counts as infinitely far and is picked next
    std::vector<double> cover(nv, std::numeric_limits<double>::infinity());
    int next = first;
    for (int s = 0; s < n_sources && next >= 0; ++s) {
      const auto d = graph.dijkstra(next, nullptr, &mask);
      next = -1;
      double far = 0.0;
      for (int v = 0; v < nv; ++v) {
        if (!in_set[v]) continue;
        if (std::isfinite(d[v])) res.D_est = std::max(res.D_est, d[v]);
        cover[v] = std::min(cover[v], d[v]);
        if (cover[v] > far) {
          far = cover[v];
          next = v;
        }
      }
    }
  }

  for (const auto& tube : tubes) {
    if (tube.vertices.empty()) continue;
    const bool inside = std::all_of(tube.vertices.begin(), tube.vertices.end(),
                                    [&](int v) { return curv.H[v] > Hbar; });
    if (!inside) continue;
    ++res.tubes_considered;
    res.L_est = std::max(res.L_est, tube.length);
  }
  return res;
}

}  // namespace mcflab
