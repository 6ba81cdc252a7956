#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mcflab/scenario.hpp"

namespace mcflab {

namespace {

using Tri = std::array<Vec3, 3>;

bool separated_on(const Vec3& axis, const Tri& a, const Tri& b, double tol) {
  const double len = axis.norm();
  if (len < 1e-14) return false;
  double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
  for (int k = 0; k < 3; ++k) {
    const double pa = a[k].dot(axis) / len, pb = b[k].dot(axis) / len;
    amin = std::min(amin, pa);
    amax = std::max(amax, pa);
    bmin = std::min(bmin, pb);
    bmax = std::max(bmax, pb);
  }
  return amax <= bmin + tol || bmax <= amin + tol;
}

// Separating axis test; touching within tol counts as disjoint.
bool triangles_intersect(const Tri& a, const Tri& b, double tol) {
  const Vec3 ea[3] = {a[1] - a[0], a[2] - a[1], a[0] - a[2]};
  const Vec3 eb[3] = {b[1] - b[0], b[2] - b[1], b[0] - b[2]};
  const Vec3 na = ea[0].cross(ea[1]), nb = eb[0].cross(eb[1]);
  if (separated_on(na, a, b, tol) || separated_on(nb, a, b, tol)) return false;
  for (const auto& u : ea)
    for (const auto& v : eb)
      if (separated_on(u.cross(v), a, b, tol)) return false;
  for (const auto& u : ea)
    if (separated_on(na.cross(u), a, b, tol)) return false;
  for (const auto& v : eb)
    if (separated_on(nb.cross(v), a, b, tol)) return false;
  return true;
}

}  // namespace

std::array<int, 2> find_self_intersection(const TriMesh& mesh) {
  const int nf = mesh.num_faces();
  if (nf == 0) return {-1, -1};
  const double cell = 2.0 * mean_edge_length(mesh);
  const double tol = 1e-12 * cell;
  Vec3 lo = mesh.vertices[0];
  for (const auto& v : mesh.vertices) lo = lo.cwiseMin(v);

  auto key = [](long i, long j, long k) { return (i * 73856093L) ^ (j * 19349663L) ^ (k * 83492791L); };
  struct Cell {
    long i, j, k;
    std::vector<int> faces;
  };
  std::unordered_map<long, std::vector<Cell>> grid;
  std::vector<std::array<long, 6>> range(nf);
  for (int f = 0; f < nf; ++f) {
    Vec3 bmin = mesh.vertices[mesh.faces[f][0]], bmax = bmin;
    for (int c = 1; c < 3; ++c) {
      bmin = bmin.cwiseMin(mesh.vertices[mesh.faces[f][c]]);
      bmax = bmax.cwiseMax(mesh.vertices[mesh.faces[f][c]]);
    }
    for (int d = 0; d < 3; ++d) {
      range[f][d] = static_cast<long>(std::floor((bmin[d] - lo[d]) / cell));
      range[f][d + 3] = static_cast<long>(std::floor((bmax[d] - lo[d]) / cell));
    }
    for (long i = range[f][0]; i <= range[f][3]; ++i)
      for (long j = range[f][1]; j <= range[f][4]; ++j)
        for (long k = range[f][2]; k <= range[f][5]; ++k) {
          auto& bucket = grid[key(i, j, k)];
          auto it = std::find_if(bucket.begin(), bucket.end(),
                                 [&](const Cell& c) { return c.i == i && c.j == j && c.k == k; });
          if (it == bucket.end()) {
            bucket.push_back({i, j, k, {}});
            it = bucket.end() - 1;
          }
          it->faces.push_back(f);
        }
  }

  std::vector<int> cand;
  for (int f = 0; f < nf; ++f) {
    cand.clear();
    for (long i = range[f][0]; i <= range[f][3]; ++i)
      for (long j = range[f][1]; j <= range[f][4]; ++j)
        for (long k = range[f][2]; k <= range[f][5]; ++k)
          for (const auto& c : grid[key(i, j, k)])
            if (c.i == i && c.j == j && c.k == k)
              for (int g : c.faces)
                if (g > f) cand.push_back(g);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    const auto& F = mesh.faces[f];
    const Tri a = {mesh.vertices[F[0]], mesh.vertices[F[1]], mesh.vertices[F[2]]};
    for (int g : cand) {
      const auto& G = mesh.faces[g];
      bool shares = false;
      for (int x : F)
        for (int y : G) shares = shares || x == y;
      if (shares) continue;
      const Tri b = {mesh.vertices[G[0]], mesh.vertices[G[1]], mesh.vertices[G[2]]};
      if (triangles_intersect(a, b, tol)) return {f, g};
    }
  }
  return {-1, -1};
}

}  // namespace mcflab
