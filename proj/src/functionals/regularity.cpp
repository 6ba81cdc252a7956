#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "mcflab/functionals.hpp"

namespace mcflab {

namespace {

class PointGrid {
 public:
  PointGrid(const std::vector<Vec3>& pts, double cell) : pts_(pts), cell_(cell) {
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) cells_[key(index(pts[i]))].push_back(i);
  }

  template <class F>
  void query(const Vec3& c, double radius, F&& visit) const {
    const auto lo = index(c - Vec3::Constant(radius));
    const auto hi = index(c + Vec3::Constant(radius));
    const double r2 = radius * radius;
    for (long i = lo[0]; i <= hi[0]; ++i)
      for (long j = lo[1]; j <= hi[1]; ++j)
        for (long k = lo[2]; k <= hi[2]; ++k) {
          const auto it = cells_.find(key({i, j, k}));
          if (it == cells_.end()) continue;
          for (int p : it->second) {
            const double d2 = (pts_[p] - c).squaredNorm();
            if (d2 < r2) visit(p, std::sqrt(d2));
          }
        }
  }

 private:
  std::array<long, 3> index(const Vec3& p) const {
    return {static_cast<long>(std::floor(p.x() / cell_)), static_cast<long>(std::floor(p.y() / cell_)),
            static_cast<long>(std::floor(p.z() / cell_))};
  }
  static long key(const std::array<long, 3>& a) {
    return (a[0] * 73856093L) ^ (a[1] * 19349663L) ^ (a[2] * 83492791L);
  }

  const std::vector<Vec3>& pts_;
  double cell_;
  // colliding cells share a bucket; the distance test filters them
  std::unordered_map<long, std::vector<int>> cells_;
};

struct PairEntry {
  double rho;
  double normA;
  double cos_angle;
};

}  // namespace

RegularityScaleField regularity_scale(const FlowHistory& history, int k, const RegularityOptions& opts) {
  if (history.empty()) throw Error(ErrorCode::EmptyHistory, "regularity scale needs snapshots");
  if (k < 0 || k >= history.size()) throw Error(ErrorCode::TimeOutOfRange, "snapshot index out of range");
  if (!(opts.cap > 0.0) || !(opts.time_window > 0.0))
    throw Error(ErrorCode::InvalidParams, "regularity cap and window must be positive");

  const auto& center = history.states[k];
  const double tk = center.t;
  const double horizon = std::min(opts.time_window, opts.cap * opts.cap);
  std::vector<int> snaps;
  for (int j = 0; j < history.size(); ++j)
    if (std::abs(history.states[j].t - tk) < horizon) snaps.push_back(j);

  RegularityScaleField out;
  const int nv = center.mesh.num_vertices();
  out.r.assign(nv, opts.cap);
  out.coherence_limited.assign(nv, false);
  out.t_lo = history.states[snaps.front()].t;
  out.t_hi = history.states[snaps.back()].t;
  out.window_truncated =
      history.front().t > tk - opts.time_window || history.back().t < tk + opts.time_window;

  const double cell = std::max(4.0 * mean_edge_length(center.mesh), 0.25 * opts.cap);
  std::vector<PointGrid> grids;
  grids.reserve(snaps.size());
  for (int j : snaps) grids.emplace_back(history.states[j].mesh.vertices, cell);

  const double cos_limit = std::cos(opts.coherence_angle_deg * std::numbers::pi / 180.0);
  std::vector<PairEntry> pairs;
  for (int v = 0; v < nv; ++v) {
    const Vec3& x = center.mesh.vertices[v];
    const Vec3& n = center.curv.normal[v];
    double M = center.curv.normA[v];
    const double rmax = M > 0.0 ? std::min(opts.cap, 1.0 / M) : opts.cap;
    pairs.clear();
    for (std::size_t s = 0; s < snaps.size(); ++s) {
      const auto& st = history.states[snaps[s]];
      const double dt_root = std::sqrt(std::abs(st.t - tk));
      if (dt_root >= rmax) continue;
      grids[s].query(x, rmax, [&](int u, double dist) {
        pairs.push_back({std::max(dist, dt_root), st.curv.normA[u], st.curv.normal[u].dot(n)});
      });
    }
    std::sort(pairs.begin(), pairs.end(), [](const PairEntry& a, const PairEntry& b) { return a.rho < b.rho; });
    // M is the sup over pairs strictly closer than p; the open ball of
    // radius prev excludes p, so the answer never drops below prev
    double r = -1.0, prev = 0.0;
    for (const auto& p : pairs) {
      if (M * p.rho >= 1.0) {
        r = std::max(prev, 1.0 / M);
        break;
      }
      if (p.rho >= opts.cap) break;
      if (p.cos_angle < cos_limit) {
        r = p.rho;
        out.coherence_limited[v] = true;
        break;
      }
      M = std::max(M, p.normA);
      prev = p.rho;
    }
    if (r < 0.0) r = std::max(prev, M > 0.0 ? std::min(opts.cap, 1.0 / M) : opts.cap);
    out.r[v] = r;
    out.spatial_radius = std::max(out.spatial_radius, rmax);
  }
  return out;
}

double regularity_integral(const FlowHistory& history, int k, const RegularityScaleField& field) {
  const auto& area = history.states.at(k).curv.vertex_area;
  std::vector<double> inv(field.r.size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / field.r[i];
  return surface_integral(area, inv);
}

}  // namespace mcflab
