#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcflab/necks.hpp"

namespace mcflab {

namespace {

double angle_deg(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(std::abs(a.dot(b)), 0.0, 1.0)) * 180.0 / std::numbers::pi;
}

Vec3 catmull_rom(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3, double t) {
  const double t2 = t * t, t3 = t2 * t;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

}  // namespace

std::vector<Tube> assemble_tubes(const TriMesh& mesh, const std::vector<NeckFit>& necks, const TubeOptions& opts) {
  if (!(opts.window > 0.0)) throw Error(ErrorCode::InvalidParams, "window must be positive");
  const int n = static_cast<int>(necks.size());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double reach = std::min(necks[i].radius, necks[j].radius) / opts.window;
      if ((necks[i].center - necks[j].center).norm() < reach &&
          angle_deg(necks[i].axis, necks[j].axis) < opts.max_axis_angle_deg) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }

  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    std::vector<int> stack = {i};
    comp[i] = ncomp;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (int b : adj[a])
        if (comp[b] < 0) {
          comp[b] = ncomp;
          stack.push_back(b);
        }
    }
    ++ncomp;
  }

  std::vector<bool> visited(n, false);
  auto walk = [&](int start, Vec3 dir, std::vector<int>& chain, Vec3& final_dir) {
    int cur = start;
    while (true) {
      int best = -1;
      double best_proj = 1e300;
      for (int j : adj[cur]) {
        if (visited[j]) continue;
        const double proj = (necks[j].center - necks[cur].center).dot(dir);
        if (proj > 0.0 && proj < best_proj) {
          best_proj = proj;
          best = j;
        }
      }
      if (best < 0) break;
      Vec3 a = necks[best].axis;
      if (a.dot(dir) < 0.0) a = -a;
      dir = a;
      cur = best;
      visited[cur] = true;
      chain.push_back(cur);
    }
    final_dir = dir;
  };

  std::vector<Tube> tubes;
  for (int c = 0; c < ncomp; ++c) {
    int start = -1;
    for (int i = 0; i < n && start < 0; ++i)
      if (comp[i] == c) start = i;
    visited[start] = true;
    std::vector<int> fwd = {start};
    Vec3 end_dir;
    walk(start, necks[start].axis, fwd, end_dir);
    const int last = fwd.back();
    bool closed = false;
    if (fwd.size() >= 3 && std::find(adj[last].begin(), adj[last].end(), start) != adj[last].end() &&
        (necks[start].center - necks[last].center).dot(end_dir) > 0.0)
      closed = true;
    std::vector<int> order;
    if (!closed) {
      std::vector<int> bwd;
      Vec3 ignored;
      walk(start, -necks[start].axis, bwd, ignored);
      order.assign(bwd.rbegin(), bwd.rend());
    }
    order.insert(order.end(), fwd.begin(), fwd.end());
    for (int i = 0; i < n; ++i)
      if (comp[i] == c) visited[i] = true;

    Tube tube;
    tube.closed = closed;
    for (int i : order) tube.necks.push_back(necks[i]);
    const int m = static_cast<int>(order.size());
    auto P = [&](int k) {
      if (closed) return tube.necks[((k % m) + m) % m].center;
      return tube.necks[std::clamp(k, 0, m - 1)].center;
    };
    const int segments = closed ? m : m - 1;
    tube.central_curve.push_back(P(0));
    for (int s = 0; s < segments; ++s)
      for (int q = 1; q <= opts.samples_per_segment; ++q)
        tube.central_curve.push_back(
            catmull_rom(P(s - 1), P(s), P(s + 1), P(s + 2), static_cast<double>(q) / opts.samples_per_segment));
    tube.arclength.push_back(0.0);
    for (std::size_t k = 1; k < tube.central_curve.size(); ++k)
      tube.arclength.push_back(tube.arclength.back() + (tube.central_curve[k] - tube.central_curve[k - 1]).norm());
    tube.length = tube.arclength.back();
    if (!closed) {
      for (const NeckFit* f : {&tube.necks.front(), &tube.necks.back()})
        tube.length += std::sqrt(std::max(0.0, f->ball_radius * f->ball_radius - f->radius * f->radius));
    }
    for (int k = 1; k < m; ++k) tube.tilt_profile_deg.push_back(angle_deg(tube.necks[k - 1].axis, tube.necks[k].axis));
    if (closed && m > 1) tube.tilt_profile_deg.push_back(angle_deg(tube.necks[m - 1].axis, tube.necks[0].axis));
    tube.vertices = neck_ball_vertices(mesh, tube.necks);
    tubes.push_back(std::move(tube));
  }
  return tubes;
}

DistanceComparison tube_distance_comparison(const Tube& tube, double cutoff, int samples) {
  if (tube.necks.size() < 3) throw Error(ErrorCode::TooShort, "distance comparison needs at least three necks");
  if (!(cutoff > 0.0) || samples < 2) throw Error(ErrorCode::InvalidParams, "invalid cutoff or sample count");
  const double total = tube.arclength.back();
  std::vector<Vec3> pts(samples);
  std::vector<double> s(samples);
  std::size_t seg = 1;
  for (int i = 0; i < samples; ++i) {
    s[i] = tube.closed ? total * i / samples : total * i / (samples - 1);
    while (seg + 1 < tube.arclength.size() && tube.arclength[seg] < s[i]) ++seg;
    const double a = tube.arclength[seg - 1], b = tube.arclength[seg];
    const double w = b > a ? std::clamp((s[i] - a) / (b - a), 0.0, 1.0) : 0.0;
    pts[i] = (1.0 - w) * tube.central_curve[seg - 1] + w * tube.central_curve[seg];
  }
  DistanceComparison out;
  for (int i = 0; i < samples; ++i)
    for (int j = i + 1; j < samples; ++j) {
      const double chord = (pts[i] - pts[j]).norm();
      if (!(chord > 0.0) || chord >= cutoff) continue;
      double d = s[j] - s[i];
      if (tube.closed) d = std::min(d, total - d);
      ++out.pairs;
      if (d / chord > out.max_ratio) {
        out.max_ratio = d / chord;
        out.s1 = s[i];
        out.s2 = s[j];
      }
    }
  return out;
}

TubeIntegral tube_integral_estimate(const CurvatureField& curv, const Tube& tube) {
  TubeIntegral r;
  double sum = 0.0, comp = 0.0;
  for (int v : tube.vertices) {
    const double term = curv.H[v] * curv.vertex_area[v];
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  r.int_H = sum + comp;
  r.c_observed = tube.length > 0.0 ? r.int_H / tube.length : 0.0;
  return r;
}

nlohmann::json to_json(const Tube& t) {
  nlohmann::json necks = nlohmann::json::array();
  for (const auto& n : t.necks) necks.push_back(to_json(n));
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : t.central_curve) curve.push_back({p.x(), p.y(), p.z()});
  return {{"closed", t.closed},
          {"length", t.length},
          {"num_necks", t.necks.size()},
          {"num_vertices", t.vertices.size()},
          {"tilt_profile_deg", t.tilt_profile_deg},
          {"central_curve", curve},
          {"necks", necks}};
}

}  // namespace mcflab
