#include <algorithm>
#include <cmath>

#include "mcflab/necks.hpp"

namespace mcflab {

std::vector<NeckFit> detect_necks(const TriMesh& mesh, const CurvatureField& curv, const DetectOptions& opts) {
  if (!(opts.eps_threshold > 0.0 && opts.eps_threshold < 0.5))
    throw Error(ErrorCode::InvalidParams, "eps_threshold must lie in (0, 0.5)");
  if (!(opts.window > 0.0 && opts.window <= 1.0)) throw Error(ErrorCode::InvalidParams, "window must lie in (0,1]");
  const MeshTopology topo(mesh);
  const int nv = mesh.num_vertices();

  std::vector<double> cyl(nv, 0.0);
  for (int v = 0; v < nv; ++v)
    if (curv.lambda2[v] > 0.0) cyl[v] = 1.0 - std::abs(curv.lambda1[v]) / curv.lambda2[v];

  // seeds: cylindrical vertices that locally maximise the cylindricity or the
  // larger principal curvature (a waist is a saddle, so its cylindricity
  // need not peak there)
  std::vector<int> seeds;
  for (int v = 0; v < nv; ++v) {
    if (cyl[v] < opts.min_cylindricity) continue;
    bool max_cyl = true, max_l2 = true;
    for (int u : topo.one_ring(v)) {
      max_cyl = max_cyl && cyl[v] >= cyl[u];
      max_l2 = max_l2 && curv.lambda2[v] >= curv.lambda2[u];
    }
    if (max_cyl || max_l2) seeds.push_back(v);
  }
  std::stable_sort(seeds.begin(), seeds.end(), [&](int a, int b) { return cyl[a] > cyl[b]; });

  std::vector<Vec3> processed;
  std::vector<double> processed_r;
  std::vector<NeckFit> accepted;
  for (int v : seeds) {
    const double r_est = 1.0 / curv.lambda2[v];
    const Vec3 guess = mesh.vertices[v] - r_est * curv.normal[v];
    bool suppressed = false;
    for (std::size_t k = 0; k < processed.size() && !suppressed; ++k)
      suppressed = (processed[k] - guess).norm() < 0.5 * std::min(r_est, processed_r[k]);
    if (suppressed) continue;
    processed.push_back(guess);
    processed_r.push_back(r_est);
    try {
      const NeckFit first = fit_cylinder_at(mesh, curv, guess, r_est / opts.window, opts.fit);
      NeckFit fit = fit_cylinder_at(mesh, curv, first.center, first.radius / opts.window, opts.fit);
      fit.seed_vertex = v;
      if (fit.eps_measured <= opts.eps_threshold) accepted.push_back(fit);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateFit && e.code() != ErrorCode::InsufficientSupport) throw;
    }
  }

  std::stable_sort(accepted.begin(), accepted.end(),
                   [](const NeckFit& a, const NeckFit& b) { return a.eps_measured < b.eps_measured; });
  std::vector<NeckFit> kept;
  for (const auto& f : accepted) {
    bool dup = false;
    for (const auto& k : kept) dup = dup || (k.center - f.center).norm() < 0.5 * std::min(k.radius, f.radius);
    if (!dup) kept.push_back(f);
  }
  return kept;
}

std::vector<int> neck_ball_vertices(const TriMesh& mesh, const std::vector<NeckFit>& necks) {
  std::vector<int> out;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    for (const auto& n : necks)
      if ((mesh.vertices[v] - n.center).norm() < n.ball_radius) {
        out.push_back(v);
        break;
      }
  return out;
}

}  // namespace mcflab
