#include "mcflab/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcflab {

void ControlParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0) || !(area_bound > 0.0))
    throw Error(ErrorCode::InvalidParams, "control parameters must be strictly positive");
  if (beta > 1.0) throw Error(ErrorCode::InvalidParams, "beta must not exceed 1 for surfaces");
  if (!(penetration_tolerance >= 0.0)) throw Error(ErrorCode::InvalidParams, "negative penetration tolerance");
}

ControlReport check_control_params(const TriMesh& mesh, const CurvatureField& curv, const ControlParams& params) {
  params.validate();
  if (curv.size() != mesh.num_vertices())
    throw Error(ErrorCode::LengthMismatch, "curvature field does not match mesh");
  const MeshTopology topo(mesh);
  const int nv = mesh.num_vertices();

  ControlReport rep;
  rep.penetration_tolerance = params.penetration_tolerance;
  const double min_H = *std::min_element(curv.H.begin(), curv.H.end());
  const double max_H = curv.max_H();
  rep.mean_convex = {min_H > 0.0, min_H};
  rep.gamma_ok = {max_H <= params.gamma, max_H};
  const double area = total_area(mesh);
  rep.area_ok = {area <= params.area_bound, area};

  if (!rep.mean_convex.ok) {
    rep.beta_two_convex = {false, -std::numeric_limits<double>::infinity()};
    rep.alpha_ok = {false, std::numeric_limits<double>::infinity()};
    return rep;
  }

  double min_ratio = std::numeric_limits<double>::infinity();
  for (int v = 0; v < nv; ++v) min_ratio = std::min(min_ratio, (curv.lambda1[v] + curv.lambda2[v]) / curv.H[v]);
  rep.beta_two_convex = {min_ratio >= params.beta - 1e-12, min_ratio};

  std::vector<double> local_edge(nv, 0.0);
  for (int v = 0; v < nv; ++v) {
    const auto ring = topo.one_ring(v);
    for (int u : ring) local_edge[v] += (mesh.vertices[u] - mesh.vertices[v]).norm();
    local_edge[v] /= static_cast<double>(ring.size());
  }

  double worst = 0.0;
  int worst_v = -1;
  for (int v = 0; v < nv; ++v) {
    const double radius = params.alpha / curv.H[v];
    const Vec3& p = mesh.vertices[v];
    const Vec3 inner = p - radius * curv.normal[v];
    const Vec3 outer = p + radius * curv.normal[v];
    double pen = 0.0;
    for (int u = 0; u < nv; ++u) {
      if (u == v) continue;
      const Vec3& q = mesh.vertices[u];
      pen = std::max(pen, radius - (q - inner).norm());
      pen = std::max(pen, radius - (q - outer).norm());
    }
    const double rel = pen / local_edge[v];
    if (rel > worst) {
      worst = rel;
      worst_v = v;
    }
  }
  rep.alpha_ok = {worst <= params.penetration_tolerance, worst};
  rep.alpha_witness_vertex = worst_v;
  return rep;
}

nlohmann::json to_json(const ControlReport& r) {
  auto check = [](const ControlCheck& c) { return nlohmann::json{{"ok", c.ok}, {"witness", c.witness}}; };
  return {
      {"mean_convex", check(r.mean_convex)},
      {"beta_two_convex", check(r.beta_two_convex)},
      {"gamma_ok", check(r.gamma_ok)},
      {"area_ok", check(r.area_ok)},
      {"alpha_ok", check(r.alpha_ok)},
      {"alpha_witness_vertex", r.alpha_witness_vertex},
      {"penetration_tolerance_edges", r.penetration_tolerance},
  };
}

}  // namespace mcflab
