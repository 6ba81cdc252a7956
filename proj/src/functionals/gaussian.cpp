#include <cmath>
#include <numbers>

#include "mcflab/functionals.hpp"

namespace mcflab {

namespace {

// Dunavant degree-4 rule: barycentric coordinates and weights (sum 1).
constexpr double kA1 = 0.445948490915965, kB1 = 1.0 - 2.0 * kA1, kW1 = 0.223381589678011;
constexpr double kA2 = 0.091576213509771, kB2 = 1.0 - 2.0 * kA2, kW2 = 0.109951743655322;

}  // namespace

GaussianNodes GaussianNodes::faces(const TriMesh& mesh) {
  GaussianNodes g;
  g.points.reserve(6 * mesh.faces.size());
  g.weights.reserve(6 * mesh.faces.size());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Vec3& a = mesh.vertices[mesh.faces[f][0]];
    const Vec3& b = mesh.vertices[mesh.faces[f][1]];
    const Vec3& c = mesh.vertices[mesh.faces[f][2]];
    const double area = face_area(mesh, f);
    const double bary[6][3] = {{kA1, kA1, kB1}, {kA1, kB1, kA1}, {kB1, kA1, kA1},
                               {kA2, kA2, kB2}, {kA2, kB2, kA2}, {kB2, kA2, kA2}};
    for (int q = 0; q < 6; ++q) {
      g.points.push_back(bary[q][0] * a + bary[q][1] * b + bary[q][2] * c);
      g.weights.push_back(area * (q < 3 ? kW1 : kW2));
    }
  }
  return g;
}

GaussianNodes GaussianNodes::vertices(const TriMesh& mesh, std::span<const double> vertex_area) {
  if (vertex_area.size() != mesh.vertices.size())
    throw Error(ErrorCode::LengthMismatch, "vertex areas do not match the mesh");
  GaussianNodes g;
  g.points = mesh.vertices;
  g.weights.assign(vertex_area.begin(), vertex_area.end());
  return g;
}

double GaussianNodes::evaluate(const Vec3& center, double scale) const {
  const double k = 0.25 * scale * scale;
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double e = k * (points[i] - center).squaredNorm();
    if (e > 46.0) continue;  // below 1e-20 of the peak
    const double term = weights[i] * std::exp(-e);
    const double t = sum + term;
    comp += (sum - t) + term;  // terms are positive and sum >= term after the first
    sum = t;
  }
  return (sum + comp) * scale * scale / (4.0 * std::numbers::pi);
}

double gaussian_area(const TriMesh& mesh, const Vec3& center, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidParams, "scale must be positive");
  TriMesh y = mesh;
  for (auto& v : y.vertices) v = scale * (v - center);
  return GaussianNodes::faces(y).evaluate(Vec3::Zero(), 1.0);
}

double huisken_phi(const FlowHistory& history, const Vec3& x0, double t0, double t) {
  if (!(t < t0)) throw Error(ErrorCode::TimeOutOfRange, "Huisken's quantity needs t < t0");
  return gaussian_area(history.mesh_at(t), x0, 1.0 / std::sqrt(t0 - t));
}

}  // namespace mcflab
