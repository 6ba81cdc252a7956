#include "mcflab/curvature.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace mcflab {

double CurvatureField::max_H() const {
  return H.empty() ? 0.0 : *std::max_element(H.begin(), H.end());
}

double CurvatureField::max_A() const {
  return normA.empty() ? 0.0 : *std::max_element(normA.begin(), normA.end());
}

int CurvatureField::argmax_A() const {
  return static_cast<int>(std::max_element(normA.begin(), normA.end()) - normA.begin());
}

std::vector<double> barycentric_areas(const TriMesh& mesh) {
  std::vector<double> area(mesh.num_vertices(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const double a = face_area(mesh, f) / 3.0;
    for (int v : mesh.faces[f]) area[v] += a;
  }
  return area;
}

std::vector<Vec3> area_weighted_normals(const TriMesh& mesh, const MeshTopology& topo) {
  std::vector<Vec3> n(mesh.num_vertices(), Vec3::Zero());
  for (const auto& [a, b, c] : mesh.faces) {
    // cross product magnitude is twice the face area
    const Vec3 fn = (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]);
    n[a] += fn;
    n[b] += fn;
    n[c] += fn;
  }
  (void)topo;
  for (auto& x : n) x.normalize();
  return n;
}

namespace {

void tangent_frame(const Vec3& n, Vec3& e1, Vec3& e2) {
  const Vec3 ref = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  e1 = (ref - ref.dot(n) * n).normalized();
  e2 = n.cross(e1);
}

struct QuadricResult {
  Eigen::Matrix2d hessian;  // of the height function, in (e1, e2)
  Eigen::Vector2d gradient;
};

// Fits h' = a u^2 + b u w + c w^2 + d u + e w. Coordinates are normalised by
// the mean neighbour distance for conditioning.
QuadricResult fit_quadric(const Vec3& p, const Vec3& n, const Vec3& e1, const Vec3& e2,
                          const std::vector<Vec3>& nbrs) {
  const int m = static_cast<int>(nbrs.size());
  double scale = 0.0;
  for (const auto& q : nbrs) scale += (q - p).norm();
  scale /= m;
  const double inv = 1.0 / scale;

  Eigen::Matrix<double, 5, 5> ata = Eigen::Matrix<double, 5, 5>::Zero();
  Eigen::Matrix<double, 5, 1> atb = Eigen::Matrix<double, 5, 1>::Zero();
  for (const auto& q : nbrs) {
    const Vec3 d = (q - p) * inv;
    const double u = d.dot(e1), w = d.dot(e2), h = d.dot(n);
    const double t2 = u * u + w * w;
    const double hc = t2 > 0.0 ? h * t2 / (t2 + h * h) : 0.0;
    Eigen::Matrix<double, 5, 1> row;
    row << u * u, u * w, w * w, u, w;
    ata.noalias() += row * row.transpose();
    atb.noalias() += row * hc;
  }
  const Eigen::Matrix<double, 5, 1> x = ata.ldlt().solve(atb);
  QuadricResult r;
  r.hessian << 2.0 * x(0), x(1), x(1), 2.0 * x(2);
  r.hessian *= inv;  // undo the length normalisation: 1/length
  r.gradient << x(3), x(4);
  return r;
}

// Least-squares fit of the tangential part of neighbouring normals,
// m_t = S t + g, with S symmetric. Exact on spheres and cylinders when the
// normals are exact.
Eigen::Matrix2d fit_normal_variation(const Vec3& p, const Vec3& e1, const Vec3& e2,
                                     const std::vector<Vec3>& pos, const std::vector<Vec3>& nrm) {
  const int m = static_cast<int>(pos.size());
  double scale = 0.0;
  for (const auto& q : pos) scale += (q - p).norm();
  scale /= m;
  const double inv = 1.0 / scale;

  Eigen::Matrix<double, 5, 5> ata = Eigen::Matrix<double, 5, 5>::Zero();
  Eigen::Matrix<double, 5, 1> atb = Eigen::Matrix<double, 5, 1>::Zero();
  for (int k = 0; k < m; ++k) {
    const Vec3 d = (pos[k] - p) * inv;
    const double u = d.dot(e1), w = d.dot(e2);
    const double mu = nrm[k].dot(e1), mw = nrm[k].dot(e2);
    Eigen::Matrix<double, 5, 1> r1, r2;
    r1 << u, w, 0.0, 1.0, 0.0;
    r2 << 0.0, u, w, 0.0, 1.0;
    ata.noalias() += r1 * r1.transpose() + r2 * r2.transpose();
    atb.noalias() += r1 * mu + r2 * mw;
  }
  const Eigen::Matrix<double, 5, 1> x = ata.ldlt().solve(atb);
  Eigen::Matrix2d s;
  s << x(0), x(1), x(1), x(2);
  return s * inv;
}

}  // namespace

CurvatureField estimate_curvature(const TriMesh& mesh, const MeshTopology& topo) {
  const int nv = mesh.num_vertices();
  CurvatureField cf;
  cf.normal.resize(nv);
  cf.tangent_u.resize(nv);
  cf.tangent_v.resize(nv);
  cf.shape_operator.resize(nv);
  cf.lambda1.resize(nv);
  cf.lambda2.resize(nv);
  cf.H.resize(nv);
  cf.normA.resize(nv);
  cf.vertex_area = barycentric_areas(mesh);

  // normals from two rounds of quadric fitting
  const auto n0 = area_weighted_normals(mesh, topo);
  std::vector<Vec3> nbrs;
  for (int v = 0; v < nv; ++v) {
    const Vec3& p = mesh.vertices[v];
    nbrs.clear();
    for (int u : topo.two_ring(v)) nbrs.push_back(mesh.vertices[u]);
    Vec3 n = n0[v], e1, e2;
    for (int pass = 0; pass < 2; ++pass) {
      tangent_frame(n, e1, e2);
      const QuadricResult fit = fit_quadric(p, n, e1, e2, nbrs);
      n = (n - fit.gradient(0) * e1 - fit.gradient(1) * e2).normalized();
    }
    cf.normal[v] = n;
  }

  // shape operator from the variation of the fitted normals over the 2-ring
  std::vector<Vec3> nrms;
  for (int v = 0; v < nv; ++v) {
    const Vec3& p = mesh.vertices[v];
    nbrs.clear();
    nrms.clear();
    for (int u : topo.two_ring(v)) {
      nbrs.push_back(mesh.vertices[u]);
      nrms.push_back(cf.normal[u]);
    }
    Vec3 e1, e2;
    tangent_frame(cf.normal[v], e1, e2);
    Eigen::Matrix2d shape = fit_normal_variation(p, e1, e2, nbrs, nrms);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ses(shape, Eigen::EigenvaluesOnly);

    cf.tangent_u[v] = e1;
    cf.tangent_v[v] = e2;
    cf.shape_operator[v] = shape;
    cf.lambda1[v] = ses.eigenvalues()(0);
    cf.lambda2[v] = ses.eigenvalues()(1);
    cf.H[v] = cf.lambda1[v] + cf.lambda2[v];
    cf.normA[v] = std::sqrt(cf.lambda1[v] * cf.lambda1[v] + cf.lambda2[v] * cf.lambda2[v]);
  }
  return cf;
}

CurvatureField estimate_curvature(const TriMesh& mesh) {
  const MeshTopology topo(mesh);
  return estimate_curvature(mesh, topo);
}

double surface_integral(std::span<const double> vertex_area, std::span<const double> field) {
  if (vertex_area.size() != field.size())
    throw Error(ErrorCode::LengthMismatch, "field has " + std::to_string(field.size()) +
                                               " values for " + std::to_string(vertex_area.size()) + " vertices");
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double term = field[i] * vertex_area[i];
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double surface_integral(const TriMesh& mesh, std::span<const double> field) {
  const auto area = barycentric_areas(mesh);
  return surface_integral(area, field);
}

}  // namespace mcflab
