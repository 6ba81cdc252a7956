#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "mcflab/necks.hpp"

namespace mcflab {

Vec3 normalize_axis_sign(const Vec3& v) {
  for (int c : {2, 1, 0}) {
    if (v[c] > 0.0) return v;
    if (v[c] < 0.0) return -v;
  }
  return v;
}

namespace {

// Geometric circle fit: Kasa initial guess refined by Gauss-Newton.
bool fit_circle(const std::vector<Eigen::Vector2d>& q, Eigen::Vector2d& c, double& r) {
  const int m = static_cast<int>(q.size());
  Eigen::MatrixXd A(m, 3);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    A(i, 0) = q[i].x();
    A(i, 1) = q[i].y();
    A(i, 2) = 1.0;
    b(i) = -q[i].squaredNorm();
  }
  const Eigen::Vector3d s = A.colPivHouseholderQr().solve(b);
  c = Eigen::Vector2d(-0.5 * s(0), -0.5 * s(1));
  const double r2 = c.squaredNorm() - s(2);
  if (!(r2 > 0.0) || !std::isfinite(r2)) return false;
  r = std::sqrt(r2);

  for (int it = 0; it < 20; ++it) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (const auto& p : q) {
      const Eigen::Vector2d d = p - c;
      const double len = d.norm();
      if (len == 0.0) continue;
      Eigen::Vector3d row(-d.x() / len, -d.y() / len, -1.0);
      const double res = len - r;
      jtj.noalias() += row * row.transpose();
      jtr.noalias() += row * res;
    }
    const Eigen::Vector3d step = jtj.ldlt().solve(-jtr);
    if (!step.allFinite()) return false;
    c += step.head<2>();
    r += step(2);
    if (step.norm() < 1e-14 * r) break;
  }
  return r > 0.0 && std::isfinite(r);
}

}  // namespace

NeckFit fit_cylinder_at(const TriMesh& mesh, const CurvatureField& curv, const Vec3& point, double ball_radius,
                        const NeckFitOptions& opts) {
  if (!(ball_radius > 0.0)) throw Error(ErrorCode::InvalidParams, "ball radius must be positive");
  std::vector<int> ball;
  const double r2 = ball_radius * ball_radius;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if ((mesh.vertices[v] - point).squaredNorm() < r2) ball.push_back(v);
  if (static_cast<int>(ball.size()) < opts.min_support)
    throw Error(ErrorCode::InsufficientSupport,
                std::to_string(ball.size()) + " vertices in the ball, need " + std::to_string(opts.min_support));

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int v : ball) cov.noalias() += curv.vertex_area[v] * curv.normal[v] * curv.normal[v].transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Eigen::Vector3d ev = es.eigenvalues();
  NeckFit fit;
  fit.isotropy_ratio = ev(1) > 0.0 ? ev(0) / ev(1) : 1.0;
  if (fit.isotropy_ratio > opts.max_isotropy) {
    std::ostringstream msg;
    msg << "normal covariance nearly isotropic (ratio " << fit.isotropy_ratio << ")";
    throw Error(ErrorCode::DegenerateFit, msg.str());
  }
  if (ev(1) < 0.05 * ev(2)) throw Error(ErrorCode::DegenerateFit, "normals nearly parallel");
  const Vec3 axis = es.eigenvectors().col(0).normalized();
  Vec3 b1 = axis.unitOrthogonal();
  Vec3 b2 = axis.cross(b1);

  std::vector<Eigen::Vector2d> q;
  q.reserve(ball.size());
  for (int v : ball) {
    const Vec3 d = mesh.vertices[v] - point;
    q.emplace_back(d.dot(b1), d.dot(b2));
  }
  Eigen::Vector2d c;
  double r = 0.0;
  if (!fit_circle(q, c, r)) throw Error(ErrorCode::DegenerateFit, "circle fit failed");

  fit.center = point + c.x() * b1 + c.y() * b2;
  fit.axis = normalize_axis_sign(axis);
  fit.radius = r;
  fit.ball_radius = ball_radius;
  fit.window = r / ball_radius;
  fit.support = static_cast<int>(ball.size());
  for (int v : ball) {
    const Vec3 d = mesh.vertices[v] - fit.center;
    const Vec3 radial = d - d.dot(fit.axis) * fit.axis;
    const double rho = radial.norm();
    const double dev = std::abs(rho - r) / r;
    const double cosang = rho > 0.0 ? std::clamp(curv.normal[v].dot(radial / rho), -1.0, 1.0) : -1.0;
    const double ang = std::acos(cosang);
    fit.radial_deviation = std::max(fit.radial_deviation, dev);
    fit.angular_deviation = std::max(fit.angular_deviation, ang);
    fit.eps_measured = std::max(fit.eps_measured, dev + ang);
  }
  return fit;
}

NeckFit fit_cylinder(const TriMesh& mesh, const CurvatureField& curv, int seed_vertex, double ball_radius,
                     const NeckFitOptions& opts) {
  if (seed_vertex < 0 || seed_vertex >= mesh.num_vertices())
    throw Error(ErrorCode::InvalidParams, "seed vertex out of range");
  const double h = curv.H[seed_vertex];
  Vec3 guess = mesh.vertices[seed_vertex];
  if (h > 0.0 && 1.0 / h < ball_radius) guess -= curv.normal[seed_vertex] / h;
  const NeckFit first = fit_cylinder_at(mesh, curv, guess, ball_radius, opts);
  NeckFit fit = fit_cylinder_at(mesh, curv, first.center, ball_radius, opts);
  fit.seed_vertex = seed_vertex;
  return fit;
}

NeckFit fit_cylinder(const TriMesh& mesh, int seed_vertex, double ball_radius, const NeckFitOptions& opts) {
  return fit_cylinder(mesh, estimate_curvature(mesh), seed_vertex, ball_radius, opts);
}

nlohmann::json to_json(const NeckFit& f) {
  return {{"center", {f.center.x(), f.center.y(), f.center.z()}},
          {"axis", {f.axis.x(), f.axis.y(), f.axis.z()}},
          {"radius", f.radius},
          {"eps_measured", f.eps_measured},
          {"window", f.window},
          {"ball_radius", f.ball_radius},
          {"support", f.support},
          {"isotropy_ratio", f.isotropy_ratio},
          {"radial_deviation", f.radial_deviation},
          {"angular_deviation", f.angular_deviation},
          {"seed_vertex", f.seed_vertex},
          {"closeness", "C0 radial deviation / r + normal angle (rad), max over the ball"}};
}

}  // namespace mcflab
