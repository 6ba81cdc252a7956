#include "sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

namespace mcflab::detail {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 ring_point(const Ring& r, int i) {
  const double a = r.offset + kTwoPi * i / r.count;
  const double rad = r.radius + r.amp * std::cos(r.mode * a);
  return r.center + rad * (std::cos(a) * r.e1 + std::sin(a) * r.e2);
}

// Angle of p about ring a's center, measured in a's frame, unwrapped to
// [base, base + 2pi).
double angle_in(const Ring& a, const Vec3& p, double base) {
  const Vec3 d = p - a.center;
  double ang = std::atan2(d.dot(a.e2), d.dot(a.e1));
  ang = base + std::fmod(std::fmod(ang - base, kTwoPi) + kTwoPi, kTwoPi);
  return ang;
}

void stitch(const Ring& a, int a0, const Ring& b, int b0, const std::vector<Vec3>& verts, std::vector<Face>& faces) {
  const int na = a.count, nb = b.count;
  const double base = a.offset;
  std::vector<double> alpha(na + 1);
  for (int i = 0; i < na; ++i) alpha[i] = base + kTwoPi * i / na;
  alpha[na] = base + kTwoPi;

  // B vertex closest in angle to A's first vertex starts the merge
  std::vector<double> beta_raw(nb);
  int j0 = 0;
  double best = 1e300;
  for (int j = 0; j < nb; ++j) {
    beta_raw[j] = angle_in(a, verts[b0 + j], base - std::numbers::pi);
    const double d = std::abs(beta_raw[j] - base);
    if (d < best) {
      best = d;
      j0 = j;
    }
  }
  std::vector<double> beta(nb + 1);
  beta[0] = beta_raw[j0];
  for (int m = 1; m < nb; ++m) beta[m] = angle_in(a, verts[b0 + (j0 + m) % nb], beta[0]);
  beta[nb] = beta[0] + kTwoPi;

  auto A = [&](int i) { return a0 + i % na; };
  auto B = [&](int m) { return b0 + (j0 + m) % nb; };
  int i = 0, m = 0;
  while (i < na || m < nb) {
    const bool advance_a = (m == nb) || (i < na && alpha[i + 1] <= beta[m + 1]);
    if (advance_a) {
      faces.push_back({A(i), A(i + 1), B(m)});
      ++i;
    } else {
      faces.push_back({A(i), B(m + 1), B(m)});
      ++m;
    }
  }
}

Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis) * v;
}

// Minimal rotation taking unit t0 to unit t1 applied to v.
Vec3 transport(const Vec3& v, const Vec3& t0, const Vec3& t1) {
  const Vec3 c = t0.cross(t1);
  const double s = c.norm();
  const double cs = t0.dot(t1);
  if (s < 1e-15) return v;
  return rotate_about(v, c / s, std::atan2(s, cs));
}

}  // namespace

TriMesh build_ring_stack(const RingStack& stack) {
  TriMesh mesh;
  std::vector<int> start(stack.rings.size());
  for (std::size_t k = 0; k < stack.rings.size(); ++k) {
    start[k] = mesh.num_vertices();
    for (int i = 0; i < stack.rings[k].count; ++i) mesh.vertices.push_back(ring_point(stack.rings[k], i));
  }
  for (std::size_t k = 0; k + 1 < stack.rings.size(); ++k)
    stitch(stack.rings[k], start[k], stack.rings[k + 1], start[k + 1], mesh.vertices, mesh.faces);
  if (stack.closed)
    stitch(stack.rings.back(), start.back(), stack.rings.front(), start.front(), mesh.vertices, mesh.faces);
  if (stack.start_pole) {
    const int p = mesh.num_vertices();
    mesh.vertices.push_back(stack.start_pole_pos);
    const auto& r = stack.rings.front();
    for (int i = 0; i < r.count; ++i) mesh.faces.push_back({p, start[0] + (i + 1) % r.count, start[0] + i});
  }
  if (stack.end_pole) {
    const int p = mesh.num_vertices();
    mesh.vertices.push_back(stack.end_pole_pos);
    const auto& r = stack.rings.back();
    const int s = start.back();
    for (int i = 0; i < r.count; ++i) mesh.faces.push_back({s + i, s + (i + 1) % r.count, p});
  }
  return mesh;
}

double curve_length(const std::function<Vec3(double)>& curve, int samples) {
  double len = 0.0;
  Vec3 prev = curve(0.0);
  for (int k = 1; k <= samples; ++k) {
    const Vec3 p = curve(static_cast<double>(k) / samples);
    len += (p - prev).norm();
    prev = p;
  }
  return len;
}

TriMesh sweep_tube(const TubeSpec& spec) {
  const int dense = 16384;
  std::vector<double> u(dense + 1), arc(dense + 1, 0.0);
  Vec3 prev = spec.curve(0.0);
  for (int k = 0; k <= dense; ++k) {
    u[k] = static_cast<double>(k) / dense;
    const Vec3 p = spec.curve(u[k]);
    if (k > 0) arc[k] = arc[k - 1] + (p - prev).norm();
    prev = p;
  }
  const double L = arc.back();
  auto u_at = [&](double s) {
    const auto it = std::lower_bound(arc.begin(), arc.end(), s);
    const int k = std::clamp(static_cast<int>(it - arc.begin()), 1, dense);
    const double w = (s - arc[k - 1]) / (arc[k] - arc[k - 1]);
    return u[k - 1] + w * (u[k] - u[k - 1]);
  };
  auto tangent_at = [&](double uu) {
    const double h = 1e-6;
    double lo = uu - h, hi = uu + h;
    if (!spec.closed) {
      lo = std::max(0.0, lo);
      hi = std::min(1.0, hi);
    }
    return Vec3((spec.curve(hi) - spec.curve(lo)).normalized());
  };

  const double edge = kTwoPi * spec.radius / spec.n_circ;
  const double h_axial = std::sqrt(3.0) / 2.0 * edge;
  int n_rings = spec.n_axial > 0 ? spec.n_axial : std::max(2, static_cast<int>(std::lround(L / h_axial)));
  if (!spec.closed) n_rings = std::max(n_rings, 1) + 1;

  std::vector<Vec3> centers(n_rings), tangents(n_rings), normals(n_rings);
  std::vector<double> svals(n_rings);
  for (int k = 0; k < n_rings; ++k) {
    svals[k] = spec.closed ? L * k / n_rings : L * k / (n_rings - 1);
    const double uu = u_at(svals[k]);
    centers[k] = spec.curve(uu);
    tangents[k] = tangent_at(uu);
  }
  {
    const Vec3& t0 = tangents[0];
    Vec3 ref = std::abs(t0.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    normals[0] = (ref - ref.dot(t0) * t0).normalized();
  }
  for (int k = 1; k < n_rings; ++k) {
    Vec3 n = transport(normals[k - 1], tangents[k - 1], tangents[k]);
    normals[k] = (n - n.dot(tangents[k]) * tangents[k]).normalized();
  }
  if (spec.closed) {
    Vec3 back = transport(normals.back(), tangents.back(), tangents[0]);
    back = (back - back.dot(tangents[0]) * tangents[0]).normalized();
    const double holonomy = std::atan2(tangents[0].dot(back.cross(normals[0])), back.dot(normals[0]));
    for (int k = 1; k < n_rings; ++k)
      normals[k] = rotate_about(normals[k], tangents[k], holonomy * svals[k] / L);
  }

  RingStack stack;
  stack.closed = spec.closed;
  auto make_ring = [&](const Vec3& c, const Vec3& t, const Vec3& n1, double radius, int count, double offset,
                       double amp) {
    Ring r;
    r.center = c;
    r.e1 = n1;
    r.e2 = t.cross(n1);
    r.radius = radius;
    r.count = count;
    r.offset = offset;
    r.amp = amp;
    r.mode = spec.mode;
    return r;
  };

  // Half-step stagger between rings gives near-equilateral triangles; on
  // rings denser than that spacing it would pleat the surface, so it shrinks
  // with the spacing.
  const double spacing = spec.closed ? L / n_rings : L / (n_rings - 1);
  const double stagger = std::numbers::pi / spec.n_circ * std::min(1.0, spacing / h_axial);
  int cap_rings = 0;
  std::vector<double> cap_phi;
  if (!spec.closed) {
    cap_rings = std::max(2, static_cast<int>(std::lround(0.5 * std::numbers::pi * spec.radius / h_axial)));
    for (int j = 1; j < cap_rings; ++j) cap_phi.push_back(0.5 * std::numbers::pi * j / cap_rings);
    // start cap, from the pole towards the barrel
    for (int j = cap_rings - 1; j >= 1; --j) {
      const double phi = cap_phi[j - 1];
      const int count = std::max(3, static_cast<int>(std::lround(spec.n_circ * std::cos(phi))));
      stack.rings.push_back(make_ring(centers[0] - spec.radius * std::sin(phi) * tangents[0], tangents[0], normals[0],
                                      spec.radius * std::cos(phi), count, (j % 2) * stagger,
                                      spec.amp * std::cos(phi)));
    }
    stack.start_pole = true;
    stack.start_pole_pos = centers[0] - spec.radius * tangents[0];
  }
  for (int k = 0; k < n_rings; ++k)
    stack.rings.push_back(
        make_ring(centers[k], tangents[k], normals[k], spec.radius, spec.n_circ, (k % 2) * stagger, spec.amp));
  if (!spec.closed) {
    const int e = n_rings - 1;
    for (int j = 1; j < cap_rings; ++j) {
      const double phi = cap_phi[j - 1];
      const int count = std::max(3, static_cast<int>(std::lround(spec.n_circ * std::cos(phi))));
      stack.rings.push_back(make_ring(centers[e] + spec.radius * std::sin(phi) * tangents[e], tangents[e], normals[e],
                                      spec.radius * std::cos(phi), count, ((e + j) % 2) * stagger,
                                      spec.amp * std::cos(phi)));
    }
    stack.end_pole = true;
    stack.end_pole_pos = centers[e] + spec.radius * tangents[e];
  }
  return build_ring_stack(stack);
}

}  // namespace mcflab::detail
