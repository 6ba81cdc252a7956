#include <doctest.h>

#include <Eigen/Geometry>

#include "mcflab/necks.hpp"
#include "mcflab/scenario.hpp"
#include "oracles.hpp"

using namespace mcflab;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidParams;
}

Eigen::Matrix3d rotation(double deg, const Vec3& axis) {
  return Eigen::AngleAxisd(deg * oracle::pi / 180.0, axis.normalized()).toRotationMatrix();
}

int nearest_vertex(const TriMesh& m, const Vec3& p) {
  int best = 0;
  for (int v = 1; v < m.num_vertices(); ++v)
    if ((m.vertices[v] - p).norm() < (m.vertices[best] - p).norm()) best = v;
  return best;
}

// Exact shrinking cylinders r(t) = sqrt(1 - 2t) with the barrel length held
// fixed, optionally turned by `turn_deg` about the x axis per snapshot.
FlowHistory synthetic_cylinder_history(int snapshots, double t_end, double turn_deg = 0.0) {
  FlowHistory h;
  const auto first = make_capped_cylinder(1.0, 12.0, 32, 0.0, 2, 40);
  h.topology = std::make_shared<MeshTopology>(first);
  for (int k = 0; k < snapshots; ++k) {
    const double t = t_end * k / (snapshots - 1);
    auto m = make_capped_cylinder(std::sqrt(1.0 - 2.0 * t), 12.0, 32, 0.0, 2, 40);
    m = transformed(m, rotation(turn_deg * k, Vec3::UnitX()), Vec3::Zero());
    h.states.push_back(make_state(m, t, *h.topology));
  }
  return h;
}

std::vector<Tube> tubes_of(const TriMesh& m, double eps, double window) {
  const auto curv = estimate_curvature(m);
  DetectOptions d;
  d.eps_threshold = eps;
  d.window = window;
  TubeOptions t;
  t.window = window;
  return assemble_tubes(m, detect_necks(m, curv, d), t);
}

TriMesh elbow(double r, double bend_radius, double angle_deg) {
  Scenario s;
  s.generator = "bent_tube";
  s.radius = r;
  s.length = 6.0;
  s.bend_radius = bend_radius;
  s.bend_angle_deg = angle_deg;
  s.n_circ = 16;
  return generate(s).mesh;
}

}  // namespace

TEST_CASE("cylinder fit on an exact cylinder") {
  const auto m = make_capped_cylinder(0.5, 10.0, 32);
  const auto fit = fit_cylinder(m, nearest_vertex(m, {0.5, 0.0, 0.3}), 2.0);
  CHECK(fit.radius == doctest::Approx(0.5).epsilon(0.01));
  CHECK(oracle::angle_deg(fit.axis, Vec3::UnitZ()) < 0.5);
  CHECK(fit.axis.z() > 0.0);
  CHECK(std::hypot(fit.center.x(), fit.center.y()) < 0.01);
  CHECK(fit.eps_measured < 0.05);
  CHECK(fit.window == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("cylinder fit failures") {
  const auto sphere = make_icosphere(1.0, 4);
  CHECK(code_of([&] { fit_cylinder(sphere, 0, 0.8); }) == ErrorCode::DegenerateFit);
  const auto cyl = make_capped_cylinder(0.5, 10.0, 32);
  CHECK(code_of([&] { fit_cylinder_at(cyl, estimate_curvature(cyl), {0.5, 0.0, 0.0}, 0.05); }) ==
        ErrorCode::InsufficientSupport);
}

TEST_CASE("axis sign normalisation") {
  CHECK(normalize_axis_sign({0.0, 0.0, -1.0}) == Vec3(0.0, 0.0, 1.0));
  CHECK(normalize_axis_sign({1.0, -1.0, 0.0}) == Vec3(-1.0, 1.0, 0.0));
  CHECK(normalize_axis_sign({-1.0, 0.0, 0.0}) == Vec3(1.0, 0.0, 0.0));
}

TEST_CASE("fit is equivariant under rigid motions and scaling") {
  const auto m = make_capped_cylinder(0.5, 10.0, 32);
  const int seed = nearest_vertex(m, {0.5, 0.0, 0.3});
  const auto base = fit_cylinder(m, seed, 2.0);

  const Eigen::Matrix3d R = rotation(37.0, {1.0, 2.0, 0.5});
  const Vec3 shift(0.3, -1.2, 2.0);
  const auto moved = fit_cylinder(transformed(m, R, shift), seed, 2.0);
  CHECK(moved.radius == doctest::Approx(base.radius).epsilon(1e-6));
  CHECK(moved.eps_measured == doctest::Approx(base.eps_measured).epsilon(1e-4));
  CHECK(oracle::angle_deg(moved.axis, R * base.axis) < 1e-4);

  const auto big = fit_cylinder(scaled(m, 3.0), seed, 6.0);
  CHECK(big.radius == doctest::Approx(3.0 * base.radius).epsilon(1e-6));
  CHECK(big.eps_measured == doctest::Approx(base.eps_measured).epsilon(1e-4));
}

TEST_CASE("detector: no necks on spheres") {
  for (int level : {3, 4}) {
    const auto m = make_icosphere(1.0, level);
    CHECK(detect_necks(m, estimate_curvature(m)).empty());
  }
  const auto off = make_icosphere(0.3, 4, {1.0, 2.0, -0.5});
  CHECK(detect_necks(off, estimate_curvature(off)).empty());
}

TEST_CASE("detector covers the barrel of an exact cylinder") {
  const double r = 0.1;
  const auto m = make_capped_cylinder(r, 4.0, 24);
  const auto necks = detect_necks(m, estimate_curvature(m));
  REQUIRE(!necks.empty());
  std::vector<char> covered(m.num_vertices(), 0);
  for (int v : neck_ball_vertices(m, necks)) covered[v] = 1;
  int barrel = 0, hit = 0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    const auto& x = m.vertices[v];
    if (std::abs(x.z()) <= 2.0 + 1e-9 && std::abs(std::hypot(x.x(), x.y()) - r) < 1e-9) {
      ++barrel;
      hit += covered[v];
    }
  }
  const double coverage = static_cast<double>(hit) / barrel;
  MESSAGE("barrel coverage " << coverage);
  CHECK(coverage >= 0.95);
  for (const auto& n : necks) {
    CHECK(n.radius == doctest::Approx(r).epsilon(0.02));
    CHECK(n.eps_measured <= 0.1);
  }
  // at most one neck per half radius along the axis
  for (std::size_t i = 0; i < necks.size(); ++i)
    for (std::size_t j = i + 1; j < necks.size(); ++j) CHECK((necks[i].center - necks[j].center).norm() >= 0.5 * r * 0.99);
}

TEST_CASE("strong neck track on an exact shrinking cylinder") {
  const auto h = synthetic_cylinder_history(11, 0.3);
  const auto& last = h.back();
  const auto fin = fit_cylinder(last.mesh, last.curv, nearest_vertex(last.mesh, {1.0, 0.0, 0.0}), 2.0);
  TrackOptions opts;
  const auto track = track_strong_neck(h, fin, opts);
  CHECK(track.t_star == doctest::Approx(0.5).epsilon(0.01));
  CHECK(track.samples.size() == 11);
  CHECK(track.max_radius_residual < 0.02);
  CHECK(!track.lost_at.has_value());
  for (std::size_t k = 1; k < track.samples.size(); ++k) CHECK(track.samples[k].t > track.samples[k - 1].t);
  CHECK(measure_tilt(track).total_tilt_deg < 1.0);

  SUBCASE("lookback limits the window") {
    opts.lookback = 0.1;
    const auto short_track = track_strong_neck(h, fin, opts);
    for (const auto& s : short_track.samples) CHECK(s.t >= 0.3 - 0.1 - 1e-12);
    CHECK(short_track.samples.size() == 4);
  }
}

TEST_CASE("synthetic rotation accumulates tilt") {
  const auto h = synthetic_cylinder_history(51, 0.2, 0.2);
  const auto& last = h.back();
  // points on the x axis are fixed by the turns
  const auto fin = fit_cylinder(last.mesh, last.curv, nearest_vertex(last.mesh, {1.0, 0.0, 0.0}), 2.0);
  const auto track = track_strong_neck(h, fin);
  REQUIRE(track.samples.size() == 51);
  const auto tilt = measure_tilt(track);
  MESSAGE("synthetic tilt " << tilt.total_tilt_deg);
  CHECK(std::abs(tilt.total_tilt_deg - 10.0) <= 1.0);
  for (double a : tilt.profile_deg) CHECK(a == doctest::Approx(0.2).epsilon(0.25));
}

TEST_CASE("track is lost on a sphere") {
  FlowHistory h;
  const auto m = make_icosphere(1.0, 4);
  h.topology = std::make_shared<MeshTopology>(m);
  h.states.push_back(make_state(m, 0.0, *h.topology));
  h.states.push_back(make_state(scaled(m, 0.9), 0.0475, *h.topology));
  NeckFit fake;
  fake.center = Vec3::Zero();
  fake.radius = 0.9;
  CHECK(code_of([&] { track_strong_neck(h, fake); }) == ErrorCode::TrackLost);
}

TEST_CASE("tilt of explicit axis sequences") {
  std::vector<Vec3> axes;
  for (int k = 0; k <= 30; ++k) axes.push_back(rotation(0.5 * k, Vec3::UnitY()) * Vec3::UnitZ());
  const auto tilt = measure_tilt(axes);
  CHECK(tilt.total_tilt_deg == doctest::Approx(15.0).epsilon(1e-9));
  REQUIRE(tilt.profile_deg.size() == 30);
  // sign of an axis is irrelevant
  axes[7] = -axes[7];
  CHECK(measure_tilt(axes).total_tilt_deg == doctest::Approx(15.0).epsilon(1e-9));
}

TEST_CASE("tubes: straight cylinder") {
  const auto m = make_capped_cylinder(0.2, 4.0, 24);
  const auto tubes = tubes_of(m, 0.1, 0.25);
  REQUIRE(tubes.size() == 1);
  const auto& t = tubes[0];
  CHECK(!t.closed);
  CHECK(t.length == doctest::Approx(4.0).epsilon(0.05));
  double tilt = 0.0;
  for (double a : t.tilt_profile_deg) tilt += a;
  CHECK(tilt < 1.0);
  CHECK(tube_distance_comparison(t, 1e9).max_ratio <= 1.01);
}

TEST_CASE("tubes: thin torus closes up") {
  const auto m = make_torus(0.05, 1.0, 16);
  const auto tubes = tubes_of(m, 0.2, 0.5);
  REQUIRE(tubes.size() == 1);
  const auto& t = tubes[0];
  CHECK(t.closed);
  CHECK(t.length == doctest::Approx(2.0 * oracle::pi).epsilon(0.02));
  double tilt = 0.0;
  for (double a : t.tilt_profile_deg) tilt += a;
  CHECK(tilt == doctest::Approx(360.0).epsilon(0.03));
  for (double cutoff : {0.5, 1.0, 1.5}) {
    const double exact = oracle::arc_over_chord(2.0 * std::asin(cutoff / 2.0));
    const double ratio = tube_distance_comparison(t, cutoff).max_ratio;
    MESSAGE("torus cutoff " << cutoff << " ratio " << ratio << " oracle " << exact);
    CHECK(ratio <= exact * 1.05);
    CHECK(ratio >= 1.0);
  }
}

TEST_CASE("tubes: elbow") {
  const double rb = 1.5, theta = oracle::pi / 2;
  const double leg = 0.5 * (6.0 - rb * theta);
  const auto m = elbow(0.1, rb, 90.0);
  const auto tubes = tubes_of(m, 0.2, 0.5);
  REQUIRE(tubes.size() == 1);
  const auto& t = tubes[0];
  double tilt = 0.0;
  for (double a : t.tilt_profile_deg) tilt += a;
  CHECK(std::abs(tilt - 90.0) <= 10.0);
  for (double cutoff : {1.0, 2.0}) {
    const double exact = oracle::max_arc_over_chord(
        [&](double s) { return oracle::elbow_point(s, leg, rb, theta); }, 2.0 * leg + rb * theta, cutoff);
    const double ratio = tube_distance_comparison(t, cutoff).max_ratio;
    MESSAGE("elbow cutoff " << cutoff << " ratio " << ratio << " oracle " << exact);
    CHECK(ratio <= exact * 1.05);
    CHECK(ratio <= 1.15);
  }
}

TEST_CASE("tube integral of H is 2 pi per unit length") {
  double c_prev = 0.0;
  for (double r : {0.2, 0.1}) {
    const auto m = make_capped_cylinder(r, 4.0, 24);
    const auto curv = estimate_curvature(m);
    DetectOptions d;
    d.window = 0.25;
    TubeOptions to;
    to.window = 0.25;
    const auto tubes = assemble_tubes(m, detect_necks(m, curv, d), to);
    REQUIRE(tubes.size() == 1);
    const auto est = tube_integral_estimate(curv, tubes[0]);
    MESSAGE("r " << r << " c_observed " << est.c_observed);
    CHECK(est.c_observed == doctest::Approx(2.0 * oracle::pi).epsilon(0.03));
    if (c_prev > 0.0) CHECK(est.c_observed == doctest::Approx(c_prev).epsilon(0.03));
    c_prev = est.c_observed;
  }
  const auto torus = make_torus(0.05, 1.0, 16);
  const auto curv = estimate_curvature(torus);
  const auto tubes = tubes_of(torus, 0.2, 0.5);
  REQUIRE(tubes.size() == 1);
  CHECK(tube_integral_estimate(curv, tubes[0]).int_H == doctest::Approx(4.0 * oracle::pi * oracle::pi).epsilon(0.1));
}
