#include "mcflab/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>

#include "mcflab/curvature.hpp"
#include "mcflab/mesh_io.hpp"
#include "sweep.hpp"

namespace mcflab {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorCode::InvalidParams, msg);
}

}  // namespace

void Scenario::validate() const {
  static const char* known[] = {"sphere", "capped_cylinder", "dumbbell", "torus", "bent_tube", "wiggly_tube",
                                "from_file"};
  bool found = false;
  for (const char* k : known) found = found || generator == k;
  require(found, "unknown generator '" + generator + "'");
  require(radius > 0.0 && std::isfinite(radius), "radius must be positive");
  require(n_circ >= 6, "n_circ must be at least 6");
  require(n_axial >= 0, "n_axial must be non-negative");
  if (generator == "sphere") require(level >= 0 && level <= 7, "icosphere level must lie in [0,7]");
  if (generator == "capped_cylinder" || generator == "bent_tube" || generator == "wiggly_tube")
    require(length > 0.0, "tube length must be positive");
  if (generator == "torus") require(radius < major_radius, "torus needs tube radius < major radius");
  if (generator == "dumbbell") {
    require(neck_radius > 0.0 && neck_radius < radius, "neck radius must lie in (0, ball radius)");
    require(flare > 0.0 && flare < 1.0, "flare must lie in (0,1)");
    require(neck_refine >= 1.0, "neck_refine must be >= 1");
    require(max_edge > 0.0, "max_edge must be positive");
  }
  if (generator == "bent_tube") {
    require(bend_radius > 2.0 * radius, "bend radius must exceed twice the tube radius");
    require(bend_angle_deg > 0.0 && bend_angle_deg < 180.0, "bend angle must lie in (0,180)");
  }
  if (generator == "wiggly_tube") {
    require(octaves >= 1 && octaves <= 4, "octaves must lie in [1,4]");
    require(wiggle_wavelength > 0.0 && wiggle_amplitude >= 0.0, "invalid wiggle parameters");
  }
  if (generator == "from_file") {
    require(!file.empty(), "from_file needs a mesh path");
    require(std::filesystem::exists(file), "mesh file '" + file + "' does not exist");
  }
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    get("name", s.name);
    get("generator", s.generator);
    get("seed", s.seed);
    get("radius", s.radius);
    get("level", s.level);
    if (j.contains("center")) {
      const auto c = j.at("center").get<std::vector<double>>();
      require(c.size() == 3, "center needs three coordinates");
      s.center = Vec3(c[0], c[1], c[2]);
    }
    get("length", s.length);
    get("major_radius", s.major_radius);
    get("neck_radius", s.neck_radius);
    get("separation", s.separation);
    get("flare", s.flare);
    get("neck_refine", s.neck_refine);
    get("bend_radius", s.bend_radius);
    get("bend_angle_deg", s.bend_angle_deg);
    get("wiggle_amplitude", s.wiggle_amplitude);
    get("wiggle_wavelength", s.wiggle_wavelength);
    get("octaves", s.octaves);
    get("perturbation_amplitude", s.perturbation_amplitude);
    get("perturbation_mode", s.perturbation_mode);
    get("n_circ", s.n_circ);
    get("n_axial", s.n_axial);
    get("max_edge", s.max_edge);
    get("file", s.file);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidParams, std::string("scenario: ") + e.what());
  }
  if (!j.contains("name")) s.name = s.generator;
  return s;
}

nlohmann::json to_json(const Scenario& s) {
  return {{"name", s.name},
          {"generator", s.generator},
          {"seed", s.seed},
          {"radius", s.radius},
          {"level", s.level},
          {"center", {s.center.x(), s.center.y(), s.center.z()}},
          {"length", s.length},
          {"major_radius", s.major_radius},
          {"neck_radius", s.neck_radius},
          {"separation", s.separation},
          {"flare", s.flare},
          {"neck_refine", s.neck_refine},
          {"bend_radius", s.bend_radius},
          {"bend_angle_deg", s.bend_angle_deg},
          {"wiggle_amplitude", s.wiggle_amplitude},
          {"wiggle_wavelength", s.wiggle_wavelength},
          {"octaves", s.octaves},
          {"perturbation_amplitude", s.perturbation_amplitude},
          {"perturbation_mode", s.perturbation_mode},
          {"n_circ", s.n_circ},
          {"n_axial", s.n_axial},
          {"max_edge", s.max_edge},
          {"file", s.file}};
}

TriMesh make_icosphere(double radius, int level, const Vec3& center) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& v : m.vertices) v.normalize();
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const int idx = m.num_vertices();
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      const int a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    m.faces = std::move(next);
  }
  for (auto& v : m.vertices) v = center + radius * v;
  return m;
}

TriMesh make_capped_cylinder(double radius, double barrel_length, int n_circ, double perturbation_amplitude,
                             int perturbation_mode, int n_axial) {
  detail::TubeSpec spec;
  spec.curve = [barrel_length](double u) { return Vec3(0.0, 0.0, (u - 0.5) * barrel_length); };
  spec.radius = radius;
  spec.n_circ = n_circ;
  spec.n_axial = n_axial;
  spec.amp = perturbation_amplitude;
  spec.mode = perturbation_mode;
  TriMesh m = detail::sweep_tube(spec);
  orient_outward(m);
  return m;
}

TriMesh make_torus(double tube_radius, double major_radius, int n_circ, int n_axial) {
  detail::TubeSpec spec;
  spec.curve = [major_radius](double u) {
    return Vec3(major_radius * std::cos(2 * kPi * u), major_radius * std::sin(2 * kPi * u), 0.0);
  };
  spec.closed = true;
  spec.radius = tube_radius;
  spec.n_circ = n_circ;
  spec.n_axial = n_axial;
  TriMesh m = detail::sweep_tube(spec);
  orient_outward(m);
  return m;
}

namespace {

struct ProfilePoint {
  double rho, z, curv;  // curv: max principal curvature magnitude
};

// Half profile from the neck middle (z = 0) to the pole of the upper ball:
// straight neck, a mean convex flare with d(phi)/ds = flare * cos(phi) / rho
// (phi = tangent angle from the axis) until it meets a tangent sphere, then
// the sphere arc. Returned densely sampled.
std::vector<ProfilePoint> dumbbell_half_profile(double R, double r, double separation, double flare) {
  const double ds = 1e-5 * R;
  std::vector<ProfilePoint> flare_pts;
  double rho = r, z = 0.0, phi = 0.0;
  while (rho < R * std::cos(phi)) {
    flare_pts.push_back({rho, z, std::cos(phi) / rho * std::sqrt(1.0 + flare * flare)});
    const double dphi = flare * std::cos(phi) / rho;
    rho += std::sin(phi) * ds;
    z += std::cos(phi) * ds;
    phi += dphi * ds;
  }
  const double zc_rel = z + R * std::sin(phi);  // ball center relative to flare start
  const double half_neck = 0.5 * separation - zc_rel;
  if (half_neck < 0.0) throw Error(ErrorCode::InvalidParams, "dumbbell separation too small for the flare");

  std::vector<ProfilePoint> pts;
  for (double s = 0.0; s < half_neck; s += ds * 10) pts.push_back({r, s, 1.0 / r});
  for (const auto& p : flare_pts) pts.push_back({p.rho, p.z + half_neck, p.curv});
  const double zc = 0.5 * separation;
  // sphere arc: angle alpha from the lower pole of the ball, alpha = pi/2 - phi
  const double a0 = 0.5 * kPi - phi;
  for (double a = a0; a < kPi; a += ds / R) pts.push_back({R * std::sin(a), zc - R * std::cos(a), 1.0 / R});
  pts.push_back({0.0, zc + R, 1.0 / R});
  return pts;
}

}  // namespace

TriMesh make_dumbbell(double ball_radius, double neck_radius, double separation, double flare, int n_circ,
                      double max_edge, double neck_refine) {
  if (!(neck_refine >= 1.0)) throw Error(ErrorCode::InvalidParams, "neck_refine must be >= 1");
  const auto half = dumbbell_half_profile(ball_radius, neck_radius, separation, flare);
  const double zmax = half.back().z;

  // resample so that edge length ~ 2 pi / (n_circ * |A|), capped at max_edge
  auto target_edge = [&](const ProfilePoint& p) { return std::min(max_edge, 2.0 * kPi / (n_circ * p.curv)); };
  // axial gap shrinks by neck_refine at the waist, blending out by rho = 2 r
  auto axial_gap = [&](const ProfilePoint& p) {
    const double w = std::clamp((2.0 * neck_radius - p.rho) / neck_radius, 0.0, 1.0);
    return std::sqrt(3.0) / 2.0 * target_edge(p) / (1.0 + (neck_refine - 1.0) * w);
  };
  std::vector<std::pair<double, double>> samples;  // (rho, z) of rings on the upper half, z > 0
  {
    double acc = 0.0;
    double next_gap = axial_gap(half[0]);
    samples.push_back({half[0].rho, half[0].z});
    for (std::size_t k = 1; k < half.size(); ++k) {
      acc += std::hypot(half[k].rho - half[k - 1].rho, half[k].z - half[k - 1].z);
      if (acc >= next_gap) {
        samples.push_back({half[k].rho, half[k].z});
        acc = 0.0;
        next_gap = axial_gap(half[k]);
      }
    }
    // drop rings too close to the pole; the pole closes the surface
    while (!samples.empty() && std::hypot(samples.back().first, samples.back().second - zmax) <
                                   0.6 * std::sqrt(3.0) / 2.0 * target_edge(half.back()))
      samples.pop_back();
  }

  detail::RingStack stack;
  // stagger shrinks where rings are refined, see the tube sweep
  auto ring_for = [&](double rho, double z, const ProfilePoint& at, int parity) {
    detail::Ring ring;
    ring.center = Vec3(0, 0, z);
    ring.e1 = Vec3::UnitX();
    ring.e2 = Vec3::UnitY();
    ring.radius = rho;
    ring.count = std::max(5, static_cast<int>(std::lround(2.0 * kPi * rho / target_edge(at))));
    const double density = std::sqrt(3.0) / 2.0 * target_edge(at) / axial_gap(at);
    ring.offset = parity ? kPi / ring.count / density : 0.0;
    return ring;
  };
  // curvature lookup by nearest dense sample along z
  auto profile_at = [&](double z) {
    const auto it = std::lower_bound(half.begin(), half.end(), z,
                                     [](const ProfilePoint& p, double zz) { return p.z < zz; });
    return it == half.end() ? half.back() : *it;
  };
  const int ns = static_cast<int>(samples.size());
  for (int k = ns - 1; k >= 1; --k) {
    const auto& [rho, z] = samples[k];
    stack.rings.push_back(ring_for(rho, -z, profile_at(z), k % 2));
  }
  for (int k = 0; k < ns; ++k) {
    const auto& [rho, z] = samples[k];
    stack.rings.push_back(ring_for(rho, z, profile_at(z), k % 2));
  }
  stack.start_pole = stack.end_pole = true;
  stack.start_pole_pos = Vec3(0, 0, -zmax);
  stack.end_pole_pos = Vec3(0, 0, zmax);
  TriMesh m = detail::build_ring_stack(stack);
  orient_outward(m);
  return m;
}

namespace {

TriMesh make_bent_tube(const Scenario& s, nlohmann::json& truth) {
  const double theta = s.bend_angle_deg * kPi / 180.0;
  const double Rb = s.bend_radius;
  const double arc = Rb * theta;
  const double leg = 0.5 * std::max(0.0, s.length - arc);
  const double total = 2.0 * leg + arc;
  detail::TubeSpec spec;
  spec.curve = [=](double u) {
    const double sig = u * total;
    if (sig <= leg) return Vec3(sig - leg, 0.0, 0.0);
    if (sig <= leg + arc) {
      const double psi = (sig - leg) / Rb;
      return Vec3(Rb * std::sin(psi), Rb * (1.0 - std::cos(psi)), 0.0);
    }
    const double rest = sig - leg - arc;
    return Vec3(Rb * std::sin(theta) + rest * std::cos(theta), Rb * (1.0 - std::cos(theta)) + rest * std::sin(theta),
                0.0);
  };
  spec.radius = s.radius;
  spec.n_circ = s.n_circ;
  spec.n_axial = s.n_axial;
  truth["centerline_length"] = total;
  truth["leg_length"] = leg;
  truth["bend_radius"] = Rb;
  truth["bend_angle_deg"] = s.bend_angle_deg;
  truth["tube_radius"] = s.radius;
  return detail::sweep_tube(spec);
}

TriMesh make_wiggly_tube(const Scenario& s, nlohmann::json& truth) {
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::vector<std::array<double, 2>> phases(s.octaves);
  for (auto& p : phases) p = {phase(rng), phase(rng)};
  const double L = s.length;
  const double A = s.wiggle_amplitude, lam = s.wiggle_wavelength;
  const int oct = s.octaves;
  // amplitude drops by 4 per octave so every octave has the same peak curvature
  auto curve = [=](double u) {
    const double x = (u - 0.5) * L;
    double y = 0.0, z = 0.0;
    for (int k = 0; k < oct; ++k) {
      const double amp = A * std::pow(0.25, k);
      const double w = 2.0 * kPi * std::pow(2.0, k) / lam;
      y += amp * std::sin(w * x + phases[k][0]);
      z += amp * std::sin(w * x + phases[k][1]);
    }
    return Vec3(x, y, z);
  };
  detail::TubeSpec spec;
  spec.curve = curve;
  spec.radius = s.radius;
  spec.n_circ = s.n_circ;
  spec.n_axial = s.n_axial;
  truth["centerline_length"] = detail::curve_length(curve);
  truth["tube_radius"] = s.radius;
  nlohmann::json ph = nlohmann::json::array();
  for (const auto& p : phases) ph.push_back({p[0], p[1]});
  truth["phases"] = ph;
  return detail::sweep_tube(spec);
}

}  // namespace

GeneratedSurface generate(const Scenario& s) {
  s.validate();
  GeneratedSurface out;
  auto& truth = out.ground_truth;
  truth["generator"] = s.generator;
  if (s.generator == "sphere") {
    out.mesh = make_icosphere(s.radius, s.level, s.center);
    truth["radius"] = s.radius;
    truth["area"] = 4.0 * kPi * s.radius * s.radius;
    truth["vertices"] = 10 * (1 << (2 * s.level)) + 2;
  } else if (s.generator == "capped_cylinder") {
    out.mesh = make_capped_cylinder(s.radius, s.length, s.n_circ, s.perturbation_amplitude, s.perturbation_mode,
                                    s.n_axial);
    truth["tube_radius"] = s.radius;
    truth["barrel_length"] = s.length;
    truth["axis"] = {0, 0, 1};
    truth["perturbation_amplitude"] = s.perturbation_amplitude;
  } else if (s.generator == "torus") {
    out.mesh = make_torus(s.radius, s.major_radius, s.n_circ, s.n_axial);
    truth["tube_radius"] = s.radius;
    truth["major_radius"] = s.major_radius;
    truth["centerline_length"] = 2.0 * kPi * s.major_radius;
    truth["euler_characteristic"] = 0;
  } else if (s.generator == "dumbbell") {
    out.mesh = make_dumbbell(s.radius, s.neck_radius, s.separation, s.flare, s.n_circ, s.max_edge, s.neck_refine);
    truth["ball_radius"] = s.radius;
    truth["neck_radius"] = s.neck_radius;
    truth["separation"] = s.separation;
    truth["axis"] = {0, 0, 1};
  } else if (s.generator == "bent_tube") {
    out.mesh = make_bent_tube(s, truth);
  } else if (s.generator == "wiggly_tube") {
    out.mesh = make_wiggly_tube(s, truth);
  } else {
    out.mesh = read_mesh(s.file);
    truth["file"] = s.file;
  }
  orient_outward(out.mesh);
  validate(out.mesh);
  const auto hit = find_self_intersection(out.mesh);
  if (hit[0] >= 0)
    throw Error(ErrorCode::SelfIntersecting,
                "faces " + std::to_string(hit[0]) + " and " + std::to_string(hit[1]) + " intersect");
  if (s.generator == "dumbbell") {
    const auto curv = estimate_curvature(out.mesh);
    double hmin = 1e300;
    for (double h : curv.H) hmin = std::min(hmin, h);
    truth["min_H"] = hmin;
    if (!(hmin > 0.0)) throw Error(ErrorCode::InvalidParams, "generated dumbbell is not mean convex");
  }
  truth["num_vertices"] = out.mesh.num_vertices();
  truth["num_faces"] = out.mesh.num_faces();
  return out;
}

}  // namespace mcflab
