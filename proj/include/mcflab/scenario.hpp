#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "mcflab/mesh.hpp"

namespace mcflab {

/// Parameters of a generated initial surface. Fields irrelevant to the
/// chosen generator are ignored.
struct Scenario {
  std::string name = "sphere";
  std::string generator = "sphere";  // sphere | capped_cylinder | dumbbell | torus | bent_tube | wiggly_tube | from_file
  std::uint64_t seed = 0;

  double radius = 1.0;  // sphere radius, tube radius, dumbbell ball radius
  int level = 4;        // icosphere subdivisions
  Vec3 center = Vec3::Zero();

  double length = 4.0;        // barrel length of capped / bent / wiggly tubes
  double major_radius = 1.0;  // torus
  double neck_radius = 0.15;  // dumbbell
  double separation = 3.0;    // dumbbell ball centers
  double flare = 0.7;         // dumbbell neck-to-ball blend rate, in (0,1)
  double neck_refine = 1.0;   // dumbbell: axial ring spacing divided by this at the waist

  double bend_radius = 1.5;
  double bend_angle_deg = 90.0;

  double wiggle_amplitude = 0.1;
  double wiggle_wavelength = 2.0;
  int octaves = 3;

  double perturbation_amplitude = 0.0;  // radial cos(mode * angle) term on tubes
  int perturbation_mode = 2;

  int n_circ = 24;        // vertices around a tube cross-section
  int n_axial = 0;        // rings along a tube centerline; 0 picks near-equilateral spacing
  double max_edge = 0.1;  // coarsest edge on dumbbell balls
  std::string file;       // from_file

  void validate() const;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);

struct GeneratedSurface {
  TriMesh mesh;
  /// Analytic description of what was generated (radii, centerline, ...).
  nlohmann::json ground_truth;
};

/// Deterministic given the parameters and seed. Checks the mesh invariants
/// and embeddedness; throws InvalidParams or SelfIntersecting.
GeneratedSurface generate(const Scenario& scenario);

// Individual generators, also used directly by tests.
TriMesh make_icosphere(double radius, int level, const Vec3& center = Vec3::Zero());
TriMesh make_capped_cylinder(double radius, double barrel_length, int n_circ, double perturbation_amplitude = 0.0,
                             int perturbation_mode = 2, int n_axial = 0);
TriMesh make_torus(double tube_radius, double major_radius, int n_circ, int n_axial = 0);
TriMesh make_dumbbell(double ball_radius, double neck_radius, double separation, double flare, int n_circ,
                      double max_edge, double neck_refine = 1.0);

/// Pairwise triangle intersection test between faces that share no vertex.
/// Returns the first offending face pair, or {-1,-1}.
std::array<int, 2> find_self_intersection(const TriMesh& mesh);

}  // namespace mcflab
