#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcflab/curvature.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/mesh.hpp"

namespace mcflab {

/// Cylinder fitted inside a ball. eps_measured is the largest value over the
/// ball of |distance to axis - r| / r plus the angle (radians) between the
/// vertex normal and the model normal; the ball radius is r / window.
struct NeckFit {
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();  // unit, sign-normalised
  double radius = 0.0;
  double eps_measured = 0.0;
  double window = 0.1;
  double ball_radius = 0.0;
  int support = 0;             // vertices inside the ball
  double isotropy_ratio = 0.0;  // smallest / middle eigenvalue of the normal covariance
  double radial_deviation = 0.0;
  double angular_deviation = 0.0;
  int seed_vertex = -1;
};

struct NeckFitOptions {
  int min_support = 30;
  double max_isotropy = 0.2;  // larger smallest/middle ratio: normals not cylinder-like
};

/// Axis v -> +-v with v . (e_z, then e_y, then e_x) > 0 at the first nonzero.
Vec3 normalize_axis_sign(const Vec3& v);

/// Fit using the vertices within ball_radius of `point`. Throws
/// InsufficientSupport or DegenerateFit.
NeckFit fit_cylinder_at(const TriMesh& mesh, const CurvatureField& curv, const Vec3& point, double ball_radius,
                        const NeckFitOptions& opts = {});

/// Fit around a surface vertex: the ball is centred at the axis point
/// suggested by the vertex's mean curvature, then re-centred on the fitted
/// axis and fitted again. The reported window is r / ball_radius.
NeckFit fit_cylinder(const TriMesh& mesh, const CurvatureField& curv, int seed_vertex, double ball_radius,
                     const NeckFitOptions& opts = {});
NeckFit fit_cylinder(const TriMesh& mesh, int seed_vertex, double ball_radius, const NeckFitOptions& opts = {});

struct DetectOptions {
  double eps_threshold = 0.1;
  double window = 0.1;           // ball radius = r / window
  double min_cylindricity = 0.5;  // 1 - |lambda1| / lambda2 at seeds
  NeckFitOptions fit;
};

/// Necks whose fit has eps_measured <= eps_threshold, at most one per r/2.
std::vector<NeckFit> detect_necks(const TriMesh& mesh, const CurvatureField& curv, const DetectOptions& opts = {});

/// Vertices inside the ball of at least one neck.
std::vector<int> neck_ball_vertices(const TriMesh& mesh, const std::vector<NeckFit>& necks);

// ---- strong necks over time ----

struct TrackSample {
  double t = 0.0;
  NeckFit fit;
  double target_radius = 0.0;     // sqrt(2 (t_star - t))
  double radius_residual = 0.0;  // |r_fit / target - 1|
};

struct TrackOptions {
  double eps1 = 0.5;
  double tol_r = 0.1;
  double lookback = 1e30;
  double window = 0.5;
  NeckFitOptions fit;
};

struct StrongNeckTrack {
  Vec3 p = Vec3::Zero();
  double t_star = 0.0;
  std::vector<TrackSample> samples;  // increasing times, last = final snapshot
  double max_eps_over_track = 0.0;
  double max_radius_residual = 0.0;
  /// Earliest snapshot inside the lookback that broke the track, if any.
  std::optional<double> lost_at;
  std::string lost_reason;
};

/// t_star = t_final + r^2 / 2 from the neck fitted at the final snapshot; the
/// track walks backwards fitting at p with ball radius r(t) / window and stops
/// at the first snapshot violating tol_r or eps1. Throws TrackLost if not even
/// the final snapshot fits.
StrongNeckTrack track_strong_neck(const FlowHistory& history, const NeckFit& final_neck,
                                  const TrackOptions& opts = {});

struct TiltReport {
  double total_tilt_deg = 0.0;
  std::vector<double> profile_deg;
};

/// Angles between sign-normalised axes (first vs last, and consecutive).
TiltReport measure_tilt(const StrongNeckTrack& track);
TiltReport measure_tilt(const std::vector<Vec3>& axes);

// ---- tubes ----

struct Tube {
  std::vector<NeckFit> necks;       // ordered along the tube
  std::vector<Vec3> central_curve;  // spline through the centres
  std::vector<double> arclength;    // along central_curve
  double length = 0.0;              // covered length including the end balls
  std::vector<double> tilt_profile_deg;
  bool closed = false;
  std::vector<int> vertices;  // union of the neck balls
};

struct TubeOptions {
  double window = 0.1;
  double max_axis_angle_deg = 30.0;
  int samples_per_segment = 16;
};

/// Necks are linked when their centres are closer than min(r)/window and
/// their axes differ by less than max_axis_angle_deg; each connected
/// component is ordered by walking along the local axes.
std::vector<Tube> assemble_tubes(const TriMesh& mesh, const std::vector<NeckFit>& necks,
                                 const TubeOptions& opts = {});

struct DistanceComparison {
  double max_ratio = 1.0;
  double s1 = 0.0, s2 = 0.0;  // arclength witnesses
  int pairs = 0;
};

/// Max over curve samples with chord below cutoff of curve distance / chord.
DistanceComparison tube_distance_comparison(const Tube& tube, double cutoff, int samples = 512);

struct TubeIntegral {
  double int_H = 0.0;
  double c_observed = 0.0;
};

TubeIntegral tube_integral_estimate(const CurvatureField& curv, const Tube& tube);

nlohmann::json to_json(const NeckFit& fit);
nlohmann::json to_json(const StrongNeckTrack& track);
nlohmann::json to_json(const TiltReport& tilt);
nlohmann::json to_json(const Tube& tube);

}  // namespace mcflab
