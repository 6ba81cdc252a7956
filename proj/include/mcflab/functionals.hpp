#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcflab/curvature.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/geodesic.hpp"
#include "mcflab/mesh.hpp"

namespace mcflab {

// ---- Gaussian area ----

/// (4 pi)^{-1} * integral of exp(-|y|^2/4) over y = scale * (mesh - center),
/// six-point (degree 4) quadrature per face.
double gaussian_area(const TriMesh& mesh, const Vec3& center, double scale);

/// Quadrature nodes of a mesh: six points per face with area weights.
/// Evaluating many (center, scale) pairs against one node set avoids
/// recomputing the rule.
struct GaussianNodes {
  std::vector<Vec3> points;
  std::vector<double> weights;
  static GaussianNodes faces(const TriMesh& mesh);
  static GaussianNodes vertices(const TriMesh& mesh, std::span<const double> vertex_area);
  double evaluate(const Vec3& center, double scale) const;
};

// ---- entropy ----

struct EntropySearch {
  int grid = 11;          // centers per bounding-box axis
  int n_scales = 25;      // log-spaced scales
  double scale_lo = 0.05;  // times 1/R_bb
  double scale_hi = 20.0;  // times 1/R_bb
  int refine_candidates = 4;
  int refine_rounds = 3;
  bool curvature_seeds = true;
};

struct EntropyResult {
  double lambda = 0.0;
  Vec3 center = Vec3::Zero();
  double scale = 1.0;
  // search resolution
  double center_step = 0.0;
  double log_scale_step = 0.0;
  double refined_center_bracket = 0.0;
  double refined_log_scale_bracket = 0.0;
  int evaluations = 0;
};

/// Lower bound on sup over (center, scale) of the Gaussian area. Never below
/// the value at (origin, 1).
EntropyResult entropy(const TriMesh& mesh, const EntropySearch& search = {});
EntropyResult entropy(const TriMesh& mesh, const CurvatureField& curv, const EntropySearch& search = {});

nlohmann::json to_json(const EntropyResult& r);

// ---- Huisken's quantity ----

/// Gaussian area of the snapshot at time t (interpolated if needed) about x0
/// with scale 1/sqrt(t0 - t). Throws TimeOutOfRange if t >= t0.
double huisken_phi(const FlowHistory& history, const Vec3& x0, double t0, double t);

// ---- curvature integrals ----

enum class CurvatureQuantity { H, A };

/// Integral of |H|^power or |A|^power against the vertex areas.
double curvature_integral(const CurvatureField& curv, CurvatureQuantity which, double power);

struct ToppingResult {
  double diam = 0.0;
  double int_H = 0.0;
  double ratio = 0.0;
  DiameterResult diameter;
};

ToppingResult topping_check(const TriMesh& mesh, const CurvatureField& curv, const DiameterOptions& opts = {});
ToppingResult topping_check(const TriMesh& mesh, const MeshTopology& topo, const CurvatureField& curv,
                            const DiameterOptions& opts = {});

// ---- regularity scale ----

struct RegularityOptions {
  double cap = 1.0;                   // largest admissible radius
  double time_window = 1.0;           // snapshots with |t' - t_k| < time_window are searched
  double coherence_angle_deg = 60.0;  // normal-coherence proxy for the graph condition
};

struct RegularityScaleField {
  std::vector<double> r;
  /// Vertices whose value was set by the normal-coherence proxy rather than
  /// by the curvature bound.
  std::vector<bool> coherence_limited;
  double spatial_radius = 0.0;  // largest ball searched
  double t_lo = 0.0, t_hi = 0.0;  // snapshot times actually searched
  bool window_truncated = false;  // history did not cover [t_k - time_window, t_k + time_window]
};

/// Largest r <= cap such that r |A| <= 1 at every (vertex, snapshot) with
/// |x' - x| < r and |t' - t_k| < r^2, and all those normals lie within the
/// coherence angle of the centre normal. Computed exactly by sorting the
/// candidate pairs by their activation radius max(|x' - x|, sqrt|t' - t_k|).
RegularityScaleField regularity_scale(const FlowHistory& history, int k, const RegularityOptions& opts = {});

/// Integral of 1/r against vertex areas at snapshot k.
double regularity_integral(const FlowHistory& history, int k, const RegularityScaleField& field);

// ---- reduction quantities ----

struct ReductionResult {
  double D_est = 0.0;
  double L_est = 0.0;
  int superlevel_vertices = 0;  // vertices with H > 2 Hbar
  int tubes_considered = 0;
};

struct Tube;

/// D_est: longest shortest path inside {H > 2 Hbar} among farthest-point
/// sampled sources. L_est: longest tube whose vertices all have H > Hbar.
ReductionResult reduction_quantities(const TriMesh& mesh, const CurvatureField& curv, double Hbar,
                                     const std::vector<Tube>& tubes, int n_sources = 64);

// ---- time series ----

struct FunctionalSample {
  double t = 0.0;
  double area = 0.0;
  double F_origin = 0.0;
  double entropy = 0.0;
  double diam = 0.0;
  double int_H_1 = 0.0;
  double int_A_1 = 0.0;
  double maxH = 0.0;
  double maxA = 0.0;
  double int_rinv = 0.0;  // NaN when not computed
};

void write_functionals_csv(const std::filesystem::path& path, const std::vector<FunctionalSample>& rows);
std::vector<FunctionalSample> read_functionals_csv(const std::filesystem::path& path);
void write_regularity_csv(const std::filesystem::path& path, const RegularityScaleField& field);

}  // namespace mcflab
