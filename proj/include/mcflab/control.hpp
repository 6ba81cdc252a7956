#pragma once

#include <nlohmann/json.hpp>

#include "mcflab/curvature.hpp"
#include "mcflab/mesh.hpp"

namespace mcflab {

/// Initial-data controls: noncollapsing constant alpha, two-convexity
/// constant beta, curvature bound gamma (1/length), area bound (length^2).
struct ControlParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double area_bound = 1.0;
  /// Allowed penetration of a tangent ball, in units of local mean edge length.
  double penetration_tolerance = 2.0;

  void validate() const;
};

struct ControlCheck {
  bool ok = false;
  double witness = 0.0;
};

/// Witnesses: mean_convex = min H; beta_two_convex = min (l1+l2)/H;
/// gamma = max H; area = total area; alpha = worst penetration divided by
/// local edge length (<= tolerance passes), with the offending vertex.
struct ControlReport {
  ControlCheck mean_convex;
  ControlCheck beta_two_convex;
  ControlCheck gamma_ok;
  ControlCheck area_ok;
  ControlCheck alpha_ok;
  int alpha_witness_vertex = -1;
  double penetration_tolerance = 2.0;

  bool all_ok() const {
    return mean_convex.ok && beta_two_convex.ok && gamma_ok.ok && area_ok.ok && alpha_ok.ok;
  }
};

/// Brute force O(V^2) tangent-ball test for alpha; the remaining checks are
/// pointwise. A mesh that is not mean convex fails mean_convex, beta and alpha.
ControlReport check_control_params(const TriMesh& mesh, const CurvatureField& curv, const ControlParams& params);

nlohmann::json to_json(const ControlReport& report);

}  // namespace mcflab
