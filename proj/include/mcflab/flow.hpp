#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "mcflab/curvature.hpp"
#include "mcflab/mesh.hpp"

namespace mcflab {

struct FlowState {
  double t = 0.0;
  TriMesh mesh;
  CurvatureField curv;
};

/// Time-ordered snapshots sharing one face list (vertex i is the same
/// material point in every snapshot).
struct FlowHistory {
  std::vector<FlowState> states;
  std::shared_ptr<const MeshTopology> topology;

  bool empty() const { return states.empty(); }
  int size() const { return static_cast<int>(states.size()); }
  const FlowState& front() const { return states.front(); }
  const FlowState& back() const { return states.back(); }

  /// Checks strictly increasing times and constant connectivity.
  void validate() const;
  /// Snapshot at time t, linearly interpolating vertex positions between the
  /// bracketing snapshots when t is not stored. Throws TimeOutOfRange outside
  /// the covered interval.
  TriMesh mesh_at(double t) const;
};

FlowState make_state(TriMesh mesh, double t, const MeshTopology& topo);
FlowState make_state(TriMesh mesh, double t = 0.0);

struct StepControl {
  double cfl = 0.002;          // dt = min(dt_max, cfl / max|A|^2)
  double dt_max = 1e-3;
  double stop_maxA = 1e3;      // 1/length
  double stop_quality = 0.02;  // minimum triangle quality
  double t_max = 1e30;
  /// Extra snapshot whenever max|A| has grown by this factor since the last
  /// one (0 disables). Resolves the approach to a singularity.
  double snapshot_maxA_ratio = 0.0;
  /// Area-weighted tangential relaxation of each vertex toward its 1-ring
  /// centroid after the normal step; 0 disables.
  double tangential_relaxation = 0.0;

  void validate() const;
};

double choose_dt(const FlowState& state, const StepControl& ctrl);

/// One explicit Euler step x <- x - dt * H * n (n outward). Throws
/// QualityCollapse when the stepped mesh degrades below ctrl.stop_quality.
FlowState mcf_step(const FlowState& state, const StepControl& ctrl, const MeshTopology& topo);
FlowState mcf_step_dt(const FlowState& state, double dt, const StepControl& ctrl, const MeshTopology& topo);

enum class StopReason { MaxA, Quality, TMax };
std::string to_string(StopReason r);
StopReason stop_reason_from_string(const std::string& s);

struct FlowRun {
  FlowHistory history;
  StopReason stop_reason = StopReason::TMax;
  long steps = 0;
  std::string detail;
};

/// Integrates until max|A| >= stop_maxA, a quality collapse, or t_max. The
/// history holds the initial state, snapshots at the requested cadence and
/// the final valid state.
FlowRun run_flow(const TriMesh& initial, const StepControl& ctrl, double snapshot_every);

/// Like run_flow, but steps are shortened to land exactly on each of the
/// increasing `times` (> 0), which are the only snapshots besides t = 0 and
/// the final state. Integration ends at the last time.
FlowRun run_flow_to_times(const TriMesh& initial, const StepControl& ctrl, const std::vector<double>& times);

// ---- rescaled flow: d_s x = -H n + (1/2) <x - center, n> n ----

/// Velocity of the rescaled flow at every vertex.
std::vector<Vec3> rescaled_velocity(const FlowState& state, const Vec3& center);

/// state.t is rescaled time s; returns the state at s + ds.
FlowState rescaled_step(const FlowState& state, const Vec3& center, double ds, const StepControl& ctrl,
                        const MeshTopology& topo);

struct RescaledControl {
  double cfl = 0.01;  // ds = min(ds_max, cfl / max(|A|^2, 1))
  double ds_max = 0.01;
  double s_end = 1.0;
  double stop_quality = 0.02;
};

FlowRun run_rescaled_flow(const TriMesh& initial, const Vec3& center, double s0, const RescaledControl& ctrl,
                          double snapshot_every);

/// Sigma_s = (M_t - center) / sqrt(t_star - t), s = -log(t_star - t).
TriMesh to_rescaled(const TriMesh& mesh, const Vec3& center, double t_star, double t);
double rescaled_time(double t_star, double t);

/// Every snapshot with t < t_star mapped to (x - center) / sqrt(t_star - t)
/// at rescaled time -log(t_star - t), curvature recomputed. Throws
/// EmptyHistory when no snapshot precedes t_star.
FlowHistory rescale_history(const FlowHistory& history, const Vec3& center, double t_star);

// ---- history on disk: snap_XXXXX.off + index.csv ----

void write_history(const std::filesystem::path& dir, const FlowRun& run);
FlowRun read_history(const std::filesystem::path& dir);

}  // namespace mcflab
