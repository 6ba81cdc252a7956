#include "mcflab/flow.hpp"

#include <algorithm>
#include <cmath>

namespace mcflab {

void FlowHistory::validate() const {
  if (states.empty()) throw Error(ErrorCode::EmptyHistory, "history has no snapshots");
  for (std::size_t k = 1; k < states.size(); ++k) {
    if (!(states[k].t > states[k - 1].t))
      throw Error(ErrorCode::InvalidParams, "snapshot times must increase strictly");
    if (states[k].mesh.faces != states[0].mesh.faces)
      throw Error(ErrorCode::InvalidParams, "snapshots must share one face list");
  }
}

TriMesh FlowHistory::mesh_at(double t) const {
  if (states.empty()) throw Error(ErrorCode::EmptyHistory, "history has no snapshots");
  const double eps = 1e-12 * std::max(1.0, std::abs(t));
  if (t < states.front().t - eps || t > states.back().t + eps)
    throw Error(ErrorCode::TimeOutOfRange, "time " + std::to_string(t) + " outside the recorded interval");
  auto it = std::lower_bound(states.begin(), states.end(), t,
                             [](const FlowState& s, double x) { return s.t < x; });
  if (it != states.end() && std::abs(it->t - t) <= eps) return it->mesh;
  if (it == states.begin()) return it->mesh;
  if (it == states.end()) return states.back().mesh;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (t - lo.t) / (hi.t - lo.t);
  TriMesh out = lo.mesh;
  for (int v = 0; v < out.num_vertices(); ++v)
    out.vertices[v] = (1.0 - w) * lo.mesh.vertices[v] + w * hi.mesh.vertices[v];
  return out;
}

FlowState make_state(TriMesh mesh, double t, const MeshTopology& topo) {
  FlowState s;
  s.t = t;
  s.curv = estimate_curvature(mesh, topo);
  s.mesh = std::move(mesh);
  return s;
}

FlowState make_state(TriMesh mesh, double t) {
  const MeshTopology topo(mesh);
  return make_state(std::move(mesh), t, topo);
}

void StepControl::validate() const {
  if (!(cfl > 0.0 && cfl < 1.0)) throw Error(ErrorCode::InvalidParams, "cfl must lie in (0,1)");
  if (!(dt_max >= 0.0)) throw Error(ErrorCode::InvalidParams, "dt_max must be non-negative");
  if (!(stop_maxA > 0.0) || !(stop_quality > 0.0) || !(t_max > 0.0))
    throw Error(ErrorCode::InvalidParams, "stop thresholds must be positive");
  if (snapshot_maxA_ratio != 0.0 && !(snapshot_maxA_ratio > 1.0))
    throw Error(ErrorCode::InvalidParams, "snapshot_maxA_ratio must be 0 or > 1");
  if (!(tangential_relaxation >= 0.0 && tangential_relaxation < 1.0))
    throw Error(ErrorCode::InvalidParams, "tangential_relaxation must lie in [0,1)");
}

double choose_dt(const FlowState& state, const StepControl& ctrl) {
  const double a = state.curv.max_A();
  const double by_curvature = a > 0.0 ? ctrl.cfl / (a * a) : ctrl.dt_max;
  return std::min(ctrl.dt_max, by_curvature);
}

namespace {

void relax_tangentially(TriMesh& mesh, const CurvatureField& curv, const MeshTopology& topo, double weight) {
  std::vector<Vec3> shift(mesh.num_vertices(), Vec3::Zero());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    Vec3 centroid = Vec3::Zero();
    double wsum = 0.0;
    for (int u : topo.one_ring(v)) {
      centroid += curv.vertex_area[u] * mesh.vertices[u];
      wsum += curv.vertex_area[u];
    }
    const Vec3 d = centroid / wsum - mesh.vertices[v];
    shift[v] = weight * (d - d.dot(curv.normal[v]) * curv.normal[v]);
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) mesh.vertices[v] += shift[v];
}

void check_quality(const TriMesh& mesh, double threshold) {
  for (const auto& v : mesh.vertices)
    if (!v.allFinite()) throw Error(ErrorCode::QualityCollapse, "non-finite vertex position");
  const double q = min_triangle_quality(mesh);
  if (q < threshold)
    throw Error(ErrorCode::QualityCollapse, "min triangle quality " + std::to_string(q) + " below " +
                                                std::to_string(threshold));
}

}  // namespace

FlowState mcf_step_dt(const FlowState& state, double dt, const StepControl& ctrl, const MeshTopology& topo) {
  if (dt == 0.0) return state;
  TriMesh next = state.mesh;
  for (int v = 0; v < next.num_vertices(); ++v)
    next.vertices[v] -= dt * state.curv.H[v] * state.curv.normal[v];
  if (ctrl.tangential_relaxation > 0.0) relax_tangentially(next, state.curv, topo, ctrl.tangential_relaxation);
  check_quality(next, ctrl.stop_quality);
  return make_state(std::move(next), state.t + dt, topo);
}

FlowState mcf_step(const FlowState& state, const StepControl& ctrl, const MeshTopology& topo) {
  return mcf_step_dt(state, choose_dt(state, ctrl), ctrl, topo);
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxA: return "maxA";
    case StopReason::Quality: return "quality";
    case StopReason::TMax: return "t_max";
  }
  return "unknown";
}

StopReason stop_reason_from_string(const std::string& s) {
  if (s == "maxA") return StopReason::MaxA;
  if (s == "quality") return StopReason::Quality;
  if (s == "t_max") return StopReason::TMax;
  throw Error(ErrorCode::ParseError, "unknown stop reason '" + s + "'");
}

FlowRun run_flow(const TriMesh& initial, const StepControl& ctrl, double snapshot_every) {
  ctrl.validate();
  if (!(snapshot_every > 0.0)) throw Error(ErrorCode::InvalidParams, "snapshot cadence must be positive");
  validate(initial);
  auto topo = std::make_shared<const MeshTopology>(initial);

  FlowRun run;
  run.history.topology = topo;
  FlowState state = make_state(initial, 0.0, *topo);
  run.history.states.push_back(state);
  double next_snapshot = snapshot_every;
  double last_snapshot_maxA = state.curv.max_A();

  while (true) {
    if (state.curv.max_A() >= ctrl.stop_maxA) {
      run.stop_reason = StopReason::MaxA;
      break;
    }
    if (state.t >= ctrl.t_max) {
      run.stop_reason = StopReason::TMax;
      break;
    }
    double dt = choose_dt(state, ctrl);
    dt = std::min(dt, ctrl.t_max - state.t);
    if (!(dt > 0.0)) {
      run.stop_reason = StopReason::TMax;
      run.detail = "time step vanished";
      break;
    }
    try {
      state = mcf_step_dt(state, dt, ctrl, *topo);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::QualityCollapse) throw;
      run.stop_reason = StopReason::Quality;
      run.detail = e.what();
      break;
    }
    ++run.steps;
    const double a = state.curv.max_A();
    const bool cadence = state.t >= next_snapshot - 1e-15;
    const bool growth = ctrl.snapshot_maxA_ratio > 0.0 && a >= ctrl.snapshot_maxA_ratio * last_snapshot_maxA;
    if (cadence || growth) {
      run.history.states.push_back(state);
      last_snapshot_maxA = a;
      while (next_snapshot <= state.t + 1e-15) next_snapshot += snapshot_every;
    }
  }
  if (run.history.states.back().t != state.t) run.history.states.push_back(state);
  return run;
}

FlowRun run_flow_to_times(const TriMesh& initial, const StepControl& ctrl, const std::vector<double>& times) {
  ctrl.validate();
  if (times.empty() || !(times.front() > 0.0) || !std::is_sorted(times.begin(), times.end()) ||
      std::adjacent_find(times.begin(), times.end()) != times.end())
    throw Error(ErrorCode::InvalidParams, "snapshot times must be positive and strictly increasing");
  validate(initial);
  auto topo = std::make_shared<const MeshTopology>(initial);

  FlowRun run;
  run.history.topology = topo;
  FlowState state = make_state(initial, 0.0, *topo);
  run.history.states.push_back(state);
  std::size_t next = 0;
  while (next < times.size()) {
    if (state.curv.max_A() >= ctrl.stop_maxA) {
      run.stop_reason = StopReason::MaxA;
      break;
    }
    double dt = choose_dt(state, ctrl);
    const bool lands = state.t + dt >= times[next];
    if (lands) dt = times[next] - state.t;
    try {
      state = mcf_step_dt(state, dt, ctrl, *topo);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::QualityCollapse) throw;
      run.stop_reason = StopReason::Quality;
      run.detail = e.what();
      break;
    }
    ++run.steps;
    if (lands) {
      state.t = times[next++];
      run.history.states.push_back(state);
    }
  }
  if (next == times.size()) run.stop_reason = StopReason::TMax;
  if (run.history.states.back().t != state.t) run.history.states.push_back(state);
  return run;
}

std::vector<Vec3> rescaled_velocity(const FlowState& state, const Vec3& center) {
  std::vector<Vec3> vel(state.mesh.num_vertices());
  for (int v = 0; v < state.mesh.num_vertices(); ++v) {
    const Vec3& n = state.curv.normal[v];
    const double normal_pos = (state.mesh.vertices[v] - center).dot(n);
    vel[v] = (-state.curv.H[v] + 0.5 * normal_pos) * n;
  }
  return vel;
}

FlowState rescaled_step(const FlowState& state, const Vec3& center, double ds, const StepControl& ctrl,
                        const MeshTopology& topo) {
  if (ds == 0.0) return state;
  const auto vel = rescaled_velocity(state, center);
  TriMesh next = state.mesh;
  for (int v = 0; v < next.num_vertices(); ++v) next.vertices[v] += ds * vel[v];
  check_quality(next, ctrl.stop_quality);
  return make_state(std::move(next), state.t + ds, topo);
}

FlowRun run_rescaled_flow(const TriMesh& initial, const Vec3& center, double s0, const RescaledControl& rc,
                          double snapshot_every) {
  if (!(rc.cfl > 0.0 && rc.cfl < 1.0) || !(rc.ds_max > 0.0) || !(snapshot_every > 0.0))
    throw Error(ErrorCode::InvalidParams, "invalid rescaled flow control");
  validate(initial);
  auto topo = std::make_shared<const MeshTopology>(initial);
  StepControl ctrl;
  ctrl.stop_quality = rc.stop_quality;

  FlowRun run;
  run.history.topology = topo;
  FlowState state = make_state(initial, s0, *topo);
  run.history.states.push_back(state);
  double next_snapshot = s0 + snapshot_every;
  const double s_end = s0 + rc.s_end;
  while (state.t < s_end - 1e-12) {
    const double a = state.curv.max_A();
    double ds = std::min(rc.ds_max, rc.cfl / std::max(a * a, 1.0));
    ds = std::min(ds, s_end - state.t);
    // land exactly on snapshot times so that series are sampled uniformly
    if (state.t + ds > next_snapshot - 1e-12) ds = next_snapshot - state.t;
    try {
      state = rescaled_step(state, center, ds, ctrl, *topo);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::QualityCollapse) throw;
      run.stop_reason = StopReason::Quality;
      run.detail = e.what();
      break;
    }
    ++run.steps;
    if (state.t >= next_snapshot - 1e-12) {
      run.history.states.push_back(state);
      next_snapshot += snapshot_every;
    }
  }
  if (run.history.states.back().t != state.t) run.history.states.push_back(state);
  return run;
}

TriMesh to_rescaled(const TriMesh& mesh, const Vec3& center, double t_star, double t) {
  if (!(t < t_star)) throw Error(ErrorCode::TimeOutOfRange, "rescaling requires t < t_star");
  const double inv = 1.0 / std::sqrt(t_star - t);
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = (v - center) * inv;
  return out;
}

double rescaled_time(double t_star, double t) {
  if (!(t < t_star)) throw Error(ErrorCode::TimeOutOfRange, "rescaling requires t < t_star");
  return -std::log(t_star - t);
}

FlowHistory rescale_history(const FlowHistory& history, const Vec3& center, double t_star) {
  FlowHistory out;
  out.topology = history.topology;
  for (const auto& st : history.states) {
    if (!(st.t < t_star)) continue;
    out.states.push_back(make_state(to_rescaled(st.mesh, center, t_star, st.t), rescaled_time(t_star, st.t),
                                    *history.topology));
  }
  if (out.empty()) throw Error(ErrorCode::EmptyHistory, "no snapshot precedes t_star");
  return out;
}

}  // namespace mcflab
