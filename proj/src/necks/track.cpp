#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcflab/necks.hpp"

namespace mcflab {

StrongNeckTrack track_strong_neck(const FlowHistory& history, const NeckFit& final_neck, const TrackOptions& opts) {
  if (history.empty()) throw Error(ErrorCode::EmptyHistory, "no snapshots to track");
  if (!(opts.window > 0.0) || !(opts.tol_r > 0.0) || !(opts.eps1 > 0.0) || !(opts.lookback >= 0.0))
    throw Error(ErrorCode::InvalidParams, "invalid track options");
  const auto& last = history.back();
  NeckFit f;
  try {
    f = fit_cylinder_at(last.mesh, last.curv, final_neck.center, final_neck.radius / opts.window, opts.fit);
  } catch (const Error& e) {
    throw Error(ErrorCode::TrackLost, "at t=" + std::to_string(last.t) + ": " + e.what());
  }
  if (f.eps_measured > opts.eps1)
    throw Error(ErrorCode::TrackLost, "at t=" + std::to_string(last.t) + ": eps " + std::to_string(f.eps_measured) +
                                          " above eps1");

  StrongNeckTrack track;
  track.p = f.center;
  track.t_star = last.t + 0.5 * f.radius * f.radius;
  std::vector<TrackSample> rev;
  rev.push_back({last.t, f, f.radius, 0.0});
  for (int j = history.size() - 2; j >= 0; --j) {
    const auto& st = history.states[j];
    if (st.t < last.t - opts.lookback) break;
    const double target = std::sqrt(2.0 * (track.t_star - st.t));
    NeckFit g;
    try {
      g = fit_cylinder_at(st.mesh, st.curv, track.p, target / opts.window, opts.fit);
    } catch (const Error& e) {
      track.lost_at = st.t;
      track.lost_reason = e.what();
      break;
    }
    const double residual = std::abs(g.radius / target - 1.0);
    if (residual > opts.tol_r) {
      track.lost_at = st.t;
      track.lost_reason = "radius residual " + std::to_string(residual) + " above tol_r";
      break;
    }
    if (g.eps_measured > opts.eps1) {
      track.lost_at = st.t;
      track.lost_reason = "eps " + std::to_string(g.eps_measured) + " above eps1";
      break;
    }
    rev.push_back({st.t, g, target, residual});
  }
  track.samples.assign(rev.rbegin(), rev.rend());
  for (const auto& s : track.samples) {
    track.max_eps_over_track = std::max(track.max_eps_over_track, s.fit.eps_measured);
    track.max_radius_residual = std::max(track.max_radius_residual, s.radius_residual);
  }
  return track;
}

namespace {

double axis_angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(std::abs(normalize_axis_sign(a).dot(normalize_axis_sign(b))), 0.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace

TiltReport measure_tilt(const std::vector<Vec3>& axes) {
  if (axes.size() < 2) throw Error(ErrorCode::TooShort, "tilt needs at least two axes");
  TiltReport r;
  r.total_tilt_deg = axis_angle_deg(axes.front(), axes.back());
  for (std::size_t k = 1; k < axes.size(); ++k) r.profile_deg.push_back(axis_angle_deg(axes[k - 1], axes[k]));
  return r;
}

TiltReport measure_tilt(const StrongNeckTrack& track) {
  std::vector<Vec3> axes;
  for (const auto& s : track.samples) axes.push_back(s.fit.axis);
  return measure_tilt(axes);
}

nlohmann::json to_json(const StrongNeckTrack& t) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : t.samples)
    samples.push_back({{"t", s.t},
                       {"target_radius", s.target_radius},
                       {"radius_residual", s.radius_residual},
                       {"fit", to_json(s.fit)}});
  nlohmann::json j = {{"p", {t.p.x(), t.p.y(), t.p.z()}},
                      {"t_star", t.t_star},
                      {"max_eps_over_track", t.max_eps_over_track},
                      {"max_radius_residual", t.max_radius_residual},
                      {"samples", samples}};
  if (t.lost_at) {
    j["lost_at"] = *t.lost_at;
    j["lost_reason"] = t.lost_reason;
  } else {
    j["lost_at"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const TiltReport& t) {
  return {{"total_tilt_deg", t.total_tilt_deg}, {"profile_deg", t.profile_deg}};
}

}  // namespace mcflab
