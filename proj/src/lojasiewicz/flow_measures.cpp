#include <algorithm>
#include <cmath>
#include <limits>

#include "mcflab/error.hpp"
#include "mcflab/functionals.hpp"
#include "mcflab/lojasiewicz.hpp"
#include "mcflab/necks.hpp"

namespace mcflab {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

// int |H_vec + x_perp / 2| rho dmu with vertex-area weights
double drift_density(const FlowState& st) {
  CompensatedSum acc;
  for (int v = 0; v < st.mesh.num_vertices(); ++v) {
    const Vec3& x = st.mesh.vertices[v];
    const double speed = std::abs(-st.curv.H[v] + 0.5 * x.dot(st.curv.normal[v]));
    acc.add(st.curv.vertex_area[v] * speed * std::exp(-0.25 * x.squaredNorm()));
  }
  return acc.value() / (4.0 * kPi);
}

void check_history(const FlowHistory& h, int stride) {
  if (stride < 1) throw Error(ErrorCode::InvalidParams, "stride must be >= 1");
  if (h.empty()) throw Error(ErrorCode::EmptyHistory, "rescaled history is empty");
}

}  // namespace

FGapSeries fgap_series(const FlowHistory& rescaled, int stride) {
  check_history(rescaled, stride);
  FGapSeries out;
  const int n_snap = static_cast<int>(rescaled.size());
  std::vector<double> density(n_snap);
  for (int k = 0; k < n_snap; ++k) density[k] = drift_density(rescaled.states[k]);

  for (int k = 0; k < n_snap; k += stride) {
    out.s.push_back(rescaled.states[k].t);
    out.F.push_back(gaussian_area(rescaled.states[k].mesh, Vec3::Zero(), 1.0));
  }
  const int n = static_cast<int>(out.F.size());
  out.gaps.assign(n, 0.0);
  out.min_gap = std::numeric_limits<double>::infinity();
  for (int j = 1; j + 1 < n; ++j) {
    out.gaps[j] = out.F[j - 1] - out.F[j + 1];
    out.min_gap = std::min(out.min_gap, out.gaps[j]);
  }
  if (n < 3) out.min_gap = 0.0;
  for (int j = 0; j + 1 < n; ++j) {
    out.drops.push_back(out.F[j] - out.F[j + 1]);
    double integral = 0.0;
    for (int k = j * stride; k < (j + 1) * stride; ++k)
      integral += 0.5 * (density[k] + density[k + 1]) * (rescaled.states[k + 1].t - rescaled.states[k].t);
    out.drift.push_back(integral);
  }
  return out;
}

LSMeasurement measure_LS_inequality(const FlowHistory& rescaled, double Z_value, const LSOptions& opts) {
  check_history(rescaled, opts.stride);
  if (!(opts.mu > 0.0 && opts.mu < 1.0)) throw Error(ErrorCode::InvalidParams, "mu must lie in (0,1)");
  LSMeasurement m;
  m.Z_value = Z_value;
  m.mu = opts.mu;

  std::vector<double> gate;
  for (int k = 0; k < static_cast<int>(rescaled.size()); k += opts.stride) {
    const auto& st = rescaled.states[k];
    double eps = std::numeric_limits<double>::infinity();
    std::string why;
    try {
      eps = fit_cylinder_at(st.mesh, st.curv, Vec3::Zero(), opts.gate_radius).eps_measured;
    } catch (const Error& e) {
      why = e.what();
    }
    if (!(eps <= opts.gate_eps))
      throw Error(ErrorCode::GateFailed, "snapshot " + std::to_string(k) + " at s = " + std::to_string(st.t) +
                                             " is not cylinder-close (eps " + std::to_string(eps) +
                                             (why.empty() ? "" : ", " + why) + ")");
    gate.push_back(eps);
    m.gate_eps_max = std::max(m.gate_eps_max, eps);
  }

  const auto series = fgap_series(rescaled, opts.stride);
  const int n = static_cast<int>(series.F.size());
  for (int j = 1; j + 1 < n; ++j) {
    LSRecord r;
    r.s = series.s[j];
    r.lhs = std::pow(std::abs(series.F[j] - Z_value), 1.0 + opts.mu);
    r.gap = series.gaps[j];
    r.gate_eps = gate[j];
    if (r.lhs > 0.0)
      m.minimal_K = r.gap > 0.0 ? std::max(m.minimal_K, r.lhs / r.gap) : std::numeric_limits<double>::infinity();
    m.records.push_back(r);
  }
  return m;
}

TiltChain tilt_sum_chain(const FlowHistory& rescaled, int stride, double Lambda) {
  check_history(rescaled, stride);
  const auto series = fgap_series(rescaled, stride);
  TiltChain c;
  c.Lambda = Lambda > 0.0 ? Lambda : entropy(rescaled.front().mesh, rescaled.front().curv).lambda;
  c.step = 0.0;
  for (std::size_t j = 0; j + 1 < series.s.size(); ++j) c.step = std::max(c.step, series.s[j + 1] - series.s[j]);

  CompensatedSum lhs, root, tele;
  for (std::size_t j = 0; j < series.drops.size(); ++j) {
    lhs.add(series.drift[j]);
    root.add(std::sqrt(std::max(series.drops[j], 0.0)));
    tele.add(series.drops[j]);
  }
  c.lhs = lhs.value();
  c.rhs = std::sqrt(c.Lambda * c.step) * root.value();
  c.telescoped = tele.value();
  c.F_first_minus_last = series.F.front() - series.F.back();
  c.telescoping_error = std::abs(c.telescoped - c.F_first_minus_last);
  c.holds = c.lhs <= (1.0 + TiltChain::kSlack) * c.rhs;
  return c;
}

nlohmann::json to_json(const LSMeasurement& m) {
  nlohmann::json j;
  j["Z_value"] = m.Z_value;
  j["mu"] = m.mu;
  if (std::isfinite(m.minimal_K))
    j["minimal_K"] = m.minimal_K;
  else
    j["minimal_K"] = nullptr;
  j["gate_eps_max"] = m.gate_eps_max;
  auto& recs = j["records"] = nlohmann::json::array();
  for (const auto& r : m.records) recs.push_back({{"s", r.s}, {"lhs", r.lhs}, {"gap", r.gap}, {"gate_eps", r.gate_eps}});
  return j;
}

nlohmann::json to_json(const TiltChain& c) {
  return {{"lhs", c.lhs},
          {"rhs", c.rhs},
          {"Lambda", c.Lambda},
          {"step", c.step},
          {"telescoped", c.telescoped},
          {"F_first_minus_last", c.F_first_minus_last},
          {"telescoping_error", c.telescoping_error},
          {"holds", c.holds},
          {"slack", TiltChain::kSlack}};
}

}  // namespace mcflab
