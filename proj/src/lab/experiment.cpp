#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mcflab/curvature.hpp"
#include "mcflab/error.hpp"
#include "mcflab/experiment.hpp"

namespace mcflab {

namespace {

constexpr const char* kToolVersion = "0.1.0";

// Reads into or writes from the same field list, so parsing, serialisation
// and the threshold registry never drift apart.
class Binder {
 public:
  Binder(nlohmann::json& j, bool writing) : j_(j), writing_(writing) {}

  template <class T>
  void operator()(const char* key, T& field) {
    if (writing_) {
      j_[key] = field;
    } else if (j_.contains(key)) {
      field = j_.at(key).get<T>();
    }
  }

  Binder child(const char* key) {
    if (writing_ && !j_.contains(key)) j_[key] = nlohmann::json::object();
    if (!writing_ && !j_.contains(key)) return Binder(empty_, false);
    return Binder(j_[key], writing_);
  }

 private:
  nlohmann::json& j_;
  bool writing_;
  nlohmann::json empty_ = nlohmann::json::object();
};

void bind(Binder b, StepControl& c) {
  b("cfl", c.cfl);
  b("dt_max", c.dt_max);
  b("stop_maxA", c.stop_maxA);
  b("stop_quality", c.stop_quality);
  b("t_max", c.t_max);
  b("snapshot_maxA_ratio", c.snapshot_maxA_ratio);
  b("tangential_relaxation", c.tangential_relaxation);
}

void bind(Binder b, NeckFitOptions& f) {
  b("min_support", f.min_support);
  b("max_isotropy", f.max_isotropy);
}

void bind(Binder b, DiagnosticSettings& d) {
  b("functionals_every", d.functionals_every);
  b("entropy", d.entropy);
  {
    auto e = b.child("entropy_search");
    e("grid", d.entropy_search.grid);
    e("n_scales", d.entropy_search.n_scales);
    e("scale_lo", d.entropy_search.scale_lo);
    e("scale_hi", d.entropy_search.scale_hi);
    e("refine_candidates", d.entropy_search.refine_candidates);
    e("refine_rounds", d.entropy_search.refine_rounds);
    e("curvature_seeds", d.entropy_search.curvature_seeds);
  }
  {
    auto g = b.child("diameter");
    bool exact = d.diameter.method == DiameterMethod::ExactGraph;
    g("exact", exact);
    d.diameter.method = exact ? DiameterMethod::ExactGraph : DiameterMethod::Landmark;
    g("n_landmarks", d.diameter.n_landmarks);
    g("midpoint_refinement", d.diameter.midpoint_refinement);
  }
  b("phi_lead", d.phi_lead);
  b("monotonicity_slack", d.monotonicity_slack);
  b("necks", d.necks);
  {
    auto n = b.child("detect");
    n("eps_threshold", d.detect.eps_threshold);
    n("window", d.detect.window);
    n("min_cylindricity", d.detect.min_cylindricity);
    bind(n.child("fit"), d.detect.fit);
  }
  b("track", d.track);
  {
    auto t = b.child("track_options");
    t("eps1", d.track_options.eps1);
    t("tol_r", d.track_options.tol_r);
    t("lookback", d.track_options.lookback);
    t("lookback_fraction", d.track_lookback_fraction);
    t("window", d.track_options.window);
    bind(t.child("fit"), d.track_options.fit);
  }
  {
    auto t = b.child("tubes");
    t("window", d.tubes.window);
    t("max_axis_angle_deg", d.tubes.max_axis_angle_deg);
    t("samples_per_segment", d.tubes.samples_per_segment);
  }
  b("regularity_every", d.regularity_every);
  {
    auto r = b.child("regularity");
    r("cap", d.regularity.cap);
    r("time_window", d.regularity.time_window);
    r("coherence_angle_deg", d.regularity.coherence_angle_deg);
  }
  b("reduction_Hbar_fraction", d.reduction_Hbar_fraction);
  b("reduction_sources", d.reduction_sources);
}

void bind(Binder b, RescaledSettings& r) {
  b("enabled", r.enabled);
  b("cfl", r.control.cfl);
  b("ds_max", r.control.ds_max);
  b("s_end", r.control.s_end);
  b("stop_quality", r.control.stop_quality);
  b("snapshot_every", r.snapshot_every);
  b("mu", r.ls.mu);
  b("gate_eps", r.ls.gate_eps);
  b("gate_radius", r.ls.gate_radius);
  b("stride", r.ls.stride);
  b("Z_from_unperturbed", r.Z_from_unperturbed);
}

void bind_all(nlohmann::json& j, bool writing, ExperimentConfig& c) {
  Binder b(j, writing);
  bind(b.child("flow"), c.control);
  b.child("flow")("snapshot_every", c.snapshot_every);
  bind(b.child("diagnostics"), c.diagnostics);
  bind(b.child("rescaled"), c.rescaled);
  b("output_dir", c.output_dir);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out << j.dump(2) << "\n";
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

void ExperimentConfig::validate() const {
  scenario.validate();
  if (scenario.generator == "from_file")
    require(std::filesystem::exists(scenario.file), "mesh file '" + scenario.file + "' does not exist");
  control.validate();
  require(snapshot_every > 0.0, "snapshot_every must be positive");
  const auto& d = diagnostics;
  require(d.functionals_every >= 1, "functionals_every must be >= 1");
  require(d.regularity_every >= 0, "regularity_every must be >= 0");
  require(d.phi_lead > 0.0, "phi_lead must be positive");
  require(d.monotonicity_slack >= 0.0, "monotonicity_slack must be >= 0");
  require(d.reduction_Hbar_fraction > 0.0, "reduction_Hbar_fraction must be positive");
  require(d.track_lookback_fraction >= 0.0, "lookback_fraction must be >= 0");
  require(d.detect.eps_threshold > 0.0 && d.detect.eps_threshold < 0.5, "eps_threshold must lie in (0, 0.5)");
  if (rescaled.enabled) {
    require(rescaled.snapshot_every > 0.0, "rescaled snapshot_every must be positive");
    require(rescaled.ls.stride >= 1, "rescaled stride must be >= 1");
  }
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    require(j.is_object(), "experiment config must be a JSON object");
    require(j.contains("scenario"), "experiment config needs a scenario");
    c.scenario = scenario_from_json(j.at("scenario"));
    nlohmann::json copy = j;
    bind_all(copy, false, c);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidParams, std::string("experiment config: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["scenario"] = to_json(c.scenario);
  ExperimentConfig copy = c;
  bind_all(j, true, copy);
  return j;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidParams, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  auto c = experiment_config_from_json(j);
  // relative mesh paths are taken relative to the config file
  if (c.scenario.generator == "from_file" && std::filesystem::path(c.scenario.file).is_relative())
    c.scenario.file = (path.parent_path() / c.scenario.file).string();
  return c;
}

nlohmann::json threshold_registry(const ExperimentConfig& c) {
  auto j = to_json(c);
  nlohmann::json reg;
  reg["flow"] = j["flow"];
  reg["diagnostics"] = j["diagnostics"];
  reg["rescaled"] = j["rescaled"];
  reg["hypotheses"] = {{"tolerance", kHypothesisTol}};
  reg["tilt_chain"] = {{"slack", TiltChain::kSlack}};
  return reg;
}

nlohmann::json ExperimentBundle::manifest() const {
  nlohmann::json m;
  m["tool"] = "mcflab";
  m["version"] = kToolVersion;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["scenario"] = config.scenario.name;
  m["config"] = to_json(config);
  m["thresholds"] = threshold_registry(config);
  m["flow"] = {{"stop_reason", to_string(run.stop_reason)},
               {"detail", run.detail},
               {"steps", run.steps},
               {"snapshots", run.history.size()},
               {"t_final", run.history.empty() ? 0.0 : run.history.back().t}};
  m["partial"] = partial;
  auto& errs = m["errors"] = nlohmann::json::array();
  for (const auto& [stage, msg] : errors) errs.push_back({{"stage", stage}, {"message", msg}});
  auto& bases = m["phi_bases"] = nlohmann::json::array();
  for (const auto& p : phi) bases.push_back({{"x0", {p.x0.x(), p.x0.y(), p.x0.z()}}, {"t0", p.t0}});
  return m;
}

ExperimentBundle run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentBundle b;
  b.config = config;
  b.generated = generate(config.scenario);
  b.run = run_flow(b.generated.mesh, config.control, config.snapshot_every);
  b.partial = b.run.stop_reason == StopReason::Quality;

  const auto& d = config.diagnostics;
  const auto& hist = b.run.history;
  const int n = static_cast<int>(hist.size());
  const auto& topo = *hist.topology;
  auto attempt = [&](const std::string& stage, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      b.errors.push_back({stage, e.what()});
    }
  };

  std::vector<int> sampled;
  for (int k = 0; k < n; k += d.functionals_every) sampled.push_back(k);
  if (sampled.back() != n - 1) sampled.push_back(n - 1);

  for (int k : sampled) {
    const auto& st = hist.states[k];
    FunctionalSample row;
    row.t = st.t;
    for (double a : st.curv.vertex_area) row.area += a;
    row.F_origin = gaussian_area(st.mesh, Vec3::Zero(), 1.0);
    row.entropy = nan();
    if (d.entropy)
      attempt("entropy@" + std::to_string(k), [&] { row.entropy = entropy(st.mesh, st.curv, d.entropy_search).lambda; });
    row.diam = nan();
    attempt("diameter@" + std::to_string(k),
            [&] { row.diam = topping_check(st.mesh, topo, st.curv, d.diameter).diam; });
    row.int_H_1 = curvature_integral(st.curv, CurvatureQuantity::H, 1.0);
    row.int_A_1 = curvature_integral(st.curv, CurvatureQuantity::A, 1.0);
    row.maxH = 0.0;
    for (double h : st.curv.H) row.maxH = std::max(row.maxH, std::abs(h));
    row.maxA = st.curv.max_A();
    row.int_rinv = nan();
    if (d.regularity_every > 0 && (k % d.regularity_every == 0 || k == n - 1))
      attempt("regularity@" + std::to_string(k), [&] {
        const auto field = regularity_scale(hist, k, d.regularity);
        row.int_rinv = regularity_integral(hist, k, field);
        if (k == n - 1) b.final_regularity = field;
      });
    b.functionals.push_back(row);
  }

  // Huisken's quantity about the scenario centre and the final curvature peak
  const auto& last = hist.back();
  if (last.t > 0.0) {
    const double t0 = last.t * (1.0 + d.phi_lead);
    for (const Vec3& x0 : {config.scenario.center, Vec3(last.mesh.vertices[last.curv.argmax_A()])}) {
      PhiSeries p;
      p.x0 = x0;
      p.t0 = t0;
      for (int k : sampled) {
        p.t.push_back(hist.states[k].t);
        p.value.push_back(huisken_phi(hist, x0, t0, hist.states[k].t));
      }
      b.phi.push_back(std::move(p));
    }
  }

  if (d.necks) {
    attempt("necks", [&] { b.final_necks = detect_necks(last.mesh, last.curv, d.detect); });
    if (d.track && !b.final_necks.empty()) {
      const NeckFit* thinnest = &b.final_necks.front();
      for (const auto& f : b.final_necks)
        if (f.radius < thinnest->radius) thinnest = &f;
      TrackOptions to = d.track_options;
      if (d.track_lookback_fraction > 0.0) to.lookback = d.track_lookback_fraction * last.t;
      attempt("track", [&] {
        b.track = track_strong_neck(hist, *thinnest, to);
        if (b.track->samples.size() >= 2) b.tilt = measure_tilt(*b.track);
      });
    }
    attempt("tubes", [&] { b.tubes = assemble_tubes(last.mesh, b.final_necks, d.tubes); });
  }

  double maxH = 0.0;
  for (double h : last.curv.H) maxH = std::max(maxH, h);
  if (maxH > 0.0)
    attempt("reduction", [&] {
      b.reduction = reduction_quantities(last.mesh, last.curv, d.reduction_Hbar_fraction * maxH, b.tubes,
                                         d.reduction_sources);
    });

  if (config.rescaled.enabled) {
    const auto& r = config.rescaled;
    attempt("rescaled", [&] {
      b.rescaled_run = run_rescaled_flow(b.generated.mesh, Vec3::Zero(), 0.0, r.control, r.snapshot_every);
      double Z = 0.0;
      if (r.Z_from_unperturbed) {
        Scenario plain = config.scenario;
        plain.perturbation_amplitude = 0.0;
        Z = gaussian_area(generate(plain).mesh, Vec3::Zero(), 1.0);
      } else {
        Z = gaussian_area(b.generated.mesh, Vec3::Zero(), 1.0);
      }
      attempt("ls", [&] { b.ls = measure_LS_inequality(b.rescaled_run->history, Z, r.ls); });
      b.tilt_chain = tilt_sum_chain(b.rescaled_run->history, r.ls.stride);
    });
  }
  return b;
}

void write_bundle(const std::filesystem::path& dir, const ExperimentBundle& b) {
  std::filesystem::create_directories(dir);
  write_json(dir / "manifest.json", b.manifest());
  write_json(dir / "ground_truth.json", b.generated.ground_truth);
  write_history(dir / "history", b.run);
  write_functionals_csv(dir / "functionals.csv", b.functionals);

  {
    std::ofstream out(dir / "phi.csv");
    out << "t";
    for (std::size_t i = 0; i < b.phi.size(); ++i) out << ",phi_" << i;
    out << "\n";
    const std::size_t rows = b.phi.empty() ? 0 : b.phi.front().t.size();
    char buf[64];
    for (std::size_t r = 0; r < rows; ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", b.phi.front().t[r]);
      out << buf;
      for (const auto& p : b.phi) {
        std::snprintf(buf, sizeof buf, ",%.17g", p.value[r]);
        out << buf;
      }
      out << "\n";
    }
  }

  nlohmann::json necks = nlohmann::json::array();
  for (const auto& f : b.final_necks) necks.push_back(to_json(f));
  write_json(dir / "necks.json", necks);
  write_json(dir / "track.json", b.track ? to_json(*b.track) : nlohmann::json(nullptr));
  write_json(dir / "tilt.json", b.tilt ? to_json(*b.tilt) : nlohmann::json(nullptr));
  nlohmann::json tubes = nlohmann::json::array();
  for (const auto& t : b.tubes) tubes.push_back(to_json(t));
  write_json(dir / "tubes.json", tubes);
  if (b.reduction)
    write_json(dir / "reduction.json", {{"D_est", b.reduction->D_est},
                                        {"L_est", b.reduction->L_est},
                                        {"superlevel_vertices", b.reduction->superlevel_vertices},
                                        {"tubes_considered", b.reduction->tubes_considered}});
  if (b.final_regularity) write_regularity_csv(dir / "regularity.csv", *b.final_regularity);
  if (b.rescaled_run) write_history(dir / "rescaled_history", *b.rescaled_run);
  if (b.ls) write_json(dir / "ls.json", to_json(*b.ls));
  if (b.tilt_chain) write_json(dir / "tilt_chain.json", to_json(*b.tilt_chain));
}

}  // namespace mcflab
