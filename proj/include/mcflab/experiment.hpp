#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcflab/flow.hpp"
#include "mcflab/functionals.hpp"
#include "mcflab/geodesic.hpp"
#include "mcflab/lojasiewicz.hpp"
#include "mcflab/necks.hpp"
#include "mcflab/scenario.hpp"

namespace mcflab {

struct DiagnosticSettings {
  int functionals_every = 1;  // evaluate the functional series on every k-th snapshot
  bool entropy = true;
  EntropySearch entropy_search;
  DiameterOptions diameter;
  /// Base times for Huisken's quantity are t_final * (1 + phi_lead).
  double phi_lead = 0.25;
  double monotonicity_slack = 5e-3;

  bool necks = true;
  DetectOptions detect;
  bool track = true;
  TrackOptions track_options;
  /// When positive, the track lookback is this fraction of the final time.
  double track_lookback_fraction = 0.0;
  TubeOptions tubes;

  int regularity_every = 0;  // 0 disables the regularity scale
  RegularityOptions regularity;

  /// Reduction quantities on the final snapshot use Hbar = fraction * max H.
  double reduction_Hbar_fraction = 0.25;
  int reduction_sources = 64;
};

/// Optional rescaled-flow stage for the Lojasiewicz measurements: the
/// initial surface is evolved by the rescaled flow about the origin.
struct RescaledSettings {
  bool enabled = false;
  RescaledControl control;
  double snapshot_every = 0.05;
  LSOptions ls;
  /// Reference value Z: F of the scenario regenerated without perturbation.
  bool Z_from_unperturbed = true;
};

struct ExperimentConfig {
  Scenario scenario;
  StepControl control;
  double snapshot_every = 1e-3;
  DiagnosticSettings diagnostics;
  RescaledSettings rescaled;
  std::string output_dir;

  /// Throws InvalidParams (including a missing input mesh file).
  void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct PhiSeries {
  Vec3 x0 = Vec3::Zero();
  double t0 = 0.0;
  std::vector<double> t;
  std::vector<double> value;
};

struct ExperimentBundle {
  ExperimentConfig config;
  GeneratedSurface generated;
  FlowRun run;
  std::vector<FunctionalSample> functionals;
  std::vector<PhiSeries> phi;
  std::vector<NeckFit> final_necks;
  std::optional<StrongNeckTrack> track;
  std::optional<TiltReport> tilt;
  std::vector<Tube> tubes;
  std::optional<ReductionResult> reduction;
  std::optional<RegularityScaleField> final_regularity;
  std::optional<FlowRun> rescaled_run;
  std::optional<LSMeasurement> ls;
  std::optional<TiltChain> tilt_chain;
  /// Diagnostic stages that threw, as {stage, message}; the remaining stages
  /// still ran.
  std::vector<std::pair<std::string, std::string>> errors;
  bool partial = false;  // flow stopped by quality collapse

  nlohmann::json manifest() const;
};

/// Every threshold a run consumes, keyed by module.
nlohmann::json threshold_registry(const ExperimentConfig& c);

/// Generates, flows and runs all enabled diagnostics. Deterministic given
/// the config.
ExperimentBundle run_experiment(const ExperimentConfig& config);

/// Writes manifest.json, ground_truth.json, history/, functionals.csv,
/// phi.csv, necks.json, track.json, tubes.json, reduction.json,
/// regularity.csv and, when present, the rescaled-stage outputs.
void write_bundle(const std::filesystem::path& dir, const ExperimentBundle& bundle);

// ---- report ----

struct Verdict {
  std::string name;
  bool hard = false;  // hard invariants decide the exit code
  bool pass = true;
  double value = 0.0;
  std::string detail;
};

struct Report {
  std::string scenario;
  std::vector<Verdict> verdicts;
  nlohmann::json summary;
  bool hard_failure() const;
  int exit_code() const { return hard_failure() ? 1 : 0; }
};

/// Verdicts from a written bundle directory. Expectation pins for the
/// bundle's scenario are taken from `expectations` (keyed by scenario name);
/// scenarios without pins get only the invariant checks.
Report make_report(const std::filesystem::path& bundle_dir, const nlohmann::json& expectations);

std::string format_report(const Report& r);
nlohmann::json to_json(const Report& r);

/// Line plot of y against x; writes a standalone SVG file.
void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<double>& x, const std::vector<double>& y);

/// One SVG per functional column of functionals.csv into dir/plots.
void write_functional_plots(const std::filesystem::path& bundle_dir);

}  // namespace mcflab
