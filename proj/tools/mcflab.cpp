#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mcflab/experiment.hpp"
#include "mcflab/lojasiewicz.hpp"
#include "mcflab/mesh_io.hpp"
#include "mcflab/necks.hpp"
#include "mcflab/scenario.hpp"

using namespace mcflab;
namespace fs = std::filesystem;

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return j;
}

// JSON to a file, or to stdout when the path is empty
void emit(const std::string& path, const nlohmann::json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << j.dump(2) << "\n";
}

// Accepts a bare scenario or an experiment config with a "scenario" key.
Scenario load_scenario(const std::string& path) {
  const auto j = load_json(path);
  auto s = scenario_from_json(j.contains("scenario") ? j["scenario"] : j);
  if (s.generator == "from_file" && fs::path(s.file).is_relative())
    s.file = (fs::path(path).parent_path() / s.file).string();
  return s;
}

int pick_snapshot(const FlowHistory& h, int snapshot) {
  if (snapshot < 0) return h.size() - 1;
  if (snapshot >= h.size()) throw Error(ErrorCode::InvalidParams, "snapshot index out of range");
  return snapshot;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean curvature flow laboratory"};
  app.require_subcommand(1);

  // gen
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  auto* gen = app.add_subcommand("gen", "Generate the initial mesh of a scenario");
  gen->add_option("--config", config_path, "scenario or experiment JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "override the scenario seed");
  gen->add_option("--out", out_path, "output OFF file")->required();

  // run
  bool plots = false;
  auto* run = app.add_subcommand("run", "Flow a scenario and write the experiment bundle");
  run->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", out_path, "bundle directory (default: output_dir of the config)");
  run->add_flag("--plots", plots, "write SVG plots of the functional series");

  // necks / track / tubes over a stored history
  std::string history_dir;
  int snapshot = -1;
  DetectOptions detect;
  auto* necks = app.add_subcommand("necks", "Detect necks on one snapshot of a history");
  necks->add_option("--history", history_dir, "history directory")->required()->check(CLI::ExistingDirectory);
  necks->add_option("--snapshot", snapshot, "snapshot index (default: last)");
  necks->add_option("--eps", detect.eps_threshold, "eps threshold")->capture_default_str();
  necks->add_option("--window", detect.window, "ball radius = r / window")->capture_default_str();
  necks->add_option("--out", out_path, "output JSON (default: stdout)");

  TrackOptions track_opts;
  double lookback_fraction = 0.0;
  auto* track = app.add_subcommand("track", "Track the thinnest final neck backwards in time");
  track->add_option("--history", history_dir, "history directory")->required()->check(CLI::ExistingDirectory);
  track->add_option("--eps", detect.eps_threshold, "detection eps threshold")->capture_default_str();
  track->add_option("--detect-window", detect.window, "detection window")->capture_default_str();
  track->add_option("--eps1", track_opts.eps1, "eps allowed along the track")->capture_default_str();
  track->add_option("--tol-r", track_opts.tol_r, "radius law tolerance")->capture_default_str();
  track->add_option("--window", track_opts.window, "tracking window")->capture_default_str();
  track->add_option("--lookback", track_opts.lookback, "lookback time");
  track->add_option("--lookback-fraction", lookback_fraction, "lookback as a fraction of the final time");
  track->add_option("--out", out_path, "output JSON (default: stdout)");

  TubeOptions tube_opts;
  double cutoff = 0.0;
  auto* tubes = app.add_subcommand("tubes", "Assemble tubes from the necks of one snapshot");
  tubes->add_option("--history", history_dir, "history directory")->required()->check(CLI::ExistingDirectory);
  tubes->add_option("--snapshot", snapshot, "snapshot index (default: last)");
  tubes->add_option("--eps", detect.eps_threshold, "detection eps threshold")->capture_default_str();
  tubes->add_option("--window", detect.window, "detection and linking window")->capture_default_str();
  tubes->add_option("--cutoff", cutoff, "chord cutoff for the distance comparison (0: a quarter of the length)");
  tubes->add_option("--out", out_path, "output JSON (default: stdout)");

  // loj
  auto* loj = app.add_subcommand("loj", "Discrete decay lemma tools");
  loj->require_subcommand(1);
  std::string seq_path;
  LojSequence seq;
  double decay_C = 0.0;
  auto* loj_check = loj->add_subcommand("check", "Check the hypotheses on a sequence CSV");
  loj_check->add_option("--input", seq_path, "CSV with index,value")->required()->check(CLI::ExistingFile);
  loj_check->add_option("--K", seq.K)->capture_default_str();
  loj_check->add_option("--mu", seq.mu)->capture_default_str();
  loj_check->add_option("--delta", seq.delta)->capture_default_str();
  loj_check->add_option("--C", decay_C, "also check the decay bound with this constant");
  loj_check->add_option("--out", out_path, "output JSON (default: stdout)");

  auto* loj_sum = loj->add_subcommand("sum", "Sum of square roots of the increments");
  loj_sum->add_option("--input", seq_path, "CSV with index,value")->required()->check(CLI::ExistingFile);

  FamilySpec fam;
  std::string family_name = "power_law";
  double eps = 0.1;
  auto* loj_delta = loj->add_subcommand("delta", "Empirical amplitude threshold for a generator family");
  loj_delta->add_option("--family", family_name, "power_law | geometric | randomized")->capture_default_str();
  loj_delta->add_option("--K", fam.K)->capture_default_str();
  loj_delta->add_option("--mu", fam.mu)->capture_default_str();
  loj_delta->add_option("--T", fam.T)->capture_default_str();
  loj_delta->add_option("--count", fam.count)->capture_default_str();
  loj_delta->add_option("--cap", fam.amplitude_cap, "amplitude cap")->capture_default_str();
  loj_delta->add_option("--eps", eps)->capture_default_str();
  loj_delta->add_option("--seed", seed, "batch seed");
  loj_delta->add_option("--out", out_path, "certificate JSON (default: stdout)");

  LSOptions ls_opts;
  double Z = 0.0;
  auto* loj_ls = loj->add_subcommand("ls-measure", "Measure the gradient inequality on a rescaled history");
  loj_ls->add_option("--history", history_dir, "rescaled history directory")->required()->check(CLI::ExistingDirectory);
  loj_ls->add_option("--Z", Z, "reference Gaussian area")->required();
  loj_ls->add_option("--mu", ls_opts.mu)->capture_default_str();
  loj_ls->add_option("--gate-eps", ls_opts.gate_eps)->capture_default_str();
  loj_ls->add_option("--gate-radius", ls_opts.gate_radius)->capture_default_str();
  loj_ls->add_option("--stride", ls_opts.stride)->capture_default_str();
  loj_ls->add_option("--out", out_path, "output JSON (default: stdout)");

  // report
  std::string bundle_dir, expectations_path;
  auto* report = app.add_subcommand("report", "Verdicts for a bundle; exit code 1 on a hard violation");
  report->add_option("--bundle", bundle_dir, "bundle directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--expectations", expectations_path, "expectations JSON")->check(CLI::ExistingFile);
  report->add_option("--out", out_path, "verdicts JSON (default: <bundle>/verdicts.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      auto s = load_scenario(config_path);
      if (seed) s.seed = *seed;
      const auto g = generate(s);
      write_off(fs::path(out_path), g.mesh);
      emit(fs::path(out_path).replace_extension(".json").string(), g.ground_truth);
      std::printf("%s: %d vertices, %d faces\n", s.name.c_str(), g.mesh.num_vertices(), g.mesh.num_faces());
      return 0;
    }
    if (run->parsed()) {
      auto cfg = load_experiment_config(config_path);
      if (seed) cfg.scenario.seed = *seed;
      const std::string dir = !out_path.empty() ? out_path : cfg.output_dir;
      if (dir.empty()) throw Error(ErrorCode::InvalidParams, "no output directory (--out or output_dir)");
      const auto bundle = run_experiment(cfg);
      write_bundle(dir, bundle);
      if (plots) write_functional_plots(dir);
      std::printf("%s: %s after %ld steps, t = %.6g, %d snapshots, %zu stage errors\n", cfg.scenario.name.c_str(),
                  to_string(bundle.run.stop_reason).c_str(), bundle.run.steps, bundle.run.history.back().t,
                  bundle.run.history.size(), bundle.errors.size());
      for (const auto& [stage, msg] : bundle.errors) std::fprintf(stderr, "  %s: %s\n", stage.c_str(), msg.c_str());
      return 0;
    }
    if (necks->parsed()) {
      const auto h = read_history(history_dir).history;
      const auto& st = h.states[pick_snapshot(h, snapshot)];
      nlohmann::json out = nlohmann::json::array();
      for (const auto& f : detect_necks(st.mesh, st.curv, detect)) out.push_back(to_json(f));
      emit(out_path, out);
      return 0;
    }
    if (track->parsed()) {
      const auto h = read_history(history_dir).history;
      const auto& last = h.back();
      const auto found = detect_necks(last.mesh, last.curv, detect);
      if (found.empty()) throw Error(ErrorCode::TrackLost, "no neck at the final snapshot");
      const NeckFit* thinnest = &found.front();
      for (const auto& f : found)
        if (f.radius < thinnest->radius) thinnest = &f;
      if (lookback_fraction > 0.0) track_opts.lookback = lookback_fraction * last.t;
      const auto tr = track_strong_neck(h, *thinnest, track_opts);
      nlohmann::json out = {{"track", to_json(tr)}};
      if (tr.samples.size() >= 2) out["tilt"] = to_json(measure_tilt(tr));
      emit(out_path, out);
      return 0;
    }
    if (tubes->parsed()) {
      const auto h = read_history(history_dir).history;
      const auto& st = h.states[pick_snapshot(h, snapshot)];
      tube_opts.window = detect.window;
      const auto found = detect_necks(st.mesh, st.curv, detect);
      nlohmann::json out = nlohmann::json::array();
      for (const auto& t : assemble_tubes(st.mesh, found, tube_opts)) {
        auto j = to_json(t);
        const auto ti = tube_integral_estimate(st.curv, t);
        j["int_H"] = ti.int_H;
        j["c_observed"] = ti.c_observed;
        if (t.necks.size() >= 3) {
          const auto dc = tube_distance_comparison(t, cutoff > 0.0 ? cutoff : 0.25 * t.length);
          j["distance_ratio"] = {{"max_ratio", dc.max_ratio}, {"s1", dc.s1}, {"s2", dc.s2}, {"pairs", dc.pairs}};
        }
        out.push_back(j);
      }
      emit(out_path, out);
      return 0;
    }
    if (loj_check->parsed()) {
      seq.values = read_sequence_csv(seq_path);
      const auto flags = check_hypotheses(seq);
      nlohmann::json out = {{"hypotheses", to_json(flags)}, {"sqrt_increment_sum", sqrt_increment_sum(seq)}};
      if (decay_C > 0.0) out["decay"] = to_json(decay_bound_check(seq, decay_C));
      emit(out_path, out);
      return flags.all() ? 0 : 1;
    }
    if (loj_sum->parsed()) {
      std::printf("%.17g\n", sqrt_increment_sum(read_sequence_csv(seq_path)));
      return 0;
    }
    if (loj_delta->parsed()) {
      fam.family = family_from_string(family_name);
      if (seed) fam.seed = *seed;
      const auto cert = empirical_delta(fam, eps);
      const auto check = verify_certificate(cert);
      auto out = to_json(cert);
      out["half_amplitude_check"] = {
          {"members", check.members}, {"failures", check.failures}, {"worst_sum", check.worst_sum}};
      emit(out_path, out);
      return check.failures == 0 ? 0 : 1;
    }
    if (loj_ls->parsed()) {
      const auto h = read_history(history_dir).history;
      nlohmann::json out = {{"ls", to_json(measure_LS_inequality(h, Z, ls_opts))},
                            {"tilt_chain", to_json(tilt_sum_chain(h, ls_opts.stride))}};
      emit(out_path, out);
      return 0;
    }
    if (report->parsed()) {
      const auto expectations = expectations_path.empty() ? nlohmann::json::object() : load_json(expectations_path);
      const auto r = make_report(bundle_dir, expectations);
      std::cout << format_report(r);
      emit(out_path.empty() ? (fs::path(bundle_dir) / "verdicts.json").string() : out_path, to_json(r));
      return r.exit_code();
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
