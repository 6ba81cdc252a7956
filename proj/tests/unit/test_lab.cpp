#include <doctest.h>

#include <fstream>
#include <sstream>

#include "mcflab/experiment.hpp"
#include "mcflab/mesh_io.hpp"
#include "oracles.hpp"

using namespace mcflab;
namespace fs = std::filesystem;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidParams;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mcflab_lab_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_sphere() {
  nlohmann::json j = {
      {"scenario", {{"name", "small_sphere"}, {"generator", "sphere"}, {"radius", 1.0}, {"level", 3}}},
      {"flow", {{"cfl", 0.01}, {"dt_max", 0.005}, {"stop_maxA", 6.0}, {"snapshot_every", 0.03}}},
      {"diagnostics", {{"regularity_every", 2}, {"entropy_search", {{"grid", 3}, {"n_scales", 5}}}}}};
  return experiment_config_from_json(j);
}

// every numeric leaf under `j`, as JSON pointers
void numeric_leaves(const nlohmann::json& j, const std::string& at, std::vector<std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) numeric_leaves(it.value(), at + "/" + it.key(), out);
  } else if (j.is_number()) {
    out.push_back(at);
  }
}

}  // namespace

TEST_CASE("generators: ground truth before any flow step") {
  SUBCASE("sphere") {
    Scenario s;
    s.generator = "sphere";
    s.level = 4;
    const auto g = generate(s);
    CHECK(g.mesh.num_vertices() == 2562);
    CHECK(g.ground_truth["vertices"].get<int>() == 2562);
    CHECK(total_area(g.mesh) == doctest::Approx(g.ground_truth["area"].get<double>()).epsilon(0.01));
  }
  SUBCASE("torus") {
    Scenario s;
    s.generator = "torus";
    s.radius = 0.2;
    s.major_radius = 1.0;
    s.n_circ = 16;
    const auto g = generate(s);
    const MeshTopology topo(g.mesh);
    CHECK(topo.euler_characteristic(g.mesh.num_faces()) == 0);
    CHECK(g.ground_truth["euler_characteristic"].get<int>() == 0);
    CHECK(total_area(g.mesh) == doctest::Approx(4.0 * oracle::pi * oracle::pi * 0.2).epsilon(0.02));
    for (const auto& v : g.mesh.vertices) CHECK(std::abs(std::hypot(std::hypot(v.x(), v.y()) - 1.0, v.z()) - 0.2) < 1e-9);
  }
  SUBCASE("capped cylinder") {
    Scenario s;
    s.generator = "capped_cylinder";
    s.radius = 0.5;
    s.length = 4.0;
    const auto g = generate(s);
    int barrel = 0;
    for (const auto& v : g.mesh.vertices)
      if (std::abs(v.z()) <= 2.0) {
        CHECK(std::hypot(v.x(), v.y()) == doctest::Approx(0.5).epsilon(1e-9));
        ++barrel;
      }
    CHECK(barrel > 0);
  }
  SUBCASE("bent tube centreline") {
    Scenario s;
    s.generator = "bent_tube";
    s.radius = 0.2;
    s.length = 6.0;
    const auto g = generate(s);
    CHECK(g.ground_truth["centerline_length"].get<double>() == doctest::Approx(6.0));
    const double leg = g.ground_truth["leg_length"].get<double>();
    CHECK(leg == doctest::Approx(0.5 * (6.0 - 1.5 * oracle::pi / 2.0)));
  }
  SUBCASE("dumbbell is mean convex") {
    Scenario s;
    s.generator = "dumbbell";
    s.n_circ = 32;
    s.max_edge = 0.15;
    const auto g = generate(s);
    CHECK(g.ground_truth["min_H"].get<double>() > 0.0);
    const auto curv = estimate_curvature(g.mesh);
    for (double h : curv.H) CHECK(h > 0.0);
  }
  SUBCASE("wiggly tube is reproducible per seed") {
    Scenario s;
    s.generator = "wiggly_tube";
    s.radius = 0.2;
    s.length = 6.0;
    s.wiggle_amplitude = 0.3;
    s.wiggle_wavelength = 3.0;
    s.n_circ = 16;
    s.seed = 7;
    const auto a = generate(s), b = generate(s);
    CHECK(a.mesh.vertices == b.mesh.vertices);
    s.seed = 8;
    CHECK(generate(s).mesh.vertices != a.mesh.vertices);
  }
}

TEST_CASE("generators: invalid input") {
  Scenario s;
  s.generator = "torus";
  s.radius = 1.0;
  s.major_radius = 1.0;
  CHECK(code_of([&] { generate(s); }) == ErrorCode::InvalidParams);
  s.generator = "no_such_surface";
  CHECK(code_of([&] { generate(s); }) == ErrorCode::InvalidParams);

  // one vertex of a sphere pushed through the far side
  auto m = make_icosphere(1.0, 2);
  int top = 0;
  for (int v = 1; v < m.num_vertices(); ++v)
    if (m.vertices[v].z() > m.vertices[top].z()) top = v;
  m.vertices[top] = {0.0, 0.0, -1.6};
  const auto path = scratch("pierced.off");
  write_off(path, m);
  s.generator = "from_file";
  s.file = path.string();
  CHECK(code_of([&] { generate(s); }) == ErrorCode::SelfIntersecting);
  fs::remove(path);
}

TEST_CASE("experiment config validation") {
  auto c = small_sphere();
  c.scenario.generator = "from_file";
  c.scenario.file = "/nonexistent/surface.off";
  CHECK(code_of([&] { run_experiment(c); }) == ErrorCode::InvalidParams);
  CHECK(code_of([&] { experiment_config_from_json(nlohmann::json::array()); }) == ErrorCode::InvalidParams);
  CHECK(code_of([&] { experiment_config_from_json({{"flow", {}}}); }) == ErrorCode::InvalidParams);
  auto bad = small_sphere();
  bad.diagnostics.detect.eps_threshold = 0.7;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidParams);
  // json round trip
  const auto back = experiment_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("threshold registry audit") {
  const auto base = small_sphere();
  const auto reg = threshold_registry(base);

  // every option a module reads is listed
  const std::vector<std::string> required = {
      "/flow/cfl", "/flow/dt_max", "/flow/stop_maxA", "/flow/stop_quality", "/flow/t_max",
      "/flow/snapshot_maxA_ratio", "/flow/snapshot_every", "/diagnostics/monotonicity_slack",
      "/diagnostics/phi_lead", "/diagnostics/entropy_search/grid", "/diagnostics/entropy_search/n_scales",
      "/diagnostics/entropy_search/scale_lo", "/diagnostics/entropy_search/scale_hi",
      "/diagnostics/diameter/n_landmarks", "/diagnostics/detect/eps_threshold", "/diagnostics/detect/window",
      "/diagnostics/detect/min_cylindricity", "/diagnostics/detect/fit/min_support",
      "/diagnostics/detect/fit/max_isotropy", "/diagnostics/track_options/eps1", "/diagnostics/track_options/tol_r",
      "/diagnostics/track_options/lookback", "/diagnostics/track_options/window",
      "/diagnostics/track_options/fit/min_support", "/diagnostics/tubes/window",
      "/diagnostics/tubes/max_axis_angle_deg", "/diagnostics/regularity/cap", "/diagnostics/regularity/time_window",
      "/diagnostics/regularity/coherence_angle_deg", "/diagnostics/reduction_Hbar_fraction", "/rescaled/cfl",
      "/rescaled/ds_max", "/rescaled/s_end", "/rescaled/mu", "/rescaled/gate_eps", "/rescaled/gate_radius",
      "/rescaled/stride", "/hypotheses/tolerance", "/tilt_chain/slack"};
  for (const auto& key : required) {
    INFO(key);
    CHECK(reg.contains(nlohmann::json::json_pointer(key)));
  }

  // perturbing any configurable leaf shows up in the registry
  auto j = to_json(base);
  std::vector<std::string> leaves;
  for (const char* section : {"flow", "diagnostics", "rescaled"}) numeric_leaves(j[section], std::string("/") + section, leaves);
  CHECK(leaves.size() > 40);
  for (const auto& key : leaves) {
    INFO(key);
    auto changed = j;
    const nlohmann::json::json_pointer ptr(key);
    auto& leaf = changed[ptr];
    if (leaf.is_number_integer())
      leaf = leaf.get<long>() + 1;
    else
      leaf = leaf.get<double>() * 0.5 + 0.125;
    const auto reg2 = threshold_registry(experiment_config_from_json(changed));
    CHECK(reg2[ptr] == leaf);
  }
}

TEST_CASE("experiment on a small sphere, bundle, report and plots") {
  const auto config = small_sphere();
  const auto bundle = run_experiment(config);
  CHECK(bundle.run.stop_reason == StopReason::MaxA);
  CHECK(bundle.errors.empty());
  CHECK(!bundle.functionals.empty());
  CHECK(bundle.final_necks.empty());
  CHECK(bundle.final_regularity.has_value());
  REQUIRE(bundle.phi.size() == 2);

  const auto dir = scratch("bundle");
  write_bundle(dir, bundle);
  for (const char* f : {"manifest.json", "ground_truth.json", "functionals.csv", "phi.csv", "necks.json", "tubes.json",
                        "regularity.csv"})
    CHECK(fs::exists(dir / f));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["thresholds"] == threshold_registry(config));
  CHECK(manifest["flow"]["stop_reason"] == "maxA");

  const nlohmann::json pins = {{"scenarios", {{"small_sphere", {{"max_necks", 0}, {"maxA_growth_min", 1.5}}}}}};
  const auto report = make_report(dir, pins);
  CHECK(report.scenario == "small_sphere");
  CHECK(report.exit_code() == 0);
  for (const auto& v : report.verdicts) {
    INFO(v.name);
    CHECK(v.pass);
  }
  CHECK(to_json(report)["verdicts"].size() == report.verdicts.size());

  SUBCASE("plots") {
    write_functional_plots(dir);
    int n = 0;
    for (const auto& e : fs::directory_iterator(dir / "plots")) {
      const auto svg = slurp(e.path());
      CHECK(svg.rfind("<svg", 0) == 0);
      CHECK(svg.find("<polyline") != std::string::npos);
      ++n;
    }
    CHECK(n >= 5);
  }

  SUBCASE("a rising entropy is a hard failure") {
    auto rows = read_functionals_csv(dir / "functionals.csv");
    REQUIRE(rows.size() >= 2);
    rows.back().entropy = rows[rows.size() - 2].entropy + 0.01;
    write_functionals_csv(dir / "functionals.csv", rows);
    const auto bad = make_report(dir, pins);
    CHECK(bad.exit_code() == 1);
  }

  SUBCASE("missing pieces") {
    fs::remove(dir / "manifest.json");
    CHECK(code_of([&] { make_report(dir, pins); }) == ErrorCode::IoError);
  }
  fs::remove_all(dir);
}

TEST_CASE("runs are deterministic") {
  auto config = small_sphere();
  config.diagnostics.regularity_every = 0;
  const auto a = scratch("det_a"), b = scratch("det_b");
  write_bundle(a, run_experiment(config));
  write_bundle(b, run_experiment(config));
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    INFO(rel.string());
    REQUIRE(fs::exists(b / rel));
    CHECK(slurp(e.path()) == slurp(b / rel));
    ++files;
  }
  CHECK(files > 8);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("scenario configs shipped with the project parse") {
  for (const auto& e : fs::directory_iterator(MCFLAB_CONFIG_DIR "/scenarios")) {
    INFO(e.path().string());
    const auto c = load_experiment_config(e.path());
    CHECK_NOTHROW(c.validate());
    CHECK(c.scenario.name == e.path().stem().string());
  }
  const auto expectations = nlohmann::json::parse(slurp(MCFLAB_CONFIG_DIR "/expectations.json"));
  CHECK(expectations.contains("scenarios"));
}
