// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Usage: mcflab_acceptance [bundle_dir]

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <Eigen/Geometry>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mcflab/experiment.hpp"
#include "oracles.hpp"

using namespace mcflab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean_radius(const TriMesh& m) {
  double s = 0.0;
  for (const auto& v : m.vertices) s += v.norm();
  return s / m.num_vertices();
}

int nearest_vertex(const TriMesh& m, const Vec3& p) {
  int best = 0;
  for (int v = 1; v < m.num_vertices(); ++v)
    if ((m.vertices[v] - p).norm() < (m.vertices[best] - p).norm()) best = v;
  return best;
}

Eigen::Matrix3d rotation(double deg, const Vec3& axis) {
  return Eigen::AngleAxisd(deg * oracle::pi / 180.0, axis.normalized()).toRotationMatrix();
}

// ---- the scenario suite ----

struct SuiteRun {
  ExperimentBundle bundle;
  Report report;
  double seconds = 0.0;
};

class Suite {
 public:
  Suite(fs::path config_dir, fs::path out_dir) : config_dir_(std::move(config_dir)), out_(std::move(out_dir)) {
    std::ifstream in(config_dir_ / "expectations.json");
    in >> expectations_;
  }

  const SuiteRun& get(const std::string& name) {
    auto it = runs_.find(name);
    if (it != runs_.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    SuiteRun r;
    r.bundle = run_experiment(load_experiment_config(config_dir_ / "scenarios" / (name + ".json")));
    r.seconds = seconds_since(t0);
    const auto dir = out_ / name;
    fs::remove_all(dir);
    write_bundle(dir, r.bundle);
    write_functional_plots(dir);
    r.report = make_report(dir, expectations_);
    std::ofstream(dir / "verdicts.json") << to_json(r.report).dump(2) << "\n";
    std::fprintf(stderr, "  [%s: %.0f s, %s]\n", name.c_str(), r.seconds, to_string(r.bundle.run.stop_reason).c_str());
    return runs_.emplace(name, std::move(r)).first->second;
  }

 private:
  fs::path config_dir_, out_;
  nlohmann::json expectations_;
  std::map<std::string, SuiteRun> runs_;
};

const std::vector<std::string> kScenarios = {"sphere",     "perturbed_cylinder", "dumbbell",
                                             "thin_torus", "bent_tube",          "wiggly_tube"};

// ---- criteria ----

void shrinking_sphere(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  StepControl c;
  c.dt_max = 1.0;
  c.stop_maxA = 1e6;
  std::vector<double> times;
  for (int k = 1; k <= 6; ++k) times.push_back(0.025 * k);
  const auto run = run_flow_to_times(make_icosphere(1.0, 4), c, times);
  double worst = 0.0;
  for (const auto& st : run.history.states) {
    const double exact = std::sqrt(1.0 - 4.0 * st.t);
    worst = std::max(worst, std::abs(mean_radius(st.mesh) - exact) / exact);
  }
  const double secs = seconds_since(t0);
  o.detail << "max rel error " << worst << " up to t = " << run.history.back().t << ", " << secs << " s";
  o.require(std::abs(run.history.back().t - 0.15) < 1e-12, "reached t = 0.15");
  o.require(worst < 0.01, "error < 1%");
  o.require(secs < 60.0, "runtime < 60 s");
}

void shrinker_fixed_points(Outcome& o) {
  const double ds = 0.01;
  auto worst_step = [&](const TriMesh& m, const std::function<bool(const Vec3&)>& watched) {
    const MeshTopology topo(m);
    auto st = make_state(m, 0.0, topo);
    StepControl sc;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const auto next = rescaled_step(st, Vec3::Zero(), ds, sc, topo);
      for (int v = 0; v < m.num_vertices(); ++v)
        if (watched(m.vertices[v])) worst = std::max(worst, (next.mesh.vertices[v] - st.mesh.vertices[v]).norm());
      st = next;
    }
    return worst / (mean_edge_length(m) * ds);
  };
  const double sphere = worst_step(make_icosphere(2.0, 4), [](const Vec3&) { return true; });
  // the caps of the truncated cylinder are not part of the shrinker
  const double cyl = worst_step(make_capped_cylinder(std::sqrt(2.0), 16.0, 32), [](const Vec3& x) { return std::abs(x.z()) < 5.0; });
  o.detail << "max step / (edge ds): sphere " << sphere << ", cylinder " << cyl;
  o.require(sphere < 2.0, "sphere");
  o.require(cyl < 2.0, "cylinder");
}

void gaussian_areas(Outcome& o) {
  const double sphere_exact = 4.0 / std::exp(1.0);
  const double sphere_oracle = oracle::sphere_gaussian_area(2.0);
  const double sphere = gaussian_area(make_icosphere(2.0, 4), Vec3::Zero(), 1.0);
  const double cyl_exact = std::sqrt(2.0 * oracle::pi / std::exp(1.0));
  const double cyl_oracle = oracle::capped_cylinder_gaussian_area(std::sqrt(2.0), 4.0);
  const double cyl = gaussian_area(make_capped_cylinder(std::sqrt(2.0), 8.0, 48), Vec3::Zero(), 1.0);
  o.detail << "sphere " << sphere << " (oracle " << sphere_oracle << ", 4/e " << sphere_exact << "); cylinder L=8 " << cyl
           << " (oracle " << cyl_oracle << ", sqrt(2pi/e) " << cyl_exact << ")";
  o.require(std::abs(sphere_oracle - sphere_exact) < 1e-9, "sphere oracle");
  o.require(std::abs(sphere - sphere_oracle) <= 0.01 * sphere_oracle, "sphere vs oracle");
  o.require(std::abs(sphere - sphere_exact) <= 0.01 * sphere_exact, "sphere vs 4/e");
  o.require(std::abs(cyl - cyl_oracle) <= 0.01 * cyl_oracle, "cylinder vs oracle");
  o.require(std::abs(cyl - cyl_exact) <= 0.01 * cyl_exact, "cylinder vs sqrt(2 pi / e)");
}

void monotonicity(Outcome& o, Suite& suite) {
  for (const auto& name : kScenarios) {
    const auto& r = suite.get(name);
    double ent = 0.0, phi = 0.0;
    int hard = 0;
    for (const auto& v : r.report.verdicts) {
      if (v.name == "entropy_monotone") ent = v.value;
      if (v.name == "phi_monotone") phi = v.value;
      if (v.hard && !v.pass) ++hard;
    }
    o.detail << name << ": entropy rise " << ent << ", phi violations " << phi << "; ";
    o.require(hard == 0, name + " hard invariants");
    o.require(ent <= 5e-3, name + " entropy");
  }
}

double variation(const std::vector<FunctionalSample>& rows, double FunctionalSample::*field) {
  double lo = 1e300, hi = -1e300;
  for (const auto& r : rows) {
    lo = std::min(lo, r.*field);
    hi = std::max(hi, r.*field);
  }
  return (hi - lo) / (rows.front().*field);
}

void boundedness(Outcome& o, Suite& suite) {
  {
    const auto& r = suite.get("dumbbell");
    const auto& rows = r.bundle.functionals;
    const double dv = variation(rows, &FunctionalSample::diam);
    const double av = variation(rows, &FunctionalSample::int_A_1);
    const double growth = rows.back().maxA / rows.front().maxA;
    o.detail << "dumbbell: diameter var " << dv << ", int|A| var " << av << ", max|A| growth " << growth << ", "
             << r.seconds << " s; ";
    o.require(dv < 0.3, "dumbbell diameter");
    o.require(av < 0.5, "dumbbell int |A|");
    o.require(growth >= 20.0, "dumbbell max|A| growth");
    o.require(r.seconds < 600.0, "dumbbell runtime");
  }
  {
    const auto& r = suite.get("thin_torus");
    const auto& rows = r.bundle.functionals;
    const double ref = 4.0 * oracle::pi * oracle::pi;
    double dev = 0.0;
    for (const auto& row : rows) dev = std::max(dev, std::abs(row.int_H_1 - ref) / ref);
    const double growth = rows.back().maxH / rows.front().maxH;
    o.detail << "torus: int H max dev " << dev << ", maxH growth " << growth << ", " << r.seconds << " s";
    o.require(dev <= 0.25, "torus int H");
    o.require(growth >= 10.0, "torus maxH growth");
    o.require(r.seconds < 600.0, "torus runtime");
  }
}

FlowHistory synthetic_cylinder_history(int snapshots, double t_end, double turn_deg) {
  FlowHistory h;
  const auto first = make_capped_cylinder(1.0, 12.0, 32, 0.0, 2, 40);
  h.topology = std::make_shared<MeshTopology>(first);
  for (int k = 0; k < snapshots; ++k) {
    const double t = t_end * k / (snapshots - 1);
    auto m = make_capped_cylinder(std::sqrt(1.0 - 2.0 * t), 12.0, 32, 0.0, 2, 40);
    m = transformed(m, rotation(turn_deg * k, Vec3::UnitX()), Vec3::Zero());
    h.states.push_back(make_state(m, t, *h.topology));
  }
  return h;
}

double synthetic_tilt(int snapshots, double t_end, double turn_deg) {
  const auto h = synthetic_cylinder_history(snapshots, t_end, turn_deg);
  const auto& last = h.back();
  const auto fin = fit_cylinder(last.mesh, last.curv, nearest_vertex(last.mesh, {1.0, 0.0, 0.0}), 2.0);
  return measure_tilt(track_strong_neck(h, fin)).total_tilt_deg;
}

void neck_machinery(Outcome& o, Suite& suite) {
  int false_necks = 0;
  for (int level : {3, 4}) {
    const auto m = make_icosphere(1.0, level);
    false_necks += static_cast<int>(detect_necks(m, estimate_curvature(m)).size());
  }
  false_necks += static_cast<int>(suite.get("sphere").bundle.final_necks.size());
  o.require(false_necks == 0, "no necks on spheres");

  double worst_cover = 1.0;
  for (double r : {0.1, 0.05}) {
    const auto m = make_capped_cylinder(r, 40.0 * r, 24);
    const auto necks = detect_necks(m, estimate_curvature(m));  // eps_threshold 0.1
    std::vector<char> covered(m.num_vertices(), 0);
    for (int v : neck_ball_vertices(m, necks)) covered[v] = 1;
    int barrel = 0, hit = 0;
    for (int v = 0; v < m.num_vertices(); ++v) {
      const auto& x = m.vertices[v];
      if (std::abs(x.z()) <= 20.0 * r + 1e-12 && std::abs(std::hypot(x.x(), x.y()) - r) < 1e-9) {
        ++barrel;
        hit += covered[v];
      }
    }
    worst_cover = std::min(worst_cover, static_cast<double>(hit) / barrel);
  }
  o.require(worst_cover >= 0.95, "barrel coverage");

  const auto& db = suite.get("dumbbell").bundle;
  double residual = 1e9;
  std::size_t samples = 0;
  if (db.track) {
    residual = db.track->max_radius_residual;
    samples = db.track->samples.size();
  }
  o.require(samples >= 2, "dumbbell track");
  o.require(residual <= 0.1, "dumbbell radius law");

  const double straight = synthetic_tilt(11, 0.3, 0.0);
  const double turned = synthetic_tilt(51, 0.2, 0.2);
  o.require(straight < 1.0, "straight tilt");
  o.require(std::abs(turned - 10.0) <= 1.0, "rotation tilt");
  o.detail << "false necks " << false_necks << ", barrel coverage " << worst_cover << ", dumbbell track " << samples
           << " samples residual " << residual << ", tilt straight " << straight << " deg, rotated " << turned << " deg";
}

std::vector<Tube> tubes_of(const TriMesh& m, double eps, double window) {
  DetectOptions d;
  d.eps_threshold = eps;
  d.window = window;
  TubeOptions t;
  t.window = window;
  return assemble_tubes(m, detect_necks(m, estimate_curvature(m), d), t);
}

void tube_estimates(Outcome& o) {
  std::vector<double> cs;
  for (double r : {0.2, 0.1}) {
    const auto m = make_capped_cylinder(r, 4.0, 24);
    const auto tubes = tubes_of(m, 0.1, 0.25);
    o.require(tubes.size() == 1, "one tube on the cylinder");
    if (tubes.size() != 1) return;
    cs.push_back(tube_integral_estimate(estimate_curvature(m), tubes[0]).c_observed);
  }
  const double two_pi = 2.0 * oracle::pi;
  o.require(std::abs(cs[0] / two_pi - 1.0) <= 0.03 && std::abs(cs[1] / two_pi - 1.0) <= 0.03, "c_observed = 2 pi");
  o.require(std::abs(cs[1] / cs[0] - 1.0) <= 0.03, "invariance under halving r");
  o.detail << "c_observed " << cs[0] << " (r 0.2), " << cs[1] << " (r 0.1); ";

  // elbow: legs, 90 degree arc of radius 1.5
  {
    Scenario s;
    s.generator = "bent_tube";
    s.radius = 0.1;
    s.length = 6.0;
    s.n_circ = 16;
    const auto tubes = tubes_of(generate(s).mesh, 0.2, 0.5);
    o.require(tubes.size() == 1, "one elbow tube");
    if (tubes.size() != 1) return;
    const double rb = 1.5, theta = oracle::pi / 2.0, leg = 0.5 * (6.0 - rb * theta);
    for (double cutoff : {1.0, 2.0}) {
      const double ratio = tube_distance_comparison(tubes[0], cutoff).max_ratio;
      const double exact = oracle::max_arc_over_chord(
          [&](double t) { return oracle::elbow_point(t, leg, rb, theta); }, 2.0 * leg + rb * theta, cutoff);
      o.detail << "elbow cutoff " << cutoff << ": " << ratio << " vs " << exact << "; ";
      o.require(ratio <= exact * 1.05, "elbow distance ratio");
    }
  }
  {
    const auto tubes = tubes_of(make_torus(0.05, 1.0, 16), 0.2, 0.5);
    o.require(tubes.size() == 1 && tubes[0].closed, "one closed torus tube");
    if (tubes.size() != 1) return;
    for (double cutoff : {1.0, 1.5}) {
      const double ratio = tube_distance_comparison(tubes[0], cutoff).max_ratio;
      const double exact = oracle::arc_over_chord(2.0 * std::asin(cutoff / 2.0));
      o.detail << "torus cutoff " << cutoff << ": " << ratio << " vs " << exact << "; ";
      o.require(ratio <= exact * 1.05, "torus distance ratio");
    }
  }
}

void sequence_suite(Outcome& o) {
  using big = boost::multiprecision::cpp_bin_float_50;
  const auto t0 = std::chrono::steady_clock::now();

  LojSequence zero{std::vector<double>(50, 0.0), 3.0, 0.5, 1.0};
  o.require(check_hypotheses(zero).all(), "zero sequence");
  LojSequence one{std::vector<double>(50, 1.0), 3.0, 0.5, 2.0};
  o.require(!check_hypotheses(one).recurrence, "constant sequence fails the recurrence");
  LojSequence pl;
  pl.mu = 0.5;
  pl.K = 1e3;
  for (int t = 0; t <= 200; ++t) pl.values.push_back(std::pow(t + 10.0, -2.0));
  const auto h = check_hypotheses(pl);
  o.require(h.all() && std::isfinite(h.tightest_K), "power law hypotheses");

  big ref = 0;
  for (std::size_t j = 1; j < pl.values.size(); ++j)
    ref += boost::multiprecision::sqrt(boost::multiprecision::abs(big(pl.values[j]) - big(pl.values[j - 1])));
  const double sum_err = std::abs(sqrt_increment_sum(pl) - ref.convert_to<double>());
  o.require(sum_err <= 1e-12, "increment sum vs extended precision");

  o.require(decay_bound_check(pl, 1.0).holds, "decay bound on (t+10)^-2");
  FamilySpec fit_family;
  fit_family.seed = 101;
  FamilySpec test_family = fit_family;
  test_family.seed = 202;
  double C = 0.0;
  for (int i = 0; i < fit_family.count; ++i)
    C = std::max(C, fit_decay_constant(generate_member(fit_family, i, fit_family.amplitude_cap)));
  int decay_failures = 0;
  for (int i = 0; i < test_family.count; ++i)
    if (!decay_bound_check(generate_member(test_family, i, test_family.amplitude_cap), C).holds) ++decay_failures;
  o.require(decay_failures < 0.05 * test_family.count, "decay bound across power-law families");

  int cert_failures = 0, members = 0;
  for (auto fam : {Family::PowerLaw, Family::Geometric, Family::Randomized}) {
    FamilySpec spec;
    spec.family = fam;
    spec.count = 200;
    const auto cert = empirical_delta(spec, 0.1);
    const auto check = verify_certificate(cert, 0.5);
    cert_failures += check.failures;
    members += check.members;
    o.require(cert.delta_hat > 0.0, to_string(fam) + " delta_hat > 0");
  }
  o.require(cert_failures == 0 && members == 600, "half-amplitude certificates");
  const double secs = seconds_since(t0);
  o.require(secs < 120.0, "runtime < 2 min");
  o.detail << "sum error " << sum_err << ", tightest K " << h.tightest_K << ", decay failures " << decay_failures
           << "/200, certificate failures " << cert_failures << "/" << members << ", " << secs << " s";
}

void ls_measurement(Outcome& o, Suite& suite) {
  const auto& b = suite.get("perturbed_cylinder").bundle;
  o.require(b.ls.has_value(), "LS measurement ran");
  o.require(b.tilt_chain.has_value(), "tilt chain ran");
  if (!b.ls || !b.tilt_chain) return;
  o.require(!b.ls->records.empty(), "gated range nonempty");
  o.require(std::isfinite(b.ls->minimal_K), "finite K");
  const auto& c = *b.tilt_chain;
  o.require(c.lhs <= 1.05 * c.rhs, "tilt chain lhs <= 1.05 rhs");
  o.require(c.telescoping_error <= 1e-12, "telescoping");
  o.detail << "minimal K " << b.ls->minimal_K << " over " << b.ls->records.size() << " records (gate eps "
           << b.ls->gate_eps_max << "), tilt chain " << c.lhs << " <= " << c.rhs << ", telescoping error "
           << c.telescoping_error;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::current_path() / "acceptance_bundles";
  Suite suite(MCFLAB_CONFIG_DIR, out);

  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"AC1 shrinking sphere", shrinking_sphere},
      {"AC2 self-shrinker fixed points", shrinker_fixed_points},
      {"AC3 Gaussian areas", gaussian_areas},
      {"AC4 monotonicity suite", [&](Outcome& o) { monotonicity(o, suite); }},
      {"AC5 boundedness", [&](Outcome& o) { boundedness(o, suite); }},
      {"AC6 neck machinery", [&](Outcome& o) { neck_machinery(o, suite); }},
      {"AC7 tube estimates", tube_estimates},
      {"AC8 sequence suite", sequence_suite},
      {"AC9 LS measurement", [&](Outcome& o) { ls_measurement(o, suite); }},
  };

  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
