#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mcflab/error.hpp"
#include "mcflab/experiment.hpp"

namespace mcflab {

namespace {

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) return nullptr;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, p.string() + ": " + e.what());
  }
  return j;
}

// columns after the first of a numeric CSV with a header row
std::vector<std::vector<double>> read_columns(const std::filesystem::path& p, int& ncols) {
  std::ifstream in(p);
  std::vector<std::vector<double>> cols;
  ncols = 0;
  if (!in) return cols;
  std::string line;
  if (!std::getline(in, line)) return cols;
  ncols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  cols.resize(ncols);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < ncols && std::getline(ss, cell, ','); ++c)
      cols[c].push_back(cell.empty() ? std::nan("") : std::stod(cell));
  }
  return cols;
}

double max_finite(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, x);
  return m;
}

double min_finite(const std::vector<double>& v) {
  double m = INFINITY;
  for (double x : v)
    if (std::isfinite(x)) m = std::min(m, x);
  return m;
}

// largest increase between consecutive finite entries
double max_increase(const std::vector<double>& v) {
  double worst = 0.0;
  double prev = std::nan("");
  for (double x : v) {
    if (!std::isfinite(x)) continue;
    if (std::isfinite(prev)) worst = std::max(worst, x - prev);
    prev = x;
  }
  return worst;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

bool Report::hard_failure() const {
  return std::any_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.hard && !v.pass; });
}

Report make_report(const std::filesystem::path& dir, const nlohmann::json& expectations) {
  const auto manifest = read_json(dir / "manifest.json");
  if (manifest.is_null()) throw Error(ErrorCode::IoError, "no manifest.json in " + dir.string());
  Report r;
  r.scenario = manifest.value("scenario", std::string());
  const double slack =
      manifest["thresholds"]["diagnostics"].value("monotonicity_slack", 5e-3);

  nlohmann::json pins = nlohmann::json::object();
  if (expectations.contains("all")) pins.update(expectations["all"]);
  if (expectations.contains("scenarios") && expectations["scenarios"].contains(r.scenario))
    pins.update(expectations["scenarios"][r.scenario]);

  const auto rows = read_functionals_csv(dir / "functionals.csv");
  if (rows.empty()) throw Error(ErrorCode::EmptyHistory, "functionals.csv has no rows");
  std::vector<double> t, ent, Forig, diam, intH, intA, maxA, maxH, rinv, topping;
  for (const auto& s : rows) {
    t.push_back(s.t);
    ent.push_back(s.entropy);
    Forig.push_back(s.F_origin);
    diam.push_back(s.diam);
    intH.push_back(s.int_H_1);
    intA.push_back(s.int_A_1);
    maxA.push_back(s.maxA);
    maxH.push_back(s.maxH);
    rinv.push_back(s.int_rinv);
    topping.push_back(s.int_H_1 > 0.0 ? s.diam / s.int_H_1 : std::nan(""));
  }

  auto add = [&](std::string name, bool hard, bool pass, double value, std::string detail) {
    r.verdicts.push_back({std::move(name), hard, pass, value, std::move(detail)});
  };

  // hard invariants: monotonicity
  const double ent_rise = max_increase(ent);
  add("entropy_monotone", true, ent_rise <= slack, ent_rise, "largest increase vs slack " + num(slack));
  int phi_violations = 0;
  double phi_rise = 0.0;
  {
    int ncols = 0;
    const auto cols = read_columns(dir / "phi.csv", ncols);
    for (int c = 1; c < ncols; ++c) {
      double prev = std::nan("");
      for (double x : cols[c]) {
        if (std::isfinite(prev) && x - prev > slack) ++phi_violations;
        if (std::isfinite(prev)) phi_rise = std::max(phi_rise, x - prev);
        prev = x;
      }
    }
  }
  add("phi_monotone", true, phi_violations == 0, phi_violations,
      "violations; largest increase " + num(phi_rise));

  // soft checks
  bool dominated = true;
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (std::isfinite(ent[k]) && Forig[k] > ent[k] + 1e-12) dominated = false;
  add("F_origin_le_entropy", false, dominated, dominated ? 1.0 : 0.0, "");
  const double topping_max = max_finite(topping);
  if (pins.contains("topping_ratio_max"))
    add("topping_ratio", false, topping_max <= pins["topping_ratio_max"].get<double>(), topping_max,
        "max diam / int H, pin " + num(pins["topping_ratio_max"].get<double>()));

  auto variation = [](const std::vector<double>& v) {
    const double first = v.front();
    return (max_finite(v) - min_finite(v)) / first;
  };
  const double diam_var = variation(diam);
  const double intA_var = variation(intA);
  const double maxA_growth = maxA.back() / maxA.front();
  const double maxH_growth = maxH.back() / maxH.front();
  auto pin_max = [&](const char* key, const char* name, double value, const std::string& what) {
    if (pins.contains(key)) {
      const double lim = pins[key].get<double>();
      add(name, false, value <= lim, value, what + " <= " + num(lim));
    }
  };
  auto pin_min = [&](const char* key, const char* name, double value, const std::string& what) {
    if (pins.contains(key)) {
      const double lim = pins[key].get<double>();
      add(name, false, value >= lim, value, what + " >= " + num(lim));
    }
  };
  pin_max("diam_variation_max", "diameter_bounded", diam_var, "(max-min)/initial diameter");
  pin_max("intA_variation_max", "int_A_bounded", intA_var, "(max-min)/initial int |A|");
  pin_min("maxA_growth_min", "maxA_growth", maxA_growth, "final/initial max |A|");
  pin_min("maxH_growth_min", "maxH_growth", maxH_growth, "final/initial max H");
  if (pins.contains("intH_reference")) {
    const double ref = pins["intH_reference"].get<double>();
    double dev = 0.0;
    for (double x : intH) dev = std::max(dev, std::abs(x - ref) / ref);
    pin_max("intH_rel_dev_max", "int_H_near_reference", dev, "max |int H - " + num(ref) + "| / ref");
  }

  const auto necks = read_json(dir / "necks.json");
  const int n_necks = necks.is_array() ? static_cast<int>(necks.size()) : 0;
  pin_min("min_necks", "necks_found", n_necks, "necks at the final snapshot");
  pin_max("max_necks", "necks_bounded", n_necks, "necks at the final snapshot");
  const auto track = read_json(dir / "track.json");
  int track_samples = 0;
  double track_res = std::nan("");
  if (track.is_object()) {
    track_samples = static_cast<int>(track["samples"].size());
    track_res = track["max_radius_residual"].get<double>();
  }
  pin_min("track_min_samples", "track_length", track_samples, "tracked snapshots");
  if (pins.contains("track_radius_residual_max"))
    add("track_radius_law", false,
        std::isfinite(track_res) && track_res <= pins["track_radius_residual_max"].get<double>(), track_res,
        "max |r_fit / sqrt(2 (t_star - t)) - 1|");
  const auto tilt = read_json(dir / "tilt.json");
  const double tilt_deg = tilt.is_object() ? tilt["total_tilt_deg"].get<double>() : std::nan("");
  if (pins.contains("tilt_max_deg"))
    add("tilt_small", false, std::isfinite(tilt_deg) && tilt_deg <= pins["tilt_max_deg"].get<double>(), tilt_deg,
        "total tilt (deg) over the track");

  const auto ls = read_json(dir / "ls.json");
  if (pins.value("ls_finite_K", false)) {
    const bool ok = ls.is_object() && !ls["minimal_K"].is_null() && !ls["records"].empty();
    add("ls_finite_K", false, ok, ok ? ls["minimal_K"].get<double>() : std::nan(""), "minimal K over the gated range");
  }
  const auto chain = read_json(dir / "tilt_chain.json");
  if (pins.value("tilt_chain_holds", false)) {
    const bool ok = chain.is_object() && chain["holds"].get<bool>();
    add("tilt_chain", false, ok, chain.is_object() ? chain["lhs"].get<double>() / chain["rhs"].get<double>() : NAN,
        "lhs / rhs");
  }

  auto& s = r.summary;
  s["scenario"] = r.scenario;
  s["stop_reason"] = manifest["flow"]["stop_reason"];
  s["partial"] = manifest["partial"];
  s["errors"] = manifest["errors"].size();
  s["t_final"] = t.back();
  s["max_diam"] = max_finite(diam);
  s["max_int_A"] = max_finite(intA);
  s["max_int_H"] = max_finite(intH);
  const double rmax = max_finite(rinv);
  s["max_int_rinv"] = std::isfinite(rmax) ? nlohmann::json(rmax) : nlohmann::json(nullptr);
  const double e0 = ent.front(), e1 = ent.back();
  s["entropy_drop"] = std::isfinite(e0) && std::isfinite(e1) ? nlohmann::json(e0 - e1) : nlohmann::json(nullptr);
  s["phi_violations"] = phi_violations;
  s["topping_max_ratio"] = topping_max;
  s["diam_variation"] = diam_var;
  s["int_A_variation"] = intA_var;
  s["maxA_growth"] = maxA_growth;
  s["maxH_growth"] = maxH_growth;
  s["necks"] = n_necks;
  s["track_samples"] = track_samples;
  s["track_max_radius_residual"] = std::isfinite(track_res) ? nlohmann::json(track_res) : nlohmann::json(nullptr);
  s["total_tilt_deg"] = std::isfinite(tilt_deg) ? nlohmann::json(tilt_deg) : nlohmann::json(nullptr);
  return r;
}

std::string format_report(const Report& r) {
  std::ostringstream out;
  out << "scenario " << r.scenario << "\n";
  for (const auto& [k, v] : r.summary.items())
    if (k != "scenario") out << "  " << k << " = " << v.dump() << "\n";
  out << "verdicts\n";
  for (const auto& v : r.verdicts) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %-4s %-22s %-5s %12.6g  %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(),
                  v.hard ? "hard" : "soft", v.value, v.detail.c_str());
    out << buf;
  }
  out << (r.hard_failure() ? "hard invariant violated\n" : "no hard invariant violated\n");
  return out.str();
}

nlohmann::json to_json(const Report& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario;
  j["summary"] = r.summary;
  auto& vs = j["verdicts"] = nlohmann::json::array();
  for (const auto& v : r.verdicts) {
    nlohmann::json e = {{"name", v.name}, {"hard", v.hard}, {"pass", v.pass}, {"detail", v.detail}};
    e["value"] = std::isfinite(v.value) ? nlohmann::json(v.value) : nlohmann::json(nullptr);
    vs.push_back(e);
  }
  j["hard_failure"] = r.hard_failure();
  return j;
}

}  // namespace mcflab
