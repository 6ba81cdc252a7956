#include <cstdio>
#include <fstream>
#include <sstream>

#include "mcflab/flow.hpp"
#include "mcflab/mesh_io.hpp"

namespace mcflab {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string snapshot_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%05d.off", k);
  return buf;
}

}  // namespace

void write_history(const fs::path& dir, const FlowRun& run) {
  if (run.history.empty()) throw Error(ErrorCode::EmptyHistory, "nothing to write");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::ofstream index(dir / "index.csv");
  if (!index) throw Error(ErrorCode::IoError, "cannot write " + (dir / "index.csv").string());
  index << "snapshot,time,area,maxH,maxA,stop_reason\n";
  const int n = run.history.size();
  for (int k = 0; k < n; ++k) {
    const auto& s = run.history.states[k];
    write_off(dir / snapshot_name(k), s.mesh);
    index << k << ',' << fmt(s.t) << ',' << fmt(total_area(s.mesh)) << ',' << fmt(s.curv.max_H()) << ','
          << fmt(s.curv.max_A()) << ',' << (k + 1 == n ? to_string(run.stop_reason) : "") << '\n';
  }
}

FlowRun read_history(const fs::path& dir) {
  std::ifstream index(dir / "index.csv");
  if (!index) throw Error(ErrorCode::IoError, "cannot open " + (dir / "index.csv").string());
  std::string line;
  std::getline(index, line);
  if (line.rfind("snapshot,time", 0) != 0) throw Error(ErrorCode::ParseError, "unexpected index.csv header");

  FlowRun run;
  std::string last_reason;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell[6];
    for (int c = 0; c < 6; ++c) std::getline(ss, cell[c], ',');
    int k = 0;
    double t = 0.0;
    try {
      k = std::stoi(cell[0]);
      t = std::stod(cell[1]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad index.csv row '" + line + "'");
    }
    TriMesh mesh = read_mesh(dir / snapshot_name(k));
    if (!run.history.topology) run.history.topology = std::make_shared<const MeshTopology>(mesh);
    run.history.states.push_back(make_state(std::move(mesh), t, *run.history.topology));
    if (!cell[5].empty()) last_reason = cell[5];
  }
  if (run.history.empty()) throw Error(ErrorCode::EmptyHistory, "index.csv lists no snapshots");
  run.history.validate();
  if (!last_reason.empty()) run.stop_reason = stop_reason_from_string(last_reason);
  return run;
}

}  // namespace mcflab
