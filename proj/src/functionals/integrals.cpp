#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mcflab/functionals.hpp"

namespace mcflab {

double curvature_integral(const CurvatureField& curv, CurvatureQuantity which, double power) {
  if (!(power >= 0.0)) throw Error(ErrorCode::InvalidParams, "power must be non-negative");
  const auto& src = which == CurvatureQuantity::H ? curv.H : curv.normA;
  std::vector<double> f(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) f[i] = power == 0.0 ? 1.0 : std::pow(std::abs(src[i]), power);
  return surface_integral(curv.vertex_area, f);
}

ToppingResult topping_check(const TriMesh& mesh, const CurvatureField& curv, const DiameterOptions& opts) {
  const MeshTopology topo(mesh);
  return topping_check(mesh, topo, curv, opts);
}

ToppingResult topping_check(const TriMesh& mesh, const MeshTopology& topo, const CurvatureField& curv,
                            const DiameterOptions& opts) {
  ToppingResult r;
  r.diameter = intrinsic_diameter(mesh, topo, opts);
  r.diam = r.diameter.diameter;
  r.int_H = curvature_integral(curv, CurvatureQuantity::H, 1.0);
  r.ratio = r.int_H > 0.0 ? r.diam / r.int_H : std::numeric_limits<double>::infinity();
  return r;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_functionals_csv(const std::filesystem::path& path, const std::vector<FunctionalSample>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "t,area,F_origin,entropy,diam,int_H_1,int_A_1,maxH,maxA,int_rinv\n";
  for (const auto& r : rows)
    out << fmt(r.t) << ',' << fmt(r.area) << ',' << fmt(r.F_origin) << ',' << fmt(r.entropy) << ',' << fmt(r.diam)
        << ',' << fmt(r.int_H_1) << ',' << fmt(r.int_A_1) << ',' << fmt(r.maxH) << ',' << fmt(r.maxA) << ','
        << (std::isnan(r.int_rinv) ? std::string() : fmt(r.int_rinv)) << '\n';
}

std::vector<FunctionalSample> read_functionals_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<FunctionalSample> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double v[10];
    for (int c = 0; c < 10; ++c) {
      if (!std::getline(ss, cell, ',') || cell.empty()) {
        v[c] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      try {
        v[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad functionals row '" + line + "'");
      }
    }
    rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]});
  }
  return rows;
}

void write_regularity_csv(const std::filesystem::path& path, const RegularityScaleField& field) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "vertex,r,coherence_limited\n";
  for (std::size_t v = 0; v < field.r.size(); ++v)
    out << v << ',' << fmt(field.r[v]) << ',' << (field.coherence_limited[v] ? 1 : 0) << '\n';
}

}  // namespace mcflab
