#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mcflab/error.hpp"
#include "mcflab/experiment.hpp"

namespace mcflab {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<double>& x, const std::vector<double>& y) {
  const double W = 640, H = 400, left = 80, right = 20, top = 40, bottom = 50;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (std::isfinite(x[i]) && std::isfinite(y[i])) pts.push_back({x[i], y[i]});

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts[0].first;
    y0 = y1 = pts[0].second;
    for (const auto& [a, b] : pts) {
      x0 = std::min(x0, a);
      x1 = std::max(x1, a);
      y0 = std::min(y0, b);
      y1 = std::max(y1, b);
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto px = [&](double a) { return left + (a - x0) / (x1 - x0) * (W - left - right); };
  auto py = [&](double b) { return H - bottom - (b - y0) / (y1 - y0) * (H - top - bottom); };

  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
      << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double a = x0 + (x1 - x0) * i / 4.0, b = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << px(a) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << num(a) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(b) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << num(b)
        << "</text>\n";
  }
  out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << escape(xlabel) << "</text>\n";
  out << "<text x=\"16\" y=\"" << (top + H - bottom) / 2 << "\" font-size=\"13\" transform=\"rotate(-90 16,"
      << (top + H - bottom) / 2 << ")\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
  if (!pts.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (const auto& [a, b] : pts) out << num(px(a)) << "," << num(py(b)) << " ";
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

void write_functional_plots(const std::filesystem::path& dir) {
  const auto rows = read_functionals_csv(dir / "functionals.csv");
  std::filesystem::create_directories(dir / "plots");
  std::vector<double> t;
  for (const auto& r : rows) t.push_back(r.t);
  auto plot = [&](const char* name, double FunctionalSample::*field) {
    std::vector<double> y;
    for (const auto& r : rows) y.push_back(r.*field);
    write_svg_plot(dir / "plots" / (std::string(name) + ".svg"), name, "t", name, t, y);
  };
  plot("area", &FunctionalSample::area);
  plot("F_origin", &FunctionalSample::F_origin);
  plot("entropy", &FunctionalSample::entropy);
  plot("diam", &FunctionalSample::diam);
  plot("int_H_1", &FunctionalSample::int_H_1);
  plot("int_A_1", &FunctionalSample::int_A_1);
  plot("maxH", &FunctionalSample::maxH);
  plot("maxA", &FunctionalSample::maxA);
  plot("int_rinv", &FunctionalSample::int_rinv);
}

}  // namespace mcflab
