#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mcflab/error.hpp"
#include "mcflab/lojasiewicz.hpp"

namespace mcflab {

namespace {

// Neumaier summation
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

}  // namespace

HypothesisFlags check_hypotheses(const LojSequence& seq) {
  const auto& f = seq.values;
  if (f.size() < 3) throw Error(ErrorCode::TooShort, "hypothesis check needs T >= 2");
  const int T = static_cast<int>(f.size()) - 1;
  HypothesisFlags h;

  h.non_increasing = true;
  for (int t = 0; t < T; ++t)
    if (f[t + 1] > f[t] + kHypothesisTol) {
      h.non_increasing = false;
      h.first_increase = t;
      break;
    }

  h.recurrence = true;
  for (int t = 1; t < T; ++t) {
    const double lhs = std::pow(std::abs(f[t]), 1.0 + seq.mu);
    const double drop = f[t - 1] - f[t + 1];
    if (lhs > seq.K * drop + kHypothesisTol && h.recurrence) {
      h.recurrence = false;
      h.first_recurrence_fail = t;
    }
    if (lhs > 0.0) {
      if (drop > 0.0)
        h.tightest_K = std::max(h.tightest_K, lhs / drop);
      else
        h.tightest_K = std::numeric_limits<double>::infinity();
    }
  }

  for (double v : f) h.max_abs = std::max(h.max_abs, std::abs(v));
  h.bounded = h.max_abs <= seq.delta;
  return h;
}

double sqrt_increment_sum(const std::vector<double>& values) {
  CompensatedSum s;
  for (std::size_t j = 1; j < values.size(); ++j) s.add(std::sqrt(std::abs(values[j] - values[j - 1])));
  return s.value();
}

DecayCheck decay_bound_check(const LojSequence& seq, double C) {
  const auto h = check_hypotheses(seq);
  if (!h.all()) throw Error(ErrorCode::HypothesesFail, "decay bound requires the sequence hypotheses");
  const auto& f = seq.values;
  const int T = static_cast<int>(f.size()) - 1;
  DecayCheck d;
  d.t0 = T + 1;
  while (d.t0 > 0 && f[d.t0 - 1] < 0.0) --d.t0;
  const int last = std::min(d.t0, T);
  for (int t = 1; t <= last; ++t) {
    const double bound = C * std::pow(static_cast<double>(t), -1.0 / seq.mu);
    if (f[t] > bound) {
      d.holds = false;
      d.violator = t;
      d.value = f[t];
      d.bound = bound;
      break;
    }
  }
  return d;
}

double fit_decay_constant(const LojSequence& seq) {
  const auto& f = seq.values;
  const int T = static_cast<int>(f.size()) - 1;
  int t0 = T + 1;
  while (t0 > 0 && f[t0 - 1] < 0.0) --t0;
  double C = 0.0;
  for (int t = 1; t <= std::min(t0, T); ++t)
    C = std::max(C, f[t] * std::pow(static_cast<double>(t), 1.0 / seq.mu));
  return C;
}

nlohmann::json to_json(const HypothesisFlags& h) {
  nlohmann::json j;
  j["non_increasing"] = h.non_increasing;
  j["recurrence"] = h.recurrence;
  j["bounded"] = h.bounded;
  j["first_increase"] = h.first_increase;
  j["first_recurrence_fail"] = h.first_recurrence_fail;
  j["max_abs"] = h.max_abs;
  if (std::isfinite(h.tightest_K))
    j["tightest_K"] = h.tightest_K;
  else
    j["tightest_K"] = nullptr;
  return j;
}

nlohmann::json to_json(const DecayCheck& d) {
  return {{"holds", d.holds}, {"t0", d.t0}, {"violator", d.violator}, {"value", d.value}, {"bound", d.bound}};
}

void write_sequence_csv(const std::string& path, const std::vector<double>& values) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error(ErrorCode::IoError, "cannot write " + path);
  std::fprintf(fp, "index,value\n");
  for (std::size_t i = 0; i < values.size(); ++i) std::fprintf(fp, "%zu,%.17g\n", i, values[i]);
  std::fclose(fp);
}

std::vector<double> read_sequence_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::string line;
  std::vector<double> values;
  if (!std::getline(in, line) || line.rfind("index,value", 0) != 0)
    throw Error(ErrorCode::ParseError, path + ": expected header index,value");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno));
    try {
      const long idx = std::stol(line.substr(0, comma));
      if (idx != static_cast<long>(values.size()))
        throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": index out of order");
      values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  return values;
}

}  // namespace mcflab
