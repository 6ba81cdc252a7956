#include <algorithm>
#include <cmath>
#include <random>

#include "mcflab/error.hpp"
#include "mcflab/lojasiewicz.hpp"

namespace mcflab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void validate(const FamilySpec& s) {
  if (!(s.K > 0.0) || !(s.mu > 0.0 && s.mu < 1.0) || s.T < 2 || s.count < 1 || !(s.amplitude_cap > 0.0))
    throw Error(ErrorCode::InvalidParams, "family needs K > 0, mu in (0,1), T >= 2, count >= 1, cap > 0");
}

// Largest q in (0,1) with A^mu q^(1+mu) <= K (1 - q^2); the left side
// increases and the right side decreases in q.
double geometric_ratio_limit(double A, double K, double mu) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double q = 0.5 * (lo + hi);
    if (std::pow(A, mu) * std::pow(q, 1.0 + mu) <= K * (1.0 - q * q))
      lo = q;
    else
      hi = q;
  }
  return lo;
}

// Member at full amplitude A = cap.
std::vector<double> build_shape(const FamilySpec& spec, int index) {
  std::mt19937_64 rng(member_seed(spec.seed, index));
  const double A = spec.amplitude_cap;
  const double mu = spec.mu;
  std::vector<double> f(spec.T + 1);
  switch (spec.family) {
    case Family::PowerLaw: {
      // f = A (1 + t/s)^(-1/mu); convexity of y^(-1/mu-1) gives the recurrence
      // whenever A^mu s <= 2K/mu
      const double s_max = 2.0 * spec.K / (mu * std::pow(A, mu));
      const double s = s_max * (0.25 + 0.75 * uniform01(rng));
      for (int t = 0; t <= spec.T; ++t) f[t] = A * std::pow(1.0 + t / s, -1.0 / mu);
      break;
    }
    case Family::Geometric: {
      const double q = geometric_ratio_limit(A, spec.K, mu) * (0.5 + 0.5 * uniform01(rng));
      for (int t = 0; t <= spec.T; ++t) f[t] = A * std::pow(q, t);
      break;
    }
    case Family::Randomized: {
      // forced drop from the recurrence plus a random extra drop; the
      // sequence may cross zero
      f[0] = A;
      f[1] = A * (1.0 - 0.2 * uniform01(rng));
      for (int t = 1; t < spec.T; ++t) {
        const double forced = std::min(f[t], f[t - 1] - std::pow(std::abs(f[t]), 1.0 + mu) / spec.K);
        const double extra = 0.02 * A * uniform01(rng) * std::pow(0.9, t);
        f[t + 1] = forced - extra;
      }
      break;
    }
  }
  return f;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::PowerLaw:
      return "power_law";
    case Family::Geometric:
      return "geometric";
    case Family::Randomized:
      return "randomized";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "power_law") return Family::PowerLaw;
  if (s == "geometric") return Family::Geometric;
  if (s == "randomized") return Family::Randomized;
  throw Error(ErrorCode::InvalidParams, "unknown family " + s);
}

std::uint64_t member_seed(std::uint64_t batch_seed, int index) {
  return splitmix64(splitmix64(batch_seed) ^ static_cast<std::uint64_t>(index));
}

LojSequence generate_member(const FamilySpec& spec, int index, double amplitude) {
  validate(spec);
  if (!(amplitude >= 0.0 && amplitude <= spec.amplitude_cap))
    throw Error(ErrorCode::InvalidParams, "amplitude must lie in [0, cap]");
  auto f = build_shape(spec, index);
  double peak = 0.0;
  for (double v : f) peak = std::max(peak, std::abs(v));
  const double c = amplitude / peak;
  for (double& v : f) v *= c;
  return {std::move(f), spec.K, spec.mu, amplitude};
}

namespace {

double worst_sum(const std::vector<std::vector<double>>& shapes, double scale) {
  double worst = 0.0;
  std::vector<double> buf;
  for (const auto& g : shapes) {
    buf = g;
    for (double& v : buf) v *= scale;
    worst = std::max(worst, sqrt_increment_sum(buf));
  }
  return worst;
}

}  // namespace

DeltaCertificate empirical_delta(const FamilySpec& spec, double eps, int bisection_steps) {
  validate(spec);
  if (!(eps >= 0.0) || bisection_steps < 1) throw Error(ErrorCode::InvalidParams, "eps >= 0 and steps >= 1");
  DeltaCertificate cert;
  cert.spec = spec;
  cert.eps = eps;
  cert.bisection_steps = bisection_steps;

  // members normalised to max |f| = 1, checked at the cap
  std::vector<std::vector<double>> unit;
  unit.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    auto seq = generate_member(spec, i, spec.amplitude_cap);
    const auto h = check_hypotheses(seq);
    if (!h.all())
      throw Error(ErrorCode::GeneratorInvalid,
                  to_string(spec.family) + " member " + std::to_string(i) + " fails the hypotheses");
    cert.max_tightest_K = std::max(cert.max_tightest_K, h.tightest_K);
    for (double& v : seq.values) v /= spec.amplitude_cap;
    unit.push_back(std::move(seq.values));
  }

  auto passes = [&](double a) { return worst_sum(unit, a) <= eps; };
  if (passes(spec.amplitude_cap)) {
    cert.delta_hat = spec.amplitude_cap;
    cert.hit_cap = true;
  } else {
    double lo = 0.0, hi = spec.amplitude_cap;
    for (int i = 0; i < bisection_steps; ++i) {
      const double mid = 0.5 * (lo + hi);
      (passes(mid) ? lo : hi) = mid;
    }
    cert.delta_hat = lo;
  }
  cert.worst_sum_at_delta = worst_sum(unit, cert.delta_hat);
  return cert;
}

CertificateCheck verify_certificate(const DeltaCertificate& cert, double amplitude_factor) {
  CertificateCheck check;
  const double a = amplitude_factor * cert.delta_hat;
  for (int i = 0; i < cert.spec.count; ++i) {
    const auto seq = generate_member(cert.spec, i, a);
    const double s = sqrt_increment_sum(seq);
    check.worst_sum = std::max(check.worst_sum, s);
    ++check.members;
    if (!check_hypotheses(seq).all() || s > cert.eps) ++check.failures;
  }
  return check;
}

nlohmann::json to_json(const FamilySpec& s) {
  return {{"family", to_string(s.family)}, {"K", s.K},         {"mu", s.mu},
          {"T", s.T},                      {"count", s.count}, {"amplitude_cap", s.amplitude_cap},
          {"seed", s.seed}};
}

nlohmann::json to_json(const DeltaCertificate& c) {
  nlohmann::json j;
  j["generator"] = to_json(c.spec);
  j["eps"] = c.eps;
  j["delta_hat"] = c.delta_hat;
  j["hit_cap"] = c.hit_cap;
  j["bisection_steps"] = c.bisection_steps;
  j["worst_sum_at_delta"] = c.worst_sum_at_delta;
  j["max_tightest_K"] = c.max_tightest_K;
  nlohmann::json seeds = nlohmann::json::array();
  for (int i = 0; i < c.spec.count; ++i) seeds.push_back(member_seed(c.spec.seed, i));
  j["member_seeds"] = seeds;
  return j;
}

}  // namespace mcflab
