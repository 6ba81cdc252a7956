#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcflab/flow.hpp"
#include "mcflab/mesh.hpp"

namespace mcflab {

// ---- discrete sequences ----

/// f(0..T) together with the constants of the decay recurrence
/// |f(t)|^(1+mu) <= K (f(t-1) - f(t+1)).
struct LojSequence {
  std::vector<double> values;
  double K = 1.0;
  double mu = 0.5;
  double delta = 1.0;
};

struct HypothesisFlags {
  bool non_increasing = false;
  bool recurrence = false;
  bool bounded = false;
  int first_increase = -1;        // t with f(t+1) > f(t) + tol
  int first_recurrence_fail = -1;  // t in 1..T-1
  double max_abs = 0.0;
  /// Smallest K for which the recurrence holds; +inf when none does
  /// (some |f(t)| > 0 with f(t-1) - f(t+1) <= 0).
  double tightest_K = 0.0;

  bool all() const { return non_increasing && recurrence && bounded; }
};

inline constexpr double kHypothesisTol = 1e-12;

/// Throws TooShort when T < 2.
HypothesisFlags check_hypotheses(const LojSequence& seq);

/// sum_j |f(j) - f(j-1)|^(1/2), compensated.
double sqrt_increment_sum(const std::vector<double>& values);
inline double sqrt_increment_sum(const LojSequence& seq) { return sqrt_increment_sum(seq.values); }

struct DecayCheck {
  bool holds = true;
  int t0 = 0;         // first index from which f stays negative (T+1 if never)
  int violator = -1;  // first t in [1, t0] with f(t) > C t^(-1/mu)
  double value = 0.0;
  double bound = 0.0;
};

/// f(t) <= C t^(-1/mu) on [1, t0]. Throws HypothesesFail.
DecayCheck decay_bound_check(const LojSequence& seq, double C);

/// Smallest C for which decay_bound_check holds (0 on an empty range).
double fit_decay_constant(const LojSequence& seq);

// ---- generated families ----

enum class Family { PowerLaw, Geometric, Randomized };
std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// A family of admissible sequences. Each member is built at amplitude_cap
/// satisfying the recurrence with K, then scaled down; scaling by c <= 1
/// keeps the recurrence with the same K.
struct FamilySpec {
  Family family = Family::PowerLaw;
  double K = 10.0;
  double mu = 0.5;
  int T = 200;
  int count = 200;
  double amplitude_cap = 1.0;
  std::uint64_t seed = 1;
};

/// Member `index` scaled so that max |f| = amplitude (0 <= amplitude <= cap).
LojSequence generate_member(const FamilySpec& spec, int index, double amplitude);

/// Per-member seed derived from (batch seed, index).
std::uint64_t member_seed(std::uint64_t batch_seed, int index);

struct DeltaCertificate {
  FamilySpec spec;
  double eps = 0.0;
  double delta_hat = 0.0;
  bool hit_cap = false;
  int bisection_steps = 0;
  double worst_sum_at_delta = 0.0;  // max member sum at delta_hat
  double max_tightest_K = 0.0;      // over the members at the cap
};

/// Largest amplitude (bisection) at which every member has
/// sqrt_increment_sum <= eps. Throws GeneratorInvalid if a member fails the
/// hypotheses at the cap.
DeltaCertificate empirical_delta(const FamilySpec& spec, double eps, int bisection_steps = 60);

struct CertificateCheck {
  int members = 0;
  int failures = 0;
  double worst_sum = 0.0;
};

/// Regenerates every member at amplitude_factor * delta_hat and counts
/// hypothesis or eps failures.
CertificateCheck verify_certificate(const DeltaCertificate& cert, double amplitude_factor = 0.5);

nlohmann::json to_json(const HypothesisFlags& h);
nlohmann::json to_json(const FamilySpec& s);
nlohmann::json to_json(const DeltaCertificate& c);
nlohmann::json to_json(const DecayCheck& d);

/// CSV with header "index,value".
void write_sequence_csv(const std::string& path, const std::vector<double>& values);
std::vector<double> read_sequence_csv(const std::string& path);

// ---- measurements on rescaled histories ----

/// Gaussian-area series of a rescaled history (origin-centred, scale 1)
/// sampled every `stride` snapshots; drift[j] integrates
/// int |H + x_perp / 2| rho dmu over [s_j, s_{j+1}] through every stored
/// snapshot in between (trapezoid).
struct FGapSeries {
  std::vector<double> s;
  std::vector<double> F;
  std::vector<double> gaps;   // gaps[j] = F[j-1] - F[j+1], j = 1..n-2 (index 0 and n-1 unused)
  std::vector<double> drops;  // drops[j] = F[j] - F[j+1]
  std::vector<double> drift;  // per step j -> j+1
  double min_gap = 0.0;
};

FGapSeries fgap_series(const FlowHistory& rescaled, int stride = 1);

struct LSOptions {
  double mu = 0.5;
  double gate_eps = 0.1;    // cylinder closeness required of every snapshot
  double gate_radius = 3.0;  // ball about the origin used by the gate fit
  int stride = 1;
};

struct LSRecord {
  double s = 0.0;
  double lhs = 0.0;  // |F - Z|^(1+mu)
  double gap = 0.0;  // F(s-1) - F(s+1)
  double gate_eps = 0.0;
};

struct LSMeasurement {
  double Z_value = 0.0;
  double mu = 0.5;
  std::vector<LSRecord> records;
  /// Smallest K with lhs <= K gap on every record; +inf when some gap <= 0
  /// with lhs > 0.
  double minimal_K = 0.0;
  double gate_eps_max = 0.0;
};

/// Throws GateFailed naming the first snapshot that is not close to a cylinder.
LSMeasurement measure_LS_inequality(const FlowHistory& rescaled, double Z_value, const LSOptions& opts = {});

struct TiltChain {
  double lhs = 0.0;     // sum of per-step drift
  double rhs = 0.0;     // sqrt(Lambda * ds) * sum drop^(1/2)
  double Lambda = 0.0;  // entropy of the first snapshot
  double step = 1.0;    // rescaled time per discrete step
  double telescoped = 0.0;  // sum of drops
  double F_first_minus_last = 0.0;
  double telescoping_error = 0.0;
  bool holds = false;  // lhs <= 1.05 rhs

  static constexpr double kSlack = 0.05;
};

/// Lambda is measured by the entropy search unless given (> 0).
TiltChain tilt_sum_chain(const FlowHistory& rescaled, int stride = 1, double Lambda = 0.0);

nlohmann::json to_json(const LSMeasurement& m);
nlohmann::json to_json(const TiltChain& c);

}  // namespace mcflab
