#pragma once

#include "dtn/dtn_engine.hpp"
#include "dtn/potentials.hpp"
#include "dtn/spectral_gap.hpp"
#include "dtn/xreal.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dtn::experiments {

/// Run configuration. Every field has a default; JSON keys match the field names.
struct ExperimentParams {
  int d = 2;
  double rho = 1.5;
  int m = 3;
  double s2 = 10;
  double A = 1, B = 1;
  double kappa = 1;
  double tau = 0.9;
  double eps_ball = 0.01;
  std::vector<double> s_grid;  // empty: 11 equally spaced points on [0, s2]
  std::optional<double> alpha, beta;
  double sigma = 1;
  unsigned precision = kPipelinePrecisionBits;

  // certification knobs
  double tail_ratio = 1e-3;           // window tail must stay below this fraction of sum |a|
  double residual_tolerance = 1e-6;   // quadrature self-consistency
  double lemma32_constant = 1000;
  bool precision_check = true;        // rerun at twice the precision
  double precision_tolerance_log2 = -32;

  // overrides of the derived operating point
  std::optional<double> energy;
  std::optional<long> n;
  std::optional<long> degree_max;
  bool zero_potential = false;

  potentials::BumpSpec bump;
  int panels = 16;
  int per_panel = 24;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  std::vector<double> grid() const;
  /// (m - d)/d.
  double s1() const { return static_cast<double>(m - d) / d; }
  /// (alpha, beta) with alpha + beta = s1; a missing one is filled in, both missing gives (0, s1).
  std::pair<double, double> alpha_beta() const;
  engine::EngineOptions engine_options(unsigned prec) const;

  nlohmann::json to_json() const;
  /// Unknown keys are rejected. The result is validated.
  static ExperimentParams from_json(const nlohmann::json& j);
};

/// A (1 + sqrt E) delta^tau + B (1 + sqrt E)^{-alpha} (ln(3 + 1/delta))^{-beta}.
XReal stability_rhs(const XReal& delta, double energy, const ExperimentParams& p);

struct InstabilityTerms {
  XReal first;   // A (1 + sqrt E)^kappa delta^tau
  XReal second;  // B (1 + sqrt E)^{2(s - s2)} (ln(3 + 1/delta))^{-s}
  XReal total;
};

/// The two terms of the instability right-hand side at smoothness s in [0, s2].
InstabilityTerms instability_terms(const XReal& delta, double energy, double s, const ExperimentParams& p);
XReal instability_rhs(const XReal& delta, double energy, double s, const ExperimentParams& p);

/// n = [20 (1 + sqrt E)^2] + 1.
long default_frequency(double energy);

/// Certified upper bound for the L-infinity operator norm of the DtN difference.
struct DeltaCertificate {
  long degree_max = 0;
  unsigned precision_bits = 0;
  XReal sum_abs;        // sum |a| over the window
  XReal inflated;       // sum_abs times (1 + quadrature allowance)
  XReal chain_tail;     // geometric remainder of the truncated chains
  XReal window_tail;    // entries with a degree above the window
  XReal delta;          // inflated + chain_tail + window_tail
  XReal q;
  double quadrature_residual = 0;
  engine::SolveReport solve;
  engine::Lemma32Report lemma32;
  int window_iterations = 0;
  bool tail_converged = false;
  bool passed = false;
  nlohmann::json to_json() const;
};

/// Sum over j > D of (number of matrix positions with max degree j) C (1 + (N + E) Q) 2^{-j}.
XReal window_tail_bound(long degree_max, const XReal& q, const XReal& n_sup, double energy, int d, double constant);

/// Builds the matrix on a degree window that grows until the window tail is below
/// tail_ratio * sum |a| (or uses `fixed_degree_max`).
DeltaCertificate certify_delta(double energy, const potentials::PotentialVnm& v, const ExperimentParams& p,
                               unsigned prec, std::optional<long> fixed_degree_max = std::nullopt,
                               basis::DtnMatrix* matrix_out = nullptr);

struct SPoint {
  double s = 0;
  XReal rhs, first, second;
  double margin_log2 = 0;  // log2(LHS / RHS)
  bool passed = false;
};

struct PipelineReport {
  ExperimentParams params;
  spectrum::GapResult gap;
  double energy = 0;
  long n = 0;
  unsigned precision_bits = 0;
  XReal lhs;  // n^{-m} = sup |v|
  XReal q;
  double dist_free = 0;
  DeltaCertificate delta;
  std::vector<SPoint> points;
  bool eps_below_ball = false;
  bool halves_ok = false;  // each term below LHS/2 on the whole grid
  double cm_norm = 0;      // sampled C^m norm of the potential
  std::optional<double> precision_change_log2;
  bool precision_stable = true;
  std::vector<std::string> flags;
  bool verdict = false;
  std::vector<std::pair<std::string, double>> runtimes;

  nlohmann::json to_json(bool with_timings = false) const;
};

PipelineReport cmd_theorem22(const ExperimentParams& p);

enum class SweepAxis { n, energy, m };
SweepAxis parse_axis(const std::string& name);

/// "start:stop:step" with inclusive stop; stop < start (step > 0) is an empty range.
std::vector<double> parse_range(const std::string& spec);

/// One CSV row per range value; failing rows carry status "failed" and the message.
std::string cmd_sweep(SweepAxis axis, const std::vector<double>& values, const ExperimentParams& p);
std::string sweep_header();

/// Suites: bessel, basis, radial, potentials, spectrum, dtn, all. Unknown names throw ConfigError.
nlohmann::json cmd_verify(const std::string& suite, unsigned prec = kDefaultPrecisionBits);
bool is_known_suite(const std::string& suite);

}  // namespace dtn::experiments
