#pragma once

#include "dtn/real.hpp"
#include "dtn/xreal.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dtn::spectrum {

struct Eigenvalue {
  Real lambda;          // squared Bessel zero
  double value = 0;     // lambda as double
  long multiplicity = 0;
  long j = 0;           // degree
  int s = 0;            // zero index, 1-based
};

/// Dirichlet eigenvalues of -Δ on the unit ball in R^d, sorted, complete up to `cutoff`.
struct SpectrumTable {
  int d = 2;
  double cutoff = 0;
  unsigned precision_bits = kDefaultPrecisionBits;
  std::vector<Eigenvalue> eigenvalues;

  /// lambda,multiplicity,j,s
  std::string to_csv() const;
};

SpectrumTable disk_eigenvalues(int d, double lambda_max, unsigned prec = kDefaultPrecisionBits);

/// Number of eigenvalues below rho^2, counted with multiplicity. Requires cutoff >= rho^2.
long weyl_count(const SpectrumTable& table, double rho);

/// max over rho on a grid in [rho_min, rho_max] of N(rho)/rho^d, inflated by 10%.
struct WeylConstant {
  double c1 = 0;
  double raw_max = 0;
  double argmax_rho = 0;
};
WeylConstant measure_c1(int d, double rho_min = 2.0, double rho_max = 20.0, int steps = 181,
                        unsigned prec = 128);

/// Gap constants: the closed form 2^{d-1}/(c1+1), and the value 1/(2 (2^{d/2} c1 + 1)) for which
/// the pigeonhole count over (rho^2, 2 rho^2) goes through with N(sqrt(2) rho) <= c1 2^{d/2} rho^d.
double c2_closed_form(int d, double c1);
double c2_pigeonhole(int d, double c1);

struct GapResult {
  double rho = 0;
  int d = 2;
  double energy = 0;
  double halfwidth = 0;
  double lo = 0, hi = 0;  // the eigenvalue-free interval
  bool reverified = false;
  std::optional<double> c1;
  double c2_closed = 0;      // reported, not asserted
  double c2_required = 0;    // c2_pigeonhole(c1) rho^{2-d}, asserted when c1 is given
  bool c2_satisfied = true;

  nlohmann::json to_json() const;
};

/// Midpoint of the largest eigenvalue-free subinterval of (rho^2, 2 rho^2).
GapResult find_gap_energy(double rho, int d, std::optional<double> c1 = std::nullopt,
                          unsigned prec = kDefaultPrecisionBits);
GapResult find_gap_energy(double rho, const SpectrumTable& table, std::optional<double> c1 = std::nullopt);

/// Independent rescan: true when no eigenvalue of `table` lies in (lo, hi).
bool interval_is_free(const SpectrumTable& table, double lo, double hi);

/// Distance from E to the spectrum; the table must extend past E by at least that distance.
Real distance_to_spectrum(const SpectrumTable& table, const Real& energy);

struct ResolventBudget {
  Real energy;
  Real dist_free;
  XReal eps;
  XReal q;  // 1/dist + 1/(dist - eps)

  nlohmann::json to_json() const;
};

/// Throws PreconditionError when dist <= eps.
ResolventBudget resolvent_budget(const Real& energy, const XReal& eps, const SpectrumTable& table);

/// Pigeonhole check over (rho^2, 2 rho^2): k disjoint intervals of length 2 c2 rho^{2-d},
/// and the number of eigenvalues there.
struct PigeonholeReport {
  long k = 0;
  long count = 0;          // eigenvalues in (rho^2, 2 rho^2) with multiplicity
  long n_rho = 0;          // N(rho)
  bool fits = false;       // k intervals fit inside the window
  bool empty_interval = false;  // some packed interval holds no eigenvalue
};
PigeonholeReport pigeonhole(const SpectrumTable& table, double rho, double c2);

}  // namespace dtn::spectrum
