#pragma once

#include "dtn/potentials.hpp"
#include "dtn/radial.hpp"
#include "dtn/sphere_basis.hpp"
#include "dtn/xreal.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace dtn::engine {

struct EngineOptions {
  unsigned prec = kDefaultPrecisionBits;
  int panels = 16;
  int per_panel = 24;
};

/// Shared data for all chain solves at one (E, v): the support rule, the bump at the nodes,
/// per-degree mode data for 0..jmax, and per-degree Green gains.
class ChainContext {
 public:
  ChainContext(const Real& energy, const potentials::PotentialVnm& v, long jmax, const EngineOptions& opt = {});

  const Real& energy() const { return energy_; }
  const potentials::PotentialVnm& potential() const { return v_; }
  const EngineOptions& options() const { return opt_; }
  long jmax() const { return jmax_; }
  const Real& eps() const { return eps_; }
  const radial::SupportRule& rule() const { return *rule_; }
  const std::vector<Real>& phi() const { return phi_; }
  const radial::ModeData& mode(long degree) const;
  const radial::GreenKernel& kernel(long degree) const;
  /// 2 x max row sum of |kernel| * phi for this degree.
  const Real& k_g(long degree) const;
  /// 2 x sup-norm gain of f -> u'(1) for sources phi * f.
  const Real& boundary_gain(long degree) const;
  /// max of k_g / boundary_gain over degrees from..jmax+1; stands for the sup over all degrees
  /// >= from when the gains are nonincreasing above k (see gains_monotone).
  const Real& k_g_beyond(long from) const;
  const Real& boundary_gain_beyond(long from) const;
  /// Both gains are nonincreasing in the degree on [ceil(k) + 1, jmax + 1].
  bool gains_monotone() const { return monotone_; }

 private:
  Real energy_;
  potentials::PotentialVnm v_;
  EngineOptions opt_;
  long jmax_;
  Real eps_;
  std::shared_ptr<const radial::SupportRule> rule_;
  std::vector<Real> phi_;
  std::vector<std::shared_ptr<const radial::ModeData>> modes_;
  std::vector<radial::GreenKernel> kernels_;
  std::vector<Real> kg_, bg_;            // degrees 0..jmax+1
  std::vector<Real> kg_suffix_, bg_suffix_;
  bool monotone_ = true;
};

struct ChainLevel {
  long freq = 0;
  std::vector<Real> w;  // at rule nodes
  Real dw1;             // w'(1)
  Real sup;             // max |w| over the nodes
  // integrals of p g r and q g r (levels >= 1), for closed forms outside the support
  Real p_total, q_total;
};

/// psi = sum_l w_l(r) e^{i (j2 + l s) theta}, s = +-n, with w_0 the free solution of boundary
/// value (2 pi)^{-1/2} and L_{|f_l|} w_l = -eps phi w_{l-1}, w_l(1) = 0.
struct ModeChain {
  long j2 = 0;
  long shift = 0;
  int l_max = 0;
  int stop = 0;               // last computed level
  bool stopped_early = false;
  bool table_limited = false; // l_max capped by the context's degree range
  std::vector<ChainLevel> levels;
  Real eps_kg;                // eps K_G over the chain's degrees and all later ones
  XReal tail;                 // bound on sum_{l > stop} |w_l'(1)|
  bool tail_finite = true;
};

/// Chain up to l_max levels; stops early once |w_l'(1)| < 2^{-prec/2} max_{1<=i<l} |w_i'(1)|
/// when `early_stop` is set.
ModeChain solve_boundary_mode(const ChainContext& ctx, long j2, int l_max, bool early_stop = true);

/// Entries a(f_l, j2) = sqrt(2 pi) w_l'(1), l >= 1, over |j2|, |f_l| <= degree_max.
basis::DtnMatrix dtn_diff_matrix(const ChainContext& ctx, long degree_max, std::vector<ModeChain>* chains = nullptr);

/// Convenience: builds the context (jmax = degree_max) and the matrix.
basis::DtnMatrix dtn_diff_matrix(const Real& energy, const potentials::PotentialVnm& v, long degree_max,
                                 const EngineOptions& opt = {});

/// True when every stored key has f1 - f2 a positive multiple of the shift.
bool structurally_triangular(const basis::DtnMatrix& a, long shift);

/// max relative |a_vbar(i, j) - conj(a_v(j, i))| over the union of keys (missing = 0).
double adjoint_mismatch(const basis::DtnMatrix& a_v, const basis::DtnMatrix& a_vbar);

struct Lemma31Report {
  long j2 = 0;
  double psi_norm = 0;
  double bound = 0;       // 1 + (N + |E|) Q, times ||f|| = 1
  double margin = 0;      // bound - psi_norm
  bool passed = false;
  nlohmann::json to_json() const;
};

/// ||psi||_{L2(D)}^2 = sum_l 2 pi int_0^1 |w_l|^2 r dr, with closed-form integrals
/// outside the support, compared to (1 + (N + |E|) Q) ||f||.
Lemma31Report verify_lemma31(const ChainContext& ctx, const ModeChain& chain, const XReal& q, const XReal& n_sup);

/// ||r^j e^{ij theta}/sqrt(2 pi)||_{L2(D)} = (2j+2)^{-1/2} <= 1, the E = 0, v = 0 analog.
double harmonic_extension_norm(long j);

struct Lemma32Report {
  double threshold = 0;    // 10 (1 + sqrt E)^2
  double constant = 1000;  // C(d)
  long checked = 0;
  long violations = 0;
  double worst_log2_ratio = 0;  // log2(|a| / bound), <= 0 passes
  std::map<long, double> scaled_by_jmax;  // max log2(|a| 2^{jmax}) per jmax
  bool passed = true;
  nlohmann::json to_json() const;
};

Lemma32Report verify_lemma32(const basis::DtnMatrix& a, const XReal& q, const XReal& n_sup, double energy, int d,
                             double constant = 1000);

/// sum_{j > degree_max} p_j C (1 + (N + E) Q) 2^{-j}; requires degree_max >= 10 (1 + sqrt E)^2.
XReal tail_bound(long degree_max, const XReal& q, const XReal& n_sup, double energy, int d, double constant = 1000);

struct DecayPoint {
  long n = 0;
  double bound_log2 = 0;  // log2 of op_norm_sobolev_bound
  double q = 0;
  long entries = 0;
};

struct DecayReport {
  double energy = 0;
  int m = 0;
  double sigma = 0;
  std::vector<DecayPoint> points;
  double slope = 0;              // least squares slope of bound_log2 against n
  double exp_slope = 0;          // slope after removing (2 sigma + d) log2(1 + n)
  double c2_fit = 0;             // log2 C2 fitted on the first point
  bool holdout_ok = false;       // remaining points satisfy bound <= C2 (1 + Q + E Q) 2^{-n/4}
  bool passed = false;           // slope <= -1/4
  nlohmann::json to_json() const;
};

/// Sobolev bound of the difference matrix at degree_max = n for each n.
DecayReport prop21_decay_check(double energy, int m, const std::vector<long>& n_list, double sigma,
                               const EngineOptions& opt = {}, const potentials::BumpSpec& bump = {});

struct SolveReport {
  double energy = 0;
  long n = 0;
  int m = 0;
  long degree_max = 0;
  unsigned precision_bits = 0;
  double quadrature_residual = 0;  // relative change of the largest entry under a coarser rule
  double residual_tolerance = 1e-6;
  double q = 0;
  double max_eps_kg = 0;
  long entries = 0;
  bool triangular = false;
  bool passed = false;
  nlohmann::json to_json() const;
};

/// Matrix plus report; the quadrature residual recomputes the largest entry with 8 fewer
/// nodes per panel.
SolveReport solve_report(const ChainContext& ctx, const basis::DtnMatrix& a, const std::vector<ModeChain>& chains,
                         double q, double tolerance = 1e-6);

/// Double-precision coupled-mode oracle: the chain recursion solved by fd_solve_grid on one
/// shared log grid (sizes `size` and 2 size - 1, Richardson-combined). Returns w_l'(1), l = 0..l_max.
std::vector<double> fd_chain_derivatives(double energy, const potentials::PotentialVnm& v, long j2, int l_max,
                                         int size = 20001);

/// Oracle matrix over the same key set as dtn_diff_matrix.
basis::DtnMatrix fd_diff_matrix(double energy, const potentials::PotentialVnm& v, long degree_max, int size = 20001);

}  // namespace dtn::engine
