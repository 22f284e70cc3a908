#pragma once

#include "dtn/real.hpp"
#include "dtn/special_functions.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace dtn::radial {

/// R_j(k, r) = r^{-(d-2)/2} (Y_a(kr) J_a(k) - J_a(kr) Y_a(k)), a = j + (d-2)/2, E = k^2 > 0.
Real r_tilde(long j, int d, const Real& energy, const Real& r, unsigned prec = kDefaultPrecisionBits);
/// dR_j/dr at r = 1, which is k (Y'_a(k) J_a(k) - J'_a(k) Y_a(k)) = 2/pi.
Real r_tilde_deriv_at_1(long j, int d, const Real& energy, unsigned prec = kDefaultPrecisionBits);

/// log2 of |J_a(k)| / ((k/2)^a / Gamma(a+1)); solves at mode j are rejected once this
/// drops below -prec/2.
double eigen_margin_log2(special::BesselOrder order, const Real& k, const Real& j_at_k);
void check_not_eigenvalue(special::BesselOrder order, const Real& k, const Real& j_at_k, unsigned prec);

/// u'(1)/u(1) for the regular solution of -Δu = E u in mode (d, j): j at E = 0, otherwise
/// -(d-2)/2 + k J'_a(k)/J_a(k). Throws NearEigenvalueError when J_a(k) is too small.
Real free_dtn_eigenvalue(int d, long j, const Real& energy, unsigned prec = kDefaultPrecisionBits);

/// Sampled radial function on increasing nodes; `deriv_at_1` is the boundary derivative when
/// known.
struct RadialFunction {
  long j = 0;
  int d = 2;
  double energy = 0;
  std::vector<Real> r;
  std::vector<Real> values;
  Real deriv_at_1 = 0;
};

/// Composite Gauss-Legendre rule on [a, b] with spectral cumulative integration inside each
/// panel, so integrals from a to every node cost one small matrix product per panel.
class SupportRule {
 public:
  /// Nodes and weights at the current default precision.
  SupportRule(const Real& a, const Real& b, int panels, int per_panel);

  const Real& a() const { return a_; }
  const Real& b() const { return b_; }
  int panels() const { return panels_; }
  int per_panel() const { return per_panel_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Real>& nodes() const { return nodes_; }
  const std::vector<Real>& weights() const { return weights_; }

  Real integrate(const std::vector<Real>& f) const;
  /// out[i] = integral from a to nodes[i] of the panelwise interpolant of f.
  std::vector<Real> cumulative(const std::vector<Real>& f) const;
  /// Interpolant of f at x in [a, b], and its integral from a to x.
  Real interpolate(const std::vector<Real>& f, const Real& x) const;
  Real integral_to(const std::vector<Real>& f, const Real& x) const;

 private:
  int panel_of(const Real& x) const;
  // Legendre coefficients of f on panel p.
  std::vector<Real> coefficients(const std::vector<Real>& f, int p) const;

  Real a_, b_, width_;
  int panels_, per_panel_;
  std::vector<Real> ref_nodes_, ref_weights_;
  std::vector<Real> cum_;  // per_panel x per_panel, row-major, on [-1, 1]
  std::vector<Real> nodes_, weights_;
};

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration at the current precision.
void gauss_legendre(int n, std::vector<Real>& nodes, std::vector<Real>& weights);

/// Basis data for mode (d, j) at energy E on a support rule:
/// p(r) = r^{-(d-2)/2} J_a(kr) regular at 0, q(r) = R_j(k, r) vanishing at 1, and
/// C = r^{d-1}(p q' - p' q) = 2 J_a(k)/pi.
struct ModeData {
  long j = 0;
  int d = 2;
  special::BesselOrder order;
  Real k, jk, jpk, yk, ypk;
  Real wronskian;          // C
  Real dq1;                // q'(1)
  std::vector<Real> p, q;  // at rule nodes
  // Edge data for closed-form integrals outside [a, b] (argument derivatives, z = k r).
  Real p_a, pz_a, q_b, qz_b, qz_1;
};

/// Mode data for degrees 0..jmax at once; J per order by the series, Y by recurrence.
std::vector<ModeData> build_mode_table(int d, long jmax, const Real& energy, const SupportRule& rule,
                                       unsigned prec);
ModeData build_mode(int d, long j, const Real& energy, const SupportRule& rule, unsigned prec);

/// Solution of the sourced radial equation with u(1) = 0, restricted to the source support.
struct GreenSolution {
  std::vector<Real> u;      // at rule nodes
  Real du1;                 // u'(1)
  Real p_total, q_total;    // integrals of p g r^{d-1} and q g r^{d-1} over [a, b]
  std::vector<Real> g;      // source at the nodes
  std::vector<Real> p_cum, q_cum;
};

/// Variation of parameters for
///   -u'' - ((d-1)/r) u' + (j(j+d-2)/r^2) u - E u = g,  u regular at 0, u(1) = 0,
/// with g supported in the rule interval.
class GreenKernel {
 public:
  GreenKernel(std::shared_ptr<const ModeData> mode, std::shared_ptr<const SupportRule> rule);
  GreenKernel(int d, long j, const Real& energy, std::shared_ptr<const SupportRule> rule, unsigned prec);

  const ModeData& mode() const { return *mode_; }
  const SupportRule& rule() const { return *rule_; }

  GreenSolution apply(const std::vector<Real>& g_at_nodes) const;
  GreenSolution apply(const std::function<Real(const Real&)>& g) const;

  /// u at any r in (0, 1] (Bessel evaluations outside the node set).
  Real evaluate(const GreenSolution& s, const Real& r) const;

  /// Max over nodes of sum_j |K(r_i, r_j)| weight_j(x) w_j r_j^{d-1}: the sup-norm gain of
  /// g -> u restricted to the support when g = weight * f with |f| <= 1.
  Real row_sum_bound(const std::vector<Real>& weight) const;
  /// sup-norm gain of g -> u'(1) under the same scaling.
  Real boundary_gain(const std::vector<Real>& weight) const;

 private:
  std::shared_ptr<const ModeData> mode_;
  std::shared_ptr<const SupportRule> rule_;
};

/// Convenience wrapper: solve with a source given as a function on [a, b].
RadialFunction green_apply(int d, long j, const Real& energy, const std::function<Real(const Real&)>& g,
                           const Real& a, const Real& b, unsigned prec, int panels = 8, int per_panel = 24);

/// Logarithmic grid t = ln r on [t0, 0] for the finite-difference oracle.
struct FdGrid {
  double t0 = -11.512925464970229;  // ln 1e-5
  int size = 20001;
  double h() const { return -t0 / (size - 1); }
  double r(int i) const;
  static FdGrid for_degree(long jmax, int size);
};

struct FdSolution {
  std::vector<double> r, u;
  double du1 = 0;
};

/// Second-order finite differences in t = ln r for the same radial equation:
///   u_tt + (d-2) u_t - j(j+d-2) u + E r^2 u = -r^2 g,
/// regularity at r0 imposed through the two-term Frobenius ratio of r^j(1 - c1 r^2 + c2 r^4),
/// u(1) = boundary_value, u'(1) from a ghost node. No extrapolation.
FdSolution fd_solve_grid(int d, long j, double energy, const FdGrid& grid, const std::vector<double>& g,
                         double boundary_value);

/// fd_solve_grid on `size` and 2 size - 1 nodes, combined by Richardson extrapolation
/// (4 u_{h/2} - u_h) / 3 at the coarse nodes and for u'(1).
FdSolution fd_solve_mode(int d, long j, double energy, const std::function<double(double)>& g,
                         double boundary_value, int size = 20001);

}  // namespace dtn::radial
