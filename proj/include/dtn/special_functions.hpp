#pragma once

#include "dtn/real.hpp"
#include "dtn/xreal.hpp"

#include <string>
#include <vector>

namespace dtn::special {

/// Bessel order alpha = j + (d-2)/2, stored as the integer 2*alpha.
class BesselOrder {
 public:
  constexpr BesselOrder() = default;
  /// alpha = j + (d - 2)/2.
  static BesselOrder from_degree(int j, int d);
  /// alpha must be a nonnegative integer or half-integer.
  static BesselOrder from_double(double alpha);
  static constexpr BesselOrder from_twice(int twice_alpha) { return BesselOrder(twice_alpha); }

  int twice() const { return twice_alpha_; }
  double value() const { return 0.5 * twice_alpha_; }
  Real real() const { return Real(twice_alpha_) / 2; }
  bool is_integer() const { return twice_alpha_ % 2 == 0; }
  BesselOrder plus(int k) const { return BesselOrder(twice_alpha_ + 2 * k); }

 private:
  constexpr explicit BesselOrder(int twice_alpha) : twice_alpha_(twice_alpha) {}
  int twice_alpha_ = 0;
};

/// Gamma(x) for x > 0 as a log-domain value; exact integer and half-integer paths.
XReal gamma(const Real& x, unsigned prec = kDefaultPrecisionBits);
XReal gamma(double x, unsigned prec = kDefaultPrecisionBits);

/// J_alpha(z) by the power series, truncated once the next term falls below
/// 2^-prec times the running partial sum.
XReal bessel_j(BesselOrder order, const Real& z, unsigned prec = kDefaultPrecisionBits);
XReal bessel_j_prime(BesselOrder order, const Real& z, unsigned prec = kDefaultPrecisionBits);
/// Y_alpha(z), z > 0. Half-integer orders use the J_{-alpha} quotient directly; integer
/// orders use symmetric order offsets n +- h, h = 2^-10, 2^-11, ..., with Richardson
/// extrapolation in h^2.
XReal bessel_y(BesselOrder order, const Real& z, unsigned prec = kDefaultPrecisionBits);
XReal bessel_y_prime(BesselOrder order, const Real& z, unsigned prec = kDefaultPrecisionBits);

struct BesselValues {
  XReal j, jp, y, yp;
};
/// J, J', Y, Y' at one point; Y and Y' share a single evaluation.
BesselValues bessel_values(BesselOrder order, const Real& z, unsigned prec = kDefaultPrecisionBits);

/// First `count` positive zeros of J_alpha, each bracketed by a sign change on a scan
/// grid and bisected to relative width 2^-(prec-8).
std::vector<Real> bessel_j_zeros(BesselOrder order, int count, unsigned prec = kDefaultPrecisionBits);
/// All positive zeros of J_alpha strictly below `xmax`.
std::vector<Real> bessel_j_zeros_below(BesselOrder order, const Real& xmax,
                                       unsigned prec = kDefaultPrecisionBits);

struct BoundCheck {
  std::string name;
  /// Smallest distance to the violated side, in units of the bound's scale (> 0 passes).
  double worst_margin = 0;
  double worst_z = 0;
  bool passed = false;
};

struct SmallnessConditions {
  int n0 = 0;
  bool n0_above_3 = false;
  double exp_condition = 0;      ///< exp(rho^2/4/(n0+1)) - 1, must be <= 1/2
  double combined_condition = 0; ///< third line of the n0 conditions, must be <= 1/2
  bool passed = false;
};

struct BesselBoundsReport {
  double rho = 0;
  int d = 0;
  int n = 0;
  double alpha = 0;
  int samples = 0;
  std::vector<BoundCheck> checks;  ///< J, J', Y, Y' sandwich/upper bounds
  SmallnessConditions conditions;
  bool passed = false;
};

/// Evaluates the small-argument sandwich bounds for J_alpha, J'_alpha, Y_alpha, Y'_alpha
/// with alpha = n + (d-2)/2 on `samples` real points z in (0, rho], and the three
/// smallness conditions for n0 = [10(rho+1)^2] - 1. Requires n >= 10(rho+1)^2.
BesselBoundsReport certify_bessel_bounds(double rho, int d, int n, unsigned prec = kDefaultPrecisionBits,
                                         int samples = 64);

/// n0 conditions only (exposed for reporting and tests).
SmallnessConditions check_smallness_conditions(double rho, int n0, unsigned prec = kDefaultPrecisionBits);

namespace detail {

/// Gamma and 1/Gamma at the current default precision; 1/Gamma vanishes at the poles.
Real gamma_real(const Real& x);
Real rgamma_real(const Real& x);

struct ValueDeriv {
  Real value;
  Real deriv;
};

/// J_nu(z) and J'_nu(z) for any real nu (negative and non-integer allowed), z >= 0,
/// accurate to the current default precision. Guard bits are raised automatically when
/// the alternating series cancels.
ValueDeriv bessel_j_series(const Real& nu, const Real& z);
/// Same, with 1/Gamma(nu+1) supplied by the caller.
ValueDeriv bessel_j_series(const Real& nu, const Real& z, const Real& rgamma_nu_plus_1);

/// Y_alpha(z), Y'_alpha(z) at the current default precision.
ValueDeriv bessel_y_pair(BesselOrder order, const Real& z);

/// J, J', Y, Y' for orders base, base+1, ..., base+count-1 at one argument z > 0.
/// J by the series per order; Y by forward recurrence from the two lowest orders,
/// which is stable because Y grows with the order.
struct Ladder {
  BesselOrder base;
  std::vector<Real> j, jp, y, yp;
};
Ladder bessel_ladder(BesselOrder base, int count, const Real& z);

}  // namespace detail
}  // namespace dtn::special
