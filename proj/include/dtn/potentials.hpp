#pragma once

#include "dtn/real.hpp"
#include "dtn/xreal.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <vector>

namespace dtn::potentials {

/// Closed disk B(center, radius) in the plane of (r_1, |x'|); must sit inside
/// B(0, 1/3) intersected with {x_1 > 1/4}.
struct BumpSpec {
  double c1 = 0.29;
  double c2 = 0.0;
  double radius = 0.03;

  /// Throws ConfigError when the support constraints fail.
  void validate() const;
  /// Support of r -> phi(r, 0): c1 -+ sqrt(radius^2 - c2^2); empty when |c2| >= radius.
  double support_lo() const;
  double support_hi() const;
  bool profile_empty() const { return std::fabs(c2) >= radius; }

  nlohmann::json to_json() const;
  static BumpSpec from_json(const nlohmann::json& j);
};

/// exp(1 - 1/(1 - |q - c|^2 / radius^2)) inside the disk, 0 outside; equals 1 at the center.
double bump_phi(const BumpSpec& b, double q1, double q2);
Real bump_phi(const BumpSpec& b, const Real& q1, const Real& q2);

/// v(x) = eps e^{i n theta} phi(r_1, |x'|) with eps = n^{-m} (or an explicit override).
struct PotentialVnm {
  long n = 1;
  int m = 1;
  XReal eps;
  BumpSpec bump;
  int d = 2;
  /// e^{-i n theta} instead of e^{i n theta}.
  bool conjugated = false;

  static PotentialVnm make(long n, int m, const BumpSpec& bump = {}, int d = 2,
                           unsigned prec = kDefaultPrecisionBits);
  /// Same shape with amplitude eps (eps = 0 gives the zero potential).
  static PotentialVnm with_amplitude(long n, int m, const XReal& eps, const BumpSpec& bump = {}, int d = 2);

  PotentialVnm conjugate() const;
  /// Signed frequency shift +n, or -n for the conjugate.
  long shift() const { return conjugated ? -n : n; }
  /// sup |v| = eps.
  const XReal& sup_norm() const { return eps; }
};

/// v at a point of R^d (x.size() == d); r_1 = |(x_1, x_2)|, theta = atan2(x_2, x_1).
std::complex<double> v_nm_eval(const PotentialVnm& v, const std::vector<double>& x);

/// phi(r, 0), the radial factor seen by the d = 2 mode recursion, at each r.
std::vector<Real> radial_profile(const PotentialVnm& v, const std::vector<Real>& r);
Real radial_profile(const PotentialVnm& v, const Real& r);

struct CmEstimate {
  double value = 0;        ///< max over sample points and |gamma| <= order of |d^gamma v|
  int order = 0;
  int samples = 0;         ///< per axis
  std::vector<double> per_order;  ///< max |d^gamma v| for each exact order |gamma|
};

/// Max of the Cartesian derivatives of total order <= `order` over a samples x samples grid
/// covering the bump support. Derivatives are exact Taylor coefficients of
/// eps ((x_1 + i x_2)/r)^n phi(r) computed with truncated bivariate series arithmetic.
CmEstimate cm_norm_estimate(const PotentialVnm& v, int order, int samples = 201);

}  // namespace dtn::potentials
