#pragma once

#include "dtn/real.hpp"

#include <nlohmann/json.hpp>

#include <compare>
#include <string>

namespace dtn {

/// Log-domain real: sign in {-1, 0, +1} and the natural log of the magnitude, carried
/// at a fixed number of mantissa bits. Used for quantities such as 2^{-n/4} or
/// matrix elements near 1e-700 that are far outside the double range.
class XReal {
 public:
  XReal() = default;  // zero
  explicit XReal(double x, unsigned precision_bits = kDefaultPrecisionBits);
  explicit XReal(const Real& x);

  static XReal zero(unsigned precision_bits = kDefaultPrecisionBits);
  static XReal from_log(int sign, const Real& log_mag);
  static XReal from_log2(int sign, double log2_mag, unsigned precision_bits = kDefaultPrecisionBits);

  int sign() const { return sign_; }
  bool is_zero() const { return sign_ == 0; }
  const Real& log_mag() const { return log_mag_; }
  unsigned precision_bits() const { return precision_bits_; }

  /// log2|x|, -inf for zero.
  double log2_abs() const;
  double log10_abs() const;
  /// Nearest double; underflows to +-0 and overflows to +-inf outside the double range.
  double to_double() const;
  /// Value as a `Real` at this value's precision (MPFR's exponent range covers every
  /// magnitude that occurs here).
  Real to_real() const;

  XReal abs() const;
  XReal operator-() const;
  XReal& operator+=(const XReal& o);
  XReal& operator-=(const XReal& o);
  XReal& operator*=(const XReal& o);
  XReal& operator/=(const XReal& o);

  friend XReal operator+(XReal a, const XReal& b) { return a += b; }
  friend XReal operator-(XReal a, const XReal& b) { return a -= b; }
  friend XReal operator*(XReal a, const XReal& b) { return a *= b; }
  friend XReal operator/(XReal a, const XReal& b) { return a /= b; }

  friend bool operator==(const XReal& a, const XReal& b);
  friend std::partial_ordering operator<=>(const XReal& a, const XReal& b);

  /// |x|^p for real p (x^0 = 1, 0^p = 0 for p > 0).
  XReal pow(const Real& p) const;
  XReal sqrt() const;

  /// (sign, log10_magnitude) pair; zero serializes with log10_magnitude = null.
  nlohmann::json to_json() const;
  static XReal from_json(const nlohmann::json& j, unsigned precision_bits = kDefaultPrecisionBits);

  std::string str(int digits = 12) const;

 private:
  int sign_ = 0;
  Real log_mag_{0};
  unsigned precision_bits_ = kDefaultPrecisionBits;
};

/// max(a, b) by value.
XReal max(const XReal& a, const XReal& b);

}  // namespace dtn
