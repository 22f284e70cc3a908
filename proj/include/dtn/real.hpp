#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <string>

namespace dtn {

/// Working high-precision scalar. Precision is carried per value; new values take the
/// process-wide default, which `ScopedPrecision` manages.
using Real = boost::multiprecision::mpfr_float;

constexpr unsigned kDefaultPrecisionBits = 256;
constexpr unsigned kPipelinePrecisionBits = 512;

inline unsigned bits_to_digits10(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

inline unsigned current_precision_bits() {
  return static_cast<unsigned>(std::ceil(Real::default_precision() / 0.30102999566398120));
}

/// Sets the default precision of newly created `Real` values for the lifetime of the guard.
class ScopedPrecision {
 public:
  explicit ScopedPrecision(unsigned bits) : saved_(Real::default_precision()) {
    Real::default_precision(bits_to_digits10(bits));
  }
  ~ScopedPrecision() { Real::default_precision(saved_); }
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;

 private:
  unsigned saved_;
};

/// Re-rounds `x` to the current default precision.
inline Real at_current_precision(const Real& x) {
  Real y = x;
  y.precision(Real::default_precision());
  return y;
}

inline Real real_pi() {
  Real p;
  mpfr_const_pi(p.backend().data(), MPFR_RNDN);
  return p;
}

inline Real ldexp_real(const Real& x, long e) {
  Real y = x;
  mpfr_mul_2si(y.backend().data(), x.backend().data(), e, MPFR_RNDN);
  return y;
}

/// Exponent e with |x| in [2^(e-1), 2^e); x must be nonzero.
inline long exponent2(const Real& x) { return mpfr_get_exp(x.backend().data()); }

inline double to_double(const Real& x) { return x.convert_to<double>(); }

inline std::string to_string(const Real& x, int digits = 20) {
  return x.str(digits, std::ios_base::scientific);
}

}  // namespace dtn
