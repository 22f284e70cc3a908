#include "dtn/xreal.hpp"

#include "dtn/errors.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace dtn {

namespace bmp = boost::multiprecision;

namespace {

Real ln2() {
  Real r;
  mpfr_const_log2(r.backend().data(), MPFR_RNDN);
  return r;
}

Real ln10() { return bmp::log(Real(10)); }

}  // namespace

XReal::XReal(double x, unsigned precision_bits) : precision_bits_(precision_bits) {
  ScopedPrecision guard(precision_bits_);
  if (x == 0.0 || std::isnan(x)) {
    if (std::isnan(x)) throw DomainError("XReal: NaN");
    sign_ = 0;
    log_mag_ = 0;
    return;
  }
  if (std::isinf(x)) throw DomainError("XReal: infinite value");
  sign_ = x > 0 ? 1 : -1;
  log_mag_ = bmp::log(Real(std::fabs(x)));
}

XReal::XReal(const Real& x) {
  precision_bits_ = static_cast<unsigned>(std::ceil(x.precision() / 0.30102999566398120));
  ScopedPrecision guard(precision_bits_);
  if (bmp::isnan(x)) throw DomainError("XReal: NaN");
  if (x == 0) {
    sign_ = 0;
    log_mag_ = 0;
    return;
  }
  sign_ = x > 0 ? 1 : -1;
  log_mag_ = bmp::log(bmp::abs(x));
}

XReal XReal::zero(unsigned precision_bits) {
  XReal z;
  z.precision_bits_ = precision_bits;
  return z;
}

XReal XReal::from_log(int sign, const Real& log_mag) {
  XReal r;
  r.precision_bits_ = static_cast<unsigned>(std::ceil(log_mag.precision() / 0.30102999566398120));
  r.sign_ = sign > 0 ? 1 : (sign < 0 ? -1 : 0);
  r.log_mag_ = r.sign_ == 0 ? Real(0) : log_mag;
  return r;
}

XReal XReal::from_log2(int sign, double log2_mag, unsigned precision_bits) {
  ScopedPrecision guard(precision_bits);
  XReal r = from_log(sign, Real(log2_mag) * ln2());
  r.precision_bits_ = precision_bits;
  return r;
}

double XReal::log2_abs() const {
  if (sign_ == 0) return -std::numeric_limits<double>::infinity();
  ScopedPrecision guard(precision_bits_);
  return dtn::to_double(log_mag_ / ln2());
}

double XReal::log10_abs() const {
  if (sign_ == 0) return -std::numeric_limits<double>::infinity();
  ScopedPrecision guard(precision_bits_);
  return dtn::to_double(log_mag_ / ln10());
}

double XReal::to_double() const {
  if (sign_ == 0) return 0.0;
  ScopedPrecision guard(precision_bits_);
  // exp of the high-precision log, then a single rounding to double.
  Real v = bmp::exp(log_mag_);
  return sign_ * dtn::to_double(v);
}

Real XReal::to_real() const {
  ScopedPrecision guard(precision_bits_);
  if (sign_ == 0) return Real(0);
  Real v = bmp::exp(log_mag_);
  return sign_ > 0 ? v : Real(-v);
}

XReal XReal::abs() const {
  XReal r = *this;
  if (r.sign_ < 0) r.sign_ = 1;
  return r;
}

XReal XReal::operator-() const {
  XReal r = *this;
  r.sign_ = -r.sign_;
  return r;
}

XReal& XReal::operator+=(const XReal& o) {
  const unsigned bits = std::max(precision_bits_, o.precision_bits_);
  if (o.sign_ == 0) {
    precision_bits_ = bits;
    return *this;
  }
  if (sign_ == 0) {
    *this = o;
    precision_bits_ = bits;
    return *this;
  }
  ScopedPrecision guard(bits);
  const bool this_larger = log_mag_ >= o.log_mag_;
  const Real& hi = this_larger ? log_mag_ : o.log_mag_;
  const Real& lo = this_larger ? o.log_mag_ : log_mag_;
  const int hi_sign = this_larger ? sign_ : o.sign_;
  Real gap = lo - hi;  // <= 0
  Real result;
  if (sign_ == o.sign_) {
    result = hi + bmp::log1p(bmp::exp(gap));
  } else {
    if (gap == 0) {
      sign_ = 0;
      log_mag_ = 0;
      precision_bits_ = bits;
      return *this;
    }
    result = hi + bmp::log1p(-bmp::exp(gap));
  }
  sign_ = hi_sign;
  log_mag_ = result;
  precision_bits_ = bits;
  return *this;
}

XReal& XReal::operator-=(const XReal& o) { return *this += -o; }

XReal& XReal::operator*=(const XReal& o) {
  const unsigned bits = std::max(precision_bits_, o.precision_bits_);
  ScopedPrecision guard(bits);
  precision_bits_ = bits;
  if (sign_ == 0 || o.sign_ == 0) {
    sign_ = 0;
    log_mag_ = 0;
    return *this;
  }
  sign_ *= o.sign_;
  log_mag_ = log_mag_ + o.log_mag_;
  return *this;
}

XReal& XReal::operator/=(const XReal& o) {
  if (o.sign_ == 0) throw DomainError("XReal: division by zero");
  const unsigned bits = std::max(precision_bits_, o.precision_bits_);
  ScopedPrecision guard(bits);
  precision_bits_ = bits;
  if (sign_ == 0) return *this;
  sign_ *= o.sign_;
  log_mag_ = log_mag_ - o.log_mag_;
  return *this;
}

bool operator==(const XReal& a, const XReal& b) {
  if (a.sign_ != b.sign_) return false;
  return a.sign_ == 0 || a.log_mag_ == b.log_mag_;
}

std::partial_ordering operator<=>(const XReal& a, const XReal& b) {
  if (a.sign_ != b.sign_) return a.sign_ <=> b.sign_;
  if (a.sign_ == 0) return std::partial_ordering::equivalent;
  auto mag = a.log_mag_ < b.log_mag_   ? std::partial_ordering::less
             : a.log_mag_ > b.log_mag_ ? std::partial_ordering::greater
                                       : std::partial_ordering::equivalent;
  if (a.sign_ > 0) return mag;
  if (mag == std::partial_ordering::less) return std::partial_ordering::greater;
  if (mag == std::partial_ordering::greater) return std::partial_ordering::less;
  return mag;
}

XReal XReal::pow(const Real& p) const {
  if (p == 0) {
    XReal one = XReal::from_log(1, Real(0));
    one.precision_bits_ = precision_bits_;
    return one;
  }
  if (sign_ == 0) {
    if (p < 0) throw DomainError("XReal: zero to a negative power");
    return *this;
  }
  ScopedPrecision guard(precision_bits_);
  XReal r;
  r.precision_bits_ = precision_bits_;
  r.sign_ = 1;
  r.log_mag_ = log_mag_ * p;
  return r;
}

XReal XReal::sqrt() const {
  if (sign_ < 0) throw DomainError("XReal: sqrt of a negative value");
  ScopedPrecision guard(precision_bits_);
  return pow(Real(0.5));
}

nlohmann::json XReal::to_json() const {
  nlohmann::json j;
  j["sign"] = sign_;
  if (sign_ == 0) {
    j["log10_magnitude"] = nullptr;
  } else {
    j["log10_magnitude"] = log10_abs();
  }
  return j;
}

XReal XReal::from_json(const nlohmann::json& j, unsigned precision_bits) {
  const int s = j.at("sign").get<int>();
  if (s == 0 || j.at("log10_magnitude").is_null()) return zero(precision_bits);
  ScopedPrecision guard(precision_bits);
  XReal r = from_log(s, Real(j.at("log10_magnitude").get<double>()) * ln10());
  r.precision_bits_ = precision_bits;
  return r;
}

std::string XReal::str(int digits) const {
  if (sign_ == 0) return "0";
  std::ostringstream os;
  ScopedPrecision guard(precision_bits_);
  // mantissa * 10^e with e = floor(log10|x|)
  Real l10 = log_mag_ / ln10();
  Real e = bmp::floor(l10);
  Real mant = bmp::pow(Real(10), l10 - e);
  os << (sign_ < 0 ? "-" : "") << mant.str(digits, std::ios_base::fixed) << "e" << e.convert_to<long long>();
  return os.str();
}

XReal max(const XReal& a, const XReal& b) { return (a < b) ? b : a; }

}  // namespace dtn
