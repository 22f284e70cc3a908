#include "dtn/sphere_basis.hpp"

#include "dtn/errors.hpp"

#include <cmath>
#include <numbers>

namespace dtn::basis {

namespace {

// C(n, k) for k >= 0; zero when n < k (which covers negative n).
long binom(long n, long k) {
  if (k < 0 || n < k) return 0;
  k = std::min(k, n - k);
  long r = 1;
  for (long i = 1; i <= k; ++i) {
    long num;
    if (__builtin_mul_overflow(r, n - k + i, &num)) throw DomainError("dim_harmonics: overflow");
    r = num / i;
  }
  return r;
}

}  // namespace

long dim_harmonics(int d, long j) {
  if (d < 2) throw DomainError("dim_harmonics: d must be >= 2");
  if (j < 0) throw DomainError("dim_harmonics: j must be >= 0");
  return binom(j + d - 1, d - 1) - binom(j + d - 3, d - 1);
}

ModeIndex ModeIndex::make(int d, long j, long p) {
  if (d < 2 || j < 0) throw DomainError("ModeIndex: need d >= 2 and j >= 0");
  if (p < 1 || p > dim_harmonics(d, j)) throw DomainError("ModeIndex: p out of range");
  return ModeIndex{d, j, p};
}

ModeIndex ModeIndex::from_frequency(long freq) {
  if (freq >= 0) return ModeIndex{2, freq, 1};
  return ModeIndex{2, -freq, 2};
}

long ModeIndex::frequency() const {
  if (d != 2) throw UnsupportedError("ModeIndex::frequency: d = 2 only");
  return p == 2 ? -j : j;
}

Complex fourier_mode(long freq, double theta) {
  return std::polar(1.0 / std::sqrt(2 * std::numbers::pi), static_cast<double>(freq) * theta);
}

double CoefVector::l2_norm() const { return sobolev_norm(*this, 0.0); }

double sobolev_norm(const CoefVector& c, double sigma) {
  double s = 0;
  for (const auto& [k, v] : c.entries) s += std::pow(1.0 + static_cast<double>(k.j), 2 * sigma) * std::norm(v);
  return std::sqrt(s);
}

LogComplex LogComplex::from_real(const Real& x) { return from_xreal(XReal(x)); }

LogComplex LogComplex::from_xreal(const XReal& x) {
  LogComplex c;
  c.magnitude = x.abs();
  c.phase = x.sign() < 0 ? std::numbers::pi : 0.0;
  return c;
}

Complex LogComplex::to_complex() const { return std::polar(magnitude.to_double(), phase); }

const LogComplex* DtnMatrix::find(const ModeIndex& row, const ModeIndex& col) const {
  auto it = entries.find({row, col});
  return it == entries.end() ? nullptr : &it->second;
}

nlohmann::json DtnMatrix::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [k, v] : entries) {
    nlohmann::json r;
    r["j1"] = k.first.j;
    r["p1"] = k.first.p;
    r["j2"] = k.second.j;
    r["p2"] = k.second.p;
    if (v.magnitude.is_zero()) {
      r["log10_mag"] = nullptr;
    } else {
      r["log10_mag"] = v.magnitude.log10_abs();
    }
    r["phase"] = v.phase;
    out.push_back(r);
  }
  return out;
}

DtnMatrix DtnMatrix::from_json(const nlohmann::json& j, int d, unsigned precision_bits) {
  DtnMatrix m;
  m.d = d;
  for (const auto& r : j) {
    LogComplex v;
    nlohmann::json mag = {{"sign", r.at("log10_mag").is_null() ? 0 : 1}, {"log10_magnitude", r.at("log10_mag")}};
    v.magnitude = XReal::from_json(mag, precision_bits);
    v.phase = r.at("phase").get<double>();
    m.set(ModeIndex{d, r.at("j1").get<long>(), r.at("p1").get<long>()},
          ModeIndex{d, r.at("j2").get<long>(), r.at("p2").get<long>()}, v);
  }
  return m;
}

XReal op_norm_sobolev_bound(const DtnMatrix& a, double sigma, int d) {
  if (a.entries.empty()) return XReal::zero();
  const unsigned bits = a.entries.begin()->second.magnitude.precision_bits();
  ScopedPrecision guard(bits);
  XReal best = XReal::zero(bits);
  const Real expo = Real(2 * sigma) + d;
  for (const auto& [k, v] : a.entries) {
    const long jm = std::max(k.first.j, k.second.j);
    XReal w = XReal(Real(1 + jm)).pow(expo) * v.magnitude;
    best = max(best, w);
  }
  return best * XReal(4.0, bits);
}

XReal op_norm_linf_bound(const DtnMatrix& a) {
  if (a.d != 2) throw UnsupportedError("op_norm_linf_bound: d = 2 only");
  XReal s = XReal::zero();
  for (const auto& [k, v] : a.entries) s += v.magnitude;
  return s;
}

}  // namespace dtn::basis
