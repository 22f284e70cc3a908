#include "dtn/potentials.hpp"

#include "dtn/errors.hpp"

#include <cmath>
#include <sstream>

namespace dtn::potentials {

namespace bmp = boost::multiprecision;

void BumpSpec::validate() const {
  std::ostringstream os;
  if (!(radius > 0)) {
    os << "bump radius must be positive (got " << radius << ")";
    throw ConfigError(os.str());
  }
  const double reach = std::hypot(c1, c2) + radius;
  if (!(reach < 1.0 / 3.0)) {
    os << "bump disk reaches |q| = " << reach << ", must stay below 1/3";
    throw ConfigError(os.str());
  }
  if (!(c1 - radius > 0.25)) {
    os << "bump disk reaches x_1 = " << c1 - radius << ", must stay above 1/4";
    throw ConfigError(os.str());
  }
}

double BumpSpec::support_lo() const {
  if (profile_empty()) return c1;
  return c1 - std::sqrt(radius * radius - c2 * c2);
}

double BumpSpec::support_hi() const {
  if (profile_empty()) return c1;
  return c1 + std::sqrt(radius * radius - c2 * c2);
}

nlohmann::json BumpSpec::to_json() const { return {{"center", {c1, c2}}, {"radius", radius}}; }

BumpSpec BumpSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("bump must be an object");
  for (const auto& [k, v] : j.items())
    if (k != "center" && k != "radius") throw ConfigError("unknown bump key '" + k + "'");
  BumpSpec b;
  if (j.contains("center")) {
    const auto& c = j.at("center");
    if (!c.is_array() || c.size() != 2) throw ConfigError("bump.center must be a two-element array");
    b.c1 = c[0].get<double>();
    b.c2 = c[1].get<double>();
  }
  if (j.contains("radius")) b.radius = j.at("radius").get<double>();
  b.validate();
  return b;
}

double bump_phi(const BumpSpec& b, double q1, double q2) {
  const double t = ((q1 - b.c1) * (q1 - b.c1) + (q2 - b.c2) * (q2 - b.c2)) / (b.radius * b.radius);
  if (t >= 1) return 0.0;
  return std::exp(1 - 1 / (1 - t));
}

Real bump_phi(const BumpSpec& b, const Real& q1, const Real& q2) {
  const Real c1(b.c1), c2(b.c2), rad(b.radius);
  const Real t = ((q1 - c1) * (q1 - c1) + (q2 - c2) * (q2 - c2)) / (rad * rad);
  if (t >= 1) return Real(0);
  return bmp::exp(1 - 1 / (1 - t));
}

PotentialVnm PotentialVnm::make(long n, int m, const BumpSpec& bump, int d, unsigned prec) {
  if (n < 1) throw PreconditionError("PotentialVnm: n must be >= 1");
  if (m < 0) throw PreconditionError("PotentialVnm: m must be >= 0");
  ScopedPrecision guard(prec);
  return with_amplitude(n, m, XReal(Real(n)).pow(Real(-m)), bump, d);
}

PotentialVnm PotentialVnm::with_amplitude(long n, int m, const XReal& eps, const BumpSpec& bump, int d) {
  if (n < 1) throw PreconditionError("PotentialVnm: n must be >= 1");
  if (d < 2) throw PreconditionError("PotentialVnm: d must be >= 2");
  if (eps.sign() < 0) throw PreconditionError("PotentialVnm: amplitude must be >= 0");
  bump.validate();
  PotentialVnm v;
  v.n = n;
  v.m = m;
  v.eps = eps;
  v.bump = bump;
  v.d = d;
  return v;
}

PotentialVnm PotentialVnm::conjugate() const {
  PotentialVnm v = *this;
  v.conjugated = !conjugated;
  return v;
}

std::complex<double> v_nm_eval(const PotentialVnm& v, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != v.d) throw PreconditionError("v_nm_eval: point dimension mismatch");
  const double r1 = std::hypot(x[0], x[1]);
  double tail = 0;
  for (int i = 2; i < v.d; ++i) tail += x[i] * x[i];
  const double phi = bump_phi(v.bump, r1, std::sqrt(tail));
  if (phi == 0 || v.eps.is_zero()) return {0.0, 0.0};
  const double theta = std::atan2(x[1], x[0]);
  return std::polar(v.eps.to_double() * phi, static_cast<double>(v.shift()) * theta);
}

Real radial_profile(const PotentialVnm& v, const Real& r) { return bump_phi(v.bump, r, Real(0)); }

std::vector<Real> radial_profile(const PotentialVnm& v, const std::vector<Real>& r) {
  if (v.d != 2) throw UnsupportedError("radial_profile: d = 2 only");
  std::vector<Real> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = radial_profile(v, r[i]);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using C = std::complex<double>;

// Truncated bivariate Taylor series sum c_ab dx^a dy^b, a + b <= K.
class Jet {
 public:
  explicit Jet(int order) : k_(order), c_((order + 1) * (order + 2) / 2, C(0)) {}
  static Jet constant(int order, C v) {
    Jet j(order);
    j.at(0, 0) = v;
    return j;
  }
  static Jet variable(int order, double x0, int axis) {
    Jet j = constant(order, x0);
    if (order >= 1) (axis == 0 ? j.at(1, 0) : j.at(0, 1)) = 1.0;
    return j;
  }

  int order() const { return k_; }
  C& at(int a, int b) { return c_[index(a, b)]; }
  C at(int a, int b) const { return c_[index(a, b)]; }

  friend Jet operator+(Jet x, const Jet& y) {
    for (std::size_t i = 0; i < x.c_.size(); ++i) x.c_[i] += y.c_[i];
    return x;
  }
  friend Jet operator-(Jet x, const Jet& y) {
    for (std::size_t i = 0; i < x.c_.size(); ++i) x.c_[i] -= y.c_[i];
    return x;
  }
  friend Jet operator*(Jet x, C s) {
    for (auto& v : x.c_) v *= s;
    return x;
  }
  friend Jet operator*(const Jet& x, const Jet& y) {
    Jet z(x.k_);
    for (int a1 = 0; a1 <= x.k_; ++a1)
      for (int b1 = 0; a1 + b1 <= x.k_; ++b1) {
        const C u = x.at(a1, b1);
        if (u == C(0)) continue;
        for (int a2 = 0; a1 + b1 + a2 <= x.k_; ++a2)
          for (int b2 = 0; a1 + b1 + a2 + b2 <= x.k_; ++b2) z.at(a1 + a2, b1 + b2) += u * y.at(a2, b2);
      }
    return z;
  }

  // f(x) from the Taylor coefficients f^(k)(x0)/k!, k = 0..K, of f at the constant term.
  Jet compose(const std::vector<C>& taylor) const {
    Jet delta = *this;
    delta.at(0, 0) = 0;
    Jet out = constant(k_, taylor[0]);
    Jet power = constant(k_, 1.0);
    for (int k = 1; k <= k_; ++k) {
      power = power * delta;
      out = out + power * taylor[k];
    }
    return out;
  }

 private:
  int index(int a, int b) const {
    const int t = a + b;
    return t * (t + 1) / 2 + b;
  }
  int k_;
  std::vector<C> c_;
};

Jet jet_exp(const Jet& x) {
  std::vector<C> t(x.order() + 1);
  const C e = std::exp(x.at(0, 0));
  double fact = 1;
  for (int k = 0; k <= x.order(); ++k) {
    if (k > 0) fact *= k;
    t[k] = e / fact;
  }
  return x.compose(t);
}

Jet jet_recip(const Jet& x) {
  std::vector<C> t(x.order() + 1);
  const C inv = 1.0 / x.at(0, 0);
  C p = inv;
  for (int k = 0; k <= x.order(); ++k) {
    t[k] = (k % 2 == 0 ? 1.0 : -1.0) * p;
    p *= inv;
  }
  return x.compose(t);
}

Jet jet_sqrt(const Jet& x) {
  std::vector<C> t(x.order() + 1);
  const C x0 = x.at(0, 0);
  C binom = 1.0;  // C(1/2, k)
  for (int k = 0; k <= x.order(); ++k) {
    if (k > 0) binom *= (0.5 - (k - 1)) / k;
    t[k] = binom * std::pow(x0, 0.5 - k);
  }
  return x.compose(t);
}

Jet jet_pow(Jet base, long e) {
  Jet out = Jet::constant(base.order(), 1.0);
  while (e > 0) {
    if (e & 1) out = out * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return out;
}

}  // namespace

CmEstimate cm_norm_estimate(const PotentialVnm& v, int order, int samples) {
  if (v.d != 2) throw UnsupportedError("cm_norm_estimate: d = 2 only");
  if (order < 0) throw PreconditionError("cm_norm_estimate: order must be >= 0");
  if (samples < 3) throw PreconditionError("cm_norm_estimate: need at least 3 samples per axis");
  CmEstimate est;
  est.order = order;
  est.samples = samples;
  est.per_order.assign(order + 1, 0.0);
  const double eps = v.eps.to_double();
  if (eps == 0) return est;
  const BumpSpec& b = v.bump;
  const double lo1 = b.c1 - b.radius, lo2 = b.c2 - b.radius;
  const double step = 2 * b.radius / (samples - 1);
  std::vector<double> fact(order + 1, 1.0);
  for (int k = 1; k <= order; ++k) fact[k] = fact[k - 1] * k;
  const double sgn = v.conjugated ? -1.0 : 1.0;
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < samples; ++j) {
      const double x1 = lo1 + i * step, x2 = lo2 + j * step;
      const double r0 = std::hypot(x1, x2);
      const double t0 = ((r0 - b.c1) * (r0 - b.c1) + b.c2 * b.c2) / (b.radius * b.radius);
      if (t0 >= 1) continue;
      const Jet X = Jet::variable(order, x1, 0);
      const Jet Y = Jet::variable(order, x2, 1);
      const Jet r = jet_sqrt(X * X + Y * Y);
      const Jet z = X + Y * C(0, sgn);
      const Jet phase = jet_pow(z * jet_recip(r), v.n);
      const Jet dr = r - Jet::constant(order, b.c1);
      const Jet t = (dr * dr + Jet::constant(order, b.c2 * b.c2)) * C(1 / (b.radius * b.radius));
      const Jet phi = jet_exp(Jet::constant(order, 1.0) - jet_recip(Jet::constant(order, 1.0) - t));
      const Jet val = phase * phi * C(eps);
      for (int a = 0; a <= order; ++a)
        for (int c = 0; a + c <= order; ++c) {
          const double mag = std::abs(val.at(a, c)) * fact[a] * fact[c];
          est.per_order[a + c] = std::max(est.per_order[a + c], mag);
        }
    }
  }
  for (double x : est.per_order) est.value = std::max(est.value, x);
  return est;
}

}  // namespace dtn::potentials
