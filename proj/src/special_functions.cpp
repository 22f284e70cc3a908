#include "dtn/special_functions.hpp"

#include "dtn/errors.hpp"

#include <gmp.h>

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>

namespace dtn::special {

namespace bmp = boost::multiprecision;

BesselOrder BesselOrder::from_degree(int j, int d) {
  if (j < 0 || d < 2) throw DomainError("BesselOrder: need j >= 0 and d >= 2");
  return BesselOrder(2 * j + d - 2);
}

BesselOrder BesselOrder::from_double(double alpha) {
  const double twice = 2.0 * alpha;
  if (alpha < 0 || twice != std::floor(twice) || twice > 1e9)
    throw DomainError("BesselOrder: alpha must be a nonnegative integer or half-integer");
  return BesselOrder(static_cast<int>(twice));
}

namespace detail {

namespace {

bool is_nonpositive_integer(const Real& x) { return x <= 0 && bmp::floor(x) == x; }

// Largest exponent over the kept precision at which the series cancellation is tolerated
// without a retry.
constexpr long kGuardBits = 32;

// RAII wrapper for scratch mpfr_t variables in the series loop.
struct Scratch {
  explicit Scratch(unsigned bits) { mpfr_init2(v, bits); }
  ~Scratch() { mpfr_clear(v); }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;
  mpfr_t v;
};

long exp_or_min(const mpfr_t x) { return mpfr_zero_p(x) ? LONG_MIN / 2 : mpfr_get_exp(x); }

ValueDeriv series_at(const Real& nu, const Real& z, const Real& rg, unsigned wp, long& cancel_bits) {
  ScopedPrecision guard(wp);
  const Real x = z / 2;
  const Real x2 = x * x;
  const Real lead = bmp::pow(x, nu) * rg;
  Scratch term(wp), sum(wp), dterm(wp), dsum(wp), a(wp), t(wp);
  mpfr_set(term.v, lead.backend().data(), MPFR_RNDN);
  mpfr_set(sum.v, term.v, MPFR_RNDN);
  mpfr_mul(dsum.v, term.v, nu.backend().data(), MPFR_RNDN);
  mpfr_add_ui(a.v, nu.backend().data(), 1, MPFR_RNDN);  // nu + m + 1
  long max_e = exp_or_min(term.v);
  long max_de = exp_or_min(dsum.v);
  const double nu_d = dtn::to_double(nu);
  const double x2_d = dtn::to_double(x2);
  const long lwp = static_cast<long>(wp);
  for (unsigned long m = 0;; ++m) {
    mpfr_mul(term.v, term.v, x2.backend().data(), MPFR_RNDN);
    mpfr_neg(term.v, term.v, MPFR_RNDN);
    mpfr_div_ui(term.v, term.v, m + 1, MPFR_RNDN);
    mpfr_div(term.v, term.v, a.v, MPFR_RNDN);
    mpfr_add(sum.v, sum.v, term.v, MPFR_RNDN);
    // d/dz of x^{nu+2m+2} carries the factor (nu + 2(m+1)) = a + (m+1)
    mpfr_add_ui(t.v, a.v, m + 1, MPFR_RNDN);
    mpfr_mul(dterm.v, term.v, t.v, MPFR_RNDN);
    mpfr_add(dsum.v, dsum.v, dterm.v, MPFR_RNDN);
    mpfr_add_ui(a.v, a.v, 1, MPFR_RNDN);
    const long et = exp_or_min(term.v), edt = exp_or_min(dterm.v);
    max_e = std::max(max_e, et);
    max_de = std::max(max_de, edt);
    const double md = static_cast<double>(m);
    const bool decreasing = (nu_d + md + 2 > 0) && x2_d < 0.5 * (md + 1) * (nu_d + md + 1);
    if (decreasing) {
      const bool sz = mpfr_zero_p(sum.v), dz = mpfr_zero_p(dsum.v);
      if (sz && dz) break;
      const bool small_v = sz ? mpfr_zero_p(term.v) : et <= exp_or_min(sum.v) - 1 - lwp;
      const bool small_d = dz ? mpfr_zero_p(dterm.v) : edt <= exp_or_min(dsum.v) - 1 - lwp;
      if (small_v && small_d) break;
    }
    if (m > 100000) throw PrecisionExhausted("bessel_j_series: no convergence");
  }
  long c = 0;
  if (!mpfr_zero_p(sum.v)) c = std::max(c, max_e - exp_or_min(sum.v));
  if (!mpfr_zero_p(dsum.v)) c = std::max(c, max_de - exp_or_min(dsum.v));
  cancel_bits = c;
  ValueDeriv out;
  mpfr_set(out.value.backend().data(), sum.v, MPFR_RNDN);
  mpfr_set(out.deriv.backend().data(), dsum.v, MPFR_RNDN);
  if (z > 0) {
    out.deriv /= z;
  } else {
    out.deriv = 0;
  }
  return out;
}

}  // namespace

Real gamma_real(const Real& x) {
  if (is_nonpositive_integer(x)) throw DomainError("gamma: pole at a nonpositive integer");
  return bmp::tgamma(x);
}

Real rgamma_real(const Real& x) {
  if (is_nonpositive_integer(x)) return Real(0);
  return 1 / bmp::tgamma(x);
}

ValueDeriv bessel_j_series(const Real& nu, const Real& z) {
  if (is_nonpositive_integer(nu) && nu != 0) {
    // J_{-n} = (-1)^n J_n
    const Real n = -nu;
    ValueDeriv r = bessel_j_series(n, z);
    if (bmp::fmod(n, 2) != 0) {
      r.value = -r.value;
      r.deriv = -r.deriv;
    }
    return r;
  }
  return bessel_j_series(nu, z, rgamma_real(nu + 1));
}

ValueDeriv bessel_j_series(const Real& nu, const Real& z, const Real& rgamma_nu_plus_1) {
  if (z < 0) throw DomainError("bessel_j: negative argument");
  const unsigned prec = current_precision_bits();
  if (z == 0) {
    ValueDeriv r;
    if (nu == 0) {
      r.value = 1;
      r.deriv = 0;
    } else if (nu > 0) {
      r.value = 0;
      if (nu == 1) {
        r.deriv = Real(1) / 2;
      } else if (nu > 1) {
        r.deriv = 0;
      } else {
        throw DomainError("bessel_j_prime: derivative is singular at z = 0 for order < 1");
      }
    } else {
      throw DomainError("bessel_j: singular at z = 0 for negative non-integer order");
    }
    return r;
  }
  long guard = kGuardBits;
  for (int attempt = 0; attempt < 6; ++attempt) {
    long cancel = 0;
    ValueDeriv r = series_at(nu, z, rgamma_nu_plus_1, prec + static_cast<unsigned>(guard), cancel);
    if (cancel <= guard - 16) {
      ValueDeriv out{at_current_precision(r.value), at_current_precision(r.deriv)};
      return out;
    }
    guard = cancel + 48;
    if (guard > 8L * prec + 4096) break;
  }
  throw PrecisionExhausted("bessel_j_series: cancellation exceeds the precision budget");
}

namespace {

// Y and Y' at non-integer order nu via the J_{+-nu} quotient, given cos(pi nu), sin(pi nu)
// and 1/Gamma(1+nu), 1/Gamma(1-nu).
ValueDeriv y_quotient(const Real& nu, const Real& z, const Real& c, const Real& s, const Real& rg_p,
                      const Real& rg_m) {
  const ValueDeriv jp = bessel_j_series(nu, z, rg_p);
  const ValueDeriv jm = bessel_j_series(Real(-nu), z, rg_m);
  ValueDeriv r;
  r.value = (jp.value * c - jm.value) / s;
  r.deriv = (jp.deriv * c - jm.deriv) / s;
  return r;
}

ValueDeriv y_integer_richardson(long n, const Real& z) {
  const unsigned prec = current_precision_bits();
  const unsigned wp = prec + 64;
  ScopedPrecision guard(wp);
  const Real pi = real_pi();
  const Real parity = (n % 2 == 0) ? Real(1) : Real(-1);
  constexpr int kMaxLevels = 48;
  std::vector<Real> tv, td;  // current Richardson row
  tv.reserve(kMaxLevels);
  td.reserve(kMaxLevels);
  const Real tol = ldexp_real(Real(1), -static_cast<long>(prec + 8));
  Real prev_v, prev_d;
  for (int i = 0; i < kMaxLevels; ++i) {
    const Real h = ldexp_real(Real(1), -(10 + i));
    const Real c = parity * bmp::cos(pi * h);
    const Real s = parity * bmp::sin(pi * h);
    // nu = n + h: cos(pi nu) = (-1)^n cos(pi h), sin(pi nu) = (-1)^n sin(pi h)
    // Gamma(1+h) Gamma(1-h) = pi h / sin(pi h); the four 1/Gamma values follow by
    // shifting the argument n steps.
    const Real g_p = bmp::tgamma(1 + h);
    const Real g_m = pi * h / (bmp::sin(pi * h) * g_p);
    Real prod_ph = 1, prod_mh = 1, prod_neg_ph = 1, prod_neg_mh = 1;
    for (long k = 1; k <= n; ++k) {
      prod_ph *= k + h;            // Gamma(n+1+h) = Gamma(1+h) prod (k+h)
      prod_mh *= k - h;            // Gamma(n+1-h) = Gamma(1-h) prod (k-h)
      prod_neg_ph *= 1 - h - k;    // Gamma(1-h) = Gamma(1-n-h) prod (1-h-k)
      prod_neg_mh *= 1 + h - k;    // Gamma(1+h) = Gamma(1-n+h) prod (1+h-k)
    }
    const ValueDeriv up = y_quotient(Real(n + h), z, c, s, 1 / (g_p * prod_ph), prod_neg_ph / g_m);
    // nu = n - h: cos unchanged, sin flips sign
    const ValueDeriv dn = y_quotient(Real(n - h), z, c, Real(-s), 1 / (g_m * prod_mh), prod_neg_mh / g_p);
    std::vector<Real> nv(i + 1), nd(i + 1);
    nv[0] = (up.value + dn.value) / 2;
    nd[0] = (up.deriv + dn.deriv) / 2;
    Real four_k = 1;
    for (int k = 1; k <= i; ++k) {
      four_k *= 4;
      nv[k] = nv[k - 1] + (nv[k - 1] - tv[k - 1]) / (four_k - 1);
      nd[k] = nd[k - 1] + (nd[k - 1] - td[k - 1]) / (four_k - 1);
    }
    tv.swap(nv);
    td.swap(nd);
    if (i >= 2) {
      const Real dv = bmp::abs(tv[i] - prev_v);
      const Real dd = bmp::abs(td[i] - prev_d);
      if (dv <= tol * bmp::abs(tv[i]) && dd <= tol * bmp::abs(td[i])) {
        ScopedPrecision back(prec);
        return ValueDeriv{at_current_precision(tv[i]), at_current_precision(td[i])};
      }
    }
    prev_v = tv[i];
    prev_d = td[i];
  }
  throw PrecisionExhausted("bessel_y: order extrapolation did not converge");
}

}  // namespace

ValueDeriv bessel_y_pair(BesselOrder order, const Real& z) {
  if (z <= 0) throw DomainError("bessel_y: argument must be positive");
  if (!order.is_integer()) {
    // alpha = k + 1/2: cos(pi alpha) = 0, sin(pi alpha) = (-1)^k, so Y = (-1)^{k+1} J_{-alpha}
    const int k = (order.twice() - 1) / 2;
    ValueDeriv jm = bessel_j_series(Real(-order.real()), z);
    if (k % 2 == 0) {
      jm.value = -jm.value;
      jm.deriv = -jm.deriv;
    }
    return jm;
  }
  return y_integer_richardson(order.twice() / 2, z);
}

Ladder bessel_ladder(BesselOrder base, int count, const Real& z) {
  if (count < 1) throw PreconditionError("bessel_ladder: count must be >= 1");
  if (z <= 0) throw DomainError("bessel_ladder: argument must be positive");
  Ladder out;
  out.base = base;
  out.j.resize(count);
  out.jp.resize(count);
  out.y.resize(count);
  out.yp.resize(count);
  const Real a0 = base.real();
  Real rg = rgamma_real(a0 + 1);
  for (int i = 0; i < count; ++i) {
    const Real nu = a0 + i;
    if (i > 0) rg /= nu;  // 1/Gamma(nu+1) = 1/Gamma(nu) / nu
    ValueDeriv jv = bessel_j_series(nu, z, rg);
    out.j[i] = jv.value;
    out.jp[i] = jv.deriv;
  }
  const ValueDeriv y0 = bessel_y_pair(base, z);
  out.y[0] = y0.value;
  out.yp[0] = y0.deriv;
  if (count > 1) {
    const ValueDeriv y1 = bessel_y_pair(base.plus(1), z);
    out.y[1] = y1.value;
    out.yp[1] = y1.deriv;
  }
  for (int i = 2; i < count; ++i) {
    const Real nu = a0 + (i - 1);
    out.y[i] = (2 * nu / z) * out.y[i - 1] - out.y[i - 2];
    // Y'_{nu+1} = Y_nu - ((nu+1)/z) Y_{nu+1}
    out.yp[i] = out.y[i - 1] - ((nu + 1) / z) * out.y[i];
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

XReal gamma(const Real& x, unsigned prec) {
  ScopedPrecision guard(prec);
  if (bmp::isnan(x) || x <= 0) throw DomainError("gamma: argument must be positive");
  const Real twice = x * 2;
  if (bmp::floor(x) == x && x <= Real(100000)) {
    // (x-1)! exactly, then one rounding into the log domain
    const unsigned long n = x.convert_to<unsigned long>() - 1;
    mpz_t f;
    mpz_init(f);
    mpz_fac_ui(f, n);
    Real v;
    {
      ScopedPrecision wide(std::max<unsigned>(prec, static_cast<unsigned>(mpz_sizeinbase(f, 2)) + 8));
      Real exact;
      mpfr_set_z(exact.backend().data(), f, MPFR_RNDN);
      v = bmp::log(exact);
    }
    mpz_clear(f);
    return XReal::from_log(1, at_current_precision(v));
  }
  if (bmp::floor(twice) == twice && x <= Real(100000)) {
    // Gamma(n + 1/2) = (2n)! / (4^n n!) sqrt(pi)
    const unsigned long n = (twice.convert_to<unsigned long>() - 1) / 2;
    mpz_t num, den;
    mpz_init(num);
    mpz_init(den);
    mpz_fac_ui(num, 2 * n);
    mpz_fac_ui(den, n);
    mpz_mul_2exp(den, den, 2 * n);
    Real lognum, logden;
    {
      const unsigned bits = static_cast<unsigned>(mpz_sizeinbase(num, 2)) + prec + 8;
      ScopedPrecision wide(bits);
      Real a, b;
      mpfr_set_z(a.backend().data(), num, MPFR_RNDN);
      mpfr_set_z(b.backend().data(), den, MPFR_RNDN);
      lognum = bmp::log(a);
      logden = bmp::log(b);
    }
    mpz_clear(num);
    mpz_clear(den);
    Real lg = at_current_precision(lognum) - at_current_precision(logden) + bmp::log(real_pi()) / 2;
    return XReal::from_log(1, lg);
  }
  Real lg;
  {
    ScopedPrecision wide(prec + 16);
    lg = bmp::lgamma(x);
  }
  return XReal::from_log(1, at_current_precision(lg));
}

XReal gamma(double x, unsigned prec) {
  ScopedPrecision guard(prec);
  return gamma(Real(x), prec);
}

XReal bessel_j(BesselOrder order, const Real& z, unsigned prec) {
  ScopedPrecision guard(prec);
  return XReal(at_current_precision(detail::bessel_j_series(order.real(), z).value));
}

XReal bessel_j_prime(BesselOrder order, const Real& z, unsigned prec) {
  ScopedPrecision guard(prec);
  return XReal(at_current_precision(detail::bessel_j_series(order.real(), z).deriv));
}

XReal bessel_y(BesselOrder order, const Real& z, unsigned prec) {
  ScopedPrecision guard(prec);
  return XReal(at_current_precision(detail::bessel_y_pair(order, z).value));
}

XReal bessel_y_prime(BesselOrder order, const Real& z, unsigned prec) {
  ScopedPrecision guard(prec);
  return XReal(at_current_precision(detail::bessel_y_pair(order, z).deriv));
}

BesselValues bessel_values(BesselOrder order, const Real& z, unsigned prec) {
  ScopedPrecision guard(prec);
  const auto jv = detail::bessel_j_series(order.real(), z);
  const auto yv = detail::bessel_y_pair(order, z);
  return {XReal(at_current_precision(jv.value)), XReal(at_current_precision(jv.deriv)),
          XReal(at_current_precision(yv.value)), XReal(at_current_precision(yv.deriv))};
}

namespace {

int sign_of(const Real& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

Real bisect_zero(const Real& nu, Real lo, Real hi, int sign_lo, unsigned prec) {
  const Real rel = ldexp_real(Real(1), -static_cast<long>(prec) + 8);
  while (hi - lo > rel * lo) {
    Real mid = (lo + hi) / 2;
    const int s = sign_of(detail::bessel_j_series(nu, mid).value);
    if (s == 0) return mid;
    if (s == sign_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

// Scan step below the minimal zero spacing of J_alpha (about 2.4 for alpha = 0, larger otherwise).
constexpr double kScanStep = 0.5;

template <typename Stop>
std::vector<Real> scan_zeros(BesselOrder order, unsigned prec, Stop stop) {
  ScopedPrecision guard(prec);
  const Real nu = order.real();
  std::vector<Real> zeros;
  // J_alpha has no zero in (0, alpha]; for alpha = 0 the first zero exceeds 2.
  Real a = std::max(order.value(), 0.25);
  int sa = sign_of(detail::bessel_j_series(nu, a).value);
  while (!stop(zeros, a)) {
    Real b = a + kScanStep;
    const int sb = sign_of(detail::bessel_j_series(nu, b).value);
    if (sb == 0) {
      zeros.push_back(b);
      b += Real(1e-6);
      a = b;
      sa = sign_of(detail::bessel_j_series(nu, a).value);
      continue;
    }
    if (sb != sa) zeros.push_back(bisect_zero(nu, a, b, sa, prec));
    a = b;
    sa = sb;
  }
  return zeros;
}

}  // namespace

std::vector<Real> bessel_j_zeros(BesselOrder order, int count, unsigned prec) {
  if (count < 1) throw PreconditionError("bessel_j_zeros: count must be >= 1");
  return scan_zeros(order, prec, [count](const std::vector<Real>& z, const Real&) {
    return static_cast<int>(z.size()) >= count;
  });
}

std::vector<Real> bessel_j_zeros_below(BesselOrder order, const Real& xmax, unsigned prec) {
  auto zeros = scan_zeros(order, prec, [&xmax](const std::vector<Real>&, const Real& a) { return a >= xmax; });
  while (!zeros.empty() && zeros.back() >= xmax) zeros.pop_back();
  return zeros;
}

SmallnessConditions check_smallness_conditions(double rho, int n0, unsigned prec) {
  ScopedPrecision guard(prec);
  SmallnessConditions c;
  c.n0 = n0;
  c.n0_above_3 = n0 > 3;
  const Real r(rho);
  const Real r2 = r * r;
  const Real e = bmp::exp(r2 / 4 / (n0 + 1)) - 1;
  c.exp_condition = to_double(e);
  bool combined_ok = false;
  if (n0 >= 1 && 2 * Real(n0) > r2) {
    const Real g = detail::gamma_real(Real(n0));
    const Real half = r / 2;
    const Real t1 = 3 * real_pi() * bmp::max(Real(1), bmp::pow(half, 2 * n0 + 1)) / g;
    const Real t2 = r2 / (2 * Real(n0) - r2);
    const Real t3 = bmp::pow(half, 2 * n0) * bmp::exp(r2 / 4) / g;
    const Real total = t1 + t2 + t3;
    c.combined_condition = to_double(total);
    combined_ok = total <= Real(1) / 2;
  } else {
    c.combined_condition = std::numeric_limits<double>::infinity();
  }
  c.passed = c.n0_above_3 && e <= Real(1) / 2 && combined_ok;
  return c;
}

BesselBoundsReport certify_bessel_bounds(double rho, int d, int n, unsigned prec, int samples) {
  if (!(rho > 0)) throw PreconditionError("certify_bessel_bounds: rho must be positive");
  if (d < 2) throw PreconditionError("certify_bessel_bounds: d must be >= 2");
  const double threshold = 10.0 * (rho + 1) * (rho + 1);
  if (n < threshold) {
    std::ostringstream os;
    os << "certify_bessel_bounds: n = " << n << " below 10(rho+1)^2 = " << threshold;
    throw PreconditionError(os.str());
  }
  if (samples < 1) throw PreconditionError("certify_bessel_bounds: samples must be >= 1");
  ScopedPrecision guard(prec);
  BesselBoundsReport rep;
  rep.rho = rho;
  rep.d = d;
  rep.n = n;
  const BesselOrder order = BesselOrder::from_degree(n, d);
  rep.alpha = order.value();
  rep.samples = samples;
  const Real alpha = order.real();
  const Real pi = real_pi();
  const Real g_a = detail::gamma_real(alpha);       // Gamma(alpha)
  const Real g_a1 = g_a * alpha;                    // Gamma(alpha+1)

  BoundCheck cj{"J sandwich", std::numeric_limits<double>::infinity(), 0, true};
  BoundCheck cjp{"J' upper", std::numeric_limits<double>::infinity(), 0, true};
  BoundCheck cy{"Y sandwich", std::numeric_limits<double>::infinity(), 0, true};
  BoundCheck cyp{"Y' upper", std::numeric_limits<double>::infinity(), 0, true};
  auto note = [](BoundCheck& c, const Real& margin, double z) {
    const double m = to_double(margin);
    if (m < c.worst_margin) {
      c.worst_margin = m;
      c.worst_z = z;
    }
    if (margin <= 0) c.passed = false;
  };
  for (int i = 1; i <= samples; ++i) {
    const Real z = Real(rho) * i / samples;
    const double zd = to_double(z);
    const auto jv = detail::bessel_j_series(alpha, z);
    const auto yv = detail::bessel_y_pair(order, z);
    const Real half = z / 2;
    const Real sj = bmp::pow(half, alpha) / g_a1;
    const Real rj = bmp::abs(jv.value) / sj;  // in [1/2, 3/2]
    note(cj, bmp::min(Real(rj - Real(0.5)), Real(Real(1.5) - rj)), zd);
    const Real sjp = 3 * bmp::pow(half, alpha - 1) / g_a;
    note(cjp, 1 - bmp::abs(jv.deriv) / sjp, zd);
    const Real sy = bmp::pow(half, -alpha) * g_a / pi;
    const Real ry = bmp::abs(yv.value) / sy;  // in [1/2, 3/2]
    note(cy, bmp::min(Real(ry - Real(0.5)), Real(Real(1.5) - ry)), zd);
    const Real syp = 3 * bmp::pow(half, -alpha - 1) * g_a1 / pi;
    note(cyp, 1 - bmp::abs(yv.deriv) / syp, zd);
  }
  rep.checks = {cj, cjp, cy, cyp};
  const int n0 = static_cast<int>(std::floor(threshold)) - 1;
  rep.conditions = check_smallness_conditions(rho, n0, prec);
  rep.passed = rep.conditions.passed;
  for (const auto& c : rep.checks) rep.passed = rep.passed && c.passed;
  return rep;
}

}  // namespace dtn::special
