#include "dtn/errors.hpp"
#include "dtn/special_functions.hpp"
#include "dtn/xreal.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dtn;
using special::BesselOrder;

namespace {

constexpr unsigned kPrec = 256;

double rel(const XReal& x, const XReal& ref) { return ((x - ref).abs() / ref.abs()).to_double(); }
double rel(const XReal& x, const char* ref) {
  ScopedPrecision g(kPrec);
  return rel(x, XReal(Real(ref)));
}

BesselOrder ord(double a) { return BesselOrder::from_double(a); }

}  // namespace

// ---- XReal -----------------------------------------------------------------

TEST(XReal, ZeroIffSignZero) {
  EXPECT_TRUE(XReal().is_zero());
  EXPECT_TRUE(XReal(0.0).is_zero());
  EXPECT_EQ(XReal(0.0).sign(), 0);
  EXPECT_FALSE(XReal(1e-300).is_zero());
  const XReal a(3.5);
  EXPECT_TRUE((a - a).is_zero());
}

TEST(XReal, DoubleRoundTripIsExact) {
  for (double x : {1.0, -2.5, 0.1, 1e-300, -7.25e200, 3.141592653589793}) EXPECT_EQ(XReal(x).to_double(), x) << x;
}

TEST(XReal, FarOutsideDoubleRange) {
  const XReal tiny = XReal::from_log2(1, -5000);
  const XReal big = XReal::from_log2(1, 5000);
  EXPECT_EQ(tiny.to_double(), 0.0);
  EXPECT_TRUE(std::isinf(big.to_double()));
  EXPECT_NEAR((tiny * big).to_double(), 1.0, 1e-60);
  EXPECT_NEAR((tiny / tiny).to_double(), 1.0, 1e-60);
  EXPECT_NEAR(tiny.log2_abs(), -5000, 1e-9);
  EXPECT_LT(tiny, XReal(1e-300));
}

TEST(XReal, SignedArithmetic) {
  const XReal a(2.0), b(-3.0);
  EXPECT_EQ((a + b).to_double(), -1.0);
  EXPECT_EQ((a * b).to_double(), -6.0);
  EXPECT_EQ((b / a).to_double(), -1.5);
  EXPECT_EQ((-a).sign(), -1);
  EXPECT_EQ(((a + b) - b).to_double(), 2.0);
}

TEST(XReal, JsonRoundTrip) {
  const XReal x = XReal::from_log2(-1, -1234.5);
  const XReal y = XReal::from_json(x.to_json());
  EXPECT_EQ(y.sign(), -1);
  EXPECT_NEAR(y.log2_abs(), -1234.5, 1e-9);
  EXPECT_TRUE(XReal::from_json(XReal::zero().to_json()).is_zero());
  EXPECT_TRUE(XReal::zero().to_json().at("log10_magnitude").is_null());
}

TEST(XReal, PowAndSqrt) {
  EXPECT_NEAR(XReal(2.0).pow(Real(10)).to_double(), 1024.0, 1e-9);
  EXPECT_NEAR(XReal(9.0).sqrt().to_double(), 3.0, 1e-15);
  EXPECT_EQ(XReal(5.0).pow(Real(0)).to_double(), 1.0);
}

// ---- Gamma -----------------------------------------------------------------

TEST(Gamma, IntegerValues) {
  EXPECT_EQ(special::gamma(1.0, kPrec).to_double(), 1.0);
  EXPECT_EQ(special::gamma(5.0, kPrec).to_double(), 24.0);
  EXPECT_NEAR(special::gamma(21.0, kPrec).to_double() / 2432902008176640000.0, 1.0, 1e-15);
}

TEST(Gamma, MatchesHighPrecisionOracle) {
  ScopedPrecision g(kPrec);
  EXPECT_LT(rel(special::gamma(0.5, kPrec), "1.77245385090551602729816748334114518279754945612238712821381"), 1e-58);
  EXPECT_LT(rel(special::gamma(Real("10.3"), kPrec), "716430.689062375244547629654716164453422446991092694708230128"),
            1e-58);
  EXPECT_LT(rel(special::gamma(Real("1e-3"), kPrec), "999.423772484595466114982201299644000465217610145612232469542"),
            1e-58);
  EXPECT_LT(rel(special::gamma(170.5, kPrec), "5.56209241455999961070580965935774286766899654530390764786753e+305"),
            1e-58);
  EXPECT_NEAR(to_double(special::gamma(Real("300.25"), kPrec).log_mag()), 1410.6277005023789395, 1e-12);
}

TEST(Gamma, RejectsNonpositive) {
  EXPECT_THROW(special::gamma(0.0, kPrec), DomainError);
  EXPECT_THROW(special::gamma(-1.5, kPrec), DomainError);
}

// ---- J ---------------------------------------------------------------------

TEST(BesselJ, AtZero) {
  ScopedPrecision g(kPrec);
  EXPECT_EQ(special::bessel_j(ord(0), Real(0), kPrec).to_double(), 1.0);
  EXPECT_TRUE(special::bessel_j(ord(2.5), Real(0), kPrec).is_zero());
  EXPECT_TRUE(special::bessel_j(ord(7), Real(0), kPrec).is_zero());
}

TEST(BesselJ, MatchesOracle) {
  ScopedPrecision g(kPrec);
  EXPECT_LT(rel(special::bessel_j(ord(0), Real(1), kPrec), "0.76519768655796655144971752610266322090927428975533"), 1e-45);
  EXPECT_LT(rel(special::bessel_j(ord(5), Real("2.5"), kPrec), "0.019501625134503219886471983925865732592357283302159"),
            1e-45);
  EXPECT_LT(rel(special::bessel_j(ord(60), Real(10), kPrec), "6.9094332494399618981063976250794323875847154568538e-41"),
            1e-45);
  EXPECT_LT(rel(special::bessel_j(ord(40), Real("0.1"), kPrec), "1.1146246002516398120878298569700143239187882974623e-100"),
            1e-45);
  EXPECT_LT(rel(special::bessel_j(ord(2.5), Real("7.25"), kPrec), "-0.29961810568713080816312691090702769070487644018914"),
            1e-45);
}

TEST(BesselJ, HalfIntegerClosedForm) {
  ScopedPrecision g(kPrec);
  for (const char* zs : {"0.3", "1", "3", "9.75"}) {
    const Real z(zs);
    const Real ref = boost::multiprecision::sqrt(2 / (real_pi() * z)) * boost::multiprecision::sin(z);
    EXPECT_LT(rel(special::bessel_j(ord(0.5), z, kPrec), XReal(ref)), 1e-70) << zs;
  }
}

TEST(BesselJ, PrecisionRefinementIsStable) {
  for (double a : {0.0, 3.5, 30.0})
    for (const char* zs : {"0.5", "4", "12"}) {
      ScopedPrecision g(kPrec + 64);
      const Real z(zs);
      const XReal lo = special::bessel_j(ord(a), z, kPrec);
      const XReal hi = special::bessel_j(ord(a), z, kPrec + 64);
      EXPECT_LT(rel(lo, hi), std::ldexp(1.0, -static_cast<int>(kPrec) + 16)) << a << " " << zs;
    }
}

TEST(BesselJPrime, EqualsMinusJ1ForOrderZero) {
  ScopedPrecision g(kPrec);
  for (const char* zs : {"0.2", "1", "2.5", "8"}) {
    const Real z(zs);
    EXPECT_LT(rel(special::bessel_j_prime(ord(0), z, kPrec), -special::bessel_j(ord(1), z, kPrec)), 1e-70) << zs;
  }
  EXPECT_LT(rel(special::bessel_j_prime(ord(0), Real(1), kPrec), "-0.44005058574493351595968220371891491312737230199277"),
            1e-45);
}

TEST(BesselJPrime, TermwiseSeriesOracle) {
  ScopedPrecision g(kPrec);
  const Real z("0.5"), a(2);
  // sum (-1)^m (2m + a)/2 (z/2)^{2m+a-1} / (m! Gamma(m+a+1))
  Real sum = 0, fact = 1, gam = 2;  // m! and Gamma(m+3)
  for (int m = 0; m < 60; ++m) {
    if (m > 0) {
      fact *= m;
      gam *= m + 2;
    }
    const Real term = (2 * m + a) / 2 * boost::multiprecision::pow(z / 2, 2 * m + a - 1) / (fact * gam);
    sum += (m % 2 == 0) ? term : Real(-term);
  }
  EXPECT_LT(rel(special::bessel_j_prime(ord(2), z, kPrec), XReal(sum)), 1e-70);
}

TEST(BesselJPrime, FiniteDifferenceOracle) {
  ScopedPrecision g(2 * kPrec);
  const Real z(1), h("1e-30");
  const XReal fd((special::bessel_j(ord(0), z + h, 2 * kPrec) - special::bessel_j(ord(0), z - h, 2 * kPrec)).to_real() /
                 (2 * h));
  EXPECT_LT(rel(special::bessel_j_prime(ord(0), z, kPrec), fd), 1e-50);
}

// ---- Y ---------------------------------------------------------------------

TEST(BesselY, MatchesOracle) {
  ScopedPrecision g(kPrec);
  EXPECT_LT(rel(special::bessel_y(ord(0), Real(1), kPrec), "0.088256964215676957982926766023515162827817523090675"), 1e-40);
  EXPECT_LT(rel(special::bessel_y(ord(3), Real("0.7"), kPrec), "-15.819479052819633504694017287922900267822703304891"),
            1e-40);
  EXPECT_LT(rel(special::bessel_y(ord(60), Real("0.1"), kPrec), "-5.0896962944046695400760137820581859657645869606256e+157"),
            1e-40);
  EXPECT_LT(rel(special::bessel_y(ord(10), Real("9.5"), kPrec), "-0.44390655329324593166225912399853006090192627812559"),
            1e-40);
  EXPECT_LT(rel(special::bessel_y_prime(ord(1.5), Real(2), kPrec), "0.5315031714252761069830405638413453229873724635931"),
            1e-40);
  EXPECT_LT(rel(special::bessel_y_prime(ord(3), Real("0.7"), kPrec), "64.836289807399729031391724927888059211851237152623"),
            1e-40);
}

TEST(BesselY, HalfIntegerClosedForm) {
  ScopedPrecision g(kPrec);
  for (const char* zs : {"0.3", "1", "3", "9.75"}) {
    const Real z(zs);
    const Real ref = -boost::multiprecision::sqrt(2 / (real_pi() * z)) * boost::multiprecision::cos(z);
    EXPECT_LT(rel(special::bessel_y(ord(0.5), z, kPrec), XReal(ref)), 1e-70) << zs;
  }
}

TEST(BesselY, RejectsNonpositiveArgument) {
  ScopedPrecision g(kPrec);
  EXPECT_THROW(special::bessel_y(ord(0), Real(0), kPrec), DomainError);
  EXPECT_THROW(special::bessel_y(ord(1), Real(-1), kPrec), DomainError);
}

TEST(BesselY, SmallArgumentWindow) {
  ScopedPrecision g(kPrec);
  const Real z(1);
  for (double a : {40.0, 40.5, 90.0}) {
    const XReal scale = XReal(Real(z / 2)).pow(Real(-a)) * special::gamma(a, kPrec) / XReal(real_pi());
    const double ratio = (special::bessel_y(ord(a), z, kPrec).abs() / scale).to_double();
    EXPECT_GE(ratio, 0.5) << a;
    EXPECT_LE(ratio, 1.5) << a;
  }
}

// ---- invariants --------------------------------------------------------------

TEST(BesselInvariants, Wronskian) {
  ScopedPrecision g(kPrec);
  const double tol = std::ldexp(1.0, -static_cast<int>(kPrec) + 24);
  for (int twice : {0, 1, 2, 3, 10, 21, 40, 79, 120})
    for (const char* zs : {"0.1", "0.5", "1", "2.75", "6", "10"}) {
      const auto o = BesselOrder::from_twice(twice);
      const Real z(zs);
      const XReal w = special::bessel_j(o, z, kPrec) * special::bessel_y_prime(o, z, kPrec) -
                      special::bessel_j_prime(o, z, kPrec) * special::bessel_y(o, z, kPrec);
      EXPECT_LT(rel(w, XReal(Real(2 / (real_pi() * z)))), tol) << twice << " " << zs;
    }
}

TEST(BesselInvariants, WronskianClosureAtOrderZero) {
  ScopedPrecision g(kPrec);
  const Real z(1);
  const XReal w = special::bessel_j(ord(0), z, kPrec) * special::bessel_y_prime(ord(0), z, kPrec) -
                  special::bessel_j_prime(ord(0), z, kPrec) * special::bessel_y(ord(0), z, kPrec);
  EXPECT_NEAR(w.to_double(), 0.6366197723675814, 1e-15);
}

TEST(BesselInvariants, OdeResidual) {
  ScopedPrecision g(kPrec);
  const Real h("1e-20");
  for (double a : {0.0, 1.5, 7.0, 25.0})
    for (const char* zs : {"0.8", "3", "9"}) {
      const Real z(zs);
      const auto o = ord(a);
      for (int kind = 0; kind < 2; ++kind) {
        auto w = [&](const Real& x) {
          return (kind == 0 ? special::bessel_j(o, x, kPrec) : special::bessel_y(o, x, kPrec)).to_real();
        };
        const Real w0 = w(z), wp = w(z + h), wm = w(z - h);
        const Real d2 = (wp - 2 * w0 + wm) / (h * h), d1 = (wp - wm) / (2 * h);
        const Real res = z * z * d2 + z * d1 + (z * z - Real(a * a)) * w0;
        const Real scale = boost::multiprecision::abs(z * z * d2) + boost::multiprecision::abs(z * d1) +
                           boost::multiprecision::abs((z * z + Real(a * a)) * w0);
        EXPECT_LT(to_double(boost::multiprecision::abs(res) / scale), 1e-8) << a << " " << zs << " " << kind;
      }
    }
}

// ---- zeros -----------------------------------------------------------------

TEST(BesselZeros, FirstZeros) {
  EXPECT_NEAR(to_double(special::bessel_j_zeros(ord(0), 1, kPrec).at(0)), 2.404825557695772768, 1e-15);
  EXPECT_NEAR(to_double(special::bessel_j_zeros(ord(1), 1, kPrec).at(0)), 3.831705970207512316, 1e-15);
  EXPECT_NEAR(to_double(special::bessel_j_zeros(ord(5), 3, kPrec).at(2)), 15.70017407971167104, 1e-14);
  EXPECT_NEAR(to_double(special::bessel_j_zeros(ord(0.5), 2, kPrec).at(1)), 6.283185307179586477, 1e-15);
}

TEST(BesselZeros, IncreasingWithAsymptoticSpacing) {
  const auto z = special::bessel_j_zeros(ord(0), 16, kPrec);
  ASSERT_EQ(z.size(), 16u);
  for (std::size_t i = 1; i < z.size(); ++i) EXPECT_GT(z[i], z[i - 1]);
  for (std::size_t i = 10; i < z.size(); ++i)
    EXPECT_NEAR(to_double(z[i] - z[i - 1]) / 3.141592653589793, 1.0, 0.05) << i;
}

TEST(BesselZeros, ValuesVanish) {
  ScopedPrecision g(kPrec);
  for (const auto& x : special::bessel_j_zeros(ord(3), 4, kPrec))
    EXPECT_LT(special::bessel_j(ord(3), x, kPrec).abs().to_double(), 1e-60);
}

// ---- Lemma bounds ------------------------------------------------------------

TEST(BesselBounds, CertifiedCases) {
  for (auto [rho, d, n] : {std::tuple{1.0, 2, 40}, std::tuple{2.0, 3, 90}, std::tuple{1.0, 3, 40}}) {
    const auto r = special::certify_bessel_bounds(rho, d, n, kPrec, 16);
    EXPECT_TRUE(r.passed) << rho << " " << d << " " << n;
    EXPECT_EQ(r.checks.size(), 4u);
    for (const auto& c : r.checks) EXPECT_GT(c.worst_margin, 0) << c.name;
  }
}

TEST(BesselBounds, BelowThresholdIsRejected) {
  EXPECT_THROW(special::certify_bessel_bounds(1.0, 2, 39, kPrec), PreconditionError);
}

TEST(BesselBounds, SmallnessConditionsHold) {
  for (double rho : {1.0, 2.0, 3.0}) {
    const int n0 = static_cast<int>(std::floor(10 * (rho + 1) * (rho + 1))) - 1;
    const auto c = special::check_smallness_conditions(rho, n0, kPrec);
    EXPECT_TRUE(c.passed) << rho;
    EXPECT_LE(c.exp_condition, 0.5);
    EXPECT_LE(c.combined_condition, 0.5);
  }
}
