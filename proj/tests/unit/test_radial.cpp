#include "dtn/errors.hpp"
#include "dtn/radial.hpp"
#include "dtn/special_functions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace dtn;
namespace bmp = boost::multiprecision;
using special::BesselOrder;

namespace {

constexpr unsigned kPrec = 256;
const double kA = 0.26, kB = 0.32;

// w(r) = exp(1 - 1/(1 - t^2)), t = (2r - a - b)/(b - a), with first and second r-derivatives.
struct Bump {
  Real a, b;
  void eval(const Real& r, Real& w, Real& w1, Real& w2) const {
    const Real t = (2 * r - a - b) / (b - a);
    if (bmp::abs(t) >= 1) {
      w = w1 = w2 = 0;
      return;
    }
    const Real s = 1 - t * t;
    w = bmp::exp(1 - 1 / s);
    const Real dt = 2 / (b - a);
    const Real f1 = -2 * t / (s * s);
    const Real f2 = -2 / (s * s) - 8 * t * t / (s * s * s);
    w1 = w * f1 * dt;
    w2 = w * (f1 * f1 + f2) * dt * dt;
  }
  Real value(const Real& r) const {
    Real w, w1, w2;
    eval(r, w, w1, w2);
    return w;
  }
  // L w = -w'' - ((d-1)/r) w' + j(j+d-2)/r^2 w - E w
  Real source(const Real& r, int d, long j, const Real& e) const {
    Real w, w1, w2;
    eval(r, w, w1, w2);
    return -w2 - Real(d - 1) / r * w1 + Real(j * (j + d - 2)) / (r * r) * w - e * w;
  }
};

double bump_d(double r) {
  const double t = (2 * r - kA - kB) / (kB - kA);
  return std::fabs(t) < 1 ? std::exp(1 - 1 / (1 - t * t)) : 0.0;
}

}  // namespace

TEST(RTilde, VanishesAtBoundary) {
  ScopedPrecision g(kPrec);
  for (long j : {0L, 3L, 25L})
    for (const char* e : {"0.5", "3.375", "30"}) {
      const Real v = radial::r_tilde(j, 2, Real(e), Real(1), kPrec);
      EXPECT_LT(to_double(bmp::abs(v)), 1e-60) << j << " " << e;
    }
}

TEST(RTilde, MatchesBesselCombination) {
  ScopedPrecision g(kPrec);
  // j = 0, d = 2, E = 1, r = 0.5: Y0(0.5) J0(1) - J0(0.5) Y0(1)
  const auto o = BesselOrder::from_twice(0);
  const Real ref = special::bessel_y(o, Real("0.5"), kPrec).to_real() * special::bessel_j(o, Real(1), kPrec).to_real() -
                   special::bessel_j(o, Real("0.5"), kPrec).to_real() * special::bessel_y(o, Real(1), kPrec).to_real();
  EXPECT_LT(to_double(bmp::abs(radial::r_tilde(0, 2, Real(1), Real("0.5"), kPrec) / ref - 1)), 1e-60);
  // d = 3 carries the r^{-1/2} weight and half-integer orders
  const auto h = BesselOrder::from_twice(3);
  const Real r("0.4"), k(2);
  const Real ref3 = (special::bessel_y(h, k * r, kPrec).to_real() * special::bessel_j(h, k, kPrec).to_real() -
                     special::bessel_j(h, k * r, kPrec).to_real() * special::bessel_y(h, k, kPrec).to_real()) /
                    bmp::sqrt(r);
  EXPECT_LT(to_double(bmp::abs(radial::r_tilde(1, 3, Real(4), r, kPrec) / ref3 - 1)), 1e-60);
}

TEST(RTilde, OdeResidual) {
  ScopedPrecision g(kPrec);
  const Real e(2), h("1e-20");
  for (long j : {0L, 4L, 15L})
    for (const char* rs : {"0.3", "0.6", "0.9"}) {
      const Real r(rs);
      const Real f0 = radial::r_tilde(j, 2, e, r, kPrec);
      const Real fp = radial::r_tilde(j, 2, e, r + h, kPrec), fm = radial::r_tilde(j, 2, e, r - h, kPrec);
      const Real d2 = (fp - 2 * f0 + fm) / (h * h), d1 = (fp - fm) / (2 * h);
      const Real res = r * r * d2 + r * d1 + (e * r * r - Real(j * j)) * f0;
      const Real scale = bmp::abs(r * r * d2) + bmp::abs(r * d1) + bmp::abs((e * r * r + Real(j * j)) * f0);
      EXPECT_LT(to_double(bmp::abs(res) / scale), 1e-8) << j << " " << rs;
    }
}

TEST(RTilde, BoundaryDerivativeIsTwoOverPi) {
  for (int d : {2, 3})
    for (long j : {0L, 1L, 7L, 60L})
      for (const char* e : {"0.01", "1", "20"})
        EXPECT_NEAR(to_double(radial::r_tilde_deriv_at_1(j, d, Real(e), kPrec)), 2 / std::numbers::pi, 1e-30)
            << d << " " << j << " " << e;
}

TEST(RTilde, BoundaryDerivativeRatioBound) {
  ScopedPrecision g(kPrec);
  const Real k(1);
  for (long j : {40L, 55L, 80L}) {
    const auto o = BesselOrder::from_degree(static_cast<int>(j), 2);
    const XReal yj = special::bessel_y(o, k, kPrec) * special::bessel_j(o, k, kPrec);
    const double ratio = (XReal(radial::r_tilde_deriv_at_1(j, 2, Real(1), kPrec)) / yj.abs()).to_double();
    EXPECT_LE(ratio, 6.0 * o.value()) << j;
  }
}

TEST(RTilde, AnnulusLowerBound) {
  ScopedPrecision g(kPrec);
  const Real k(1);
  radial::SupportRule rule(Real(1) / 3, Real(2) / 5, 4, 24);
  for (long j : {40L, 60L}) {
    const auto o = BesselOrder::from_degree(static_cast<int>(j), 2);
    std::vector<Real> f(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Real r = radial::r_tilde(j, 2, Real(1), rule.nodes()[i], kPrec);
      f[i] = r * r * rule.nodes()[i];
    }
    const XReal norm(Real(bmp::sqrt(rule.integrate(f))));
    const XReal yj = (special::bessel_y(o, k, kPrec) * special::bessel_j(o, k, kPrec)).abs();
    const XReal lower = XReal(6.0 / 1000) * XReal(2.5).pow(o.real()) ;
    EXPECT_GT(norm / yj, lower) << j;
  }
}

TEST(RTilde, AngularOrthogonalityOnAnnulus) {
  ScopedPrecision g(kPrec);
  const int nth = 64;
  radial::SupportRule rule(Real(1) / 3, Real(1), 4, 16);
  std::vector<std::vector<double>> rad;
  const long js[] = {0, 1, 2, 5};
  for (long j : js) {
    std::vector<double> v;
    for (const auto& r : rule.nodes()) v.push_back(to_double(radial::r_tilde(j, 2, Real(2), r, kPrec)));
    rad.push_back(v);
  }
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      for (int sa : {1, -1})
        for (int sb : {1, -1}) {
          const long fa = sa * js[a], fb = sb * js[b];
          std::complex<double> acc = 0;
          double na = 0;
          for (std::size_t i = 0; i < rule.size(); ++i) {
            const double r = to_double(rule.nodes()[i]), w = to_double(rule.weights()[i]);
            std::complex<double> ang = 0;
            for (int t = 0; t < nth; ++t) {
              const double th = 2 * std::numbers::pi * t / nth;
              ang += std::polar(1.0, (fa - fb) * th);
            }
            ang *= 2 * std::numbers::pi / nth;
            acc += w * r * rad[a][i] * rad[b][i] * ang;
            na += w * r * rad[a][i] * rad[a][i];
          }
          if (fa != fb) {
            EXPECT_LT(std::abs(acc), 1e-12 * std::max(na, 1e-300)) << fa << " " << fb;
          }
        }
}

TEST(FreeDtn, Examples) {
  for (long j = 0; j <= 20; ++j) EXPECT_EQ(to_double(radial::free_dtn_eigenvalue(2, j, Real(0), kPrec)), j);
  EXPECT_NEAR(to_double(radial::free_dtn_eigenvalue(2, 0, Real(1), kPrec)), -0.57508091500430596049944339531850836,
              1e-16);
  EXPECT_NEAR(to_double(radial::free_dtn_eigenvalue(2, 3, Real(1), kPrec)), 2.8734041736246217024502115297394065, 1e-15);
  EXPECT_NEAR(to_double(radial::free_dtn_eigenvalue(2, 2, Real(30), kPrec)), 14.986987003962084079682013629943101,
              1e-13);
  for (long j = 0; j <= 20; ++j)
    EXPECT_NEAR(to_double(radial::free_dtn_eigenvalue(2, j, Real("1e-4"), kPrec)), j, 0.01) << j;
}

TEST(FreeDtn, NearEigenvalueIsRejected) {
  ScopedPrecision g(kPrec);
  const Real z = special::bessel_j_zeros(BesselOrder::from_twice(0), 1, kPrec).at(0);
  EXPECT_THROW(radial::free_dtn_eigenvalue(2, 0, Real(z * z), kPrec), NearEigenvalueError);
}

TEST(GreenApply, ZeroSourceGivesZero) {
  ScopedPrecision g(kPrec);
  const auto u = radial::green_apply(2, 3, Real(2), [](const Real&) { return Real(0); }, Real(kA), Real(kB), kPrec);
  for (const auto& v : u.values) EXPECT_EQ(v, 0);
  EXPECT_EQ(u.deriv_at_1, 0);
}

TEST(GreenApply, ManufacturedSolution) {
  ScopedPrecision g(kPrec);
  const Bump w{Real(kA), Real(kB)};
  for (long j : {0L, 5L, 40L})
    for (const char* e : {"2", "3.375"}) {
      const Real en(e);
      const auto u = radial::green_apply(
          2, j, en, [&](const Real& r) { return w.source(r, 2, j, en); }, Real(kA), Real(kB), kPrec, 16, 24);
      Real err = 0, norm = 0;
      for (std::size_t i = 0; i < u.r.size(); ++i) {
        const Real ref = w.value(u.r[i]);
        err += (u.values[i] - ref) * (u.values[i] - ref);
        norm += ref * ref;
      }
      EXPECT_LT(to_double(bmp::sqrt(err / norm)), 1e-8) << j << " " << e;
      EXPECT_LT(to_double(bmp::abs(u.deriv_at_1)), 1e-8) << j << " " << e;
    }
}

TEST(GreenApply, OperatorResidual) {
  ScopedPrecision g(kPrec);
  auto rule = std::make_shared<const radial::SupportRule>(Real(kA), Real(kB), 16, 24);
  const Real e(2);
  const long j = 6;
  radial::GreenKernel kernel(2, j, e, rule, kPrec);
  const auto sol = kernel.apply([](const Real& r) { return Real(bump_d(to_double(r))); });
  const Real h("1e-25");
  Real res2 = 0, src2 = 0;
  for (int i = 1; i < 40; ++i) {
    const Real r = Real(kA) + (Real(kB) - Real(kA)) * i / 40;
    const Real u0 = kernel.evaluate(sol, r), up = kernel.evaluate(sol, r + h), um = kernel.evaluate(sol, r - h);
    const Real lu = -(up - 2 * u0 + um) / (h * h) - (up - um) / (2 * h) / r + Real(j * j) / (r * r) * u0 - e * u0;
    const Real gsrc = bump_d(to_double(r));
    res2 += (lu - gsrc) * (lu - gsrc);
    src2 += gsrc * gsrc;
  }
  EXPECT_LT(to_double(bmp::sqrt(res2 / src2)), 1e-8);
  // outside the support the solution is homogeneous
  for (const char* rs : {"0.1", "0.5", "0.95"}) {
    const Real r(rs);
    const Real u0 = kernel.evaluate(sol, r), up = kernel.evaluate(sol, r + h), um = kernel.evaluate(sol, r - h);
    const Real lu = -(up - 2 * u0 + um) / (h * h) - (up - um) / (2 * h) / r + Real(j * j) / (r * r) * u0 - e * u0;
    EXPECT_LT(to_double(bmp::abs(lu)), 1e-10) << rs;
  }
  EXPECT_LT(to_double(bmp::abs(kernel.evaluate(sol, Real(1)))), 1e-60);
}

TEST(GreenApply, AgreesWithFiniteDifferences) {
  ScopedPrecision g(kPrec);
  for (long j : {0L, 5L, 20L, 40L}) {
    const auto u = radial::green_apply(
        2, j, Real(2), [](const Real& r) { return Real(bump_d(to_double(r))); }, Real(kA), Real(kB), kPrec, 16, 24);
    const auto fd = radial::fd_solve_mode(2, j, 2.0, bump_d, 0.0, 20001);
    EXPECT_LT(std::fabs(to_double(u.deriv_at_1) - fd.du1) / std::fabs(fd.du1), 1e-6) << j;
    // interior values at the source center
    const double rc = 0.5 * (kA + kB);
    std::size_t best = 0;
    for (std::size_t i = 0; i < fd.r.size(); ++i)
      if (std::fabs(fd.r[i] - rc) < std::fabs(fd.r[best] - rc)) best = i;
    radial::SupportRule rule(Real(kA), Real(kB), 16, 24);
    const Real ui = rule.interpolate(u.values, Real(fd.r[best]));
    EXPECT_LT(std::fabs(to_double(ui) - fd.u[best]) / std::fabs(fd.u[best]), 1e-6) << j;
  }
}

TEST(FdSolve, HomogeneousMatchesClosedForm) {
  ScopedPrecision g(kPrec);
  const double e = 2.0, k = std::sqrt(e);
  for (long j : {0L, 3L}) {
    const auto fd = radial::fd_solve_mode(2, j, e, [](double) { return 0.0; }, 1.0, 4001);
    const auto o = BesselOrder::from_degree(static_cast<int>(j), 2);
    const double jk = special::bessel_j(o, Real(k), kPrec).to_double();
    for (std::size_t i = fd.r.size() / 2; i < fd.r.size(); i += 500) {
      const double ref = special::bessel_j(o, Real(k * fd.r[i]), kPrec).to_double() / jk;
      EXPECT_NEAR(fd.u[i], ref, 1e-7) << j << " " << fd.r[i];
    }
    const double dref = k * special::bessel_j_prime(o, Real(k), kPrec).to_double() / jk;
    EXPECT_NEAR(fd.du1, dref, 1e-7);
  }
  const auto zero = radial::fd_solve_mode(2, 2, e, [](double) { return 0.0; }, 0.0, 2001);
  for (double v : zero.u) EXPECT_EQ(v, 0.0);
}

TEST(FdSolve, SecondOrderConvergence) {
  ScopedPrecision g(kPrec);
  const double e = 2.0, k = std::sqrt(e);
  const long j = 2;
  const auto o = BesselOrder::from_degree(static_cast<int>(j), 2);
  const double dref = k * special::bessel_j_prime(o, Real(k), kPrec).to_double() /
                      special::bessel_j(o, Real(k), kPrec).to_double();
  std::vector<double> errs;
  for (int n : {1001, 2001, 4001}) {
    const auto grid = radial::FdGrid::for_degree(j, n);
    const auto s = radial::fd_solve_grid(2, j, e, grid, std::vector<double>(n, 0.0), 1.0);
    errs.push_back(std::fabs(s.du1 - dref));
  }
  EXPECT_NEAR(errs[0] / errs[1], 4.0, 0.4);
  EXPECT_NEAR(errs[1] / errs[2], 4.0, 0.4);
}

TEST(SupportRule, IntegratesPolynomialsAndCumulative) {
  ScopedPrecision g(kPrec);
  radial::SupportRule rule(Real(kA), Real(kB), 4, 12);
  std::vector<Real> f(rule.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = bmp::pow(rule.nodes()[i], 7);
  const Real exact = (bmp::pow(Real(kB), 8) - bmp::pow(Real(kA), 8)) / 8;
  EXPECT_LT(to_double(bmp::abs(rule.integrate(f) / exact - 1)), 1e-60);
  const auto cum = rule.cumulative(f);
  for (std::size_t i = 0; i < f.size(); i += 5) {
    const Real x = rule.nodes()[i];
    const Real ref = (bmp::pow(x, 8) - bmp::pow(Real(kA), 8)) / 8;
    EXPECT_LT(to_double(bmp::abs(cum[i] - ref)), 1e-60);
  }
  const Real x("0.3012");
  EXPECT_LT(to_double(bmp::abs(rule.integral_to(f, x) - (bmp::pow(x, 8) - bmp::pow(Real(kA), 8)) / 8)), 1e-60);
}
