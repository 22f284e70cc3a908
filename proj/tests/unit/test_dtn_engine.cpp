#include "dtn/dtn_engine.hpp"
#include "dtn/errors.hpp"
#include "dtn/spectral_gap.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace dtn;
using basis::ModeIndex;
using potentials::PotentialVnm;
namespace bmp = boost::multiprecision;

namespace {

constexpr unsigned kPrec = 256;

struct Setup {
  double energy;
  PotentialVnm v;
  std::unique_ptr<engine::ChainContext> ctx;
  basis::DtnMatrix a;
  std::vector<engine::ModeChain> chains;
  XReal q;

  Setup(double e, long n, long degree_max, bool conj = false) : energy(e), v(PotentialVnm::make(n, 3, {}, 2, kPrec)) {
    ScopedPrecision g(kPrec);
    if (conj) v = v.conjugate();
    ctx = std::make_unique<engine::ChainContext>(Real(e), v, degree_max, engine::EngineOptions{kPrec, 16, 24});
    a = engine::dtn_diff_matrix(*ctx, degree_max, &chains);
    const auto table = spectrum::disk_eigenvalues(2, 2 * e + 10, 128);
    q = spectrum::resolvent_budget(Real(e), v.eps, table).q;
  }
};

const Setup& base() {
  static const Setup s(3.375, 12, 30);
  return s;
}

const Setup& base_conj() {
  static const Setup s(3.375, 12, 30, true);
  return s;
}

}  // namespace

TEST(Chain, ZeroPotentialGivesEmptyMatrix) {
  ScopedPrecision g(kPrec);
  const auto v = PotentialVnm::with_amplitude(12, 3, XReal::zero(kPrec));
  engine::ChainContext ctx(Real(2), v, 20, {kPrec, 8, 24});
  const auto ch = engine::solve_boundary_mode(ctx, 3, 4);
  EXPECT_EQ(ch.l_max, 0);
  ASSERT_EQ(ch.levels.size(), 1u);
  // level 0 is the free solution: w0'(1) = (2 pi)^{-1/2} times the free DtN eigenvalue
  const Real ref = radial::free_dtn_eigenvalue(2, 3, Real(2), kPrec) / bmp::sqrt(2 * real_pi());
  EXPECT_LT(to_double(bmp::abs(ch.levels[0].dw1 / ref - 1)), 1e-60);
  EXPECT_EQ(engine::dtn_diff_matrix(ctx, 20).size(), 0u);
}

TEST(Chain, RequiresNonemptyProfileAndPositiveEnergy) {
  ScopedPrecision g(kPrec);
  const auto empty = PotentialVnm::make(12, 3, {0.29, 0.03, 0.03});
  EXPECT_THROW(engine::ChainContext(Real(2), empty, 10), ConfigError);
  EXPECT_THROW(engine::ChainContext(Real(0), PotentialVnm::make(12, 3), 10), UnsupportedError);
  EXPECT_THROW(engine::ChainContext(Real(2), PotentialVnm::make(12, 3, {}, 3), 10), UnsupportedError);
}

TEST(Selection, EntriesShiftByMultiplesOfN) {
  const auto& s = base();
  ASSERT_GT(s.a.size(), 0u);
  EXPECT_TRUE(engine::structurally_triangular(s.a, 12));
  std::set<long> diffs;
  for (const auto& [k, v] : s.a.entries) {
    const long f1 = k.first.frequency(), f2 = k.second.frequency();
    diffs.insert(f1 - f2);
    EXPECT_LE(std::max(std::labs(f1), std::labs(f2)), 30);
    EXPECT_GT(std::max(std::labs(f1), std::labs(f2)), 5);
    if (f1 >= 0 && f2 >= 0) {
      EXPECT_TRUE(f1 - f2 == 12 || f1 - f2 == 24) << f1 << " " << f2;
    }
  }
  EXPECT_EQ(diffs, (std::set<long>{12, 24, 36, 48, 60}));
  // every admissible pair is present
  long expected = 0;
  for (long f2 = -30; f2 <= 30; ++f2)
    for (long f1 = f2 + 12; f1 <= 30; f1 += 12) ++expected;
  EXPECT_EQ(static_cast<long>(s.a.size()), expected);
}

TEST(Selection, ConjugateShiftsDown) {
  const auto& s = base_conj();
  EXPECT_TRUE(engine::structurally_triangular(s.a, -12));
  EXPECT_FALSE(engine::structurally_triangular(s.a, 12));
  basis::DtnMatrix bad = base().a;
  bad.set(ModeIndex::from_frequency(3), ModeIndex::from_frequency(2), bad.entries.begin()->second);
  EXPECT_FALSE(engine::structurally_triangular(bad, 12));
}

TEST(Selection, AdjointSymmetry) {
  EXPECT_LT(engine::adjoint_mismatch(base().a, base_conj().a), 1e-50);
}

TEST(Chain, LevelsDecayGeometrically) {
  const auto& s = base();
  ScopedPrecision g(kPrec);
  for (const auto& ch : s.chains) {
    EXPECT_TRUE(ch.tail_finite);
    for (std::size_t l = 1; l < ch.levels.size(); ++l) {
      const long deg = std::labs(ch.levels[l].freq);
      const Real bound = s.ctx->eps() * s.ctx->k_g(deg) * ch.levels[l - 1].sup;
      EXPECT_LE(ch.levels[l].sup, bound) << ch.j2 << " " << l;
      EXPECT_LE(bmp::abs(ch.levels[l].dw1), s.ctx->eps() * s.ctx->boundary_gain(deg) * ch.levels[l - 1].sup)
          << ch.j2 << " " << l;
    }
  }
  EXPECT_TRUE(s.ctx->gains_monotone());
  for (long j = 0; j <= 30; ++j) {
    EXPECT_GE(s.ctx->k_g_beyond(j), s.ctx->k_g(j));
    EXPECT_GE(s.ctx->boundary_gain_beyond(j), s.ctx->boundary_gain(j));
  }
}

TEST(Chain, WindowDoesNotChangeEntries) {
  ScopedPrecision g(kPrec);
  const auto& s = base();
  engine::ChainContext ctx(Real(3.375), s.v, 40, {kPrec, 16, 24});
  const auto big = engine::dtn_diff_matrix(ctx, 40);
  EXPECT_GT(big.size(), s.a.size());
  for (const auto& [k, v] : s.a.entries) {
    const auto* w = big.find(k.first, k.second);
    ASSERT_NE(w, nullptr);
    EXPECT_EQ(w->phase, v.phase);
    EXPECT_LT(std::fabs(w->magnitude.log2_abs() - v.magnitude.log2_abs()), 1e-40);
  }
}

TEST(Oracle, FiniteDifferenceChainsAgree) {
  const auto& s = base();
  const auto fd = engine::fd_diff_matrix(s.energy, s.v, 30, 20001);
  EXPECT_EQ(fd.size(), s.a.size());
  double worst = 0;
  for (const auto& [k, v] : s.a.entries) {
    const auto* o = fd.find(k.first, k.second);
    ASSERT_NE(o, nullptr);
    const auto x = v.to_complex(), y = o->to_complex();
    if (x == 0.0) continue;  // below the double range
    worst = std::max(worst, std::abs(x - y) / std::abs(x));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Oracle, FirstLevelMatchesCoupledPair) {
  const auto& s = base();
  for (long j2 : {-30L, -12L, -3L, 0L, 5L, 18L}) {
    const auto fd = engine::fd_chain_derivatives(s.energy, s.v, j2, 1, 20001);
    const auto& ch = s.chains.at(static_cast<std::size_t>(j2 + 30));
    ASSERT_EQ(ch.j2, j2);
    const double w1 = to_double(ch.levels.at(1).dw1);
    EXPECT_LT(std::fabs(fd.at(1) - w1) / std::fabs(w1), 1e-6) << j2;
    EXPECT_LT(std::fabs(fd.at(0) / to_double(ch.levels[0].dw1) - 1), 1e-6) << j2;
  }
}

TEST(SolutionNorm, PassesOnAllChains) {
  const auto& s = base();
  for (const auto& ch : s.chains) {
    const auto r = engine::verify_lemma31(*s.ctx, ch, s.q, s.v.eps);
    EXPECT_TRUE(r.passed) << ch.j2;
    EXPECT_GT(r.margin, 0) << ch.j2;
    EXPECT_GT(r.psi_norm, 0) << ch.j2;
  }
}

TEST(SolutionNorm, PassesAtTheRhoTwoGap) {
  ScopedPrecision g(kPrec);
  const auto gap = spectrum::find_gap_energy(2.0, 2, std::nullopt, 128);
  const auto v = PotentialVnm::make(12, 3, {}, 2, kPrec);
  engine::ChainContext ctx(Real(gap.energy), v, 24, {kPrec, 16, 24});
  const auto table = spectrum::disk_eigenvalues(2, 2 * gap.energy + 10, 128);
  const auto q = spectrum::resolvent_budget(Real(gap.energy), v.eps, table).q;
  for (long j2 : {-24L, -12L, -5L, 0L, 7L, 12L}) {
    const auto ch = engine::solve_boundary_mode(ctx, j2, 2);
    const auto r = engine::verify_lemma31(ctx, ch, q, v.eps);
    EXPECT_TRUE(r.passed) << j2;
    EXPECT_GT(r.margin, 0) << j2;
  }
}

TEST(SolutionNorm, HarmonicExtensionNorm) {
  for (long j = 0; j < 50; ++j) {
    EXPECT_LE(engine::harmonic_extension_norm(j), 1.0);
    EXPECT_NEAR(engine::harmonic_extension_norm(j), 1 / std::sqrt(2.0 * j + 2), 1e-15);
  }
}

TEST(EntryBound, EmptyMatrixPasses) {
  basis::DtnMatrix empty;
  const auto r = engine::verify_lemma32(empty, XReal(1.0, kPrec), XReal(1e-3, kPrec), 1.0, 2);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.checked, 0);
  EXPECT_EQ(r.violations, 0);
  EXPECT_DOUBLE_EQ(r.threshold, 40.0);
}

TEST(EntryBound, EntriesAboveThresholdObeyBound) {
  ScopedPrecision g(kPrec);
  const auto v = PotentialVnm::make(12, 3, {}, 2, kPrec);
  engine::ChainContext ctx(Real(1), v, 60, {kPrec, 16, 24});
  const auto a = engine::dtn_diff_matrix(ctx, 60);
  const auto table = spectrum::disk_eigenvalues(2, 12, 128);
  const auto q = spectrum::resolvent_budget(Real(1), v.eps, table).q;
  const auto r = engine::verify_lemma32(a, q, v.eps, 1.0, 2);
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.checked, 0);
  EXPECT_LE(r.worst_log2_ratio, 0);
  EXPECT_FALSE(r.scaled_by_jmax.empty());
  EXPECT_EQ(r.scaled_by_jmax.begin()->first, 40);
}

TEST(TailBound, DiskFormula) {
  const XReal q(0.8, kPrec), nsup(1.0 / 1728, kPrec);
  const double e = 3.375;
  const long dmax = 100;
  const double factor = 1 + (1.0 / 1728 + e) * 0.8;
  // sum_{j > D} 2 * 1000 * factor * 2^{-j} = 2^{1-D} 1000 factor
  EXPECT_NEAR(engine::tail_bound(dmax, q, nsup, e, 2).log2_abs(), 1 - dmax + std::log2(1000 * factor), 1e-9);
  EXPECT_THROW(engine::tail_bound(50, q, nsup, e, 2), PreconditionError);
}

TEST(Decay, SlopeIndependentOfSobolevWeight) {
  const std::vector<long> ns = {90, 100, 110};
  const auto r1 = engine::prop21_decay_check(1.0, 3, ns, 1.0, {kPrec, 16, 24});
  const auto r2 = engine::prop21_decay_check(1.0, 3, ns, 2.0, {kPrec, 16, 24});
  EXPECT_LE(r1.slope, -0.25);
  EXPECT_LE(r1.exp_slope, -0.25);
  EXPECT_LE(std::fabs(r1.exp_slope - r2.exp_slope), 0.02);
  EXPECT_TRUE(r1.holdout_ok);
}

TEST(Report, SolveReportPasses) {
  const auto& s = base();
  const auto r = engine::solve_report(*s.ctx, s.a, s.chains, s.q.to_double());
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.triangular);
  EXPECT_LT(r.quadrature_residual, 1e-6);
  EXPECT_LT(r.max_eps_kg, 1.0);
  EXPECT_EQ(r.entries, static_cast<long>(s.a.size()));
}
