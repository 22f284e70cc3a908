#include "dtn/dtn_engine.hpp"

#include "dtn/errors.hpp"
#include "dtn/spectral_gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace dtn::engine {

namespace bmp = boost::multiprecision;
using basis::DtnMatrix;
using basis::LogComplex;
using basis::ModeIndex;

namespace {

Real inv_sqrt_2pi() { return 1 / bmp::sqrt(2 * real_pi()); }

// |f| for a signed frequency.
long degree_of(long f) { return f < 0 ? -f : f; }

// Largest l >= 0 with |j2 + l s| <= D, for |j2| <= D.
int window_levels(long j2, long shift, long degree_max) {
  if (shift > 0) return static_cast<int>((degree_max - j2) / shift);
  return static_cast<int>((j2 + degree_max) / (-shift));
}

XReal signed_value(const LogComplex& c) {
  if (c.magnitude.is_zero()) return XReal::zero(c.magnitude.precision_bits());
  const double ph = std::fabs(c.phase);
  if (ph == 0) return c.magnitude;
  if (ph == std::numbers::pi) return -c.magnitude;
  throw UnsupportedError("adjoint_mismatch: complex entries are not supported");
}

}  // namespace

// ---------------------------------------------------------------------------

ChainContext::ChainContext(const Real& energy, const potentials::PotentialVnm& v, long jmax, const EngineOptions& opt)
    : v_(v), opt_(opt), jmax_(jmax) {
  if (v.d != 2) throw UnsupportedError("dtn_engine: the mode recursion is implemented for d = 2 only");
  if (jmax < 0) throw PreconditionError("ChainContext: jmax must be >= 0");
  if (!(energy > 0)) throw UnsupportedError("ChainContext: E must be positive");
  if (v.bump.profile_empty()) throw ConfigError("ChainContext: the bump does not meet the ray theta = 0");
  ScopedPrecision guard(opt.prec);
  energy_ = at_current_precision(energy);
  eps_ = at_current_precision(v.eps.to_real());
  rule_ = std::make_shared<const radial::SupportRule>(Real(v.bump.support_lo()), Real(v.bump.support_hi()),
                                                     opt.panels, opt.per_panel);
  phi_ = potentials::radial_profile(v, rule_->nodes());
  auto table = radial::build_mode_table(2, jmax + 1, energy_, *rule_, opt.prec);
  modes_.reserve(table.size());
  kernels_.reserve(table.size());
  kg_.reserve(table.size());
  bg_.reserve(table.size());
  for (auto& m : table) {
    modes_.push_back(std::make_shared<const radial::ModeData>(std::move(m)));
    kernels_.emplace_back(modes_.back(), rule_);
    kg_.push_back(2 * kernels_.back().row_sum_bound(phi_));
    bg_.push_back(2 * kernels_.back().boundary_gain(phi_));
  }
  const std::size_t top = kg_.size();
  kg_suffix_.resize(top);
  bg_suffix_.resize(top);
  kg_suffix_[top - 1] = kg_[top - 1];
  bg_suffix_[top - 1] = bg_[top - 1];
  for (std::size_t i = top - 1; i-- > 0;) {
    kg_suffix_[i] = bmp::max(kg_[i], kg_suffix_[i + 1]);
    bg_suffix_[i] = bmp::max(bg_[i], bg_suffix_[i + 1]);
  }
  const long j_star = static_cast<long>(std::ceil(to_double(bmp::sqrt(energy_)))) + 1;
  for (long j = j_star; j + 1 < static_cast<long>(top); ++j)
    if (kg_[j + 1] > kg_[j] || bg_[j + 1] > bg_[j]) monotone_ = false;
}

const radial::ModeData& ChainContext::mode(long degree) const {
  if (degree < 0 || degree > jmax_) throw PreconditionError("ChainContext: degree outside the table");
  return *modes_[degree];
}

const radial::GreenKernel& ChainContext::kernel(long degree) const {
  if (degree < 0 || degree > jmax_) throw PreconditionError("ChainContext: degree outside the table");
  return kernels_[degree];
}

const Real& ChainContext::k_g(long degree) const {
  if (degree < 0 || degree > jmax_) throw PreconditionError("ChainContext: degree outside the table");
  return kg_[degree];
}

const Real& ChainContext::boundary_gain(long degree) const {
  if (degree < 0 || degree > jmax_) throw PreconditionError("ChainContext: degree outside the table");
  return bg_[degree];
}

const Real& ChainContext::k_g_beyond(long from) const {
  if (from < 0) throw PreconditionError("ChainContext: negative degree");
  return kg_suffix_[std::min<std::size_t>(from, kg_suffix_.size() - 1)];
}

const Real& ChainContext::boundary_gain_beyond(long from) const {
  if (from < 0) throw PreconditionError("ChainContext: negative degree");
  return bg_suffix_[std::min<std::size_t>(from, bg_suffix_.size() - 1)];
}

// ---------------------------------------------------------------------------

ModeChain solve_boundary_mode(const ChainContext& ctx, long j2, int l_max, bool early_stop) {
  if (degree_of(j2) > ctx.jmax()) throw PreconditionError("solve_boundary_mode: |j2| outside the table");
  if (l_max < 0) throw PreconditionError("solve_boundary_mode: l_max must be >= 0");
  const unsigned prec = ctx.options().prec;
  ScopedPrecision guard(prec);
  ModeChain ch;
  ch.j2 = j2;
  ch.shift = ctx.potential().shift();
  ch.l_max = l_max;
  const std::size_t n = ctx.rule().size();

  {
    const radial::ModeData& m0 = ctx.mode(degree_of(j2));
    ChainLevel lv;
    lv.freq = j2;
    const Real c = inv_sqrt_2pi() / m0.jk;
    lv.w.resize(n);
    lv.sup = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lv.w[i] = c * m0.p[i];
      lv.sup = bmp::max(lv.sup, Real(bmp::abs(lv.w[i])));
    }
    lv.dw1 = inv_sqrt_2pi() * m0.k * m0.jpk / m0.jk;
    lv.p_total = 0;
    lv.q_total = 0;
    ch.levels.push_back(std::move(lv));
  }
  if (ctx.eps() == 0) l_max = ch.l_max = 0;

  const Real threshold = ldexp_real(Real(1), -static_cast<long>(prec / 2));
  Real scale = 0;
  std::vector<Real> g(n);
  for (int l = 1; l <= l_max; ++l) {
    const long f = j2 + l * ch.shift;
    if (degree_of(f) > ctx.jmax()) {
      ch.table_limited = true;
      break;
    }
    const ChainLevel& prev = ch.levels.back();
    for (std::size_t i = 0; i < n; ++i) g[i] = -ctx.eps() * ctx.phi()[i] * prev.w[i];
    radial::GreenSolution s = ctx.kernel(degree_of(f)).apply(g);
    ChainLevel lv;
    lv.freq = f;
    lv.w = std::move(s.u);
    lv.dw1 = s.du1;
    lv.p_total = s.p_total;
    lv.q_total = s.q_total;
    lv.sup = 0;
    for (const auto& x : lv.w) lv.sup = bmp::max(lv.sup, Real(bmp::abs(x)));
    const Real ad = bmp::abs(lv.dw1);
    ch.levels.push_back(std::move(lv));
    if (early_stop && l >= 2 && ad < threshold * scale) {
      ch.stopped_early = true;
      break;
    }
    scale = bmp::max(scale, ad);
  }
  ch.stop = static_cast<int>(ch.levels.size()) - 1;

  // geometric tail over the discarded levels: |w_{l+1}| <= eps K_G |w_l| on the support and
  // |w_{l+1}'(1)| <= eps B_G |w_l|, with the gains taken over every later degree
  long next_min = degree_of(ch.levels.back().freq + ch.shift);
  for (long f = ch.levels.back().freq + 2 * ch.shift; degree_of(f) < next_min; f += ch.shift) next_min = degree_of(f);
  Real kg = ctx.k_g_beyond(next_min);
  const Real bg = ctx.boundary_gain_beyond(next_min);
  for (const auto& lv : ch.levels) kg = bmp::max(kg, ctx.k_g(degree_of(lv.freq)));
  ch.eps_kg = ctx.eps() * kg;
  const Real eps_k_future = ctx.eps() * ctx.k_g_beyond(next_min);
  if (ctx.eps() == 0) {
    ch.tail = XReal::zero(prec);
  } else if (eps_k_future < 1) {
    ch.tail = XReal(Real(ctx.eps() * bg * ch.levels.back().sup / (1 - eps_k_future)));
  } else {
    ch.tail_finite = false;
    ch.tail = XReal::zero(prec);
  }
  return ch;
}

DtnMatrix dtn_diff_matrix(const ChainContext& ctx, long degree_max, std::vector<ModeChain>* chains) {
  if (degree_max < 0 || degree_max > ctx.jmax()) throw PreconditionError("dtn_diff_matrix: degree_max outside the table");
  ScopedPrecision guard(ctx.options().prec);
  DtnMatrix a;
  a.d = 2;
  a.energy = to_double(ctx.energy());
  {
    std::ostringstream os;
    os << "v_nm n=" << ctx.potential().n << " m=" << ctx.potential().m << (ctx.potential().conjugated ? " conj" : "");
    a.tag = os.str();
  }
  const Real s2pi = bmp::sqrt(2 * real_pi());
  const long shift = ctx.potential().shift();
  for (long j2 = -degree_max; j2 <= degree_max; ++j2) {
    ModeChain ch = solve_boundary_mode(ctx, j2, window_levels(j2, shift, degree_max), false);
    for (std::size_t l = 1; l < ch.levels.size(); ++l) {
      const ChainLevel& lv = ch.levels[l];
      a.set(ModeIndex::from_frequency(lv.freq), ModeIndex::from_frequency(j2), LogComplex::from_real(s2pi * lv.dw1));
    }
    if (chains) chains->push_back(std::move(ch));
  }
  return a;
}

DtnMatrix dtn_diff_matrix(const Real& energy, const potentials::PotentialVnm& v, long degree_max,
                          const EngineOptions& opt) {
  ChainContext ctx(energy, v, degree_max, opt);
  return dtn_diff_matrix(ctx, degree_max);
}

bool structurally_triangular(const DtnMatrix& a, long shift) {
  if (shift == 0) return a.entries.empty();
  for (const auto& [k, v] : a.entries) {
    const long diff = k.first.frequency() - k.second.frequency();
    if (diff % shift != 0 || diff / shift < 1) return false;
  }
  return true;
}

double adjoint_mismatch(const DtnMatrix& a_v, const DtnMatrix& a_vbar) {
  std::set<DtnMatrix::Key> keys;
  for (const auto& [k, v] : a_vbar.entries) keys.insert(k);
  for (const auto& [k, v] : a_v.entries) keys.insert({k.second, k.first});
  double worst = 0;
  for (const auto& k : keys) {
    const LogComplex* x = a_vbar.find(k.first, k.second);
    const LogComplex* y = a_v.find(k.second, k.first);
    if (!x || !y) {
      const LogComplex* present = x ? x : y;
      if (present && !present->magnitude.is_zero()) return 1.0;
      continue;
    }
    const XReal xv = signed_value(*x);
    const XReal yv = signed_value(y->conj());
    const XReal scale = max(xv.abs(), yv.abs());
    if (scale.is_zero()) continue;
    worst = std::max(worst, ((xv - yv).abs() / scale).to_double());
  }
  return worst;
}

// ---------------------------------------------------------------------------

nlohmann::json Lemma31Report::to_json() const {
  return {{"j2", j2}, {"psi_norm", psi_norm}, {"bound", bound}, {"margin", margin}, {"passed", passed}};
}

Lemma31Report verify_lemma31(const ChainContext& ctx, const ModeChain& chain, const XReal& q, const XReal& n_sup) {
  ScopedPrecision guard(ctx.options().prec);
  const radial::SupportRule& rule = ctx.rule();
  const Real two_pi = 2 * real_pi();
  const Real& a = rule.a();
  const Real& b = rule.b();
  Real total = 0;
  for (std::size_t l = 0; l < chain.levels.size(); ++l) {
    const ChainLevel& lv = chain.levels[l];
    const radial::ModeData& m = ctx.mode(degree_of(lv.freq));
    const Real mm = Real(m.j) * m.j;
    if (l == 0) {
      // w_0 = (2 pi)^{-1/2} J(kr)/J(k); Lommel: int_0^1 J(kr)^2 r dr = (J'(k)^2 + (1 - M^2/k^2) J(k)^2)/2
      const Real lommel = (m.jpk * m.jpk + (1 - mm / (m.k * m.k)) * m.jk * m.jk) / 2;
      total += lommel / (m.jk * m.jk);
      continue;
    }
    Real inside = 0;
    for (std::size_t i = 0; i < rule.size(); ++i) inside += rule.weights()[i] * lv.w[i] * lv.w[i] * rule.nodes()[i];
    // below the support w = -(Q/C) J(kr); above it w = -(P/C) q(r)
    const Real ka = m.k * a, kb = m.k * b;
    const Real below = a * a / 2 * (m.pz_a * m.pz_a + (1 - mm / (ka * ka)) * m.p_a * m.p_a);
    const Real above = m.qz_1 * m.qz_1 / 2 - b * b / 2 * (m.qz_b * m.qz_b + (1 - mm / (kb * kb)) * m.q_b * m.q_b);
    const Real cq = lv.q_total / m.wronskian, cp = lv.p_total / m.wronskian;
    total += two_pi * (inside + cq * cq * below + cp * cp * above);
  }
  Lemma31Report r;
  r.j2 = chain.j2;
  r.psi_norm = to_double(bmp::sqrt(total));
  const XReal e_abs(bmp::abs(ctx.energy()));
  r.bound = (XReal(1.0) + (n_sup + e_abs) * q).to_double();
  r.margin = r.bound - r.psi_norm;
  r.passed = r.margin > 0;
  return r;
}

double harmonic_extension_norm(long j) { return 1.0 / std::sqrt(2.0 * static_cast<double>(j) + 2.0); }

// ---------------------------------------------------------------------------

nlohmann::json Lemma32Report::to_json() const {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [j, v] : scaled_by_jmax) per[std::to_string(j)] = v;
  nlohmann::json out = {{"threshold", threshold}, {"C", constant},    {"checked", checked},
                        {"violations", violations}, {"passed", passed}, {"log2_scaled_by_jmax", per}};
  if (checked > 0) {
    out["worst_log2_ratio"] = worst_log2_ratio;
  } else {
    out["worst_log2_ratio"] = nullptr;
  }
  return out;
}

Lemma32Report verify_lemma32(const DtnMatrix& a, const XReal& q, const XReal& n_sup, double energy, int d,
                             double constant) {
  (void)d;
  Lemma32Report r;
  r.constant = constant;
  r.threshold = 10 * (1 + std::sqrt(std::fabs(energy))) * (1 + std::sqrt(std::fabs(energy)));
  r.worst_log2_ratio = -std::numeric_limits<double>::infinity();
  const double factor_log2 =
      std::log2(constant) + (XReal(1.0) + (n_sup + XReal(std::fabs(energy))) * q).log2_abs();
  for (const auto& [k, v] : a.entries) {
    const long jm = std::max(k.first.j, k.second.j);
    if (static_cast<double>(jm) < r.threshold || v.magnitude.is_zero()) continue;
    ++r.checked;
    const double mag = v.magnitude.log2_abs();
    const double ratio = mag - (factor_log2 - static_cast<double>(jm));
    r.worst_log2_ratio = std::max(r.worst_log2_ratio, ratio);
    if (ratio > 0) ++r.violations;
    auto it = r.scaled_by_jmax.find(jm);
    const double scaled = mag + static_cast<double>(jm);
    if (it == r.scaled_by_jmax.end()) {
      r.scaled_by_jmax[jm] = scaled;
    } else {
      it->second = std::max(it->second, scaled);
    }
  }
  r.passed = r.violations == 0;
  return r;
}

XReal tail_bound(long degree_max, const XReal& q, const XReal& n_sup, double energy, int d, double constant) {
  const double threshold = 10 * (1 + std::sqrt(std::fabs(energy))) * (1 + std::sqrt(std::fabs(energy)));
  if (static_cast<double>(degree_max) < threshold) {
    std::ostringstream os;
    os << "tail_bound: degree_max " << degree_max << " below 10(1+sqrt E)^2 = " << threshold;
    throw PreconditionError(os.str());
  }
  const unsigned bits = std::max(q.precision_bits(), n_sup.precision_bits());
  ScopedPrecision guard(bits);
  XReal sum = XReal::zero(bits);
  if (d == 2) {
    // sum_{j > D} 2 * 2^{-j} = 2^{1-D}
    sum = XReal::from_log2(1, 1.0 - static_cast<double>(degree_max), bits);
  } else {
    for (long j = degree_max + 1;; ++j) {
      const XReal term = XReal(Real(basis::dim_harmonics(d, j))) * XReal::from_log2(1, -static_cast<double>(j), bits);
      sum += term;
      if (j > degree_max + 16 && term.log2_abs() < sum.log2_abs() - static_cast<double>(bits) - 8) break;
    }
  }
  const XReal factor = XReal(1.0, bits) + (n_sup + XReal(std::fabs(energy), bits)) * q;
  return XReal(constant, bits) * factor * sum;
}

// ---------------------------------------------------------------------------

nlohmann::json DecayReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({{"n", p.n}, {"bound_log2", p.bound_log2}, {"Q", p.q}, {"entries", p.entries}});
  return {{"energy", energy}, {"m", m},           {"sigma", sigma},           {"points", pts},
          {"slope", slope},   {"exp_slope", exp_slope}, {"log2_C2", c2_fit}, {"holdout_ok", holdout_ok},
          {"passed", passed}};
}

namespace {

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

}  // namespace

DecayReport prop21_decay_check(double energy, int m, const std::vector<long>& n_list, double sigma,
                               const EngineOptions& opt, const potentials::BumpSpec& bump) {
  if (n_list.size() < 2) throw PreconditionError("prop21_decay_check: need at least two n values");
  const double threshold = 20 * (1 + std::sqrt(energy)) * (1 + std::sqrt(energy));
  for (long n : n_list)
    if (static_cast<double>(n) <= threshold) {
      std::ostringstream os;
      os << "prop21_decay_check: n = " << n << " must exceed 20(1+sqrt E)^2 = " << threshold;
      throw PreconditionError(os.str());
    }
  ScopedPrecision guard(opt.prec);
  const auto table = spectrum::disk_eigenvalues(2, std::max(4 * energy, 40.0), std::min(opt.prec, 128u));
  DecayReport r;
  r.energy = energy;
  r.m = m;
  r.sigma = sigma;
  std::vector<double> xs, ys, ys_exp, log_fac;
  for (long n : n_list) {
    const auto v = potentials::PotentialVnm::make(n, m, bump, 2, opt.prec);
    ChainContext ctx(Real(energy), v, n, opt);
    const DtnMatrix a = dtn_diff_matrix(ctx, n);
    const XReal bound = basis::op_norm_sobolev_bound(a, sigma);
    const auto budget = spectrum::resolvent_budget(Real(energy), v.eps, table);
    DecayPoint p;
    p.n = n;
    p.bound_log2 = bound.log2_abs();
    p.q = budget.q.to_double();
    p.entries = static_cast<long>(a.size());
    r.points.push_back(p);
    xs.push_back(static_cast<double>(n));
    ys.push_back(p.bound_log2);
    ys_exp.push_back(p.bound_log2 - (2 * sigma + 2) * std::log2(1.0 + static_cast<double>(n)));
    log_fac.push_back(std::log2(1 + p.q + energy * p.q));
  }
  r.slope = ls_slope(xs, ys);
  r.exp_slope = ls_slope(xs, ys_exp);
  r.c2_fit = ys[0] - log_fac[0] + xs[0] / 4;
  r.holdout_ok = true;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (ys[i] > r.c2_fit + log_fac[i] - xs[i] / 4) r.holdout_ok = false;
  r.passed = r.slope <= -0.25;
  return r;
}

// ---------------------------------------------------------------------------

nlohmann::json SolveReport::to_json() const {
  return {{"E", energy},
          {"n", n},
          {"m", m},
          {"degree_max", degree_max},
          {"precision_bits", precision_bits},
          {"quadrature_residual", quadrature_residual},
          {"residual_tolerance", residual_tolerance},
          {"Q", q},
          {"max_eps_KG", max_eps_kg},
          {"entries", entries},
          {"triangular", triangular},
          {"passed", passed}};
}

SolveReport solve_report(const ChainContext& ctx, const DtnMatrix& a, const std::vector<ModeChain>& chains, double q,
                         double tolerance) {
  SolveReport r;
  r.energy = to_double(ctx.energy());
  r.n = ctx.potential().n;
  r.m = ctx.potential().m;
  r.degree_max = ctx.jmax();
  r.precision_bits = ctx.options().prec;
  r.residual_tolerance = tolerance;
  r.q = q;
  r.entries = static_cast<long>(a.size());
  r.triangular = structurally_triangular(a, ctx.potential().shift());
  bool tails_ok = ctx.gains_monotone();
  for (const auto& ch : chains) {
    r.max_eps_kg = std::max(r.max_eps_kg, to_double(ch.eps_kg));
    tails_ok = tails_ok && ch.tail_finite;
  }
  // largest entry, recomputed with a coarser rule
  const DtnMatrix::Key* best = nullptr;
  XReal best_mag;
  for (const auto& [k, v] : a.entries)
    if (!best || v.magnitude > best_mag) {
      best = &k;
      best_mag = v.magnitude;
    }
  if (best) {
    ScopedPrecision guard(ctx.options().prec);
    const long f1 = best->first.frequency(), f2 = best->second.frequency();
    EngineOptions coarse = ctx.options();
    coarse.per_panel = std::max(8, coarse.per_panel - 8);
    const long jmax = std::max(degree_of(f1), degree_of(f2)) + std::abs(ctx.potential().shift());
    const long jmax_c = std::min(jmax, ctx.jmax());
    ChainContext c2(ctx.energy(), ctx.potential(), std::max(jmax_c, std::max(degree_of(f1), degree_of(f2))), coarse);
    const long shift = ctx.potential().shift();
    const int l = static_cast<int>((f1 - f2) / shift);
    ModeChain ch = solve_boundary_mode(c2, f2, l, false);
    const Real s2pi = bmp::sqrt(2 * real_pi());
    const XReal other(Real(s2pi * ch.levels.at(l).dw1));
    const XReal ref = signed_value(*a.find(best->first, best->second));
    r.quadrature_residual = ((ref - other).abs() / ref.abs()).to_double();
  }
  r.passed = r.triangular && tails_ok && r.quadrature_residual <= tolerance;
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> fd_chain_derivatives(double energy, const potentials::PotentialVnm& v, long j2, int l_max,
                                         int size) {
  if (v.d != 2) throw UnsupportedError("fd_chain_derivatives: d = 2 only");
  const double eps = v.eps.to_double();
  const long shift = v.shift();
  long jmax = degree_of(j2);
  for (int l = 1; l <= l_max; ++l) jmax = std::max(jmax, degree_of(j2 + l * shift));
  auto run = [&](const radial::FdGrid& grid) {
    std::vector<double> phi(grid.size), out;
    for (int i = 0; i < grid.size; ++i) phi[i] = potentials::bump_phi(v.bump, grid.r(i), 0.0);
    std::vector<double> zero(grid.size, 0.0), g(grid.size);
    radial::FdSolution prev = radial::fd_solve_grid(2, degree_of(j2), energy, grid, zero, 1 / std::sqrt(2 * std::numbers::pi));
    out.push_back(prev.du1);
    for (int l = 1; l <= l_max; ++l) {
      for (int i = 0; i < grid.size; ++i) g[i] = -eps * phi[i] * prev.u[i];
      prev = radial::fd_solve_grid(2, degree_of(j2 + l * shift), energy, grid, g, 0.0);
      out.push_back(prev.du1);
    }
    return out;
  };
  const radial::FdGrid coarse = radial::FdGrid::for_degree(jmax, size);
  radial::FdGrid fine = coarse;
  fine.size = 2 * size - 1;
  const auto c = run(coarse);
  const auto f = run(fine);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = (4 * f[i] - c[i]) / 3;
  return out;
}

DtnMatrix fd_diff_matrix(double energy, const potentials::PotentialVnm& v, long degree_max, int size) {
  DtnMatrix a;
  a.d = 2;
  a.energy = energy;
  a.tag = "fd oracle";
  const long shift = v.shift();
  const double s2pi = std::sqrt(2 * std::numbers::pi);
  if (v.eps.is_zero()) return a;
  for (long j2 = -degree_max; j2 <= degree_max; ++j2) {
    const int l_max = window_levels(j2, shift, degree_max);
    if (l_max < 1) continue;
    const auto d = fd_chain_derivatives(energy, v, j2, l_max, size);
    for (int l = 1; l <= l_max; ++l)
      a.set(ModeIndex::from_frequency(j2 + l * shift), ModeIndex::from_frequency(j2),
            LogComplex::from_real(Real(s2pi * d[l])));
  }
  return a;
}

}  // namespace dtn::engine
