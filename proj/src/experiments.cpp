#include "dtn/experiments.hpp"

#include "dtn/errors.hpp"
#include "dtn/radial.hpp"
#include "dtn/special_functions.hpp"
#include "dtn/sphere_basis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace dtn::experiments {

namespace bmp = boost::multiprecision;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::string fmt(double x) {
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ln(3 + 1/delta) = -ln delta + log1p(3 delta), for delta > 0.
Real log_three_plus_inverse(const XReal& delta) {
  ScopedPrecision guard(delta.precision_bits());
  const Real x = delta.to_real();
  return -delta.log_mag() + bmp::log1p(3 * x);
}

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentParams::validate() const {
  std::ostringstream os;
  require(d >= 2, "d must be >= 2");
  require(rho > 1, "rho must exceed 1");
  require(m > d, "m must exceed d");
  require(s2 > m, "s2 must exceed m");
  require(A > 0 && B > 0, "A and B must be positive");
  require(tau > 0 && tau < 1, "tau must lie in (0, 1)");
  require(eps_ball > 0, "eps_ball must be positive");
  require(sigma > 0, "sigma must be positive");
  require(precision >= 64, "precision must be at least 64 bits");
  for (double s : s_grid) require(s >= 0 && s <= s2, "s_grid values must lie in [0, s2]");
  require(!alpha || *alpha >= 0, "alpha must be >= 0");
  require(!beta || *beta >= 0, "beta must be >= 0");
  if (alpha && beta) require(std::fabs(*alpha + *beta - s1()) <= 1e-12, "alpha + beta must equal s1 = (m - d)/d");
  if (alpha && !beta) require(*alpha <= s1() + 1e-12, "alpha must not exceed s1 = (m - d)/d");
  if (beta && !alpha) require(*beta <= s1() + 1e-12, "beta must not exceed s1 = (m - d)/d");
  require(tail_ratio > 0 && tail_ratio < 1, "tail_ratio must lie in (0, 1)");
  require(residual_tolerance > 0, "residual_tolerance must be positive");
  require(lemma32_constant > 0, "lemma32_constant must be positive");
  require(!energy || *energy > 0, "energy must be positive");
  require(!n || *n >= 1, "n must be >= 1");
  require(!degree_max || *degree_max >= 1, "degree_max must be >= 1");
  require(panels >= 1 && per_panel >= 8, "quadrature needs panels >= 1 and per_panel >= 8");
  bump.validate();
}

std::vector<double> ExperimentParams::grid() const {
  if (!s_grid.empty()) return s_grid;
  std::vector<double> g(11);
  for (int i = 0; i <= 10; ++i) g[i] = s2 * i / 10.0;
  return g;
}

std::pair<double, double> ExperimentParams::alpha_beta() const {
  if (alpha && beta) return {*alpha, *beta};
  if (alpha) return {*alpha, std::max(0.0, s1() - *alpha)};
  if (beta) return {std::max(0.0, s1() - *beta), *beta};
  return {0.0, s1()};
}

engine::EngineOptions ExperimentParams::engine_options(unsigned prec) const {
  engine::EngineOptions o;
  o.prec = prec;
  o.panels = panels;
  o.per_panel = per_panel;
  return o;
}

nlohmann::json ExperimentParams::to_json() const {
  nlohmann::json j = {{"d", d},
                      {"rho", rho},
                      {"m", m},
                      {"s2", s2},
                      {"A", A},
                      {"B", B},
                      {"kappa", kappa},
                      {"tau", tau},
                      {"eps_ball", eps_ball},
                      {"s_grid", grid()},
                      {"sigma", sigma},
                      {"precision", precision},
                      {"tail_ratio", tail_ratio},
                      {"residual_tolerance", residual_tolerance},
                      {"lemma32_constant", lemma32_constant},
                      {"precision_check", precision_check},
                      {"precision_tolerance_log2", precision_tolerance_log2},
                      {"zero_potential", zero_potential},
                      {"bump", bump.to_json()},
                      {"panels", panels},
                      {"per_panel", per_panel}};
  const auto [a, b] = alpha_beta();
  j["alpha"] = a;
  j["beta"] = b;
  j["energy"] = energy ? nlohmann::json(*energy) : nlohmann::json(nullptr);
  j["n"] = n ? nlohmann::json(*n) : nlohmann::json(nullptr);
  j["degree_max"] = degree_max ? nlohmann::json(*degree_max) : nlohmann::json(nullptr);
  return j;
}

ExperimentParams ExperimentParams::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "d",          "rho",        "m",          "s2",         "A",          "B",
      "kappa",      "tau",        "eps_ball",   "s_grid",     "alpha",      "beta",
      "sigma",      "precision",  "tail_ratio", "residual_tolerance",       "lemma32_constant",
      "precision_check",          "precision_tolerance_log2", "energy",     "n",
      "degree_max", "zero_potential",           "bump",       "panels",     "per_panel"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
  ExperimentParams p;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    auto get_opt = [&](const char* key, auto& field) {
      if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<typename std::decay_t<decltype(field)>::value_type>();
    };
    get("d", p.d);
    get("rho", p.rho);
    get("m", p.m);
    get("s2", p.s2);
    get("A", p.A);
    get("B", p.B);
    get("kappa", p.kappa);
    get("tau", p.tau);
    get("eps_ball", p.eps_ball);
    get("s_grid", p.s_grid);
    get_opt("alpha", p.alpha);
    get_opt("beta", p.beta);
    get("sigma", p.sigma);
    get("precision", p.precision);
    get("tail_ratio", p.tail_ratio);
    get("residual_tolerance", p.residual_tolerance);
    get("lemma32_constant", p.lemma32_constant);
    get("precision_check", p.precision_check);
    get("precision_tolerance_log2", p.precision_tolerance_log2);
    get_opt("energy", p.energy);
    get_opt("n", p.n);
    get_opt("degree_max", p.degree_max);
    get("zero_potential", p.zero_potential);
    get("panels", p.panels);
    get("per_panel", p.per_panel);
    if (j.contains("bump")) p.bump = potentials::BumpSpec::from_json(j.at("bump"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------

XReal stability_rhs(const XReal& delta, double energy, const ExperimentParams& p) {
  if (delta.sign() <= 0) throw PreconditionError("stability_rhs: delta must be positive");
  if (energy < 0) throw PreconditionError("stability_rhs: E must be >= 0");
  const auto [alpha, beta] = p.alpha_beta();
  if (std::fabs(alpha + beta - p.s1()) > 1e-12) throw ConfigError("stability_rhs: alpha + beta must equal s1");
  const unsigned bits = delta.precision_bits();
  ScopedPrecision guard(bits);
  const double base = 1 + std::sqrt(energy);
  const XReal first = XReal(p.A * base, bits) * delta.pow(Real(p.tau));
  const XReal second =
      XReal(p.B, bits) * XReal(base, bits).pow(Real(-alpha)) * XReal(log_three_plus_inverse(delta)).pow(Real(-beta));
  return first + second;
}

InstabilityTerms instability_terms(const XReal& delta, double energy, double s, const ExperimentParams& p) {
  if (s < 0 || s > p.s2) throw PreconditionError("instability_rhs: s must lie in [0, s2]");
  if (delta.sign() < 0) throw PreconditionError("instability_rhs: delta must be >= 0");
  if (energy < 0) throw PreconditionError("instability_rhs: E must be >= 0");
  const unsigned bits = std::max(delta.precision_bits(), 64u);
  ScopedPrecision guard(bits);
  const double base = 1 + std::sqrt(energy);
  InstabilityTerms t;
  const XReal base_pow_2 = XReal(base, bits).pow(Real(2 * (s - p.s2)));
  if (delta.is_zero()) {
    // ln(3 + 1/delta) is infinite: the second term survives only at s = 0
    t.first = XReal::zero(bits);
    t.second = s == 0 ? XReal(p.B, bits) * base_pow_2 : XReal::zero(bits);
  } else {
    t.first = XReal(p.A, bits) * XReal(base, bits).pow(Real(p.kappa)) * delta.pow(Real(p.tau));
    t.second = XReal(p.B, bits) * base_pow_2 * XReal(log_three_plus_inverse(delta)).pow(Real(-s));
  }
  t.total = t.first + t.second;
  return t;
}

XReal instability_rhs(const XReal& delta, double energy, double s, const ExperimentParams& p) {
  return instability_terms(delta, energy, s, p).total;
}

long default_frequency(double energy) {
  if (!(energy >= 0)) throw PreconditionError("default_frequency: E must be >= 0");
  const double t = 1 + std::sqrt(energy);
  return static_cast<long>(std::floor(20 * t * t)) + 1;
}

// ---------------------------------------------------------------------------

nlohmann::json DeltaCertificate::to_json() const {
  return {{"degree_max", degree_max},
          {"precision_bits", precision_bits},
          {"sum_abs", sum_abs.to_json()},
          {"sum_abs_inflated", inflated.to_json()},
          {"chain_tail", chain_tail.to_json()},
          {"window_tail", window_tail.to_json()},
          {"delta", delta.to_json()},
          {"delta_log2", delta.log2_abs()},
          {"Q", q.to_json()},
          {"quadrature_residual", quadrature_residual},
          {"solve", solve.to_json()},
          {"lemma32", lemma32.to_json()},
          {"window_iterations", window_iterations},
          {"tail_converged", tail_converged},
          {"passed", passed}};
}

XReal window_tail_bound(long degree_max, const XReal& q, const XReal& n_sup, double energy, int d, double constant) {
  const double threshold = 10 * (1 + std::sqrt(std::fabs(energy))) * (1 + std::sqrt(std::fabs(energy)));
  if (static_cast<double>(degree_max) < threshold) {
    std::ostringstream os;
    os << "window_tail_bound: degree_max " << degree_max << " below 10(1+sqrt E)^2 = " << threshold;
    throw PreconditionError(os.str());
  }
  const unsigned bits = std::max(q.precision_bits(), n_sup.precision_bits());
  ScopedPrecision guard(bits);
  // P(j) = sum_{i <= j} p_i; positions with max degree j: P(j)^2 - P(j-1)^2 = p_j (2 P(j) - p_j)
  Real cum = 0;
  for (long j = 0; j <= degree_max; ++j) cum += basis::dim_harmonics(d, j);
  XReal sum = XReal::zero(bits);
  for (long j = degree_max + 1;; ++j) {
    const Real pj = basis::dim_harmonics(d, j);
    cum += pj;
    const XReal term = XReal(Real(pj * (2 * cum - pj))) * XReal::from_log2(1, -static_cast<double>(j), bits);
    sum += term;
    if (j > degree_max + 16 && term.log2_abs() < sum.log2_abs() - static_cast<double>(bits) - 8) break;
  }
  const XReal factor = XReal(1.0, bits) + (n_sup + XReal(std::fabs(energy), bits)) * q;
  return XReal(constant, bits) * factor * sum;
}

DeltaCertificate certify_delta(double energy, const potentials::PotentialVnm& v, const ExperimentParams& p,
                               unsigned prec, std::optional<long> fixed_degree_max, basis::DtnMatrix* matrix_out) {
  ScopedPrecision guard(prec);
  DeltaCertificate c;
  c.precision_bits = prec;
  const auto table = spectrum::disk_eigenvalues(v.d, 2 * energy + 10, 128);
  c.q = spectrum::resolvent_budget(Real(energy), v.eps, table).q;
  const double threshold = 10 * (1 + std::sqrt(energy)) * (1 + std::sqrt(energy));
  long deg = fixed_degree_max ? *fixed_degree_max : std::max<long>(v.n, static_cast<long>(std::ceil(threshold)));
  const auto opt = p.engine_options(prec);
  c.sum_abs = c.inflated = c.chain_tail = c.window_tail = c.delta = XReal::zero(prec);
  if (v.eps.is_zero()) {
    // the difference vanishes identically
    c.degree_max = deg;
    c.tail_converged = true;
    c.solve.passed = true;
    c.solve.triangular = true;
    c.solve.precision_bits = prec;
    c.lemma32.passed = true;
    c.passed = true;
    return c;
  }
  for (int iter = 0; iter < 8; ++iter) {
    c.window_iterations = iter + 1;
    engine::ChainContext ctx(Real(energy), v, deg, opt);
    std::vector<engine::ModeChain> chains;
    basis::DtnMatrix a = engine::dtn_diff_matrix(ctx, deg, &chains);
    c.degree_max = deg;
    c.sum_abs = basis::op_norm_linf_bound(a);
    c.window_tail = window_tail_bound(deg, c.q, v.eps, energy, v.d, p.lemma32_constant);
    const XReal target = XReal(p.tail_ratio, prec) * c.sum_abs;
    c.tail_converged = c.window_tail <= target;
    if (fixed_degree_max || c.tail_converged || c.sum_abs.is_zero()) {
      c.solve = engine::solve_report(ctx, a, chains, c.q.to_double(), p.residual_tolerance);
      c.quadrature_residual = c.solve.quadrature_residual;
      c.lemma32 = engine::verify_lemma32(a, c.q, v.eps, energy, v.d, p.lemma32_constant);
      bool tails_finite = true;
      c.chain_tail = XReal::zero(prec);
      for (const auto& ch : chains) {
        tails_finite = tails_finite && ch.tail_finite;
        c.chain_tail += ch.tail;
      }
      const double allowance = std::max(10 * c.quadrature_residual, std::ldexp(1.0, -40));
      c.inflated = c.sum_abs * XReal(1 + allowance, prec);
      c.delta = c.inflated + c.chain_tail + c.window_tail;
      c.passed = c.solve.passed && c.lemma32.passed && c.tail_converged && tails_finite;
      if (matrix_out) *matrix_out = std::move(a);
      return c;
    }
    deg += static_cast<long>(std::ceil(c.window_tail.log2_abs() - target.log2_abs())) + 2;
  }
  throw PrecisionExhausted("certify_delta: degree window did not converge");
}

// ---------------------------------------------------------------------------

nlohmann::json PipelineReport::to_json(bool with_timings) const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& s : points)
    pts.push_back({{"s", s.s},
                   {"rhs", s.rhs.to_json()},
                   {"rhs_log2", s.rhs.log2_abs()},
                   {"first_term_log2", s.first.log2_abs()},
                   {"second_term_log2", s.second.log2_abs()},
                   {"margin_log2", s.margin_log2},
                   {"passed", s.passed}});
  nlohmann::json j = {{"params", params.to_json()},
                      {"gap", gap.to_json()},
                      {"energy", energy},
                      {"n", n},
                      {"precision_bits", precision_bits},
                      {"lhs", lhs.to_json()},
                      {"lhs_log2", lhs.log2_abs()},
                      {"Q", q.to_json()},
                      {"dist_free", dist_free},
                      {"delta", delta.to_json()},
                      {"points", pts},
                      {"eps_below_ball", eps_below_ball},
                      {"halves_ok", halves_ok},
                      {"cm_norm", cm_norm},
                      {"precision_stable", precision_stable},
                      {"flags", flags},
                      {"verdict", verdict}};
  j["precision_change_log2"] = precision_change_log2 ? nlohmann::json(*precision_change_log2) : nlohmann::json(nullptr);
  if (with_timings) {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [k, v] : runtimes) t[k] = v;
    j["runtimes_s"] = t;
  }
  return j;
}

PipelineReport cmd_theorem22(const ExperimentParams& p) {
  p.validate();
  if (p.d != 2) throw UnsupportedError("theorem22: the DtN engine supports d = 2 only");
  const auto t_all = std::chrono::steady_clock::now();
  auto t0 = t_all;
  PipelineReport r;
  r.params = p;
  r.precision_bits = p.precision;
  ScopedPrecision guard(p.precision);

  r.gap = spectrum::find_gap_energy(p.rho, p.d, std::nullopt, 128);
  r.energy = p.energy ? *p.energy : r.gap.energy;
  if (p.energy) r.flags.push_back("energy overridden; gap interval not used");
  r.n = p.n ? *p.n : default_frequency(r.energy);
  r.runtimes.emplace_back("gap", elapsed(t0));

  const potentials::PotentialVnm v =
      p.zero_potential ? potentials::PotentialVnm::with_amplitude(r.n, p.m, XReal::zero(p.precision), p.bump, p.d)
                       : potentials::PotentialVnm::make(r.n, p.m, p.bump, p.d, p.precision);
  r.lhs = v.eps;
  r.eps_below_ball = r.lhs < XReal(p.eps_ball, p.precision);

  t0 = std::chrono::steady_clock::now();
  r.delta = certify_delta(r.energy, v, p, p.precision, p.degree_max);
  r.q = r.delta.q;
  {
    const auto table = spectrum::disk_eigenvalues(p.d, 2 * r.energy + 10, 128);
    r.dist_free = to_double(spectrum::distance_to_spectrum(table, Real(r.energy)));
  }
  r.runtimes.emplace_back("delta", elapsed(t0));

  bool all_points = true;
  r.halves_ok = true;
  const XReal half_lhs = r.lhs * XReal(0.5, p.precision);
  for (double s : p.grid()) {
    const InstabilityTerms t = instability_terms(r.delta.delta, r.energy, s, p);
    SPoint pt;
    pt.s = s;
    pt.rhs = t.total;
    pt.first = t.first;
    pt.second = t.second;
    pt.margin_log2 = r.lhs.log2_abs() - t.total.log2_abs();
    pt.passed = r.lhs > t.total;
    all_points = all_points && pt.passed;
    r.halves_ok = r.halves_ok && t.first < half_lhs && t.second < half_lhs;
    r.points.push_back(pt);
  }

  if (p.zero_potential) {
    r.flags.push_back("zero potential: delta = 0 and LHS = 0, so LHS > RHS cannot hold");
  } else {
    t0 = std::chrono::steady_clock::now();
    r.cm_norm = potentials::cm_norm_estimate(v, p.m, 41).value;
    r.runtimes.emplace_back("cm_norm", elapsed(t0));
  }

  if (p.precision_check && !p.zero_potential) {
    t0 = std::chrono::steady_clock::now();
    const unsigned hi = 2 * p.precision;
    const auto v2 = potentials::PotentialVnm::make(r.n, p.m, p.bump, p.d, hi);
    const DeltaCertificate c2 = certify_delta(r.energy, v2, p, hi, r.delta.degree_max);
    const XReal diff = (c2.delta - r.delta.delta).abs();
    r.precision_change_log2 = diff.is_zero() ? -std::numeric_limits<double>::infinity()
                                             : diff.log2_abs() - r.delta.delta.log2_abs();
    r.precision_stable = *r.precision_change_log2 <= p.precision_tolerance_log2 && c2.passed == r.delta.passed;
    if (!r.precision_stable) r.flags.push_back("delta bound changed under doubled precision");
    r.runtimes.emplace_back("precision_check", elapsed(t0));
  }

  if (!r.gap.reverified) r.flags.push_back("gap interval failed re-verification");
  if (!r.eps_below_ball) r.flags.push_back("sup |v| is not below eps_ball");
  if (!r.delta.passed) r.flags.push_back("delta certificate failed");
  if (!all_points) r.flags.push_back("LHS <= RHS for some s");
  r.verdict = !p.zero_potential && r.gap.reverified && r.eps_below_ball && r.delta.passed && r.precision_stable &&
              all_points;
  r.runtimes.emplace_back("total", elapsed(t_all));
  return r;
}

// ---------------------------------------------------------------------------

SweepAxis parse_axis(const std::string& name) {
  if (name == "n") return SweepAxis::n;
  if (name == "E" || name == "energy") return SweepAxis::energy;
  if (name == "m") return SweepAxis::m;
  throw ConfigError("unknown sweep axis '" + name + "' (expected n, E or m)");
}

std::vector<double> parse_range(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("range '" + spec + "' is not start:stop:step");
    }
  }
  if (parts.size() == 2) parts.push_back(1.0);
  if (parts.size() != 3) throw ConfigError("range '" + spec + "' is not start:stop:step");
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (!(step > 0)) throw ConfigError("range step must be positive");
  std::vector<double> out;
  const double slack = 1e-9 * step;
  for (long i = 0;; ++i) {
    const double x = start + static_cast<double>(i) * step;
    if (x > stop + slack) break;
    out.push_back(x);
  }
  return out;
}

std::string sweep_header() {
  return "axis,value,E,n,m,degree_max,eps_log2,Q,delta_log2,sum_abs_log2,window_tail_log2,sobolev_bound_log2,"
         "lhs_log2,stability_rhs_log2,instability_rhs_min_log2,instability_rhs_max_log2,verdict,status,error\n";
}

std::string cmd_sweep(SweepAxis axis, const std::vector<double>& values, const ExperimentParams& p) {
  p.validate();
  std::ostringstream os;
  os << sweep_header();
  if (values.empty()) return os.str();
  const auto gap = spectrum::find_gap_energy(p.rho, p.d, std::nullopt, 128);
  const double e0 = p.energy ? *p.energy : gap.energy;
  const long n0 = p.n ? *p.n : default_frequency(e0);
  const char* axis_name = axis == SweepAxis::n ? "n" : axis == SweepAxis::energy ? "E" : "m";
  for (double x : values) {
    ExperimentParams q = p;
    double energy = e0;
    long n = n0;
    if (axis == SweepAxis::energy) energy = x;
    if (axis != SweepAxis::energy && std::fabs(x - std::round(x)) > 1e-9)
      throw ConfigError(std::string("sweep axis ") + axis_name + " takes integer values");
    if (axis == SweepAxis::n) n = std::lround(x);
    if (axis == SweepAxis::m) {
      q.m = static_cast<int>(std::lround(x));
      q.alpha.reset();
      q.beta.reset();
      if (p.alpha) q.alpha = std::min(*p.alpha, q.s1());
    }
    os << axis_name << ',' << fmt(x) << ',' << fmt(energy) << ',' << n << ',' << q.m << ',';
    try {
      if (q.m <= q.d) throw PreconditionError("m must exceed d");
      if (q.s2 <= q.m) throw PreconditionError("s2 must exceed m");
      ScopedPrecision guard(q.precision);
      const auto v = potentials::PotentialVnm::make(n, q.m, q.bump, q.d, q.precision);
      basis::DtnMatrix a;
      const DeltaCertificate c = certify_delta(energy, v, q, q.precision, q.degree_max, &a);
      basis::DtnMatrix low;
      low.d = a.d;
      for (const auto& [k, val] : a.entries)
        if (std::max(k.first.j, k.second.j) <= n) low.entries.emplace(k, val);
      const XReal sob = basis::op_norm_sobolev_bound(low, q.sigma);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      bool verdict = c.passed && v.eps < XReal(q.eps_ball, q.precision);
      for (double s : q.grid()) {
        const XReal rhs = instability_rhs(c.delta, energy, s, q);
        lo = std::min(lo, rhs.log2_abs());
        hi = std::max(hi, rhs.log2_abs());
        verdict = verdict && v.eps > rhs;
      }
      const XReal stab = stability_rhs(c.delta, energy, q);
      os << c.degree_max << ',' << fmt(v.eps.log2_abs()) << ',' << fmt(c.q.to_double()) << ','
         << fmt(c.delta.log2_abs()) << ',' << fmt(c.sum_abs.log2_abs()) << ',' << fmt(c.window_tail.log2_abs()) << ','
         << fmt(sob.log2_abs()) << ',' << fmt(v.eps.log2_abs()) << ',' << fmt(stab.log2_abs()) << ',' << fmt(lo)
         << ',' << fmt(hi) << ',' << (verdict ? "true" : "false") << ",ok,\n";
    } catch (const std::exception& e) {
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << ",,,,,,,,,,,false,failed," << msg << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

struct Suite {
  nlohmann::json checks = nlohmann::json::array();
  bool passed = true;

  // value <= threshold
  void at_most(const std::string& name, double value, double threshold) {
    const bool ok = value <= threshold;
    checks.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"passed", ok}});
    passed = passed && ok;
  }
  void holds(const std::string& name, bool ok) {
    checks.push_back({{"name", name}, {"passed", ok}});
    passed = passed && ok;
  }
};

double rel(const XReal& x, const XReal& ref) { return ((x - ref).abs() / ref.abs()).to_double(); }

Suite suite_bessel(unsigned prec) {
  Suite s;
  ScopedPrecision guard(prec);
  double worst = 0;
  for (int twice : {0, 1, 2, 7, 20, 41, 80}) {
    const auto o = special::BesselOrder::from_twice(twice);
    for (const char* zs : {"0.1", "1", "3.7", "10"}) {
      const Real z(zs);
      const XReal jv = special::bessel_j(o, z, prec), jp = special::bessel_j_prime(o, z, prec);
      const XReal yv = special::bessel_y(o, z, prec), yp = special::bessel_y_prime(o, z, prec);
      const XReal w = jv * yp - jp * yv;
      const XReal ref(Real(2 / (real_pi() * z)));
      worst = std::max(worst, rel(w, ref));
    }
  }
  s.at_most("wronskian_max_rel_error", worst, 1e-25);
  const XReal g = special::gamma(0.5, prec);
  s.at_most("gamma_half_sq_minus_pi", rel(g * g, XReal(real_pi())), 1e-60);
  s.at_most("gamma_5_minus_24", rel(special::gamma(5.0, prec), XReal(24.0, prec)), 1e-60);
  const auto zeros = special::bessel_j_zeros(special::BesselOrder::from_twice(0), 1, prec);
  s.at_most("j0_first_zero", std::fabs(to_double(zeros.at(0)) - 2.404825557695773), 1e-14);
  const auto cert = special::certify_bessel_bounds(1.0, 2, 40, prec, 16);
  s.holds("bessel_bounds_rho1_n40", cert.passed);
  return s;
}

Suite suite_basis() {
  Suite s;
  bool dims = basis::dim_harmonics(2, 0) == 1 && basis::dim_harmonics(2, 7) == 2;
  for (long j = 0; j < 20; ++j) dims = dims && basis::dim_harmonics(3, j) == 2 * j + 1;
  s.holds("dim_harmonics", dims);
  // orthonormality of e^{i f theta}/sqrt(2 pi) by the trapezoid rule (exact for these frequencies)
  double worst = 0;
  const int pts = 64;
  for (long f = -5; f <= 5; ++f)
    for (long g = -5; g <= 5; ++g) {
      basis::Complex acc = 0;
      for (int i = 0; i < pts; ++i) {
        const double th = 2 * std::numbers::pi * i / pts;
        acc += basis::fourier_mode(f, th) * std::conj(basis::fourier_mode(g, th));
      }
      acc *= 2 * std::numbers::pi / pts;
      worst = std::max(worst, std::abs(acc - basis::Complex(f == g ? 1.0 : 0.0)));
    }
  s.at_most("fourier_orthonormality", worst, 1e-13);
  basis::CoefVector c;
  c.entries[basis::ModeIndex::from_frequency(3)] = {1.0, 0.0};
  s.at_most("sobolev_norm_single_mode", std::fabs(basis::sobolev_norm(c, 1.0) - 4.0), 1e-14);
  basis::DtnMatrix a;
  a.set(basis::ModeIndex::from_frequency(4), basis::ModeIndex::from_frequency(-8),
        basis::LogComplex::from_xreal(XReal::from_log2(1, -700)));
  s.at_most("log_domain_entry_roundtrip",
            std::fabs(basis::DtnMatrix::from_json(a.to_json()).find(basis::ModeIndex::from_frequency(4),
                                                                     basis::ModeIndex::from_frequency(-8))
                          ->magnitude.log2_abs() +
                      700),
            1e-9);
  return s;
}

Suite suite_radial(unsigned prec) {
  Suite s;
  ScopedPrecision guard(prec);
  const Real one(1);
  const XReal j0 = special::bessel_j(special::BesselOrder::from_twice(0), one, prec);
  const XReal j1 = special::bessel_j(special::BesselOrder::from_twice(2), one, prec);
  const XReal ref = -(j1 / j0);
  s.at_most("free_dtn_E1_j0", rel(XReal(radial::free_dtn_eigenvalue(2, 0, one, prec)), ref), 1e-10);
  double worst = 0;
  for (long j = 0; j <= 20; ++j)
    worst = std::max(worst, std::fabs(to_double(radial::free_dtn_eigenvalue(2, j, Real("1e-4"), prec)) - j));
  s.at_most("free_dtn_small_E", worst, 0.01);
  s.at_most("r_tilde_boundary_derivative",
            std::fabs(to_double(radial::r_tilde_deriv_at_1(3, 2, Real(2), prec)) - 2 / std::numbers::pi), 1e-15);
  // Green solution against the finite-difference oracle for a smooth bump source
  const double a = 0.26, b = 0.32;
  auto bump = [&](double r) {
    const double t = (2 * r - a - b) / (b - a);
    return std::fabs(t) < 1 ? std::exp(1 - 1 / (1 - t * t)) : 0.0;
  };
  const auto g = radial::green_apply(
      2, 5, Real(2), [&](const Real& r) { return Real(bump(to_double(r))); }, Real(a), Real(b), prec, 16, 24);
  const auto fd = radial::fd_solve_mode(2, 5, 2.0, bump, 0.0, 4001);
  s.at_most("green_vs_fd_du1", std::fabs(to_double(g.deriv_at_1) - fd.du1) / std::fabs(fd.du1), 1e-5);
  return s;
}

Suite suite_potentials(unsigned prec) {
  Suite s;
  const potentials::BumpSpec b;
  s.at_most("bump_center", std::fabs(potentials::bump_phi(b, b.c1, b.c2) - 1), 0);
  s.holds("bump_outside", potentials::bump_phi(b, b.c1 + b.radius, b.c2) == 0);
  const auto v = potentials::PotentialVnm::make(12, 3, b, 2, prec);
  s.at_most("sup_norm", std::fabs(v.sup_norm().to_double() * 1728 - 1), 1e-14);
  const std::vector<double> x{0.29, 0.0};
  const double th = 0.01;
  const std::vector<double> y{0.29 * std::cos(th), 0.29 * std::sin(th)};
  const auto vx = potentials::v_nm_eval(v, x), vy = potentials::v_nm_eval(v, y);
  s.at_most("angular_phase", std::abs(vy - vx * std::polar(1.0, 12 * th)), 1e-15);
  const auto cm = potentials::cm_norm_estimate(v, 0, 21);
  s.at_most("cm0_equals_sup", std::fabs(cm.value / v.sup_norm().to_double() - 1), 1e-12);
  return s;
}

Suite suite_spectrum() {
  Suite s;
  const auto t = spectrum::disk_eigenvalues(2, 40, 128);
  s.at_most("lambda1", std::fabs(t.eigenvalues.at(0).value / 5.783185962946784 - 1), 1e-9);
  s.at_most("lambda2", std::fabs(t.eigenvalues.at(1).value / 14.681970642123893 - 1), 1e-9);
  s.holds("lambda2_multiplicity", t.eigenvalues.at(1).multiplicity == 2);
  s.holds("weyl_3", spectrum::weyl_count(t, 3) == 1);
  s.holds("weyl_4", spectrum::weyl_count(t, 4) == 3);
  const auto g = spectrum::find_gap_energy(2, t);
  s.holds("gap_rho2", g.energy > 4 && g.energy < 8 && g.reverified);
  return s;
}

Suite suite_dtn(unsigned prec) {
  Suite s;
  ScopedPrecision guard(prec);
  const auto gap = spectrum::find_gap_energy(1.5, 2, std::nullopt, 128);
  const auto v = potentials::PotentialVnm::make(12, 3, {}, 2, prec);
  engine::EngineOptions opt;
  opt.prec = prec;
  engine::ChainContext ctx(Real(gap.energy), v, 30, opt);
  std::vector<engine::ModeChain> chains;
  const auto a = engine::dtn_diff_matrix(ctx, 30, &chains);
  s.holds("triangular", engine::structurally_triangular(a, 12));
  bool low_absent = true;
  for (const auto& [k, val] : a.entries) low_absent = low_absent && std::max(k.first.j, k.second.j) > 5;
  s.holds("low_degrees_absent", low_absent);
  engine::ChainContext ctxc(Real(gap.energy), v.conjugate(), 30, opt);
  s.at_most("adjoint_mismatch", engine::adjoint_mismatch(a, engine::dtn_diff_matrix(ctxc, 30)), 1e-30);
  const auto fd = engine::fd_diff_matrix(gap.energy, v, 30, 4001);
  double worst = 0;
  for (const auto& [k, val] : a.entries) {
    const auto* o = fd.find(k.first, k.second);
    if (!o) {
      worst = 1;
      break;
    }
    const double x = std::real(val.to_complex()), y = std::real(o->to_complex());
    worst = std::max(worst, std::fabs(x - y) / std::fabs(x));
  }
  s.at_most("fd_oracle_rel", worst, 1e-4);
  const auto table = spectrum::disk_eigenvalues(2, 40, 128);
  const auto budget = spectrum::resolvent_budget(Real(gap.energy), v.eps, table);
  bool l31 = true;
  for (std::size_t i = 0; i < chains.size(); i += 7) l31 = l31 && engine::verify_lemma31(ctx, chains[i], budget.q, v.eps).passed;
  s.holds("psi_norm_bound", l31);
  return s;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"bessel", "basis", "radial", "potentials", "spectrum", "dtn"};
  return names;
}

}  // namespace

bool is_known_suite(const std::string& suite) {
  if (suite == "all") return true;
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), suite) != n.end();
}

nlohmann::json cmd_verify(const std::string& suite, unsigned prec) {
  if (!is_known_suite(suite)) throw ConfigError("unknown suite '" + suite + "'");
  std::vector<std::string> run;
  if (suite == "all") {
    run = suite_names();
  } else {
    run.push_back(suite);
  }
  nlohmann::json out = {{"suite", suite}, {"precision_bits", prec}, {"suites", nlohmann::json::object()}};
  bool all = true;
  for (const auto& name : run) {
    Suite s;
    try {
      if (name == "bessel") s = suite_bessel(prec);
      if (name == "basis") s = suite_basis();
      if (name == "radial") s = suite_radial(prec);
      if (name == "potentials") s = suite_potentials(prec);
      if (name == "spectrum") s = suite_spectrum();
      if (name == "dtn") s = suite_dtn(prec);
    } catch (const std::exception& e) {
      s.checks.push_back({{"name", "exception"}, {"message", e.what()}, {"passed", false}});
      s.passed = false;
    }
    out["suites"][name] = {{"checks", s.checks}, {"passed", s.passed}};
    all = all && s.passed;
  }
  out["passed"] = all;
  return out;
}

}  // namespace dtn::experiments
