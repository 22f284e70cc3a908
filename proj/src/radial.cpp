#include "dtn/radial.hpp"

#include "dtn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dtn::radial {

namespace bmp = boost::multiprecision;
using special::BesselOrder;

namespace {

Real half_dim_shift(int d) { return Real(d - 2) / 2; }

// r^{-(d-2)/2}
Real radial_weight(int d, const Real& r) {
  if (d == 2) return Real(1);
  return bmp::pow(r, -half_dim_shift(d));
}

Real r_power(int e, const Real& r) {
  Real out = 1;
  for (int i = 0; i < e; ++i) out *= r;
  return out;
}

void require_energy(const Real& energy) {
  if (!(energy > 0)) throw UnsupportedError("radial: closed forms require E > 0 (use r^j at E = 0)");
}

}  // namespace

Real r_tilde(long j, int d, const Real& energy, const Real& r, unsigned prec) {
  ScopedPrecision guard(prec);
  require_energy(energy);
  if (!(r > 0) || r > 1) throw DomainError("r_tilde: r must lie in (0, 1]");
  const BesselOrder order = BesselOrder::from_degree(static_cast<int>(j), d);
  const Real k = bmp::sqrt(energy);
  const auto jz = special::detail::bessel_j_series(order.real(), k * r);
  const auto yz = special::detail::bessel_y_pair(order, k * r);
  const auto jk = special::detail::bessel_j_series(order.real(), k);
  const auto yk = special::detail::bessel_y_pair(order, k);
  return radial_weight(d, r) * (yz.value * jk.value - jz.value * yk.value);
}

Real r_tilde_deriv_at_1(long j, int d, const Real& energy, unsigned prec) {
  ScopedPrecision guard(prec);
  require_energy(energy);
  const BesselOrder order = BesselOrder::from_degree(static_cast<int>(j), d);
  const Real k = bmp::sqrt(energy);
  const auto jk = special::detail::bessel_j_series(order.real(), k);
  const auto yk = special::detail::bessel_y_pair(order, k);
  return k * (yk.deriv * jk.value - jk.deriv * yk.value);
}

double eigen_margin_log2(BesselOrder order, const Real& k, const Real& j_at_k) {
  if (j_at_k == 0) return -std::numeric_limits<double>::infinity();
  const Real a = order.real();
  const Real scale_log = a * bmp::log(k / 2) - bmp::lgamma(a + 1);
  const Real l = (bmp::log(bmp::abs(j_at_k)) - scale_log) / bmp::log(Real(2));
  return to_double(l);
}

void check_not_eigenvalue(BesselOrder order, const Real& k, const Real& j_at_k, unsigned prec) {
  const double m = eigen_margin_log2(order, k, j_at_k);
  if (m < -0.5 * prec) {
    std::ostringstream os;
    os << "E = " << to_string(k * k, 12) << " is within the guard of a Dirichlet eigenvalue of order "
       << order.value() << " (log2 margin " << m << ")";
    throw NearEigenvalueError(os.str(), m);
  }
}

Real free_dtn_eigenvalue(int d, long j, const Real& energy, unsigned prec) {
  ScopedPrecision guard(prec);
  if (j < 0) throw DomainError("free_dtn_eigenvalue: j must be >= 0");
  if (energy < 0) throw UnsupportedError("free_dtn_eigenvalue: E must be >= 0");
  if (energy == 0) return Real(j);
  const BesselOrder order = BesselOrder::from_degree(static_cast<int>(j), d);
  const Real k = bmp::sqrt(energy);
  const auto jk = special::detail::bessel_j_series(order.real(), k);
  check_not_eigenvalue(order, k, jk.value, prec);
  return -half_dim_shift(d) + k * jk.deriv / jk.value;
}

// ---------------------------------------------------------------------------

void gauss_legendre(int n, std::vector<Real>& nodes, std::vector<Real>& weights) {
  if (n < 1) throw PreconditionError("gauss_legendre: n must be >= 1");
  const unsigned prec = current_precision_bits();
  const Real pi = real_pi();
  const Real tol = ldexp_real(Real(1), -static_cast<long>(prec) + 4);
  nodes.assign(n, Real(0));
  weights.assign(n, Real(0));
  for (int i = 0; i < n; ++i) {
    Real x = bmp::cos(pi * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp = 0;
    for (int it = 0; it < 200; ++it) {
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Real dx = p1 / dp;
      x -= dx;
      if (bmp::abs(dx) <= tol) {
        // one more evaluation at the converged point for the weight
        Real q0 = 1, q1 = x;
        for (int k = 2; k <= n; ++k) {
          Real q2 = ((2 * k - 1) * x * q1 - (k - 1) * q0) / k;
          q0 = q1;
          q1 = q2;
        }
        if (n == 1) q0 = 1;
        dp = n * (x * q1 - q0) / (x * x - 1);
        break;
      }
    }
    nodes[n - 1 - i] = x;
    weights[n - 1 - i] = 2 / ((1 - x * x) * dp * dp);
  }
}

namespace {

// P_0..P_{n} at x.
std::vector<Real> legendre_values(int n, const Real& x) {
  std::vector<Real> p(n + 1);
  p[0] = 1;
  if (n >= 1) p[1] = x;
  for (int k = 2; k <= n; ++k) p[k] = ((2 * k - 1) * x * p[k - 1] - (k - 1) * p[k - 2]) / k;
  return p;
}

// Integral from -1 to x of P_k for k = 0..n-1.
std::vector<Real> legendre_integrals(int n, const Real& x) {
  const std::vector<Real> p = legendre_values(n, x);
  std::vector<Real> out(n);
  out[0] = x + 1;
  for (int k = 1; k < n; ++k) out[k] = (p[k + 1] - p[k - 1]) / (2 * k + 1);
  return out;
}

}  // namespace

SupportRule::SupportRule(const Real& a, const Real& b, int panels, int per_panel)
    : a_(a), b_(b), panels_(panels), per_panel_(per_panel) {
  if (!(b > a)) throw PreconditionError("SupportRule: need b > a");
  if (panels < 1 || per_panel < 2) throw PreconditionError("SupportRule: need panels >= 1, per_panel >= 2");
  width_ = (b_ - a_) / panels_;
  gauss_legendre(per_panel_, ref_nodes_, ref_weights_);
  const int n = per_panel_;
  // cum(i, j) = sum_k (2k+1)/2 w_j P_k(x_j) * int_{-1}^{x_i} P_k
  std::vector<std::vector<Real>> pkj(n);
  for (int j = 0; j < n; ++j) pkj[j] = legendre_values(n - 1, ref_nodes_[j]);
  cum_.assign(static_cast<std::size_t>(n) * n, Real(0));
  for (int i = 0; i < n; ++i) {
    const std::vector<Real> ik = legendre_integrals(n, ref_nodes_[i]);
    for (int j = 0; j < n; ++j) {
      Real s = 0;
      for (int k = 0; k < n; ++k) s += Real(2 * k + 1) / 2 * pkj[j][k] * ik[k];
      cum_[static_cast<std::size_t>(i) * n + j] = s * ref_weights_[j];
    }
  }
  nodes_.reserve(static_cast<std::size_t>(panels_) * n);
  weights_.reserve(static_cast<std::size_t>(panels_) * n);
  for (int p = 0; p < panels_; ++p) {
    const Real left = a_ + width_ * p;
    for (int j = 0; j < n; ++j) {
      nodes_.push_back(left + (ref_nodes_[j] + 1) / 2 * width_);
      weights_.push_back(ref_weights_[j] * width_ / 2);
    }
  }
}

Real SupportRule::integrate(const std::vector<Real>& f) const {
  if (f.size() != nodes_.size()) throw PreconditionError("SupportRule: size mismatch");
  Real s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += weights_[i] * f[i];
  return s;
}

std::vector<Real> SupportRule::cumulative(const std::vector<Real>& f) const {
  if (f.size() != nodes_.size()) throw PreconditionError("SupportRule: size mismatch");
  const int n = per_panel_;
  std::vector<Real> out(f.size());
  Real offset = 0;
  const Real half = width_ / 2;
  for (int p = 0; p < panels_; ++p) {
    const std::size_t base = static_cast<std::size_t>(p) * n;
    for (int i = 0; i < n; ++i) {
      Real s = 0;
      for (int j = 0; j < n; ++j) s += cum_[static_cast<std::size_t>(i) * n + j] * f[base + j];
      out[base + i] = offset + s * half;
    }
    Real total = 0;
    for (int j = 0; j < n; ++j) total += weights_[base + j] * f[base + j];
    offset += total;
  }
  return out;
}

int SupportRule::panel_of(const Real& x) const {
  if (x < a_ || x > b_) throw DomainError("SupportRule: point outside [a, b]");
  int p = static_cast<int>(to_double((x - a_) / width_));
  return std::clamp(p, 0, panels_ - 1);
}

std::vector<Real> SupportRule::coefficients(const std::vector<Real>& f, int p) const {
  const int n = per_panel_;
  std::vector<Real> c(n, Real(0));
  const std::size_t base = static_cast<std::size_t>(p) * n;
  for (int j = 0; j < n; ++j) {
    const std::vector<Real> pk = legendre_values(n - 1, ref_nodes_[j]);
    for (int k = 0; k < n; ++k) c[k] += Real(2 * k + 1) / 2 * ref_weights_[j] * pk[k] * f[base + j];
  }
  return c;
}

Real SupportRule::interpolate(const std::vector<Real>& f, const Real& x) const {
  const int p = panel_of(x);
  const std::vector<Real> c = coefficients(f, p);
  const Real xi = 2 * (x - (a_ + width_ * p)) / width_ - 1;
  const std::vector<Real> pk = legendre_values(per_panel_ - 1, xi);
  Real s = 0;
  for (int k = 0; k < per_panel_; ++k) s += c[k] * pk[k];
  return s;
}

Real SupportRule::integral_to(const std::vector<Real>& f, const Real& x) const {
  const int p = panel_of(x);
  const int n = per_panel_;
  Real offset = 0;
  for (int q = 0; q < p; ++q)
    for (int j = 0; j < n; ++j) offset += weights_[static_cast<std::size_t>(q) * n + j] * f[static_cast<std::size_t>(q) * n + j];
  const std::vector<Real> c = coefficients(f, p);
  const Real xi = 2 * (x - (a_ + width_ * p)) / width_ - 1;
  const std::vector<Real> ik = legendre_integrals(n, xi);
  Real s = 0;
  for (int k = 0; k < n; ++k) s += c[k] * ik[k];
  return offset + s * width_ / 2;
}

// ---------------------------------------------------------------------------

std::vector<ModeData> build_mode_table(int d, long jmax, const Real& energy, const SupportRule& rule,
                                       unsigned prec) {
  ScopedPrecision guard(prec);
  require_energy(energy);
  if (jmax < 0) throw PreconditionError("build_mode_table: jmax must be >= 0");
  const int count = static_cast<int>(jmax + 1);
  const BesselOrder base = BesselOrder::from_degree(0, d);
  const Real k = bmp::sqrt(energy);
  const Real pi = real_pi();

  std::vector<ModeData> table(count);
  const auto lk = special::detail::bessel_ladder(base, count, k);
  for (int j = 0; j < count; ++j) {
    ModeData& m = table[j];
    m.j = j;
    m.d = d;
    m.order = base.plus(j);
    m.k = k;
    m.jk = lk.j[j];
    m.jpk = lk.jp[j];
    m.yk = lk.y[j];
    m.ypk = lk.yp[j];
    m.wronskian = 2 * m.jk / pi;
    m.qz_1 = m.ypk * m.jk - m.jpk * m.yk;
    m.dq1 = k * m.qz_1;
    m.p.resize(rule.size());
    m.q.resize(rule.size());
  }
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Real& r = rule.nodes()[i];
    const Real w = radial_weight(d, r);
    const auto lz = special::detail::bessel_ladder(base, count, k * r);
    for (int j = 0; j < count; ++j) {
      table[j].p[i] = w * lz.j[j];
      table[j].q[i] = w * (lz.y[j] * table[j].jk - lz.j[j] * table[j].yk);
    }
  }
  {
    const auto la = special::detail::bessel_ladder(base, count, k * rule.a());
    const Real wa = radial_weight(d, rule.a());
    for (int j = 0; j < count; ++j) {
      table[j].p_a = wa * la.j[j];
      table[j].pz_a = la.jp[j];
    }
    const auto lb = special::detail::bessel_ladder(base, count, k * rule.b());
    const Real wb = radial_weight(d, rule.b());
    for (int j = 0; j < count; ++j) {
      table[j].q_b = wb * (lb.y[j] * table[j].jk - lb.j[j] * table[j].yk);
      table[j].qz_b = lb.yp[j] * table[j].jk - lb.jp[j] * table[j].yk;
    }
  }
  return table;
}

ModeData build_mode(int d, long j, const Real& energy, const SupportRule& rule, unsigned prec) {
  auto t = build_mode_table(d, j, energy, rule, prec);
  return std::move(t.back());
}

GreenKernel::GreenKernel(std::shared_ptr<const ModeData> mode, std::shared_ptr<const SupportRule> rule)
    : mode_(std::move(mode)), rule_(std::move(rule)) {
  if (!mode_ || !rule_) throw PreconditionError("GreenKernel: null mode or rule");
  if (mode_->p.size() != rule_->size()) throw PreconditionError("GreenKernel: mode data does not match the rule");
  check_not_eigenvalue(mode_->order, mode_->k, mode_->jk, current_precision_bits());
}

GreenKernel::GreenKernel(int d, long j, const Real& energy, std::shared_ptr<const SupportRule> rule, unsigned prec)
    : GreenKernel(std::make_shared<const ModeData>(build_mode(d, j, energy, *rule, prec)), rule) {}

GreenSolution GreenKernel::apply(const std::vector<Real>& g) const {
  const SupportRule& rule = *rule_;
  const ModeData& m = *mode_;
  if (g.size() != rule.size()) throw PreconditionError("GreenKernel::apply: source size mismatch");
  const std::size_t n = g.size();
  GreenSolution s;
  s.g = g;
  std::vector<Real> fp(n), fq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Real gr = m.d == 2 ? Real(g[i] * rule.nodes()[i]) : Real(g[i] * r_power(m.d - 1, rule.nodes()[i]));
    fp[i] = m.p[i] * gr;
    fq[i] = m.q[i] * gr;
  }
  s.p_cum = rule.cumulative(fp);
  s.q_cum = rule.cumulative(fq);
  s.p_total = rule.integrate(fp);
  s.q_total = rule.integrate(fq);
  s.u.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.u[i] = -(m.q[i] * s.p_cum[i] + m.p[i] * (s.q_total - s.q_cum[i])) / m.wronskian;
  s.du1 = -m.dq1 * s.p_total / m.wronskian;
  return s;
}

GreenSolution GreenKernel::apply(const std::function<Real(const Real&)>& g) const {
  std::vector<Real> gv(rule_->size());
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = g(rule_->nodes()[i]);
  return apply(gv);
}

Real GreenKernel::evaluate(const GreenSolution& s, const Real& r) const {
  const ModeData& m = *mode_;
  const SupportRule& rule = *rule_;
  if (!(r > 0) || r > 1) throw DomainError("GreenKernel::evaluate: r must lie in (0, 1]");
  const Real z = m.k * r;
  const Real w = radial_weight(m.d, r);
  const auto jz = special::detail::bessel_j_series(m.order.real(), z);
  const Real p = w * jz.value;
  if (r <= rule.a()) return -p * s.q_total / m.wronskian;
  const auto yz = special::detail::bessel_y_pair(m.order, z);
  const Real q = w * (yz.value * m.jk - jz.value * m.yk);
  if (r >= rule.b()) return -q * s.p_total / m.wronskian;
  std::vector<Real> fp(rule.size()), fq(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Real gr = s.g[i] * r_power(m.d - 1, rule.nodes()[i]);
    fp[i] = m.p[i] * gr;
    fq[i] = m.q[i] * gr;
  }
  const Real pc = rule.integral_to(fp, r);
  const Real qc = rule.integral_to(fq, r);
  return -(q * pc + p * (s.q_total - qc)) / m.wronskian;
}

Real GreenKernel::row_sum_bound(const std::vector<Real>& weight) const {
  const ModeData& m = *mode_;
  const SupportRule& rule = *rule_;
  const std::size_t n = rule.size();
  if (weight.size() != n) throw PreconditionError("row_sum_bound: weight size mismatch");
  std::vector<Real> cp(n), cq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Real base = bmp::abs(weight[i]) * rule.weights()[i] * r_power(m.d - 1, rule.nodes()[i]);
    cp[i] = bmp::abs(m.p[i]) * base;
    cq[i] = bmp::abs(m.q[i]) * base;
  }
  // prefix sums of |p| terms (j <= i) and suffix sums of |q| terms (j > i)
  std::vector<Real> pre(n), suf(n + 1);
  Real acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += cp[i];
    pre[i] = acc;
  }
  suf[n] = 0;
  for (std::size_t i = n; i-- > 0;) suf[i] = suf[i + 1] + cq[i];
  Real best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real row = bmp::abs(m.q[i]) * pre[i] + bmp::abs(m.p[i]) * suf[i + 1];
    if (row > best) best = row;
  }
  return best / bmp::abs(m.wronskian);
}

Real GreenKernel::boundary_gain(const std::vector<Real>& weight) const {
  const ModeData& m = *mode_;
  const SupportRule& rule = *rule_;
  if (weight.size() != rule.size()) throw PreconditionError("boundary_gain: weight size mismatch");
  Real s = 0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    s += bmp::abs(m.p[i] * weight[i]) * rule.weights()[i] * r_power(m.d - 1, rule.nodes()[i]);
  return bmp::abs(m.dq1) * s / bmp::abs(m.wronskian);
}

RadialFunction green_apply(int d, long j, const Real& energy, const std::function<Real(const Real&)>& g,
                           const Real& a, const Real& b, unsigned prec, int panels, int per_panel) {
  ScopedPrecision guard(prec);
  auto rule = std::make_shared<const SupportRule>(a, b, panels, per_panel);
  GreenKernel kernel(d, j, energy, rule, prec);
  const GreenSolution s = kernel.apply(g);
  RadialFunction out;
  out.j = j;
  out.d = d;
  out.energy = to_double(energy);
  out.r = rule->nodes();
  out.values = s.u;
  out.deriv_at_1 = s.du1;
  return out;
}

// ---------------------------------------------------------------------------

double FdGrid::r(int i) const {
  if (i == size - 1) return 1.0;
  return std::exp(t0 + i * h());
}

FdGrid FdGrid::for_degree(long jmax, int size) {
  FdGrid g;
  g.t0 = std::max(std::log(1e-5), -400.0 / static_cast<double>(std::max<long>(jmax, 1)));
  g.size = size;
  return g;
}

FdSolution fd_solve_grid(int d, long j, double energy, const FdGrid& grid, const std::vector<double>& g,
                         double boundary_value) {
  const int n = grid.size;
  if (n < 1000) throw PreconditionError("fd_solve_grid: grid size must be >= 1000");
  if (static_cast<int>(g.size()) != n) throw PreconditionError("fd_solve_grid: source size mismatch");
  const double h = grid.h();
  const double jj = static_cast<double>(j) * static_cast<double>(j + d - 2);
  const double lo = 1 / (h * h) - (d - 2) / (2 * h);
  const double up = 1 / (h * h) + (d - 2) / (2 * h);
  FdSolution s;
  s.r.resize(n);
  for (int i = 0; i < n; ++i) s.r[i] = grid.r(i);
  auto diag_at = [&](int i) { return -2 / (h * h) - jj + energy * s.r[i] * s.r[i]; };
  auto rhs_at = [&](int i) { return -s.r[i] * s.r[i] * g[i]; };

  // Frobenius ratio u(r0)/u(r1) of r^j (1 - c1 r^2 + c2 r^4)
  const double c1 = energy / (2.0 * (2 * j + d));
  const double c2 = energy * energy / (8.0 * (2 * j + d) * (2 * j + d + 2));
  auto series = [&](double r) { return 1 - c1 * r * r + c2 * r * r * r * r; };
  const double ratio = std::exp(static_cast<double>(j) * (grid.t0 - (grid.t0 + h))) * series(s.r[0]) / series(s.r[1]);

  // unknowns u_0..u_{n-2}; Thomas sweep
  const int m = n - 1;
  std::vector<double> cp(m), dp(m);
  // row 0: u_0 - ratio u_1 = 0
  cp[0] = -ratio;
  dp[0] = 0;
  for (int i = 1; i < m; ++i) {
    double rhs = rhs_at(i);
    const double upper = (i == m - 1) ? 0.0 : up;
    if (i == m - 1) rhs -= up * boundary_value;
    const double denom = diag_at(i) - lo * cp[i - 1];
    if (std::fabs(denom) < 1e-300 || !std::isfinite(denom))
      throw NearEigenvalueError("fd_solve_grid: singular tridiagonal system", -1e300);
    cp[i] = upper / denom;
    dp[i] = (rhs - lo * dp[i - 1]) / denom;
  }
  s.u.assign(n, 0.0);
  s.u[n - 1] = boundary_value;
  s.u[m - 1] = dp[m - 1];
  for (int i = m - 2; i >= 0; --i) s.u[i] = dp[i] - cp[i] * s.u[i + 1];
  // ghost node from the equation at t = 0
  const double ghost = (rhs_at(n - 1) - lo * s.u[n - 2] - diag_at(n - 1) * s.u[n - 1]) / up;
  s.du1 = (ghost - s.u[n - 2]) / (2 * h);  // du/dr = du/dt at r = 1
  return s;
}

FdSolution fd_solve_mode(int d, long j, double energy, const std::function<double(double)>& g,
                         double boundary_value, int size) {
  const FdGrid coarse = FdGrid::for_degree(j, size);
  FdGrid fine = coarse;
  fine.size = 2 * size - 1;
  auto sample = [&](const FdGrid& grid) {
    std::vector<double> v(grid.size);
    for (int i = 0; i < grid.size; ++i) v[i] = g(grid.r(i));
    return v;
  };
  const FdSolution sc = fd_solve_grid(d, j, energy, coarse, sample(coarse), boundary_value);
  const FdSolution sf = fd_solve_grid(d, j, energy, fine, sample(fine), boundary_value);
  FdSolution out;
  out.r = sc.r;
  out.u.resize(sc.u.size());
  for (std::size_t i = 0; i < sc.u.size(); ++i) out.u[i] = (4 * sf.u[2 * i] - sc.u[i]) / 3;
  out.du1 = (4 * sf.du1 - sc.du1) / 3;
  return out;
}

}  // namespace dtn::radial
