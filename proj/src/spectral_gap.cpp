#include "dtn/spectral_gap.hpp"

#include "dtn/errors.hpp"
#include "dtn/special_functions.hpp"
#include "dtn/sphere_basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dtn::spectrum {

namespace bmp = boost::multiprecision;

std::string SpectrumTable::to_csv() const {
  std::ostringstream os;
  os << "lambda,multiplicity,j,s\n";
  os.precision(17);
  for (const auto& e : eigenvalues) os << e.value << ',' << e.multiplicity << ',' << e.j << ',' << e.s << '\n';
  return os.str();
}

SpectrumTable disk_eigenvalues(int d, double lambda_max, unsigned prec) {
  if (!(lambda_max > 0)) throw PreconditionError("disk_eigenvalues: lambda_max must be positive");
  if (d < 2) throw PreconditionError("disk_eigenvalues: d must be >= 2");
  ScopedPrecision guard(prec);
  SpectrumTable t;
  t.d = d;
  t.cutoff = lambda_max;
  t.precision_bits = prec;
  const Real xmax = bmp::sqrt(Real(lambda_max));
  for (long j = 0;; ++j) {
    const auto order = special::BesselOrder::from_degree(static_cast<int>(j), d);
    // the first zero of J_a exceeds a, and grows with a
    if (Real(order.value()) >= xmax) break;
    const auto zeros = special::bessel_j_zeros_below(order, xmax, prec);
    if (zeros.empty()) break;
    const long mult = basis::dim_harmonics(d, j);
    for (std::size_t s = 0; s < zeros.size(); ++s) {
      Eigenvalue e;
      e.lambda = zeros[s] * zeros[s];
      e.value = to_double(e.lambda);
      e.multiplicity = mult;
      e.j = j;
      e.s = static_cast<int>(s + 1);
      t.eigenvalues.push_back(std::move(e));
    }
  }
  std::sort(t.eigenvalues.begin(), t.eigenvalues.end(),
            [](const Eigenvalue& a, const Eigenvalue& b) { return a.lambda < b.lambda; });
  return t;
}

long weyl_count(const SpectrumTable& table, double rho) {
  if (!(rho >= 0)) throw PreconditionError("weyl_count: rho must be >= 0");
  const double r2 = rho * rho;
  if (r2 > table.cutoff) {
    std::ostringstream os;
    os << "weyl_count: table cutoff " << table.cutoff << " below rho^2 = " << r2;
    throw PreconditionError(os.str());
  }
  long n = 0;
  for (const auto& e : table.eigenvalues)
    if (e.value < r2) n += e.multiplicity;
  return n;
}

WeylConstant measure_c1(int d, double rho_min, double rho_max, int steps, unsigned prec) {
  if (!(rho_max > rho_min) || rho_min <= 0 || steps < 2) throw PreconditionError("measure_c1: bad rho grid");
  const SpectrumTable t = disk_eigenvalues(d, rho_max * rho_max * 1.0001, prec);
  WeylConstant w;
  auto consider = [&](double rho, long count) {
    const double ratio = static_cast<double>(count) / std::pow(rho, d);
    if (ratio > w.raw_max) {
      w.raw_max = ratio;
      w.argmax_rho = rho;
    }
  };
  for (int i = 0; i < steps; ++i) {
    const double rho = rho_min + (rho_max - rho_min) * i / (steps - 1);
    consider(rho, weyl_count(t, rho));
  }
  // N jumps right after each sqrt(lambda); the supremum sits at these points
  long acc = 0;
  for (const auto& e : t.eigenvalues) {
    acc += e.multiplicity;
    const double rho = std::sqrt(e.value);
    if (rho >= rho_min && rho <= rho_max) consider(rho, acc);
  }
  w.c1 = 1.1 * w.raw_max;
  return w;
}

double c2_closed_form(int d, double c1) { return std::pow(2.0, d - 1) / (c1 + 1); }

double c2_pigeonhole(int d, double c1) { return 1.0 / (2 * (std::pow(2.0, 0.5 * d) * c1 + 1)); }

nlohmann::json GapResult::to_json() const {
  nlohmann::json j = {{"rho", rho},         {"d", d},   {"energy", energy},
                      {"halfwidth", halfwidth}, {"lo", lo}, {"hi", hi},
                      {"reverified", reverified}, {"c2_closed_form", c2_closed},
                      {"c2_required", c2_required}, {"c2_satisfied", c2_satisfied}};
  if (c1) j["c1"] = *c1;
  return j;
}

bool interval_is_free(const SpectrumTable& table, double lo, double hi) {
  for (const auto& e : table.eigenvalues)
    if (e.value > lo && e.value < hi) return false;
  return true;
}

GapResult find_gap_energy(double rho, const SpectrumTable& table, std::optional<double> c1) {
  if (!(rho > 1)) throw PreconditionError("find_gap_energy: rho must exceed 1");
  const double lo = rho * rho, hi = 2 * rho * rho;
  if (table.cutoff < hi) throw PreconditionError("find_gap_energy: table cutoff below 2 rho^2");
  std::vector<double> pts{lo};
  for (const auto& e : table.eigenvalues)
    if (e.value > lo && e.value < hi) pts.push_back(e.value);
  pts.push_back(hi);
  GapResult g;
  g.rho = rho;
  g.d = table.d;
  double best = -1;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double w = pts[i + 1] - pts[i];
    if (w > best) {
      best = w;
      g.lo = pts[i];
      g.hi = pts[i + 1];
    }
  }
  g.energy = 0.5 * (g.lo + g.hi);
  g.halfwidth = 0.5 * (g.hi - g.lo);
  // Rescan the stored endpoints; energy -+ halfwidth can round past an eigenvalue bounding the gap.
  g.reverified = g.lo < g.energy && g.energy < g.hi && interval_is_free(table, g.lo, g.hi);
  g.c1 = c1;
  if (c1) {
    g.c2_closed = c2_closed_form(table.d, *c1);
    g.c2_required = c2_pigeonhole(table.d, *c1) * std::pow(rho, 2 - table.d);
    g.c2_satisfied = g.halfwidth >= g.c2_required;
  }
  return g;
}

GapResult find_gap_energy(double rho, int d, std::optional<double> c1, unsigned prec) {
  if (!(rho > 1)) throw PreconditionError("find_gap_energy: rho must exceed 1");
  const SpectrumTable t = disk_eigenvalues(d, 2 * rho * rho * 1.0001, prec);
  return find_gap_energy(rho, t, c1);
}

Real distance_to_spectrum(const SpectrumTable& table, const Real& energy) {
  ScopedPrecision guard(table.precision_bits);
  Real best = -1;
  for (const auto& e : table.eigenvalues) {
    const Real dd = bmp::abs(e.lambda - energy);
    if (best < 0 || dd < best) best = dd;
  }
  const Real unseen = Real(table.cutoff) - energy;
  if (best < 0 || unseen < best) {
    std::ostringstream os;
    os << "distance_to_spectrum: table cutoff " << table.cutoff << " too small for E = " << to_string(energy, 10);
    throw PreconditionError(os.str());
  }
  return best;
}

nlohmann::json ResolventBudget::to_json() const {
  return {{"energy", to_double(energy)},
          {"dist_free", to_double(dist_free)},
          {"eps", eps.to_json()},
          {"Q", q.to_json()},
          {"Q_value", q.to_double()}};
}

ResolventBudget resolvent_budget(const Real& energy, const XReal& eps, const SpectrumTable& table) {
  if (eps.sign() < 0) throw PreconditionError("resolvent_budget: eps must be >= 0");
  ResolventBudget b;
  b.energy = energy;
  b.dist_free = distance_to_spectrum(table, energy);
  b.eps = eps;
  const unsigned bits = std::max(table.precision_bits, eps.precision_bits());
  ScopedPrecision guard(bits);
  const Real e = eps.to_real();
  if (b.dist_free <= e) {
    std::ostringstream os;
    os << "resolvent_budget: dist " << to_string(b.dist_free, 10) << " <= eps " << to_string(e, 10);
    throw PreconditionError(os.str());
  }
  b.q = XReal(Real(1 / b.dist_free + 1 / (b.dist_free - e)));
  return b;
}

PigeonholeReport pigeonhole(const SpectrumTable& table, double rho, double c2) {
  const double lo = rho * rho, hi = 2 * rho * rho;
  if (table.cutoff < hi) throw PreconditionError("pigeonhole: table cutoff below 2 rho^2");
  const double len = 2 * c2 * std::pow(rho, 2 - table.d);
  PigeonholeReport r;
  r.k = static_cast<long>(std::floor(lo / len));
  r.fits = r.k >= 1 && r.k * len <= lo;
  for (const auto& e : table.eigenvalues)
    if (e.value > lo && e.value < hi) r.count += e.multiplicity;
  r.n_rho = weyl_count(table, rho);
  for (long i = 0; i < r.k && !r.empty_interval; ++i)
    if (interval_is_free(table, lo + i * len, lo + (i + 1) * len)) r.empty_interval = true;
  return r;
}

}  // namespace dtn::spectrum
