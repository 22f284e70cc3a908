#pragma once

#include "dtn/xreal.hpp"

#include <nlohmann/json.hpp>

#include <compare>
#include <complex>
#include <map>
#include <string>
#include <utility>

namespace dtn::basis {

/// Dimension of the degree-j spherical harmonics on S^{d-1}:
/// C(j+d-1, d-1) - C(j+d-3, d-1), binomials with negative top vanish.
long dim_harmonics(int d, long j);

/// Orthonormal boundary basis label (d, j, p) with 1 <= p <= dim_harmonics(d, j).
/// For d = 2, (0,1) is frequency 0, (j,1) is +j and (j,2) is -j.
struct ModeIndex {
  int d = 2;
  long j = 0;
  long p = 1;

  static ModeIndex make(int d, long j, long p);
  static ModeIndex from_frequency(long freq);
  /// Signed Fourier frequency; d = 2 only.
  long frequency() const;

  friend auto operator<=>(const ModeIndex&, const ModeIndex&) = default;
};

using Complex = std::complex<double>;

/// e^{i f theta} / sqrt(2 pi), the d = 2 basis function of frequency f.
Complex fourier_mode(long freq, double theta);

struct CoefVector {
  int d = 2;
  std::map<ModeIndex, Complex> entries;

  double l2_norm() const;
};

/// sqrt( sum (1+j)^{2 sigma} |c_jp|^2 ).
double sobolev_norm(const CoefVector& c, double sigma);

/// Complex value as log-domain magnitude and phase in (-pi, pi].
struct LogComplex {
  XReal magnitude;
  double phase = 0;

  static LogComplex from_real(const Real& x);
  static LogComplex from_xreal(const XReal& x);
  /// Nearest complex double (underflows to 0 far below the double range).
  Complex to_complex() const;
  LogComplex conj() const { return LogComplex{magnitude, phase == 0 ? 0.0 : -phase}; }
};

/// Sparse matrix of <f_{i1}, A f_{i2}>; only stored entries are nonzero.
struct DtnMatrix {
  using Key = std::pair<ModeIndex, ModeIndex>;

  int d = 2;
  double energy = 0;
  std::string tag;
  std::map<Key, LogComplex> entries;

  void set(const ModeIndex& row, const ModeIndex& col, const LogComplex& v) { entries[{row, col}] = v; }
  const LogComplex* find(const ModeIndex& row, const ModeIndex& col) const;
  std::size_t size() const { return entries.size(); }

  /// Records {j1, p1, j2, p2, log10_mag, phase}.
  nlohmann::json to_json() const;
  static DtnMatrix from_json(const nlohmann::json& j, int d = 2, unsigned precision_bits = kDefaultPrecisionBits);
};

/// 4 sup (1 + max(j1, j2))^{2 sigma + d} |a|, an upper bound for the H^{-sigma} -> H^sigma norm.
XReal op_norm_sobolev_bound(const DtnMatrix& a, double sigma, int d);
inline XReal op_norm_sobolev_bound(const DtnMatrix& a, double sigma) { return op_norm_sobolev_bound(a, sigma, a.d); }

/// sum |a| ||f_{i1}||_inf ||f_{i2}||_{L1}, which is sum |a| for the d = 2 Fourier basis;
/// bounds the L^inf(S^1) -> L^inf(S^1) norm of the kernel.
XReal op_norm_linf_bound(const DtnMatrix& a);

}  // namespace dtn::basis
