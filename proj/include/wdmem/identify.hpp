#pragma once

// Identification: sampled (t, u, i) -> charge and flux by trapezoidal
// integration -> memductance samples dq/dphi -> piecewise-linear curve.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "wdmem/errors.hpp"
#include "wdmem/models.hpp"

namespace wdmem {

// Flux steps smaller than this are duplicates.
inline constexpr double kDuplicateFlux = 1e-15;

struct SampleTrace {
  std::vector<double> t, u, i;

  std::size_t size() const { return t.size(); }
};

// Relative spacing tolerance for treating a grid as uniform.
inline constexpr double kUniformTolerance = 1e-9;

inline void validate(const SampleTrace& s) {
  if (s.u.size() != s.t.size() || s.i.size() != s.t.size()) throw FormatError("trace: column lengths differ");
  if (s.size() < 3) throw IdentificationError("trace: need at least 3 samples");
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!std::isfinite(s.t[k]) || !std::isfinite(s.u[k]) || !std::isfinite(s.i[k]))
      throw FormatError("trace: non-finite value in row " + std::to_string(k + 1));
    if (k > 0 && !(s.t[k] > s.t[k - 1]))
      throw FormatError("trace: time not strictly increasing at row " + std::to_string(k + 1));
  }
}

inline double mean_spacing(const SampleTrace& s) { return (s.t.back() - s.t.front()) / (s.size() - 1); }

inline bool is_uniform(const SampleTrace& s) {
  const double h = mean_spacing(s);
  for (std::size_t k = 1; k < s.size(); ++k)
    if (std::abs((s.t[k] - s.t[k - 1]) - h) > kUniformTolerance * h) return false;
  return true;
}

// Linear interpolation onto t0, t0 + T, ... up to the last sample. A trace
// already uniform with spacing T is returned unchanged.
inline SampleTrace resample_uniform(const SampleTrace& s, double T) {
  validate(s);
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("resample: T must be > 0");
  const double t0 = s.t.front(), span = s.t.back() - t0;
  if (span < 2.0 * T * (1.0 - kUniformTolerance)) throw IdentificationError("resample: trace spans less than 2T");
  if (is_uniform(s) && std::abs(mean_spacing(s) - T) <= kUniformTolerance * T) return s;

  const auto K = static_cast<std::size_t>(std::floor(span / T + kUniformTolerance));
  SampleTrace out;
  out.t.reserve(K + 1);
  out.u.reserve(K + 1);
  out.i.reserve(K + 1);
  std::size_t j = 0;
  for (std::size_t k = 0; k <= K; ++k) {
    const double t = std::min(t0 + static_cast<double>(k) * T, s.t.back());
    while (j + 2 < s.size() && s.t[j + 1] < t) ++j;
    const double w = (t - s.t[j]) / (s.t[j + 1] - s.t[j]);
    out.t.push_back(t);
    out.u.push_back(s.u[j] + w * (s.u[j + 1] - s.u[j]));
    out.i.push_back(s.i[j] + w * (s.i[j + 1] - s.i[j]));
  }
  return out;
}

// Trapezoidal running integral on a uniform grid, X[0] = 0.
inline std::vector<double> cumulative_integral(const std::vector<double>& x, double T) {
  std::vector<double> X(x.size(), 0.0);
  for (std::size_t k = 1; k < x.size(); ++k) X[k] = X[k - 1] + 0.5 * T * (x[k - 1] + x[k]);
  return X;
}

enum class Difference { forward, central };

struct MemductancePoint {
  double flux = 0.0;
  double G = 0.0;
};

// Indices of the leading strictly monotone run of phi, duplicates skipped.
inline std::vector<std::size_t> monotone_prefix(const std::vector<double>& phi) {
  std::vector<std::size_t> idx;
  if (phi.empty()) return idx;
  idx.push_back(0);
  int dir = 0;
  for (std::size_t k = 1; k < phi.size(); ++k) {
    const double d = phi[k] - phi[idx.back()];
    if (std::abs(d) < kDuplicateFlux) continue;
    const int s = d > 0.0 ? 1 : -1;
    if (dir == 0) dir = s;
    if (s != dir) break;
    idx.push_back(k);
  }
  return idx;
}

inline std::vector<MemductancePoint> memductance_from_qphi(const std::vector<double>& q, const std::vector<double>& phi,
                                                           Difference method = Difference::forward) {
  if (q.size() != phi.size()) throw IdentificationError("memductance: q and phi lengths differ");
  const auto idx = monotone_prefix(phi);
  if (idx.size() < 2) throw IdentificationError("memductance: no monotone flux segment with at least 2 samples");
  auto slope = [&](std::size_t a, std::size_t b) { return (q[idx[b]] - q[idx[a]]) / (phi[idx[b]] - phi[idx[a]]); };

  std::vector<MemductancePoint> out;
  const std::size_t n = idx.size();
  if (method == Difference::forward) {
    out.reserve(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) out.push_back({phi[idx[j]], slope(j, j + 1)});
  } else {
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = j == 0 ? 0 : j - 1, b = j + 1 == n ? j : j + 1;
      out.push_back({phi[idx[j]], slope(a, b)});
    }
  }
  return out;
}

// Sorted (ties broken by G so input order never matters), deduplicated knots.
inline CharacteristicCurve build_characteristic(std::vector<MemductancePoint> pts) {
  for (const auto& p : pts)
    if (!std::isfinite(p.flux) || !std::isfinite(p.G)) throw IdentificationError("characteristic: non-finite point");
  std::sort(pts.begin(), pts.end(), [](const MemductancePoint& a, const MemductancePoint& b) {
    return a.flux < b.flux || (a.flux == b.flux && a.G < b.G);
  });
  std::vector<double> x, g;
  for (const auto& p : pts) {
    if (!x.empty() && p.flux - x.back() < kDuplicateFlux) continue;
    if (p.G < -kPassivityTolerance) {
      std::ostringstream os;
      os << "characteristic: negative memductance " << p.G << " S at flux " << p.flux << " Wb (non-passive data)";
      throw IdentificationError(os.str());
    }
    x.push_back(p.flux);
    g.push_back(std::max(0.0, p.G));
  }
  if (x.size() < 2) throw IdentificationError("characteristic: fewer than 2 distinct flux points");
  return CharacteristicCurve(std::move(x), std::move(g));
}

struct IdentifyOptions {
  double T = 0.0;  // resampling period; 0 keeps a uniform input, else mean spacing
  Difference method = Difference::forward;
};

struct Identification {
  CharacteristicCurve curve;
  double T = 0.0;
  bool resampled = false;
  std::size_t segment_samples = 0;
};

inline Identification identify(const SampleTrace& trace, const IdentifyOptions& opt = {}) {
  validate(trace);
  Identification out;
  const bool uniform = is_uniform(trace);
  double T = opt.T > 0.0 ? opt.T : mean_spacing(trace);
  const SampleTrace* use = &trace;
  SampleTrace resampled;
  if (!uniform || std::abs(T - mean_spacing(trace)) > kUniformTolerance * T) {
    resampled = resample_uniform(trace, T);
    use = &resampled;
    out.resampled = true;
  }
  const auto q = cumulative_integral(use->i, T);
  const auto phi = cumulative_integral(use->u, T);
  out.segment_samples = monotone_prefix(phi).size();
  out.curve = build_characteristic(memductance_from_qphi(q, phi, opt.method));
  out.T = T;
  return out;
}

}  // namespace wdmem
