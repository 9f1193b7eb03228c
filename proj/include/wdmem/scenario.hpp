#pragma once

// Excitations, the source-device validation loop, traces and hysteresis
// analysis.

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wdmem/dbmd.hpp"
#include "wdmem/errors.hpp"
#include "wdmem/models.hpp"
#include "wdmem/wdf.hpp"

namespace wdmem {

enum class Waveform { sine, triangular };

struct Excitation {
  Waveform kind = Waveform::sine;
  double E = 1.0;
  double F = 1.0;
  std::optional<double> E_neg;  // negative peak, rescales the negative half-waves
};

inline void validate(const Excitation& x) {
  if (!(x.E > 0.0) || !std::isfinite(x.E)) throw ConfigError("excitation: amplitude must be > 0");
  if (!(x.F > 0.0) || !std::isfinite(x.F)) throw ConfigError("excitation: frequency must be > 0");
  if (x.E_neg && !(*x.E_neg < 0.0)) throw ConfigError("excitation: negative amplitude must be < 0");
}

namespace detail {
inline double rescale_negative(const Excitation& x, double v) { return v < 0.0 && x.E_neg ? v * (-*x.E_neg / x.E) : v; }
}  // namespace detail

// E sin(2 pi F t)
inline double sine_sample(const Excitation& x, double t) {
  return detail::rescale_negative(x, x.E * std::sin(2.0 * std::numbers::pi * x.F * t));
}

// (2E/pi) asin(sin(2 pi F t)), evaluated piecewise-linearly from the phase
// so that the corners are exact instead of carrying asin's sqrt(eps) error.
inline double triangular_sample(const Excitation& x, double t) {
  const double c = x.F * t;
  const double ph = c - std::floor(c);  // [0, 1)
  double v;
  if (ph < 0.25)
    v = 4.0 * ph;
  else if (ph < 0.75)
    v = 2.0 - 4.0 * ph;
  else
    v = 4.0 * ph - 4.0;
  return detail::rescale_negative(x, x.E * v);
}

inline double sample(const Excitation& x, double t) {
  return x.kind == Waveform::sine ? sine_sample(x, t) : triangular_sample(x, t);
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

struct TraceRecord {
  double t = 0.0;
  double e = 0.0;
  double u = 0.0;
  double i = 0.0;
  std::vector<double> z;
  double G = 0.0;
  std::vector<double> extra;
};

struct Trace {
  double t0 = 0.0;
  double T = 0.0;
  std::vector<std::string> extra_columns;
  std::vector<TraceRecord> rows;

  std::vector<double> column(double TraceRecord::*field) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.*field);
    return out;
  }
};

struct ScenarioConfig {
  double T = 1e-3;
  double t0 = 0.0;
  double t_stop = 1.0;
  FixedPointConfig fixed_point{};
  double R_source = 0.1;
};

// Grid t_k = t0 + k T for k = 0..K, K the last index not past t_stop.
inline std::size_t grid_last_index(double t0, double T, double t_stop) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("scenario: T must be > 0");
  if (!(t_stop > t0)) throw ConfigError("scenario: t_stop must exceed t0");
  return static_cast<std::size_t>(std::floor((t_stop - t0) / T + 1e-9));
}

inline double grid_time(double t0, double T, std::size_t k) { return t0 + static_cast<double>(k) * T; }

namespace detail {
[[noreturn]] inline void rethrow_at(const Error& err, double t) {
  std::ostringstream os;
  os << err.what() << " (at t = " << t << " s)";
  throw NumericError(os.str(), t);
}
}  // namespace detail

// Source with internal resistance R_source, matched to the device port: the
// source emits b = e, the device port resolves its reflection, and the
// current is read from the device waves.
template <MemristiveModel Model>
Trace run_scenario(const Model& model, const Excitation& x, const ScenarioConfig& cfg) {
  validate(x);
  const std::size_t K = grid_last_index(cfg.t0, cfg.T, cfg.t_stop);
  const ResistiveSource src(cfg.R_source);
  MemristivePort<Model> port(model, src.internal_resistance(), cfg.T, cfg.fixed_point);

  Trace tr;
  tr.t0 = cfg.t0;
  tr.T = cfg.T;
  tr.rows.reserve(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const double t = grid_time(cfg.t0, cfg.T, k);
    const double e = sample(x, t);
    try {
      port.step(src.emit(e), t);
    } catch (const NumericError& err) {
      throw NumericError(err.what(), t, err.residual_history());
    } catch (const DomainError& err) {
      detail::rethrow_at(err, t);
    }
    tr.rows.push_back({t, e, port.voltage(), port.current(), to_vector(port.state()), port.memductance(), {}});
  }
  return tr;
}

inline Trace run_dbmd_scenario(const DbmdParameters& P, const DbmdConfig& c, const Excitation& x, double t0,
                               double t_stop) {
  validate(x);
  const std::size_t K = grid_last_index(t0, c.T, t_stop);
  DbmdNetwork net(P, c);
  Trace tr;
  tr.t0 = t0;
  tr.T = c.T;
  tr.extra_columns = {"u_s_v", "u_e_v", "u_t_v"};
  tr.rows.reserve(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const double t = grid_time(t0, c.T, k);
    const double e = sample(x, t);
    DbmdSample s;
    try {
      s = net.step(e, t);
    } catch (const NumericError& err) {
      throw NumericError(err.what(), t, err.residual_history());
    } catch (const DomainError& err) {
      detail::rethrow_at(err, t);
    }
    tr.rows.push_back({t, e, s.u, s.i, {s.z}, s.G, {s.u_s, s.u_e, s.u_t}});
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Hysteresis analysis
// ---------------------------------------------------------------------------

namespace detail {

struct Pt {
  double u, i;
};

inline double shoelace(const std::vector<Pt>& p) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Pt& a = p[k];
    const Pt& b = p[(k + 1) % p.size()];
    s += a.u * b.i - b.u * a.i;
  }
  return 0.5 * s;
}

// Sum of |lobe| areas of a closed i-u loop. Lobes of a pinched loop meet
// where u changes sign, so the loop is cut at every zero crossing of u and
// each piece is closed along the u = 0 axis.
inline double lobe_area(std::vector<Pt> loop) {
  if (loop.size() < 3) return 0.0;
  // pts: loop with the crossing points inserted; cuts: their positions
  std::vector<Pt> pts;
  std::vector<std::size_t> cuts;
  const std::size_t n = loop.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Pt& a = loop[k];
    const Pt& b = loop[(k + 1) % n];
    pts.push_back(a);
    if (a.u == 0.0) cuts.push_back(pts.size() - 1);
    if ((a.u < 0.0 && b.u > 0.0) || (a.u > 0.0 && b.u < 0.0)) {
      const double w = a.u / (a.u - b.u);
      pts.push_back({0.0, a.i + w * (b.i - a.i)});
      cuts.push_back(pts.size() - 1);
    }
  }
  if (cuts.size() < 2) return std::abs(shoelace(pts));
  double total = 0.0;
  const std::size_t m = pts.size();
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const std::size_t from = cuts[c], to = cuts[(c + 1) % cuts.size()];
    std::vector<Pt> piece;
    for (std::size_t k = from;; k = (k + 1) % m) {
      piece.push_back(pts[k]);
      if (k == to) break;
    }
    total += std::abs(shoelace(piece));
  }
  return total;
}

}  // namespace detail

// Total lobe area of the i-u loop over the last `period` seconds of a
// uniformly sampled trace (u, i), the start point interpolated in time.
inline double hysteresis_area(const std::vector<double>& u, const std::vector<double>& i, double T, double period) {
  if (u.size() != i.size()) throw AnalysisError("hysteresis_area: u and i lengths differ");
  if (!(T > 0.0) || !(period > 0.0)) throw AnalysisError("hysteresis_area: T and period must be > 0");
  const double steps = period / T;
  if (u.size() < 3 || static_cast<double>(u.size() - 1) < steps * (1.0 - 1e-9))
    throw AnalysisError("hysteresis_area: trace shorter than one period");
  const std::size_t last = u.size() - 1;
  const double start = static_cast<double>(last) - steps;
  std::size_t k0 = static_cast<std::size_t>(std::max(0.0, std::floor(start + 1e-9)));
  const double w = std::max(0.0, start - static_cast<double>(k0));
  std::vector<detail::Pt> loop;
  loop.reserve(static_cast<std::size_t>(steps) + 2);
  if (w > 1e-9 && k0 < last) {
    loop.push_back({u[k0] + w * (u[k0 + 1] - u[k0]), i[k0] + w * (i[k0 + 1] - i[k0])});
    ++k0;
  }
  for (std::size_t k = k0; k <= last; ++k) loop.push_back({u[k], i[k]});
  return detail::lobe_area(std::move(loop));
}

inline double hysteresis_area(const Trace& tr, double period) {
  return hysteresis_area(tr.column(&TraceRecord::u), tr.column(&TraceRecord::i), tr.T, period);
}

// Lobe area of every complete period counted from t0.
inline std::vector<double> period_areas(const Trace& tr, double period) {
  const auto u = tr.column(&TraceRecord::u), i = tr.column(&TraceRecord::i);
  const double steps = period / tr.T;
  std::vector<double> out;
  for (int p = 1; static_cast<double>(u.size() - 1) >= p * steps * (1.0 - 1e-9); ++p) {
    const auto n = std::min(u.size(), static_cast<std::size_t>(std::floor(p * steps + 1e-9)) + 1);
    const std::vector<double> uu(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(n));
    const std::vector<double> ii(i.begin(), i.begin() + static_cast<std::ptrdiff_t>(n));
    out.push_back(hysteresis_area(uu, ii, tr.T, std::min(period, (n - 1) * tr.T)));
  }
  return out;
}

// Sum of u i T over the last `period` seconds: energy taken up by the device.
inline double absorbed_energy(const Trace& tr, double period) {
  const auto n = static_cast<std::size_t>(std::llround(period / tr.T));
  if (tr.rows.size() < n + 1) throw AnalysisError("absorbed_energy: trace shorter than one period");
  double W = 0.0;
  for (std::size_t k = tr.rows.size() - n; k < tr.rows.size(); ++k) W += tr.rows[k].u * tr.rows[k].i * tr.T;
  return W;
}

}  // namespace wdmem
