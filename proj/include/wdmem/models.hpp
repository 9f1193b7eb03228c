#pragma once

// Memristive models: piecewise-linear characteristic curves, the HP device
// and the multilevel device. Each is an immutable description consumed by
// MemristivePort, which owns the evolving state.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "wdmem/errors.hpp"
#include "wdmem/wdf.hpp"

namespace wdmem {

// ---------------------------------------------------------------------------
// Published parameter sets (SI units).
// ---------------------------------------------------------------------------
namespace tables {

namespace binary {  // flux-controlled binary switch
inline constexpr double T = 1e-3;
inline constexpr int n_i = 1;
inline constexpr double E = 5.0;
inline constexpr double F1 = 1.0, F2 = 2.0;
inline constexpr double G1 = 3.0;      // S, high-conductance plateau
inline constexpr double G0 = 100e-6;   // S, low-conductance plateau
inline constexpr double I_norm = 10.0; // A
}  // namespace binary

namespace continuous {  // flux-controlled continuous device
inline constexpr double T = 1e-3;
inline constexpr int n_i = 1;
inline constexpr double E = 5.0;
inline constexpr double F1 = 1.0, F2 = 2.0;
inline constexpr double G_norm = 3.0;
inline constexpr double I_norm = 2.0;
}  // namespace continuous

namespace hp {
inline constexpr double T = 1e-3;
inline constexpr int n_i = 1;
inline constexpr double E = 1.0;
inline constexpr double F1 = 1.0, F2 = 1.5;
inline constexpr double R1 = 10e3;       // ohm, undoped
inline constexpr double R0 = 100e-6;     // ohm, doped
inline constexpr double R_init = 9e3;    // ohm, resistance at t0
inline constexpr double kappa = 18.5e3;  // 1/C  (18.5 per mC)
inline constexpr int p = 1;
inline constexpr double I_norm = 1e-3;
}  // namespace hp

namespace multilevel {
inline constexpr double T = 1e-3;
inline constexpr int n_i = 1;
inline constexpr double E = 5.0;
inline constexpr double F1 = 1.0, F2 = 2.0;
inline constexpr double G1 = 3.0;
inline constexpr double G0 = 100e-6;
inline constexpr double U0 = 0.1;
inline constexpr int levels[3] = {1, 10, 100};
}  // namespace multilevel

}  // namespace tables

// Flux span of a sine of amplitude E and frequency F: E / (pi F).
inline double sine_flux_span(double E, double F) { return E / (std::numbers::pi * F); }

// ---------------------------------------------------------------------------
// Characteristic curve
// ---------------------------------------------------------------------------

// Piecewise-linear memductance over flux, clamped to the end values outside
// the knot range. Knots: strictly increasing flux, non-negative memductance.
class CharacteristicCurve {
 public:
  CharacteristicCurve() = default;

  CharacteristicCurve(std::vector<double> flux, std::vector<double> memductance)
      : flux_(std::move(flux)), G_(std::move(memductance)) {
    if (flux_.empty()) throw ConfigError("characteristic curve: no knots");
    if (flux_.size() != G_.size()) throw ConfigError("characteristic curve: flux/memductance length mismatch");
    for (std::size_t k = 0; k < flux_.size(); ++k) {
      if (!std::isfinite(flux_[k]) || !std::isfinite(G_[k]))
        throw ConfigError("characteristic curve: non-finite knot");
      if (G_[k] < 0.0) {
        std::ostringstream os;
        os << "characteristic curve: negative memductance " << G_[k] << " at flux " << flux_[k];
        throw PassivityError(os.str());
      }
      if (k > 0 && !(flux_[k] > flux_[k - 1]))
        throw ConfigError("characteristic curve: flux knots must be strictly increasing");
    }
  }

  std::size_t size() const { return flux_.size(); }
  bool empty() const { return flux_.empty(); }
  const std::vector<double>& flux() const { return flux_; }
  const std::vector<double>& memductance() const { return G_; }
  double flux_min() const { return flux_.front(); }
  double flux_max() const { return flux_.back(); }
  bool in_range(double phi) const { return phi >= flux_min() && phi <= flux_max(); }

  double operator()(double phi) const {
    if (empty()) throw ConfigError("characteristic curve: evaluated while empty");
    if (phi <= flux_.front()) return G_.front();
    if (phi >= flux_.back()) return G_.back();
    const auto it = std::upper_bound(flux_.begin(), flux_.end(), phi);
    const std::size_t k = static_cast<std::size_t>(it - flux_.begin());
    const double x0 = flux_[k - 1], x1 = flux_[k];
    const double w = (phi - x0) / (x1 - x0);
    return G_[k - 1] + w * (G_[k] - G_[k - 1]);
  }

 private:
  std::vector<double> flux_;
  std::vector<double> G_;
};

// Two plateaus joined by a linear ramp of the given width centred at the
// threshold. width = 0 gives an ideal step (adjacent knots one ulp apart).
inline CharacteristicCurve binary_switch_curve(double G0, double G1, double threshold, double width) {
  if (!(width >= 0.0)) throw ConfigError("binary switch: width must be >= 0");
  double lo = threshold - 0.5 * width, hi = threshold + 0.5 * width;
  if (!(hi > lo)) hi = std::nextafter(lo, std::numeric_limits<double>::infinity());
  return CharacteristicCurve({lo, hi}, {G0, G1});
}

// Default binary switch: threshold at half the sine flux span of the table
// drive, ramp width 10 % of the span.
inline CharacteristicCurve default_binary_curve() {
  const double span = sine_flux_span(tables::binary::E, tables::binary::F1);
  return binary_switch_curve(tables::binary::G0, tables::binary::G1, 0.5 * span, 0.1 * span);
}

// Smooth raised-cosine transition from G0 (flux 0) to G1 (flux = span).
inline CharacteristicCurve raised_cosine_curve(double G0, double G1, double span, int knots = 201) {
  if (!(span > 0.0) || knots < 2) throw ConfigError("raised-cosine curve: need span > 0 and >= 2 knots");
  std::vector<double> x(knots), g(knots);
  for (int k = 0; k < knots; ++k) {
    const double s = static_cast<double>(k) / (knots - 1);
    x[k] = s * span;
    g[k] = G0 + (G1 - G0) * 0.5 * (1.0 - std::cos(std::numbers::pi * s));
  }
  return CharacteristicCurve(std::move(x), std::move(g));
}

inline CharacteristicCurve default_continuous_curve() {
  const double span = sine_flux_span(tables::continuous::E, tables::continuous::F1);
  return raised_cosine_curve(tables::binary::G0, tables::continuous::G_norm, span);
}

enum class Control { voltage, current };

// Flux-controlled memristor: the state is the flux, G = curve(flux).
class CurveMemristor {
 public:
  using state_type = double;
  static constexpr Control control = Control::voltage;

  explicit CurveMemristor(CharacteristicCurve curve, double flux0 = 0.0) : curve_(std::move(curve)), flux0_(flux0) {
    if (curve_.empty()) throw ConfigError("curve memristor: empty characteristic");
  }

  const CharacteristicCurve& curve() const { return curve_; }
  double initial_state() const { return flux0_; }
  double derivative(double, double u) const { return u; }
  double memductance(double flux, double) const { return curve_(flux); }
  double constrain(double flux) const { return flux; }

 private:
  CharacteristicCurve curve_;
  double flux0_;
};

// ---------------------------------------------------------------------------
// HP memristor
// ---------------------------------------------------------------------------

struct HpParameters {
  double R0 = tables::hp::R0;  // fully doped (low) resistance
  double R1 = tables::hp::R1;  // undoped (high) resistance
  double R_init = tables::hp::R_init;
  double kappa = tables::hp::kappa;
  int p = tables::hp::p;
  double clamp_eps = 1e-12;
};

inline void validate(const HpParameters& P) {
  if (!(P.R0 > 0.0) || !(P.R1 > P.R0)) throw ConfigError("hp: need 0 < R0 < R1");
  if (!(P.R_init > P.R0 && P.R_init < P.R1)) throw ConfigError("hp: R_init must lie strictly inside (R0, R1)");
  if (!(P.kappa > 0.0)) throw ConfigError("hp: kappa must be > 0");
  if (P.p < 1) throw ConfigError("hp: window exponent p must be >= 1");
  if (!(P.clamp_eps >= 0.0 && P.clamp_eps < 0.5)) throw ConfigError("hp: clamp_eps must be in [0, 0.5)");
}

// w(z) = 1 - (2z - 1)^(2p)
inline double hp_window(double z, int p) { return 1.0 - std::pow(2.0 * z - 1.0, 2 * p); }

// dz/dt = kappa w(z) i
inline double hp_state_derivative(double z, double i, double kappa, int p) { return kappa * hp_window(z, p) * i; }

class HpMemristor {
 public:
  using state_type = double;
  // Current-controlled device, emulated through its memductance 1 / R(z).
  static constexpr Control control = Control::current;

  explicit HpMemristor(HpParameters P = {}) : P_(P) { validate(P_); }

  const HpParameters& parameters() const { return P_; }

  double resistance(double z) const { return P_.R1 + z * (P_.R0 - P_.R1); }
  double initial_state() const { return (P_.R1 - P_.R_init) / (P_.R1 - P_.R0); }

  // Voltage-controlled form: i = u / R(z).
  double memductance(double z, double) const { return 1.0 / resistance(z); }
  double derivative(double z, double u) const { return hp_state_derivative(z, u / resistance(z), P_.kappa, P_.p); }
  double constrain(double z) const { return std::clamp(z, P_.clamp_eps, 1.0 - P_.clamp_eps); }

  // Closed forms for p = 1 with q the charge passed since t0.
  double state_of_charge(double q) const {
    const double z0 = initial_state();
    const double gamma = (1.0 - z0) / z0;
    return 1.0 / (1.0 + gamma * std::exp(-4.0 * P_.kappa * q));
  }
  double resistance_of_charge(double q) const { return resistance(state_of_charge(q)); }

  // Charge-domain potential: q(z) = lambda(z) - lambda(z0) for p = 1.
  double lambda(double z) const {
    if (!(z > 0.0 && z < 1.0)) throw DomainError("hp lambda: z must lie in (0, 1)");
    return std::log(z / (1.0 - z)) / (4.0 * P_.kappa);
  }
  double state_of_lambda(double l) const { return 1.0 / (1.0 + std::exp(-4.0 * P_.kappa * l)); }

 private:
  HpParameters P_;
};

// ---------------------------------------------------------------------------
// Multilevel memristor
// ---------------------------------------------------------------------------

struct MultilevelParameters {
  double G1 = tables::multilevel::G1;
  double G0 = tables::multilevel::G0;
  double U0 = tables::multilevel::U0;
  int n = 10;
  double z0 = 0.0;
};

inline void validate(const MultilevelParameters& P) {
  if (P.n < 1) throw ConfigError("multilevel: n must be >= 1");
  if (!(P.G0 > 0.0) || !(P.G1 > P.G0)) throw ConfigError("multilevel: need G1 > G0 > 0");
  if (!std::isfinite(P.U0) || !std::isfinite(P.z0)) throw ConfigError("multilevel: non-finite U0 or z0");
}

// h(z) = #{nu in 1..n : z > nu dz} + #{nu in 1..n : -z > nu dz}, dz = 1/(n+1).
inline int multilevel_count(double z, int n) {
  const double dz = 1.0 / (n + 1);
  const double a = std::abs(z);
  if (!(a > dz)) return 0;
  int k = static_cast<int>(std::min<double>(n, std::floor(a * (n + 1))));
  while (k > 0 && !(a > k * dz)) --k;
  while (k < n && a > (k + 1) * dz) ++k;
  return k;
}

class MultilevelMemristor {
 public:
  using state_type = double;
  static constexpr Control control = Control::voltage;

  explicit MultilevelMemristor(MultilevelParameters P = {}) : P_(P) { validate(P_); }

  const MultilevelParameters& parameters() const { return P_; }
  double initial_state() const { return P_.z0; }
  double derivative(double, double u) const { return u + P_.U0; }
  // G1 - h (G1 - G0) / n; the lowest level is returned as G0 exactly.
  double memductance(double z, double) const {
    const int h = multilevel_count(z, P_.n);
    return h == P_.n ? P_.G0 : P_.G1 - (P_.G1 - P_.G0) * h / P_.n;
  }
  double constrain(double z) const { return z; }

 private:
  MultilevelParameters P_;
};

}  // namespace wdmem
