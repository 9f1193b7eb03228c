#pragma once

// Wave-digital building blocks: voltage waves, adaptors, sources, the wave
// integrator and the iterated memristive port.
//
// Conventions: a = u + R i (incident), b = u - R i (reflected); the current i
// flows into the element at its port.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <sstream>
#include <string>

#include "wdmem/errors.hpp"
#include "wdmem/state.hpp"

namespace wdmem {

// Memductances in (-kPassivityTolerance, 0) are rounding noise and read as 0.
inline constexpr double kPassivityTolerance = 1e-15;

namespace detail {

inline void require_port_resistance(double R, const char* who) {
  if (!(R > 0.0) || !std::isfinite(R)) {
    std::ostringstream os;
    os << who << ": port resistance must be positive and finite, got " << R;
    throw DomainError(os.str());
  }
}

inline bool close_rel(double x, double y, double rel) {
  return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y));
}

}  // namespace detail

struct KirchhoffPair {
  double u = 0.0;
  double i = 0.0;
};

struct WavePair {
  double a = 0.0;
  double b = 0.0;
};

inline WavePair kirchhoff_to_wave(double u, double i, double R) {
  detail::require_port_resistance(R, "kirchhoff_to_wave");
  return {u + R * i, u - R * i};
}

inline KirchhoffPair wave_to_kirchhoff(double a, double b, double R) {
  detail::require_port_resistance(R, "wave_to_kirchhoff");
  return {0.5 * (a + b), (a - b) / (2.0 * R)};
}

// rho = (1 - R G) / (1 + R G); G = +inf is a short circuit (rho = -1).
inline double reflection_coefficient(double G, double R) {
  detail::require_port_resistance(R, "reflection_coefficient");
  if (std::isnan(G)) throw NumericError("reflection_coefficient: memductance is NaN");
  if (G < 0.0) {
    if (G < -kPassivityTolerance) {
      std::ostringstream os;
      os << "reflection_coefficient: negative memductance " << G << " S";
      throw PassivityError(os.str());
    }
    G = 0.0;
  }
  if (std::isinf(G)) return -1.0;
  const double rg = R * G;
  return (1.0 - rg) / (1.0 + rg);
}

// A port with resistance R and its current wave pair.
class Port {
 public:
  explicit Port(double R) : R_(R) { detail::require_port_resistance(R, "Port"); }

  double resistance() const { return R_; }
  double incident() const { return a_; }
  double reflected() const { return b_; }
  void set_waves(double a, double b) {
    a_ = a;
    b_ = b;
  }
  double voltage() const { return 0.5 * (a_ + b_); }
  double current() const { return (a_ - b_) / (2.0 * R_); }

 private:
  double R_;
  double a_ = 0.0;
  double b_ = 0.0;
};

// ---------------------------------------------------------------------------
// Wave integrator
// ---------------------------------------------------------------------------

// Trapezoidal integrator of dz/dt = f realized as a wave port with R = T/2:
// the store holds b_z and each step writes a_z = b_z + T f back into it.
// step() returns b_z, the delayed-wave state read-out; trapezoidal_state()
// returns the second-order read-out b_z + T/2 f used inside the iteration.
template <StateVector State = double>
class WaveIntegrator {
 public:
  WaveIntegrator(double T, State z0) : T_(T), bz_(z0) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("WaveIntegrator: sampling period must be > 0");
    if (!all_finite(z0)) throw NumericError("WaveIntegrator: non-finite initial state");
  }

  // Start so that the trapezoidal read-out of the first step equals z0 when
  // the first derivative is f0.
  static WaveIntegrator exact_start(double T, const State& z0, const State& f0) {
    return WaveIntegrator(T, axpy(z0, -0.5 * T, f0));
  }

  double sampling_period() const { return T_; }
  double port_resistance() const { return 0.5 * T_; }
  const State& stored() const { return bz_; }

  State trapezoidal_state(const State& f) const { return axpy(bz_, 0.5 * T_, f); }

  // Advances the store: b_z <- b_z + T f. Returns the value read before.
  State step(const State& f) {
    if (!all_finite(f)) throw NumericError("WaveIntegrator: non-finite derivative");
    State out = bz_;
    bz_ = axpy(bz_, T_, f);
    return out;
  }

  void reset(const State& z0) { bz_ = z0; }
  void overwrite_store(const State& bz) { bz_ = bz; }

 private:
  double T_;
  State bz_;
};

// ---------------------------------------------------------------------------
// Three-port adaptors
// ---------------------------------------------------------------------------

// Reflection b = c + d a of a linear (or linearized) one-port. 1 - d and
// 1 + d are carried separately because port resistances in one tree may span
// nine decades and d then sits within 1e-9 of +-1.
struct AffineReflection {
  double c = 0.0;
  double d = 0.0;
  double one_minus_d = 1.0;
  double one_plus_d = 1.0;

  double reflect(double a) const { return c + d * a; }

  // i = g u + j linearized at the port with resistance R.
  static AffineReflection from_linearization(double R, double g, double j) {
    const double rg = R * g;
    const double den = 1.0 + rg;
    return {-2.0 * R * j / den, (1.0 - rg) / den, 2.0 * rg / den, 2.0 / den};
  }

  static AffineReflection delay(double stored) { return {stored, 0.0, 1.0, 1.0}; }

  // Relation seen through a polarity-inverting connection.
  AffineReflection inverted() const { return {-c, d, one_minus_d, one_plus_d}; }
};

// Adaptor port 3 is always the dependent (reflection-free) port.
class SeriesAdaptor3 {
 public:
  SeriesAdaptor3(double R1, double R2) : R1_(R1), R2_(R2), R3_(R1 + R2) {
    detail::require_port_resistance(R1, "SeriesAdaptor3");
    detail::require_port_resistance(R2, "SeriesAdaptor3");
  }

  // Rejects R3 != R1 + R2; the adapted port must stay reflection-free.
  static SeriesAdaptor3 with_ports(double R1, double R2, double R3) {
    SeriesAdaptor3 s(R1, R2);
    if (!detail::close_rel(R3, s.R3_, 1e-12)) {
      std::ostringstream os;
      os << "SeriesAdaptor3: R3 = " << R3 << " must equal R1 + R2 = " << s.R3_;
      throw ConfigError(os.str());
    }
    return s;
  }

  double R1() const { return R1_; }
  double R2() const { return R2_; }
  double R3() const { return R3_; }
  // gamma_k = 2 R_k / (R1 + R2 + R3); gamma_3 = 1.
  double gamma(int k) const { return k == 1 ? R1_ / R3_ : k == 2 ? R2_ / R3_ : 1.0; }

  std::array<double, 3> scatter(double a1, double a2, double a3) const {
    const double s = a1 + a2 + a3;
    return {a1 - gamma(1) * s, a2 - gamma(2) * s, -(a1 + a2)};
  }

  struct Reduction {
    AffineReflection up;
    double L = 0.0;
    double N = 1.0;
    std::array<AffineReflection, 2> child;
  };

  // Collapse two affine children into the relation seen at port 3.
  Reduction reduce(const AffineReflection& c1, const AffineReflection& c2) const {
    Reduction r{{}, 0.0, 1.0, {c1, c2}};
    const double g1 = gamma(1), g2 = gamma(2);
    const double q1 = 1.0 / c1.one_minus_d, q2 = 1.0 / c2.one_minus_d;
    r.N = g1 * q1 + g2 * q2;
    r.L = c1.c * q1 + c2.c * q2;
    const double n_minus_one = g1 * c1.d * q1 + g2 * c2.d * q2;
    const double two_n_minus_one = g1 * c1.one_plus_d * q1 + g2 * c2.one_plus_d * q2;
    r.up = {-r.L / r.N, n_minus_one / r.N, 1.0 / r.N, two_n_minus_one / r.N};
    return r;
  }

  // Waves sent into the children once port 3 receives a3.
  std::array<double, 2> expand(const Reduction& r, double a3) const {
    const double s = (a3 + r.L) / r.N;
    std::array<double, 2> out{};
    for (int k = 0; k < 2; ++k) {
      const auto& ch = r.child[k];
      const double gk = gamma(k + 1);
      const double ak = (ch.c - ch.d * gk * s) / ch.one_minus_d;
      out[k] = ak - gk * s;
    }
    return out;
  }

 private:
  double R1_, R2_, R3_;
};

class ParallelAdaptor3 {
 public:
  ParallelAdaptor3(double R1, double R2) : R1_(R1), R2_(R2), R3_(R1 * R2 / (R1 + R2)) {
    detail::require_port_resistance(R1, "ParallelAdaptor3");
    detail::require_port_resistance(R2, "ParallelAdaptor3");
  }

  // Rejects G3 != G1 + G2.
  static ParallelAdaptor3 with_ports(double R1, double R2, double R3) {
    ParallelAdaptor3 p(R1, R2);
    if (!detail::close_rel(1.0 / R3, 1.0 / R1 + 1.0 / R2, 1e-12)) {
      std::ostringstream os;
      os << "ParallelAdaptor3: 1/R3 = " << 1.0 / R3 << " must equal 1/R1 + 1/R2 = " << 1.0 / R1 + 1.0 / R2;
      throw ConfigError(os.str());
    }
    return p;
  }

  double R1() const { return R1_; }
  double R2() const { return R2_; }
  double R3() const { return R3_; }
  // d_k = 2 G_k / (G1 + G2 + G3); d_3 = 1.
  double coefficient(int k) const { return k == 1 ? R2_ / (R1_ + R2_) : k == 2 ? R1_ / (R1_ + R2_) : 1.0; }

  std::array<double, 3> scatter(double a1, double a2, double a3) const {
    // b3 is formed without a3 so the port stays reflection-free bit for bit.
    const double b3 = coefficient(1) * a1 + coefficient(2) * a2;
    return {b3 + a3 - a1, b3 + a3 - a2, b3};
  }

  struct Reduction {
    AffineReflection up;
    double K = 0.0;
    double M = 1.0;
    std::array<AffineReflection, 2> child;
  };

  Reduction reduce(const AffineReflection& c1, const AffineReflection& c2) const {
    Reduction r{{}, 0.0, 1.0, {c1, c2}};
    const double d1 = coefficient(1), d2 = coefficient(2);
    const double q1 = 1.0 / c1.one_plus_d, q2 = 1.0 / c2.one_plus_d;
    r.M = d1 * q1 + d2 * q2;
    r.K = d1 * c1.c * q1 + d2 * c2.c * q2;
    const double one_minus_m = d1 * c1.d * q1 + d2 * c2.d * q2;
    const double two_m_minus_one = d1 * c1.one_minus_d * q1 + d2 * c2.one_minus_d * q2;
    r.up = {r.K / r.M, one_minus_m / r.M, two_m_minus_one / r.M, 1.0 / r.M};
    return r;
  }

  std::array<double, 2> expand(const Reduction& r, double a3) const {
    const double node = (a3 + r.K) / r.M;
    std::array<double, 2> out{};
    for (int k = 0; k < 2; ++k) {
      const auto& ch = r.child[k];
      const double ak = (ch.c + ch.d * node) / ch.one_plus_d;
      out[k] = node - ak;
    }
    return out;
  }

 private:
  double R1_, R2_, R3_;
};

// ---------------------------------------------------------------------------
// Sources
// ---------------------------------------------------------------------------

// Voltage source e with internal resistance R0.
class ResistiveSource {
 public:
  explicit ResistiveSource(double R0) : R0_(R0) { detail::require_port_resistance(R0, "ResistiveSource"); }

  double internal_resistance() const { return R0_; }

  // Matched port (Rp = R0): reflection-free, b = e.
  double emit(double e) const { return e; }

  // General port resistance Rp: b = e 2Rp/(Rp+R0) + a (R0-Rp)/(R0+Rp).
  double reflect(double e, double a, double Rp) const {
    detail::require_port_resistance(Rp, "ResistiveSource::reflect");
    const double s = R0_ + Rp;
    return e * 2.0 * Rp / s + a * (R0_ - Rp) / s;
  }

 private:
  double R0_;
};

// ---------------------------------------------------------------------------
// Iterated memristive port
// ---------------------------------------------------------------------------

// A memristive model is a description: the emulator owns the mutable state.
//   derivative(z, u)  : dz/dt
//   memductance(z, u) : G(z, u) >= 0, u the port voltage
//   constrain(z)      : projection onto the admissible state set
template <class M>
concept MemristiveModel = requires(const M& m, typename M::state_type z, double u) {
  requires StateVector<typename M::state_type>;
  { m.initial_state() } -> std::convertible_to<typename M::state_type>;
  { m.derivative(z, u) } -> std::convertible_to<typename M::state_type>;
  { m.memductance(z, u) } -> std::convertible_to<double>;
  { m.constrain(z) } -> std::convertible_to<typename M::state_type>;
};

struct FixedPointConfig {
  int n_i = 1;             // sweeps per sampling instance
  double tolerance = 0.0;  // early exit once |b_s - b_{s-1}| <= tolerance (0: never)
};

inline void validate(const FixedPointConfig& c) {
  if (c.n_i < 1) throw ConfigError("fixed point: n_i must be >= 1");
  if (!(c.tolerance >= 0.0)) throw ConfigError("fixed point: tolerance must be >= 0");
}

// One memristive element behind a port of resistance R. Each call to step()
// solves b = rho(G(z, (a+b)/2)) a together with the trapezoidal state update.
//
// Sweep: u = (a+b)/2; f = f(z,u); z = b_z + T/2 f; G = G(z,u); b = rho(G) a.
// Warm start from the previous instance: b = rho_prev a, z = b_z + T/2 f_prev.
// After the sweeps the store advances with the last f (trapezoidal rule).
template <MemristiveModel Model>
class MemristivePort {
 public:
  using State = typename Model::state_type;

  MemristivePort(Model model, double R, double T, FixedPointConfig cfg = {})
      : model_(std::move(model)), R_(R), cfg_(cfg), integ_(T, model_.initial_state()) {
    detail::require_port_resistance(R, "MemristivePort");
    validate(cfg_);
    z_ = model_.constrain(model_.initial_state());
    f_prev_ = axpy(z_, -1.0, z_);  // zero of the state type
    G_ = model_.memductance(z_, 0.0);
    rho_ = reflection_coefficient(G_, R_);
  }

  const Model& model() const { return model_; }
  double resistance() const { return R_; }
  double sampling_period() const { return integ_.sampling_period(); }

  double step(double a, double t = 0.0) {
    if (!std::isfinite(a)) throw NumericError("memristive port: non-finite incident wave", t);
    // At the first instance z is pinned to z0 and the store is back-filled
    // (b_z = z0 - T/2 f_0), so the trace starts exactly at the initial state.
    const State z0 = z_;
    auto readout = [&](const State& f) { return first_ ? z0 : model_.constrain(integ_.trapezoidal_state(f)); };
    State z = readout(f_prev_);
    double b = rho_ * a;
    double rho = rho_;
    double G = G_;
    State f = f_prev_;
    sweeps_ = 0;
    for (int s = 0; s < cfg_.n_i; ++s) {
      const double u = 0.5 * (a + b);
      f = model_.derivative(z, u);
      z = readout(f);
      G = model_.memductance(z, u);
      rho = reflection_coefficient(G, R_);
      const double next = rho * a;
      const double delta = std::abs(next - b);
      b = next;
      ++sweeps_;
      if (cfg_.tolerance > 0.0 && delta <= cfg_.tolerance) break;
    }
    if (!std::isfinite(b) || !all_finite(z)) throw NumericError("memristive port: non-finite result", t);
    if (first_) integ_.overwrite_store(axpy(z0, -0.5 * sampling_period(), f));
    integ_.overwrite_store(model_.constrain(axpy(integ_.stored(), sampling_period(), f)));
    first_ = false;
    a_ = a;
    b_ = b;
    z_ = z;
    G_ = G;
    rho_ = rho;
    f_prev_ = f;
    return b;
  }

  double incident() const { return a_; }
  double reflected() const { return b_; }
  double voltage() const { return 0.5 * (a_ + b_); }
  double current() const { return (a_ - b_) / (2.0 * R_); }
  const State& state() const { return z_; }
  double memductance() const { return G_; }
  int sweeps_used() const { return sweeps_; }

  // |b - rho(G(z, (a+b)/2)) a| for the last instance.
  double residual() const {
    const double G = model_.memductance(z_, voltage());
    return std::abs(b_ - reflection_coefficient(G, R_) * a_);
  }

 private:
  Model model_;
  double R_;
  FixedPointConfig cfg_;
  WaveIntegrator<State> integ_;
  State z_{};
  State f_prev_{};
  double a_ = 0.0, b_ = 0.0, G_ = 0.0, rho_ = 1.0;
  int sweeps_ = 0;
  bool first_ = true;
};

}  // namespace wdmem
