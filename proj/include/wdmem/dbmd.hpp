#pragma once

// Double-barrier memristive device: Schottky contact, solid-state electrolyte
// and tunnel barrier in series, each shunted (electrolyte, tunnel) by a
// parasitic capacitance, all sharing one ion-position state z.
//
// Wave-digital tree (port numbers are resistances R1..R9):
//
//   source(R0) ~inv~ S2 ── Schottky              (R1)
//                      └~inv~ S1 ── Pe ── electrolyte (R3)
//                      (R6)   │ (R5) └─ C_e delay     (R4 = T / 2C_e)
//                             └──── Pt ── tunnel      (R7)
//                              (R9)   └─ C_t delay     (R8 = T / 2C_t)
//
// "~inv~" marks a polarity-inverting connection (series-to-series and
// series-to-source need it to keep one loop current). R5 = R3 || R4,
// R9 = R7 || R8, R6 = R5 + R9, R2 = R1 + R6.
//
// The three nonlinear ports are resolved together: every sweep linearizes
// each element at its current voltage (i ~ g u + j), solves the resulting
// linear tree exactly, and re-evaluates the shared state. At convergence the
// fixed point is the same as that of b = rho(G(z, u)) a at every port; the
// linearization only changes how fast it is reached.

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "wdmem/errors.hpp"
#include "wdmem/wdf.hpp"

namespace wdmem {

namespace tables::dbmd {
inline constexpr double T = 10e-3;
inline constexpr int n_i = 6;
inline constexpr double E = 3.0;
inline constexpr double E_neg = -2.0;
inline constexpr double F[3] = {0.01, 0.1, 1.0};
inline constexpr double Zdot = 0.32e12, U_e = 0.3232, phi_a0 = 26.3, phi_a1 = 36.75, phi_ar = 30.17;
inline constexpr double w0 = 1e-4, U_c = 0.1e-3;
inline constexpr int p = 6;
inline constexpr double R_e0 = 2e6, R_e1 = 5.1e6, C_e = 17.4e-15;
inline constexpr double phi_s0 = 27.08, phi_s1 = 34.81, D_s = 1.326e-9, alpha_s = 3.77, I_s = 0.108;
inline constexpr double n0 = 2.9, n1 = 4.1, alpha_f = -1.25, U_theta = 0.026;
inline constexpr double phi_t0 = 108.32, alpha_t0 = 1.81, alpha_t1 = 2.03, I_t = 0.4326, C_t = 20.7e-15;
inline constexpr double R1 = 1.0, R3 = 10e6, R7 = 1e9;  // free port resistances
}  // namespace tables::dbmd

struct DbmdParameters {
  // ion hopping
  double Zdot = 0.32e12;  // Hz
  double U_e = 0.3232;    // V
  double phi_a0 = 26.3;
  double phi_a1 = 36.75;
  double phi_ar = 30.17;
  double w0 = 1e-4;
  int p = 6;
  double U_c = 0.1e-3;  // V
  // electrolyte
  double R_e0 = 2e6;  // ohm
  double R_e1 = 5.1e6;
  double C_e = 17.4e-15;  // F
  // Schottky contact
  double phi_s0 = 27.08;
  double phi_s1 = 34.81;
  double D_s = 1.326e-9;  // m, normalization only
  double alpha_s = 3.77;
  double I_s = 0.108;  // A
  double n0 = 2.9;
  double n1 = 4.1;
  double alpha_f = -1.25;
  double U_theta = 0.026;  // V
  // tunnel barrier
  double phi_t0 = 108.32;
  double alpha_t0 = 1.81;
  double alpha_t1 = 2.03;
  double I_t = 0.4326;  // A
  double C_t = 20.7e-15;  // F
};

inline void validate(const DbmdParameters& P) {
  auto pos = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "dbmd: " << name << " must be > 0, got " << v;
      throw ConfigError(os.str());
    }
  };
  pos(P.Zdot, "Zdot");
  pos(P.U_e, "U_e");
  pos(P.w0, "w0");
  pos(P.U_c, "U_c");
  pos(P.R_e0, "R_e0");
  pos(P.R_e1, "R_e1");
  pos(P.C_e, "C_e");
  pos(P.alpha_s, "alpha_s");
  pos(P.I_s, "I_s");
  pos(P.n0, "n0");
  pos(P.U_theta, "U_theta");
  pos(P.phi_t0, "phi_t0");
  pos(P.alpha_t0, "alpha_t0");
  pos(P.I_t, "I_t");
  pos(P.C_t, "C_t");
  if (P.p < 1) throw ConfigError("dbmd: window exponent p must be >= 1");
  if (!(P.w0 < 0.5)) throw ConfigError("dbmd: w0 must be < 0.5");
  if (!(P.alpha_t1 > P.alpha_t0)) throw ConfigError("dbmd: need alpha_t0 < alpha_t1");
  if (!(P.n1 > P.n0)) throw ConfigError("dbmd: need n0 < n1");
}

// Below this magnitude the zero-voltage limits replace the resistance
// quotients of the Schottky and tunnel regions.
inline constexpr double kDbmdSmallSignal = 1e-9;
inline constexpr double kSinhLimit = 700.0;

namespace detail {
inline void require_unit_state(double z, const char* who) {
  if (!(z >= 0.0 && z <= 1.0)) {
    std::ostringstream os;
    os << who << ": state z = " << z << " outside [0, 1]";
    throw DomainError(os.str());
  }
}
}  // namespace detail

// ---------------------------------------------------------------------------
// State equation
// ---------------------------------------------------------------------------

// w(z) = (1 - 2 w0)(1 - (2z - 1)^(2p)) + w0
inline double dbmd_window(const DbmdParameters& P, double z) {
  return (1.0 - 2.0 * P.w0) * (1.0 - std::pow(2.0 * z - 1.0, 2 * P.p)) + P.w0;
}

// Set activation energy for u > 0, reset energy otherwise.
inline double dbmd_activation_energy(const DbmdParameters& P, double z, double u) {
  return u > 0.0 ? P.phi_a1 + z * (P.phi_a0 - P.phi_a1) : P.phi_ar;
}

// Part of the Schottky voltage driving the ions; only during reset (u < 0).
inline double dbmd_ion_voltage(double z, double u, double u_s) { return u < 0.0 ? (1.0 - z) * u_s : 0.0; }

inline double dbmd_state_derivative(const DbmdParameters& P, double z, double u, double u_s, double u_e) {
  const double x = (dbmd_ion_voltage(z, u, u_s) + u_e - P.U_c) / P.U_e;
  if (!(std::abs(x) <= kSinhLimit)) {
    std::ostringstream os;
    os << "dbmd state equation: sinh argument " << x << " out of range";
    throw NumericError(os.str());
  }
  return -P.Zdot * dbmd_window(P, z) * std::exp(-dbmd_activation_energy(P, z, u)) * std::sinh(x);
}

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

// Current through a region and its derivative with respect to the voltage.
struct ElementResponse {
  double i = 0.0;
  double g = 0.0;
};

inline double schottky_barrier(const DbmdParameters& P, double z) { return P.phi_s0 + z * (P.phi_s1 - P.phi_s0); }
inline double schottky_ideality(const DbmdParameters& P, double z) { return P.n0 + z * (P.n1 - P.n0); }

// i = I_s exp(-phi_s - alpha_f s) (exp(u/(n U_theta)) - 1), s = sqrt((|u|-u)/(alpha_s U_theta)).
inline ElementResponse schottky_response(const DbmdParameters& P, double u, double z) {
  detail::require_unit_state(z, "schottky");
  const double A = P.I_s * std::exp(-schottky_barrier(P, z));
  const double m = schottky_ideality(P, z) * P.U_theta;
  const double s = std::sqrt((std::abs(u) - u) / (P.alpha_s * P.U_theta));
  const double E = std::exp(-P.alpha_f * s);
  const double em = std::expm1(u / m);
  double g = A * E * std::exp(u / m) / m;
  if (s > 0.0) g += A * E * em * P.alpha_f / (P.alpha_s * P.U_theta * s);
  return {A * E * em, g};
}

// R_S = u / i. Near zero the factor u / expm1(u/m) is taken from its series,
// which includes the analytic limit n U_theta exp(phi_s) / I_s at u = 0.
inline double schottky_resistance(const DbmdParameters& P, double u, double z) {
  detail::require_unit_state(z, "schottky_resistance");
  const double m = schottky_ideality(P, z) * P.U_theta;
  const double s = std::sqrt((std::abs(u) - u) / (P.alpha_s * P.U_theta));
  const double scale = std::exp(schottky_barrier(P, z) + P.alpha_f * s) / P.I_s;
  if (std::abs(u) < kDbmdSmallSignal) {
    const double x = u / m;
    return scale * m * (1.0 - 0.5 * x + x * x / 12.0);
  }
  return scale * u / std::expm1(u / m);
}

inline double electrolyte_resistance(const DbmdParameters& P, double z) { return P.R_e0 + z * (P.R_e1 - P.R_e0); }

inline ElementResponse electrolyte_response(const DbmdParameters& P, double u, double z) {
  const double G = 1.0 / electrolyte_resistance(P, z);
  return {G * u, G};
}

inline double tunnel_alpha(const DbmdParameters& P, double z) { return P.alpha_t0 + z * (P.alpha_t1 - P.alpha_t0); }

inline double tunnel_barrier(const DbmdParameters& P, double v) {
  const double phi = P.phi_t0 + v / (2.0 * P.U_theta);
  if (!(phi > 0.0)) {
    std::ostringstream os;
    os << "tunnel: barrier height " << phi << " at " << v << " V is not positive";
    throw DomainError(os.str());
  }
  return phi;
}

// g(v) = phi_t(v) exp(-alpha_t sqrt(phi_t(v)))
inline double tunnel_g(const DbmdParameters& P, double v, double z) {
  const double phi = tunnel_barrier(P, v);
  return phi * std::exp(-tunnel_alpha(P, z) * std::sqrt(phi));
}

inline double tunnel_g_slope(const DbmdParameters& P, double v, double z) {
  const double phi = tunnel_barrier(P, v);
  const double a = tunnel_alpha(P, z), r = std::sqrt(phi);
  return std::exp(-a * r) * (1.0 - 0.5 * a * r) / (2.0 * P.U_theta);
}

// i = (I_t / alpha_t^2)(g(-u) - g(u))
inline ElementResponse tunnel_response(const DbmdParameters& P, double u, double z) {
  detail::require_unit_state(z, "tunnel");
  const double a = tunnel_alpha(P, z);
  const double k = P.I_t / (a * a);
  return {k * (tunnel_g(P, -u, z) - tunnel_g(P, u, z)), -k * (tunnel_g_slope(P, -u, z) + tunnel_g_slope(P, u, z))};
}

// R_t = u alpha_t^2 / (I_t (g(-u) - g(u))); zero-voltage limit from the
// analytic slope -2 g'(0).
inline double tunnel_resistance(const DbmdParameters& P, double u, double z) {
  detail::require_unit_state(z, "tunnel_resistance");
  const double a = tunnel_alpha(P, z);
  if (std::abs(u) < kDbmdSmallSignal) {
    tunnel_barrier(P, u);
    return a * a / (P.I_t * -2.0 * tunnel_g_slope(P, 0.0, z));
  }
  return u * a * a / (P.I_t * (tunnel_g(P, -u, z) - tunnel_g(P, u, z)));
}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

struct DbmdConfig {
  double T = 10e-3;
  double z0 = 0.5;
  FixedPointConfig fixed_point{6, 0.0};
  double R_source = 0.1;
  // free port resistances
  double R_schottky = 1.0;
  double R_electrolyte = 10e6;
  double R_tunnel = 1e9;
  bool capacitors = true;
  // A final residual above this that also grew over the sweeps is divergence.
  double divergence_floor = 1e-6;
};

struct DbmdSample {
  double e = 0.0;
  double u = 0.0;
  double i = 0.0;
  double z = 0.0;
  double G = 0.0;  // 1 / (R_S + R_e + R_t)
  double u_s = 0.0, u_e = 0.0, u_t = 0.0;
  double R_s = 0.0, R_e = 0.0, R_t = 0.0;
  double residual = 0.0;       // max_k |b_k - rho_k a_k| over the three regions
  double decomposition = 0.0;  // |u - (u_s + u_e + u_t)|
  double z_excursion = 0.0;    // distance the unclamped state left [0, 1]
  int sweeps = 0;
};

class DbmdNetwork {
 public:
  explicit DbmdNetwork(DbmdParameters P = {}, DbmdConfig c = {}) : P_(P), c_(c) {
    validate(P_);
    validate(c_.fixed_point);
    detail::require_port_resistance(c_.T, "dbmd: sampling period");
    detail::require_port_resistance(c_.R_source, "dbmd: source");
    detail::require_port_resistance(c_.R_schottky, "dbmd: Schottky port");
    detail::require_port_resistance(c_.R_electrolyte, "dbmd: electrolyte port");
    detail::require_port_resistance(c_.R_tunnel, "dbmd: tunnel port");
    detail::require_unit_state(c_.z0, "dbmd initial state");
    R_[1] = c_.R_schottky;
    R_[3] = c_.R_electrolyte;
    R_[7] = c_.R_tunnel;
    R_[4] = c_.T / (2.0 * P_.C_e);
    R_[8] = c_.T / (2.0 * P_.C_t);
    if (c_.capacitors) {
      R_[5] = R_[3] * R_[4] / (R_[3] + R_[4]);
      R_[9] = R_[7] * R_[8] / (R_[7] + R_[8]);
    } else {
      R_[5] = R_[3];
      R_[9] = R_[7];
    }
    R_[6] = R_[5] + R_[9];
    R_[2] = R_[1] + R_[6];
    R_[0] = c_.R_source;
    bz_ = c_.z0;
    z_ = c_.z0;
  }

  const DbmdParameters& parameters() const { return P_; }
  const DbmdConfig& config() const { return c_; }
  // Index 0 is the source, 1..9 the adaptor ports.
  double port_resistance(int k) const { return R_.at(k); }
  double state() const { return z_; }

  DbmdSample step(double e, double t = 0.0) {
    if (!std::isfinite(e)) throw NumericError("dbmd: non-finite source sample", t);
    const double T = c_.T;
    const ParallelAdaptor3 pe(R_[3], R_[4]), pt(R_[7], R_[8]);
    const SeriesAdaptor3 s1(R_[5], R_[9]), s2(R_[1], R_[6]);

    const double z_start = z_;
    auto readout = [&](double f) {
      if (first_) return z_start;
      const double raw = bz_ + 0.5 * T * f;
      excursion_ = std::max(excursion_, std::max(raw - 1.0, -raw));
      return std::clamp(raw, 0.0, 1.0);
    };

    excursion_ = 0.0;
    Solution sol = last_;
    double z = readout(f_prev_);
    double f = f_prev_;
    std::vector<double>& hist = history_;
    hist.clear();
    for (int s = 0; s < c_.fixed_point.n_i; ++s) {
      const double u = sol.u_s + sol.u_e + sol.u_t;
      f = dbmd_state_derivative(P_, z, u, sol.u_s, sol.u_e);
      z = readout(f);
      Solution next = solve(e, z, sol, pe, pt, s1, s2);
      // Keep the tunnel region inside the validity domain of its equation.
      for (int halve = 0; halve < 60 && !admissible(next); ++halve) next = blend(sol, next, 0.5);
      if (!admissible(next)) throw NumericError("dbmd: sweep left the tunnel validity domain", t, hist);
      sol = next;
      hist.push_back(residual(sol, z));
      if (c_.fixed_point.tolerance > 0.0 && hist.back() <= c_.fixed_point.tolerance) break;
    }
    const double res = hist.back();
    if (!std::isfinite(res) || !std::isfinite(z)) throw NumericError("dbmd: non-finite sweep result", t, hist);
    if (hist.size() > 1 && res > c_.divergence_floor && res > hist.front()) {
      std::ostringstream os;
      os << "dbmd: fixed-point iteration diverged at t = " << t << " s (residual " << hist.front() << " -> " << res
         << " V)";
      throw NumericError(os.str(), t, hist);
    }

    // commit: state store, capacitor delays, warm start
    if (first_) bz_ = z_start - 0.5 * T * f;
    bz_ += T * f;
    f_prev_ = f;
    z_ = z;
    first_ = false;
    cap_e_ = sol.a_ce;
    cap_t_ = sol.a_ct;
    last_ = sol;

    DbmdSample out;
    out.e = e;
    out.u = sol.u;
    out.i = sol.i;
    out.z = z;
    out.u_s = sol.u_s;
    out.u_e = sol.u_e;
    out.u_t = sol.u_t;
    out.R_s = schottky_resistance(P_, sol.u_s, z);
    out.R_e = electrolyte_resistance(P_, z);
    out.R_t = tunnel_resistance(P_, sol.u_t, z);
    out.G = 1.0 / (out.R_s + out.R_e + out.R_t);
    out.residual = res;
    out.decomposition = std::abs(sol.u - (sol.u_s + sol.u_e + sol.u_t));
    out.z_excursion = std::max(0.0, excursion_);
    out.sweeps = static_cast<int>(hist.size());
    return out;
  }

  // Residuals of every sweep of the last step.
  const std::vector<double>& residual_history() const { return history_; }

 private:
  // Waves of one network solution; a_* enter the element, b_* leave it.
  struct Solution {
    double a_s = 0.0, b_s = 0.0, a_e = 0.0, b_e = 0.0, a_t = 0.0, b_t = 0.0;
    double a_ce = 0.0, a_ct = 0.0;
    double u_s = 0.0, u_e = 0.0, u_t = 0.0;
    double u = 0.0, i = 0.0;
  };

  static Solution blend(const Solution& x, const Solution& y, double w) {
    auto mix = [w](double p, double q) { return p + w * (q - p); };
    Solution s;
    s.a_s = mix(x.a_s, y.a_s);
    s.b_s = mix(x.b_s, y.b_s);
    s.a_e = mix(x.a_e, y.a_e);
    s.b_e = mix(x.b_e, y.b_e);
    s.a_t = mix(x.a_t, y.a_t);
    s.b_t = mix(x.b_t, y.b_t);
    s.a_ce = mix(x.a_ce, y.a_ce);
    s.a_ct = mix(x.a_ct, y.a_ct);
    s.u_s = mix(x.u_s, y.u_s);
    s.u_e = mix(x.u_e, y.u_e);
    s.u_t = mix(x.u_t, y.u_t);
    s.u = mix(x.u, y.u);
    s.i = mix(x.i, y.i);
    return s;
  }

  bool admissible(const Solution& s) const {
    const double limit = 2.0 * P_.U_theta * P_.phi_t0;
    return std::isfinite(s.u_s) && std::isfinite(s.u_e) && std::isfinite(s.u_t) && std::abs(s.u_t) < limit;
  }

  AffineReflection leaf(const ElementResponse& r, double u, double R) const {
    return AffineReflection::from_linearization(R, r.g, r.i - r.g * u);
  }

  Solution solve(double e, double z, const Solution& at, const ParallelAdaptor3& pe, const ParallelAdaptor3& pt,
                 const SeriesAdaptor3& s1, const SeriesAdaptor3& s2) const {
    const AffineReflection ls = leaf(schottky_response(P_, at.u_s, z), at.u_s, R_[1]);
    const AffineReflection le = leaf(electrolyte_response(P_, at.u_e, z), at.u_e, R_[3]);
    const AffineReflection lt = leaf(tunnel_response(P_, at.u_t, z), at.u_t, R_[7]);

    Solution out;
    AffineReflection up_e = le, up_t = lt;
    ParallelAdaptor3::Reduction re, rt;
    if (c_.capacitors) {
      re = pe.reduce(le, AffineReflection::delay(cap_e_));
      rt = pt.reduce(lt, AffineReflection::delay(cap_t_));
      up_e = re.up;
      up_t = rt.up;
    }
    const auto r1 = s1.reduce(up_e, up_t);
    const auto r2 = s2.reduce(ls, r1.up.inverted());
    const auto& top = r2.up;

    // Source behind an inverting connection: b_src = E' + rho0 a_src with
    // a_src = -(c + d A), b_src = -A, A the wave entering S2 at its port 3.
    const double R0 = R_[0], R2 = R_[2];
    const double Ep = 2.0 * e * R2 / (R2 + R0);
    const double rho0 = (R0 - R2) / (R0 + R2);
    const double one_plus_rho0 = 2.0 * R0 / (R0 + R2);
    const double A = (-Ep + rho0 * top.c) / (top.one_plus_d - one_plus_rho0 * top.d);
    const double a_src = -top.reflect(A), b_src = -A;
    out.u = 0.5 * (a_src + b_src);
    out.i = -(a_src - b_src) / (2.0 * R2);

    const auto w2 = s2.expand(r2, A);
    out.a_s = w2[0];
    out.b_s = ls.reflect(out.a_s);
    const auto w1 = s1.expand(r1, -w2[1]);
    if (c_.capacitors) {
      const auto we = pe.expand(re, w1[0]);
      const auto wt = pt.expand(rt, w1[1]);
      out.a_e = we[0];
      out.a_ce = we[1];
      out.a_t = wt[0];
      out.a_ct = wt[1];
    } else {
      out.a_e = w1[0];
      out.a_t = w1[1];
    }
    out.b_e = le.reflect(out.a_e);
    out.b_t = lt.reflect(out.a_t);
    out.u_s = 0.5 * (out.a_s + out.b_s);
    out.u_e = 0.5 * (out.a_e + out.b_e);
    out.u_t = 0.5 * (out.a_t + out.b_t);
    return out;
  }

  double residual(const Solution& s, double z) const {
    auto port = [](double a, double b, double u, double R, const ElementResponse& r) {
      const double G = u != 0.0 ? r.i / u : r.g;
      return std::abs(b - reflection_coefficient(G, R) * a);
    };
    return std::max({port(s.a_s, s.b_s, s.u_s, R_[1], schottky_response(P_, s.u_s, z)),
                     port(s.a_e, s.b_e, s.u_e, R_[3], electrolyte_response(P_, s.u_e, z)),
                     port(s.a_t, s.b_t, s.u_t, R_[7], tunnel_response(P_, s.u_t, z))});
  }

  DbmdParameters P_;
  DbmdConfig c_;
  std::array<double, 10> R_{};
  double bz_ = 0.0, z_ = 0.0, f_prev_ = 0.0;
  double cap_e_ = 0.0, cap_t_ = 0.0;
  double excursion_ = 0.0;
  bool first_ = true;
  Solution last_{};
  std::vector<double> history_;
};

}  // namespace wdmem
