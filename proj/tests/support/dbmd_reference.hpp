#pragma once

// Kirchhoff-domain reference for the double-barrier device:
//   e = R0 i + u_s + u_e + u_t
//   i = i_s(u_s)                        Schottky region
//   i = u_e / R_e(z) + C_e du_e/dt      electrolyte, parallel capacitance
//   i = i_t(u_t)     + C_t du_t/dt      tunnel region, parallel capacitance
//   dz/dt = f(z, u, u_s, u_e)
// Capacitors and state use implicit trapezoidal companions; every nonlinear
// equation is solved by bisection, the state by fixed-point iteration to
// convergence. Element equations are written out here independently of the
// library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "wdmem/dbmd.hpp"

namespace testing_support {

using wdmem::DbmdParameters;

inline double ref_window(const DbmdParameters& P, double z) {
  const double x = 2.0 * z - 1.0;
  double x2p = 1.0;
  for (int k = 0; k < 2 * P.p; ++k) x2p *= x;
  return (1.0 - 2.0 * P.w0) * (1.0 - x2p) + P.w0;
}

inline double ref_state_rate(const DbmdParameters& P, double z, double u, double u_s, double u_e) {
  const double sigma = u > 0.0 ? 1.0 : 0.0;
  const double phi_a = sigma * (P.phi_a1 + z * (P.phi_a0 - P.phi_a1) - P.phi_ar) + P.phi_ar;
  const double u_r = (1.0 - sigma) * (u < 0.0 ? 1.0 : 0.0) * (1.0 - z) * u_s;
  return -P.Zdot * ref_window(P, z) / std::exp(phi_a) * std::sinh((u_r + u_e - P.U_c) / P.U_e);
}

inline double ref_schottky_current(const DbmdParameters& P, double u, double z) {
  const double phi_s = P.phi_s0 + z * (P.phi_s1 - P.phi_s0);
  const double n = P.n0 + z * (P.n1 - P.n0);
  const double lowering = P.alpha_f * std::sqrt((std::fabs(u) - u) / (P.alpha_s * P.U_theta));
  return P.I_s / std::exp(phi_s + lowering) * (std::exp(u / (n * P.U_theta)) - 1.0);
}

inline double ref_tunnel_current(const DbmdParameters& P, double u, double z) {
  const double at = P.alpha_t0 + z * (P.alpha_t1 - P.alpha_t0);
  auto g = [&](double v) {
    const double phi = P.phi_t0 + v / (2.0 * P.U_theta);
    return phi * std::exp(-at * std::sqrt(phi));
  };
  return P.I_t / (at * at) * (g(-u) - g(u));
}

// Root of an increasing function on [lo, hi] (clamped to the bracket).
inline double bisect_increasing(const std::function<double(double)>& h, double lo, double hi, double abs_tol) {
  if (h(lo) >= 0.0) return lo;
  if (h(hi) <= 0.0) return hi;
  for (int k = 0; k < 400 && hi - lo > abs_tol; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct DbmdRefSample {
  double t, e, u, i, z, u_s, u_e, u_t;
};

class DbmdReference {
 public:
  DbmdReference(DbmdParameters P, double T, double z0, double R0, bool capacitors = true)
      : P_(P), T_(T), z_(z0), R0_(R0), caps_(capacitors) {}

  DbmdRefSample step(double t, double e) {
    const double z_prev = z_;
    double z = z_prev;
    Circuit c{};
    double f = 0.0;
    for (int it = 0; it < 200; ++it) {
      c = solve_circuit(e, z);
      f = ref_state_rate(P_, z, c.u, c.u_s, c.u_e);
      if (first_) break;  // z pinned to z0 at the first instance
      const double z_new = std::clamp(z_prev + 0.5 * T_ * (f_prev_ + f), 0.0, 1.0);
      const double dz = std::fabs(z_new - z);
      z = z_new;
      if (dz <= 1e-15) {
        c = solve_circuit(e, z);
        f = ref_state_rate(P_, z, c.u, c.u_s, c.u_e);
        break;
      }
    }
    // commit companions
    const double Ge = 2.0 * P_.C_e / T_, Gt = 2.0 * P_.C_t / T_;
    if (caps_) {
      iCe_ = Ge * (c.u_e - ue_) - iCe_;
      iCt_ = Gt * (c.u_t - ut_) - iCt_;
    }
    ue_ = c.u_e;
    ut_ = c.u_t;
    z_ = z;
    f_prev_ = f;
    first_ = false;
    return {t, e, c.u, c.i, z, c.u_s, c.u_e, c.u_t};
  }

 private:
  struct Circuit {
    double i, u, u_s, u_e, u_t;
  };

  Circuit solve_circuit(double e, double z) const {
    const double Re = P_.R_e0 + z * (P_.R_e1 - P_.R_e0);
    const double Ge = caps_ ? 2.0 * P_.C_e / T_ : 0.0, Gt = caps_ ? 2.0 * P_.C_t / T_ : 0.0;
    // i_t is increasing only while alpha_t sqrt(phi_t(-u)) > 2; +-4 V stays
    // well inside that region for the tabulated barrier.
    const double ut_limit = 4.0;
    auto parts = [&](double i, double& us, double& ue, double& ut) {
      us = bisect_increasing([&](double v) { return ref_schottky_current(P_, v, z) - i; }, -60.0, 8.0, 1e-16);
      ue = (i + Ge * ue_ + (caps_ ? iCe_ : 0.0)) / (1.0 / Re + Ge);
      ut = bisect_increasing(
          [&](double v) { return ref_tunnel_current(P_, v, z) + Gt * (v - ut_) - (caps_ ? iCt_ : 0.0) - i; },
          -ut_limit, ut_limit, 1e-16);
    };
    const double span = (std::fabs(e) + 1.0) / R0_;
    double lo = -span, hi = span;
    auto balance = [&](double i) {
      double us, ue, ut;
      parts(i, us, ue, ut);
      return R0_ * i + us + ue + ut - e;  // increasing in i
    };
    for (int k = 0; k < 400; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi || hi - lo <= 1e-14 * std::max(std::fabs(lo), std::fabs(hi))) break;
      (balance(mid) < 0.0 ? lo : hi) = mid;
    }
    Circuit c{};
    c.i = 0.5 * (lo + hi);
    parts(c.i, c.u_s, c.u_e, c.u_t);
    c.u = c.u_s + c.u_e + c.u_t;
    return c;
  }

  DbmdParameters P_;
  double T_, z_, R0_;
  bool caps_;
  double f_prev_ = 0.0, ue_ = 0.0, ut_ = 0.0, iCe_ = 0.0, iCt_ = 0.0;
  bool first_ = true;
};

}  // namespace testing_support
