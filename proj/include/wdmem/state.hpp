#pragma once

// Arithmetic on integrator state: plain doubles or fixed-size arrays.

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>
#include <vector>

namespace wdmem {

template <class S>
struct state_traits;

template <>
struct state_traits<double> {
  static constexpr std::size_t size = 1;
  static double get(double s, std::size_t) { return s; }
  static double& at(double& s, std::size_t) { return s; }
};

template <std::size_t N>
struct state_traits<std::array<double, N>> {
  static constexpr std::size_t size = N;
  static double get(const std::array<double, N>& s, std::size_t k) { return s[k]; }
  static double& at(std::array<double, N>& s, std::size_t k) { return s[k]; }
};

template <class S>
concept StateVector = requires { state_traits<S>::size; };

// y + alpha * x, elementwise.
template <StateVector S>
S axpy(const S& y, double alpha, const S& x) {
  S out = y;
  for (std::size_t k = 0; k < state_traits<S>::size; ++k)
    state_traits<S>::at(out, k) = state_traits<S>::get(y, k) + alpha * state_traits<S>::get(x, k);
  return out;
}

template <StateVector S>
bool all_finite(const S& s) {
  for (std::size_t k = 0; k < state_traits<S>::size; ++k)
    if (!std::isfinite(state_traits<S>::get(s, k))) return false;
  return true;
}

template <StateVector S>
std::vector<double> to_vector(const S& s) {
  std::vector<double> out(state_traits<S>::size);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = state_traits<S>::get(s, k);
  return out;
}

}  // namespace wdmem
