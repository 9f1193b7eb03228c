#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "catch_amalgamated.hpp"
#include "support/hp_reference.hpp"
#include "support/rng.hpp"
#include "wdmem/wdmem.hpp"

using namespace wdmem;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

testing_support::HpRef table_hp() { return {tables::hp::R0, tables::hp::R1, tables::hp::R_init, tables::hp::kappa, 1}; }

SampleTrace to_samples(const Trace& tr) {
  SampleTrace s;
  for (const auto& r : tr.rows) {
    s.t.push_back(r.t);
    s.u.push_back(r.u);
    s.i.push_back(r.i);
  }
  return s;
}

template <class Model>
Trace emulate(const Model& m, Waveform kind, double E, double T, double periods = 1.0) {
  ScenarioConfig c;
  c.T = T;
  c.t_stop = periods;
  c.fixed_point = {1, 0.0};
  return run_scenario(m, Excitation{kind, E, 1.0, std::nullopt}, c);
}

// Largest relative deviation from the closed-form HP characteristic on the
// middle 90% of the validity range.
double hp_interior_error(const CharacteristicCurve& c) {
  const auto h = table_hp();
  const double lo = c.flux_min(), span = c.flux_max() - lo;
  double worst = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double phi = lo + (0.05 + 0.9 * k / 2000.0) * span;
    const double g = testing_support::hp_ref_memductance_of_flux(h, phi);
    worst = std::max(worst, std::abs(c(phi) - g) / g);
  }
  return worst;
}

// RMS deviation of the re-emulated current relative to the direct model on
// samples whose flux lies in the middle 90% of the validity range.
template <class Model>
double round_trip_rms(const Model& direct, double E, Difference method) {
  const auto id = identify(to_samples(emulate(direct, Waveform::sine, E, 1e-3)), {1e-3, method});
  const auto a = emulate(direct, Waveform::triangular, E, 1e-3);
  const auto b = emulate(CurveMemristor(id.curve), Waveform::triangular, E, 1e-3);
  const double lo = id.curve.flux_min(), span = id.curve.flux_max() - lo;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    const double phi = b.rows[k].z.front();
    if (phi < lo + 0.05 * span || phi > lo + 0.95 * span) continue;
    num += std::pow(a.rows[k].i - b.rows[k].i, 2);
    den += a.rows[k].i * a.rows[k].i;
  }
  REQUIRE(den > 0.0);
  return std::sqrt(num / den);
}

}  // namespace

// ---------------------------------------------------------------------------
// Input checks and resampling
// ---------------------------------------------------------------------------

TEST_CASE("trace validation") {
  CHECK_THROWS_AS(validate(SampleTrace{{0, 1, 1}, {0, 0, 0}, {0, 0, 0}}), FormatError);
  CHECK_THROWS_AS(validate(SampleTrace{{0, 2, 1}, {0, 0, 0}, {0, 0, 0}}), FormatError);
  CHECK_THROWS_AS(validate(SampleTrace{{0, 1, 2}, {0, 0}, {0, 0, 0}}), FormatError);
  CHECK_THROWS_AS(validate(SampleTrace{{0, 1, 2}, {0, NAN, 0}, {0, 0, 0}}), FormatError);
  CHECK_THROWS_AS(validate(SampleTrace{{0, 1}, {0, 1}, {0, 1}}), IdentificationError);
  CHECK_THROWS_AS(identify(SampleTrace{{0, 1}, {0, 1}, {0, 1}}), IdentificationError);
}

TEST_CASE("resampling a uniform trace is the identity") {
  SampleTrace s;
  for (int k = 0; k <= 100; ++k) {
    s.t.push_back(k * 1e-3);
    s.u.push_back(std::sin(k * 0.1));
    s.i.push_back(std::cos(k * 0.1));
  }
  const auto r = resample_uniform(s, 1e-3);
  CHECK(r.t == s.t);
  CHECK(r.u == s.u);
  CHECK(r.i == s.i);
  CHECK(is_uniform(s));
}

TEST_CASE("resampling interpolates linearly") {
  const SampleTrace s{{0.0, 0.3, 1.0, 2.0}, {0.0, 0.3, 1.0, 2.0}, {1.0, 1.0, 1.0, 1.0}};
  CHECK_FALSE(is_uniform(s));
  const auto r = resample_uniform(s, 0.5);
  REQUIRE(r.size() == 5);
  for (std::size_t k = 0; k < r.size(); ++k) {
    CHECK_THAT(r.t[k], WithinAbs(0.5 * k, 1e-15));
    CHECK_THAT(r.u[k], WithinAbs(0.5 * k, 1e-15));
    CHECK(r.i[k] == 1.0);
  }
  CHECK_THROWS_AS(resample_uniform(s, 1.5), IdentificationError);
  CHECK_THROWS_AS(resample_uniform(s, 0.0), ConfigError);
}

TEST_CASE("variable-step input is resampled to the requested period") {
  const auto h = table_hp();
  // the triangular 1 V drive keeps the state off the window edges, where the
  // explicit reference would turn stiff
  auto e = [](double t) { return sample(Excitation{Waveform::triangular, 1.0, 1.0, std::nullopt}, t); };
  auto to_trace = [](const std::vector<testing_support::KirchhoffSample>& ks) {
    SampleTrace s;
    for (const auto& k : ks) {
      s.t.push_back(k.t);
      s.u.push_back(k.u);
      s.i.push_back(k.i);
    }
    return s;
  };
  std::vector<double> uniform;
  for (int k = 0; k <= 1000; ++k) uniform.push_back(k * 1e-3);
  const auto a = identify(to_trace(testing_support::hp_ref_simulate(h, 0.1, e, uniform, 16)), {1e-3, Difference::central});
  const auto b = identify(to_trace(testing_support::hp_ref_simulate(h, 0.1, e, testing_support::irregular_grid(0.0, 1.0, 1e-3), 16)),
                          {1e-3, Difference::central});
  CHECK_FALSE(a.resampled);
  CHECK(b.resampled);
  CHECK(b.T == 1e-3);
  const double lo = a.curve.flux_min(), span = a.curve.flux_max() - lo;
  for (int k = 0; k <= 200; ++k) {
    const double phi = lo + (0.05 + 0.9 * k / 200.0) * span;
    REQUIRE_THAT(b.curve(phi), WithinRel(a.curve(phi), 0.01));
  }
}

// ---------------------------------------------------------------------------
// Integration and differentiation
// ---------------------------------------------------------------------------

TEST_CASE("cumulative integral") {
  CHECK(cumulative_integral(std::vector<double>(10, 0.0), 1e-3) == std::vector<double>(10, 0.0));
  const auto c = cumulative_integral(std::vector<double>(11, 2.5), 0.25);
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(c[k] == 2.5 * 0.25 * k);

  // flux of E sin(2 pi F t) is E/(pi F) sin^2(pi F t)
  const double E = 5.0, F = 1.0, T = 1e-4;
  std::vector<double> u;
  for (int k = 0; k <= 10000; ++k) u.push_back(E * std::sin(2.0 * std::numbers::pi * F * k * T));
  const auto phi = cumulative_integral(u, T);
  const double Phi_s = sine_flux_span(E, F);
  for (int k = 0; k <= 10000; k += 37)
    REQUIRE_THAT(phi[k], WithinAbs(Phi_s * std::pow(std::sin(std::numbers::pi * F * k * T), 2), 1e-5 * Phi_s));
}

TEST_CASE("memductance from charge and flux") {
  SECTION("linear resistor gives a constant") {
    std::vector<double> phi, q;
    for (int k = 0; k < 50; ++k) {
      phi.push_back(0.01 * k * k);
      q.push_back(0.25 * 0.01 * k * k);
    }
    for (auto m : {Difference::forward, Difference::central})
      for (const auto& p : memductance_from_qphi(q, phi, m)) REQUIRE_THAT(p.G, WithinRel(0.25, 1e-12));
  }
  SECTION("leading monotone run only") {
    const std::vector<double> phi{0.0, 1.0, 2.0, 1.5, 3.0}, q{0.0, 1.0, 2.0, 1.5, 3.0};
    CHECK(monotone_prefix(phi) == std::vector<std::size_t>{0, 1, 2});
    CHECK(memductance_from_qphi(q, phi).size() == 2);
    CHECK(memductance_from_qphi(q, phi, Difference::central).size() == 3);
  }
  SECTION("duplicate flux samples are skipped") {
    const std::vector<double> phi{0.0, 0.0, 1.0, 1.0 + 1e-17, 2.0}, q{0.0, 0.0, 2.0, 2.0, 4.0};
    const auto pts = memductance_from_qphi(q, phi);
    REQUIRE(pts.size() == 2);
    for (const auto& p : pts) CHECK(p.G == 2.0);
  }
  SECTION("no monotone segment") {
    CHECK_THROWS_AS(memductance_from_qphi({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}), IdentificationError);
    CHECK_THROWS_AS(memductance_from_qphi({0.0, 1.0}, {0.0, 1.0, 2.0}), IdentificationError);
  }
}

TEST_CASE("characteristic assembly") {
  const auto c = build_characteristic({{0.0, 1.0}, {2.0, 3.0}});
  CHECK(c(1.0) == 2.0);
  CHECK(c(-1.0) == 1.0);
  CHECK(c(5.0) == 3.0);
  CHECK_THROWS_AS(build_characteristic({{0.0, 1.0}}), IdentificationError);
  CHECK_THROWS_AS(build_characteristic({{0.0, 1.0}, {0.0, 2.0}}), IdentificationError);
  CHECK_THROWS_AS(build_characteristic({{0.0, 1.0}, {1.0, -0.5}}), IdentificationError);
  CHECK_THROWS_AS(build_characteristic({{0.0, 1.0}, {1.0, INFINITY}}), IdentificationError);

  SECTION("input order does not matter") {
    testing_support::Rng rng(7);
    std::vector<MemductancePoint> pts;
    for (int k = 0; k < 200; ++k) pts.push_back({rng.uniform(-1.0, 1.0), rng.uniform(0.0, 3.0)});
    pts.push_back(pts[5]);
    const auto ref = build_characteristic(pts);
    for (int round = 0; round < 20; ++round) {
      std::shuffle(pts.begin(), pts.end(), rng.engine());
      const auto c2 = build_characteristic(pts);
      REQUIRE(c2.flux() == ref.flux());
      REQUIRE(c2.memductance() == ref.memductance());
    }
  }
}

// ---------------------------------------------------------------------------
// Known devices
// ---------------------------------------------------------------------------

TEST_CASE("linear resistor identifies as a flat characteristic") {
  const CurveMemristor r(CharacteristicCurve({0.0, 1.0}, {0.02, 0.02}));
  const auto id = identify(to_samples(emulate(r, Waveform::sine, 5.0, 1e-3)));
  for (double g : id.curve.memductance()) REQUIRE_THAT(g, WithinRel(0.02, 1e-9));
  CHECK(id.segment_samples == 501);
}

TEST_CASE("binary switch plateaus are recovered") {
  const auto truth = default_binary_curve();
  const auto id = identify(to_samples(emulate(CurveMemristor(truth), Waveform::sine, 5.0, 1e-3)));
  // the device sees slightly less than the source voltage across R_source
  const double span = id.curve.flux_max();
  CHECK(span < sine_flux_span(5.0, 1.0));
  CHECK(span > 0.85 * sine_flux_span(5.0, 1.0));
  for (double f : {0.05, 0.2, 0.4}) CHECK_THAT(id.curve(f * span), WithinRel(tables::binary::G0, 1e-9));
  for (double f : {0.65, 0.8, 0.95}) CHECK_THAT(id.curve(f * span), WithinRel(tables::binary::G1, 1e-9));
}

TEST_CASE("hp identification matches the closed-form characteristic") {
  for (auto method : {Difference::forward, Difference::central}) {
    const auto id = identify(to_samples(emulate(HpMemristor(), Waveform::sine, 1.0, 1e-3)), {1e-3, method});
    CHECK(id.curve.flux_min() == 0.0);
    CHECK(hp_interior_error(id.curve) <= 0.02);
  }
}

TEST_CASE("hp identification error at least halves with T") {
  for (auto method : {Difference::forward, Difference::central}) {
    const double e1 = hp_interior_error(identify(to_samples(emulate(HpMemristor(), Waveform::sine, 1.0, 1e-3)), {1e-3, method}).curve);
    const double e2 =
        hp_interior_error(identify(to_samples(emulate(HpMemristor(), Waveform::sine, 1.0, 5e-4)), {5e-4, method}).curve);
    CHECK(e2 <= 0.5 * e1);
  }
}

TEST_CASE("triangular validation stays inside the sine's flux range") {
  // numerically integrated source flux over the rising half period
  const double E = 5.0, F = 1.0, T = 1e-5;
  std::vector<double> s, t;
  for (int k = 0; k <= 50000; ++k) {
    s.push_back(sample(Excitation{Waveform::sine, E, F, std::nullopt}, k * T));
    t.push_back(sample(Excitation{Waveform::triangular, E, F, std::nullopt}, k * T));
  }
  const double Phi_s = cumulative_integral(s, T).back();
  const auto phi_t = cumulative_integral(t, T);
  const double Phi_v = *std::ranges::max_element(phi_t);
  CHECK_THAT(Phi_v / Phi_s, WithinAbs(std::numbers::pi / 4.0, 1e-6));
}

TEST_CASE("round trip through identification reproduces the current") {
  CHECK(round_trip_rms(HpMemristor(), 1.0, Difference::central) <= 0.01);
  CHECK(round_trip_rms(HpMemristor(), 1.0, Difference::forward) <= 0.01);
  CHECK(round_trip_rms(CurveMemristor(default_binary_curve()), 5.0, Difference::central) <= 0.01);
}
