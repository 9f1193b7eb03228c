#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "catch_amalgamated.hpp"
#include "wdmem/wdmem.hpp"

using namespace wdmem;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ScenarioConfig config(double T, double t_stop) {
  ScenarioConfig c;
  c.T = T;
  c.t_stop = t_stop;
  c.fixed_point = {1, 0.0};
  return c;
}

template <class Model>
double last_period_area(const Model& m, double E, double F, Waveform kind = Waveform::triangular) {
  const Trace tr = run_scenario(m, Excitation{kind, E, F, std::nullopt}, config(1e-3, 3.0 / F));
  return hysteresis_area(tr, 1.0 / F);
}

Trace synthetic(const std::vector<double>& u, const std::vector<double>& i, double T) {
  Trace tr;
  tr.T = T;
  for (std::size_t k = 0; k < u.size(); ++k) tr.rows.push_back({k * T, u[k], u[k], i[k], {0.0}, 0.0, {}});
  return tr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Excitation
// ---------------------------------------------------------------------------

TEST_CASE("sine samples") {
  const Excitation x{Waveform::sine, 5.0, 1.0, std::nullopt};
  CHECK(sample(x, 0.0) == 0.0);
  CHECK(sample(x, 0.25) == 5.0);
  CHECK_THAT(sample(x, 0.75), WithinRel(-5.0, 1e-15));
  CHECK_THAT(sample(x, 0.125), WithinRel(5.0 / std::numbers::sqrt2, 1e-15));
}

TEST_CASE("triangular samples are exact at the corners") {
  const Excitation x{Waveform::triangular, 3.0, 0.5, std::nullopt};
  CHECK(sample(x, 0.0) == 0.0);
  CHECK(sample(x, 0.5) == 3.0);
  CHECK(sample(x, 1.0) == 0.0);
  CHECK(sample(x, 1.5) == -3.0);
  CHECK(sample(x, 0.25) == 1.5);
  // agrees with (2E/pi) asin(sin(2 pi F t)) away from the corners
  for (int k = 1; k < 100; ++k) {
    const double t = 0.0173 * k;
    if (std::abs(std::fmod(t * 0.5, 0.5) - 0.25) < 0.01) continue;
    REQUIRE_THAT(sample(x, t), WithinAbs(2.0 * 3.0 / std::numbers::pi * std::asin(std::sin(std::numbers::pi * t)), 1e-7));
  }
}

TEST_CASE("negative half-waves rescale to E_neg") {
  const Excitation x{Waveform::triangular, 3.0, 1.0, -2.0};
  CHECK(sample(x, 0.25) == 3.0);
  CHECK(sample(x, 0.75) == -2.0);
  CHECK_THAT(sample(x, 0.625), WithinRel(-1.0, 1e-14));
  const Excitation s{Waveform::sine, 3.0, 1.0, -2.0};
  CHECK_THAT(sample(s, 0.75), WithinRel(-2.0, 1e-14));
}

TEST_CASE("excitation validation") {
  CHECK_THROWS_AS(validate(Excitation{Waveform::sine, 0.0, 1.0, std::nullopt}), ConfigError);
  CHECK_THROWS_AS(validate(Excitation{Waveform::sine, 1.0, -1.0, std::nullopt}), ConfigError);
  CHECK_THROWS_AS(validate(Excitation{Waveform::sine, 1.0, 1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(validate(Excitation{Waveform::sine, NAN, 1.0, std::nullopt}), ConfigError);
}

// ---------------------------------------------------------------------------
// Grid and runs
// ---------------------------------------------------------------------------

TEST_CASE("time grid is multiplicative, not accumulated") {
  CHECK(grid_last_index(0.0, 1e-3, 1.0) == 1000);
  CHECK(grid_last_index(0.0, 10e-3, 300.0) == 30000);
  CHECK(grid_last_index(0.5, 0.25, 1.6) == 4);
  CHECK_THROWS_AS(grid_last_index(0.0, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(grid_last_index(1.0, 1e-3, 1.0), ConfigError);
  const Trace tr = run_scenario(CurveMemristor(default_binary_curve()), Excitation{}, config(1e-3, 3.0));
  REQUIRE(tr.rows.size() == 3001);
  for (std::size_t k = 0; k < tr.rows.size(); ++k) REQUIRE(tr.rows[k].t == static_cast<double>(k) * 1e-3);
}

TEST_CASE("a constant memductance behaves as a divider") {
  const double G = 0.5, R0 = 0.1;
  const CurveMemristor m(CharacteristicCurve({0.0, 1.0}, {G, G}));
  const Excitation x{Waveform::sine, 2.0, 3.0, std::nullopt};
  const Trace tr = run_scenario(m, x, config(1e-3, 1.0));
  for (const auto& r : tr.rows) {
    REQUIRE_THAT(r.i, WithinAbs(r.e / (R0 + 1.0 / G), 1e-12));
    REQUIRE_THAT(r.u, WithinAbs(r.i / G, 1e-12));
  }
}

TEST_CASE("zero excitation draws no current") {
  // the source emits b = e = 0 into the matched device port
  const ResistiveSource src(0.1);
  MemristivePort<HpMemristor> hp(HpMemristor(), 0.1, 1e-3);
  MemristivePort<MultilevelMemristor> ml(MultilevelMemristor(), 0.1, 1e-3);
  const double z_hp = hp.state();
  for (int k = 0; k < 10000; ++k) {
    hp.step(src.emit(0.0), k * 1e-3);
    ml.step(src.emit(0.0), k * 1e-3);
    REQUIRE(hp.current() == 0.0);
    REQUIRE(hp.voltage() == 0.0);
    REQUIRE(ml.current() == 0.0);
  }
  CHECK(hp.state() == z_hp);
  // the multilevel state still drifts at U0 while the device rests
  CHECK_THAT(ml.state(), WithinRel(tables::multilevel::U0 * 9999e-3, 1e-9));
}

TEST_CASE("multilevel plateaus and state per frequency") {
  MultilevelParameters P;
  P.n = 10;
  for (double F : {1.0, 2.0}) {
    const Trace tr = run_scenario(MultilevelMemristor(P), Excitation{Waveform::sine, 5.0, F, std::nullopt},
                                  config(1e-3, 3.0 / F));
    std::set<double> levels;
    for (const auto& r : tr.rows) levels.insert(r.G);
    for (double g : levels) {
      const double h = (P.G1 - g) / (P.G1 - P.G0) * P.n;
      REQUIRE_THAT(h, WithinAbs(std::round(h), 1e-9));
    }
    CHECK(levels.size() >= 2);
  }
}

// ---------------------------------------------------------------------------
// Hysteresis area
// ---------------------------------------------------------------------------

TEST_CASE("a resistor encloses no area") {
  std::vector<double> u, i;
  for (int k = 0; k <= 1000; ++k) {
    u.push_back(std::sin(2.0 * std::numbers::pi * k / 1000.0));
    i.push_back(0.5 * u.back());
  }
  CHECK(hysteresis_area(synthetic(u, i, 1e-3), 1.0) <= 1e-12);
}

TEST_CASE("area of known polygons") {
  SECTION("parallelogram") {
    // sides (1.5, 0.75) and (0, 1.25): area 1.875; u never changes sign
    const std::vector<double> u{0.5, 2.0, 2.0, 0.5, 0.5}, i{0.25, 1.0, 2.25, 1.5, 0.25};
    CHECK_THAT(hysteresis_area(synthetic(u, i, 1.0), 4.0), WithinRel(1.875, 1e-14));
  }
  SECTION("figure eight counts both lobes") {
    // triangles (0,0)(1,1)(1,-1) and (0,0)(-1,1)(-1,-1), area 1 each
    const std::vector<double> u{0.0, 1.0, 1.0, 0.0, -1.0, -1.0, 0.0}, i{0.0, 1.0, -1.0, 0.0, 1.0, -1.0, 0.0};
    CHECK_THAT(hysteresis_area(synthetic(u, i, 1.0), 6.0), WithinRel(2.0, 1e-14));
  }
  SECTION("too short") {
    CHECK_THROWS_AS(hysteresis_area(synthetic({0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}, 1.0), 5.0), AnalysisError);
    CHECK_THROWS_AS(hysteresis_area(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0}, 1.0, 1.0), AnalysisError);
  }
}

TEST_CASE("period areas cover each complete period") {
  const Trace tr = run_scenario(HpMemristor(), Excitation{Waveform::sine, 1.0, 1.0, std::nullopt}, config(1e-3, 3.0));
  const auto a = period_areas(tr, 1.0);
  REQUIRE(a.size() == 3);
  CHECK(a.back() == hysteresis_area(tr, 1.0));
}

// Frequency pairs are driven with the triangular validation signal, as in the
// published hysteresis figures of these four models.
TEST_CASE("lobe area decreases with frequency for every bundled model") {
  SECTION("binary") {
    const CurveMemristor m(default_binary_curve());
    CHECK(last_period_area(m, tables::binary::E, tables::binary::F2) < last_period_area(m, tables::binary::E, tables::binary::F1));
  }
  SECTION("continuous") {
    const CurveMemristor m(default_continuous_curve());
    CHECK(last_period_area(m, tables::continuous::E, tables::continuous::F2) <
          last_period_area(m, tables::continuous::E, tables::continuous::F1));
  }
  SECTION("hp") {
    const HpMemristor m;
    CHECK(last_period_area(m, tables::hp::E, tables::hp::F2) < last_period_area(m, tables::hp::E, tables::hp::F1));
  }
  SECTION("multilevel") {
    for (int n : tables::multilevel::levels) {
      MultilevelParameters P;
      P.n = n;
      const MultilevelMemristor m(P);
      CHECK(last_period_area(m, tables::multilevel::E, tables::multilevel::F2) <
            last_period_area(m, tables::multilevel::E, tables::multilevel::F1));
    }
  }
}

TEST_CASE("hp loop under a sine drive also shrinks with frequency") {
  const HpMemristor m;
  CHECK(last_period_area(m, tables::hp::E, tables::hp::F2, Waveform::sine) <
        last_period_area(m, tables::hp::E, tables::hp::F1, Waveform::sine));
}

TEST_CASE("multilevel state drifts without a periodic steady state") {
  // dz/dt = u + U0: the mean state rises by U0 per second, so the loop keeps
  // moving and the per-period area never settles
  MultilevelParameters P;
  P.n = 1;
  const Excitation x{Waveform::sine, tables::multilevel::E, tables::multilevel::F2, std::nullopt};
  const Trace tr = run_scenario(MultilevelMemristor(P), x, config(1e-3, 3.0 / x.F));
  const auto a = period_areas(tr, 1.0 / x.F);
  REQUIRE(a.size() == 3);
  CHECK(a[0] < a[1]);
  CHECK(a[1] < a[2]);
}

TEST_CASE("passive devices absorb energy") {
  const Excitation x{Waveform::sine, 5.0, 1.0, std::nullopt};
  CHECK(absorbed_energy(run_scenario(CurveMemristor(default_binary_curve()), x, config(1e-3, 2.0)), 1.0) >= 0.0);
  CHECK(absorbed_energy(run_scenario(HpMemristor(), Excitation{Waveform::sine, 1.0, 1.0, std::nullopt}, config(1e-3, 2.0)),
                        1.0) >= 0.0);
  CHECK(absorbed_energy(run_scenario(MultilevelMemristor(), x, config(1e-3, 2.0)), 1.0) >= 0.0);
  CHECK_THROWS_AS(absorbed_energy(run_scenario(HpMemristor(), x, config(1e-3, 0.5)), 1.0), AnalysisError);
}

TEST_CASE("numeric failures report the grid time") {
  // a curve whose memductance is non-finite beyond the first knot
  struct Exploding {
    using state_type = double;
    double initial_state() const { return 0.0; }
    double derivative(double, double u) const { return u; }
    double memductance(double flux, double) const { return flux > 0.1 ? NAN : 1.0; }
    double constrain(double flux) const { return flux; }
  };
  static_assert(MemristiveModel<Exploding>);
  try {
    run_scenario(Exploding{}, Excitation{Waveform::sine, 1.0, 1.0, std::nullopt}, config(1e-3, 1.0));
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() < 0.25);
    CHECK(std::fmod(e.time() / 1e-3, 1.0) < 1e-6);
  }
}
