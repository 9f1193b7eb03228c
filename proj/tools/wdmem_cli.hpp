#pragma once

// Command-line front end: emulate, sweep, identify, validate, selfcheck.
// Exit codes: 0 ok, 2 configuration/file error, 3 numeric failure,
// 4 identification failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "wdmem/wdmem.hpp"

namespace wdmem::cli {

enum Exit : int { kOk = 0, kConfig = 2, kNumeric = 3, kIdentification = 4 };

// ---------------------------------------------------------------------------
// Settings
// ---------------------------------------------------------------------------

inline const std::map<std::string, std::set<std::string>>& model_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"binary", {"G1_s", "G0_s", "threshold_wb", "width_wb", "flux0_wb"}},
      {"continuous", {"G1_s", "G0_s", "span_wb", "knots", "flux0_wb"}},
      {"curve-file", {"curve_file", "flux0_wb"}},
      {"hp", {"R0_ohm", "R1_ohm", "Rinit_ohm", "kappa_per_C", "p", "clamp_eps"}},
      {"multilevel", {"G1_s", "G0_s", "U0_v", "n", "z0"}},
      {"dbmd", {"Zdot_hz",  "Ue_v",    "phi_a0",   "phi_a1",   "phi_ar",         "w0",
                "p",        "Uc_v",    "Re0_ohm",  "Re1_ohm",  "Ce_F",           "phi_s0",
                "phi_s1",   "Ds_m",    "alpha_s",  "Is_A",     "n0",             "n1",
                "alpha_f",  "Utheta_v", "phi_t0",  "alpha_t0", "alpha_t1",       "It_A",
                "Ct_F",     "z0",      "R_schottky_ohm", "R_electrolyte_ohm", "R_tunnel_ohm", "capacitors"}},
  };
  return keys;
}

inline const std::set<std::string>& run_keys() {
  static const std::set<std::string> keys = {"model", "excitation", "E_v",     "E_neg_v",     "frequencies_hz",
                                             "T_s",   "t0_s",       "t_stop_s", "periods",    "n_i",
                                             "tolerance_v", "R_source_ohm", "out_dir"};
  return keys;
}

inline bool known_key(const std::string& k) {
  if (run_keys().count(k)) return true;
  for (const auto& [m, ks] : model_keys())
    if (ks.count(k)) return true;
  return false;
}

class Settings {
 public:
  void set(const std::string& key, const std::string& value) {
    if (!known_key(key)) throw ConfigError("unknown configuration key '" + key + "'");
    values_[key] = value;
  }

  void load_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open configuration file '" + path.string() + "'");
    for (const auto& [k, v] : io::parse_key_values(is)) set(k, v);
  }

  void set_assignment(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set(std::string(io::trim(kv.substr(0, eq))), std::string(io::trim(kv.substr(eq + 1))));
  }

  bool has(const std::string& k) const { return values_.count(k) != 0; }

  std::string text(const std::string& k, const std::string& fallback) const {
    used_.insert(k);
    const auto it = values_.find(k);
    return it == values_.end() ? fallback : it->second;
  }

  double number(const std::string& k, double fallback) const {
    used_.insert(k);
    const auto it = values_.find(k);
    if (it == values_.end()) return fallback;
    try {
      return io::parse_number(it->second, true);
    } catch (const FormatError& e) {
      throw ConfigError("key '" + k + "': " + e.what());
    }
  }

  int integer(const std::string& k, int fallback) const {
    const double v = number(k, fallback);
    if (v != std::floor(v)) throw ConfigError("key '" + k + "' must be an integer");
    return static_cast<int>(v);
  }

  std::vector<double> numbers(const std::string& k, std::vector<double> fallback) const {
    used_.insert(k);
    const auto it = values_.find(k);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::string s = it->second;
    std::replace(s.begin(), s.end(), ';', ' ');
    std::istringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(io::parse_number(tok, true));
    if (out.empty()) throw ConfigError("key '" + k + "' is empty");
    return out;
  }

  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct DrivePreset {
  double T;
  int n_i;
  double E;
  std::optional<double> E_neg;
  std::vector<double> F;
  Waveform wave = Waveform::triangular;
};

inline DrivePreset drive_preset(const std::string& model) {
  namespace t = tables;
  if (model == "binary" || model == "curve-file") return {t::binary::T, t::binary::n_i, t::binary::E, {}, {t::binary::F1, t::binary::F2}};
  if (model == "continuous")
    return {t::continuous::T, t::continuous::n_i, t::continuous::E, {}, {t::continuous::F1, t::continuous::F2}};
  if (model == "hp") return {t::hp::T, t::hp::n_i, t::hp::E, {}, {t::hp::F1, t::hp::F2}};
  if (model == "multilevel")
    return {t::multilevel::T, t::multilevel::n_i, t::multilevel::E, {}, {t::multilevel::F1, t::multilevel::F2}};
  if (model == "dbmd")
    return {t::dbmd::T, t::dbmd::n_i, t::dbmd::E, t::dbmd::E_neg, {t::dbmd::F[0], t::dbmd::F[1], t::dbmd::F[2]}};
  throw ConfigError("unknown model '" + model + "' (binary, continuous, hp, multilevel, dbmd, curve-file)");
}

struct DbmdSetup {
  DbmdParameters P;
  DbmdConfig c;
};

using Device = std::variant<HpMemristor, CurveMemristor, MultilevelMemristor, DbmdSetup>;

struct Run {
  std::string model;
  Device device;
  Excitation drive;  // F overwritten per member
  std::vector<double> F;
  double T = 1e-3;
  double t0 = 0.0;
  std::optional<double> t_stop;
  double periods = 3.0;
  FixedPointConfig fixed_point;
  double R_source = 0.1;
  std::string out_dir = ".";
};

inline Device build_device(const std::string& model, const Settings& s, double T, const FixedPointConfig& fp,
                           double R_source) {
  namespace t = tables;
  if (model == "binary") {
    const double span = sine_flux_span(t::binary::E, t::binary::F1);
    return CurveMemristor(binary_switch_curve(s.number("G0_s", t::binary::G0), s.number("G1_s", t::binary::G1),
                                              s.number("threshold_wb", 0.5 * span), s.number("width_wb", 0.1 * span)),
                          s.number("flux0_wb", 0.0));
  }
  if (model == "continuous") {
    const double span = sine_flux_span(t::continuous::E, t::continuous::F1);
    return CurveMemristor(raised_cosine_curve(s.number("G0_s", t::binary::G0), s.number("G1_s", t::continuous::G_norm),
                                              s.number("span_wb", span), s.integer("knots", 201)),
                          s.number("flux0_wb", 0.0));
  }
  if (model == "curve-file") {
    const std::string path = s.text("curve_file", "");
    if (path.empty()) throw ConfigError("model curve-file needs curve_file");
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open characteristic file '" + path + "'");
    return CurveMemristor(io::read_characteristic_csv(is), s.number("flux0_wb", 0.0));
  }
  if (model == "hp") {
    HpParameters P;
    P.R0 = s.number("R0_ohm", P.R0);
    P.R1 = s.number("R1_ohm", P.R1);
    P.R_init = s.number("Rinit_ohm", P.R_init);
    P.kappa = s.number("kappa_per_C", P.kappa);
    P.p = s.integer("p", P.p);
    P.clamp_eps = s.number("clamp_eps", P.clamp_eps);
    return HpMemristor(P);
  }
  if (model == "multilevel") {
    MultilevelParameters P;
    P.G1 = s.number("G1_s", P.G1);
    P.G0 = s.number("G0_s", P.G0);
    P.U0 = s.number("U0_v", P.U0);
    P.n = s.integer("n", P.n);
    P.z0 = s.number("z0", P.z0);
    return MultilevelMemristor(P);
  }
  if (model == "dbmd") {
    DbmdSetup d;
    auto& P = d.P;
    P.Zdot = s.number("Zdot_hz", P.Zdot);
    P.U_e = s.number("Ue_v", P.U_e);
    P.phi_a0 = s.number("phi_a0", P.phi_a0);
    P.phi_a1 = s.number("phi_a1", P.phi_a1);
    P.phi_ar = s.number("phi_ar", P.phi_ar);
    P.w0 = s.number("w0", P.w0);
    P.p = s.integer("p", P.p);
    P.U_c = s.number("Uc_v", P.U_c);
    P.R_e0 = s.number("Re0_ohm", P.R_e0);
    P.R_e1 = s.number("Re1_ohm", P.R_e1);
    P.C_e = s.number("Ce_F", P.C_e);
    P.phi_s0 = s.number("phi_s0", P.phi_s0);
    P.phi_s1 = s.number("phi_s1", P.phi_s1);
    P.D_s = s.number("Ds_m", P.D_s);
    P.alpha_s = s.number("alpha_s", P.alpha_s);
    P.I_s = s.number("Is_A", P.I_s);
    P.n0 = s.number("n0", P.n0);
    P.n1 = s.number("n1", P.n1);
    P.alpha_f = s.number("alpha_f", P.alpha_f);
    P.U_theta = s.number("Utheta_v", P.U_theta);
    P.phi_t0 = s.number("phi_t0", P.phi_t0);
    P.alpha_t0 = s.number("alpha_t0", P.alpha_t0);
    P.alpha_t1 = s.number("alpha_t1", P.alpha_t1);
    P.I_t = s.number("It_A", P.I_t);
    P.C_t = s.number("Ct_F", P.C_t);
    validate(P);
    auto& c = d.c;
    c.T = T;
    c.fixed_point = fp;
    c.R_source = R_source;
    c.z0 = s.number("z0", c.z0);
    c.R_schottky = s.number("R_schottky_ohm", c.R_schottky);
    c.R_electrolyte = s.number("R_electrolyte_ohm", c.R_electrolyte);
    c.R_tunnel = s.number("R_tunnel_ohm", c.R_tunnel);
    c.capacitors = s.integer("capacitors", 1) != 0;
    DbmdNetwork probe(P, c);  // validates the configuration up front
    (void)probe;
    return d;
  }
  throw ConfigError("unknown model '" + model + "'");
}

inline Run build_run(const Settings& s, std::ostream& err) {
  Run r;
  r.model = s.text("model", "");
  if (r.model.empty()) throw ConfigError("no model selected (--model or 'model = ...')");
  const DrivePreset d = drive_preset(r.model);
  r.T = s.number("T_s", d.T);
  r.t0 = s.number("t0_s", 0.0);
  if (s.has("t_stop_s")) r.t_stop = s.number("t_stop_s", 0.0);
  r.periods = s.number("periods", 3.0);
  if (!(r.periods > 0.0)) throw ConfigError("periods must be > 0");
  r.fixed_point.n_i = s.integer("n_i", d.n_i);
  r.fixed_point.tolerance = s.number("tolerance_v", 0.0);
  validate(r.fixed_point);
  r.R_source = s.number("R_source_ohm", 0.1);
  r.out_dir = s.text("out_dir", ".");
  r.F = s.numbers("frequencies_hz", d.F);

  const std::string wave = s.text("excitation", d.wave == Waveform::sine ? "sine" : "triangular");
  if (wave == "sine")
    r.drive.kind = Waveform::sine;
  else if (wave == "triangular")
    r.drive.kind = Waveform::triangular;
  else
    throw ConfigError("excitation must be 'sine' or 'triangular'");
  r.drive.E = s.number("E_v", d.E);
  if (s.has("E_neg_v"))
    r.drive.E_neg = s.number("E_neg_v", 0.0);
  else
    r.drive.E_neg = d.E_neg;
  for (double F : r.F) {
    Excitation x = r.drive;
    x.F = F;
    validate(x);
  }
  if (!(r.T > 0.0)) throw ConfigError("T_s must be > 0");
  detail::require_port_resistance(r.R_source, "R_source_ohm");

  r.device = build_device(r.model, s, r.T, r.fixed_point, r.R_source);
  for (const auto& k : s.unused()) err << "warning: key '" << k << "' does not apply to model " << r.model << "\n";
  return r;
}

inline double stop_time(const Run& r, double F) { return r.t_stop ? *r.t_stop : r.t0 + r.periods / F; }

inline Trace run_member(const Run& r, double F) {
  Excitation x = r.drive;
  x.F = F;
  const double t_stop = stop_time(r, F);
  return std::visit(
      [&](const auto& dev) -> Trace {
        using D = std::decay_t<decltype(dev)>;
        if constexpr (std::is_same_v<D, DbmdSetup>) {
          return run_dbmd_scenario(dev.P, dev.c, x, r.t0, t_stop);
        } else {
          ScenarioConfig c;
          c.T = r.T;
          c.t0 = r.t0;
          c.t_stop = t_stop;
          c.fixed_point = r.fixed_point;
          c.R_source = r.R_source;
          return run_scenario(dev, x, c);
        }
      },
      r.device);
}

struct Member {
  double F = 0.0;
  Trace trace;
  std::vector<double> areas;
};

inline std::string trace_filename(const std::string& model, double F) {
  return model + "_" + io::format_number(F) + "hz.csv";
}

inline Member analyse(double F, Trace tr) {
  Member m{F, std::move(tr), {}};
  m.areas = period_areas(m.trace, 1.0 / F);
  return m;
}

// Runs every member first, then writes all files, so a failure leaves no
// partial output behind.
inline void emit(const Run& r, const std::vector<Member>& members, std::ostream& out) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(r.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + r.out_dir + "'");
  std::ostringstream summary;
  summary << "frequency_hz,steps,final_z,last_period_area_va\n";
  for (const auto& m : members) {
    std::ostringstream csv;
    io::write_trace_csv(csv, m.trace);
    io::atomic_write_file(fs::path(r.out_dir) / trace_filename(r.model, m.F), csv.str());
    const auto& last = m.trace.rows.back();
    summary << io::format_number(m.F) << ',' << m.trace.rows.size() << ',' << io::format_number(last.z.front()) << ','
            << (m.areas.empty() ? std::string("nan") : io::format_number(m.areas.back())) << '\n';
    out << r.model << " F=" << io::format_number(m.F) << " Hz: steps=" << m.trace.rows.size()
        << " final_z=" << io::format_number(last.z.front()) << " lobe_area_va=[";
    for (std::size_t k = 0; k < m.areas.size(); ++k) out << (k ? " " : "") << io::format_number(m.areas[k]);
    out << "]\n";
  }
  io::atomic_write_file(fs::path(r.out_dir) / (r.model + "_areas.csv"), summary.str());
}

inline std::vector<Member> run_all(const Run& r, unsigned jobs) {
  std::vector<Member> members(r.F.size());
  if (jobs <= 1) {
    for (std::size_t k = 0; k < r.F.size(); ++k) members[k] = analyse(r.F[k], run_member(r, r.F[k]));
    return members;
  }
  // Each member owns its model instance; results are placed by index so the
  // output does not depend on scheduling.
  for (std::size_t start = 0; start < r.F.size(); start += jobs) {
    std::vector<std::future<Member>> batch;
    for (std::size_t k = start; k < std::min(r.F.size(), start + jobs); ++k)
      batch.push_back(std::async(std::launch::async, [&r, F = r.F[k]] { return analyse(F, run_member(r, F)); }));
    for (std::size_t k = 0; k < batch.size(); ++k) members[start + k] = batch[k].get();
  }
  return members;
}

// ---------------------------------------------------------------------------
// Self-check
// ---------------------------------------------------------------------------

inline bool selfcheck(std::ostream& out) {
  int diffs = 0;
  auto row = [&](const std::string& name, double table, double bundled) {
    const bool same = table == bundled;
    if (!same) ++diffs;
    out << (same ? "ok   " : "DIFF ") << name << " table=" << io::format_number(table)
        << " bundled=" << io::format_number(bundled) << '\n';
  };
  std::ostringstream sink;
  auto defaults = [&](const std::string& model) {
    Settings s;
    s.set("model", model);
    return build_run(s, sink);
  };
  auto drive_rows = [&](const std::string& tag, const Run& r, double T, int n_i, double E, std::vector<double> F) {
    row(tag + ".T", T, r.T);
    row(tag + ".n_i", n_i, r.fixed_point.n_i);
    row(tag + ".E", E, r.drive.E);
    for (std::size_t k = 0; k < F.size(); ++k)
      row(tag + ".F" + std::to_string(k + 1), F[k], k < r.F.size() ? r.F[k] : std::nan(""));
    row(tag + ".R_source", 0.1, r.R_source);
  };
  namespace t = tables;
  {
    const Run r = defaults("binary");
    const auto& c = std::get<CurveMemristor>(r.device).curve();
    drive_rows("binary", r, t::binary::T, t::binary::n_i, t::binary::E, {t::binary::F1, t::binary::F2});
    row("binary.G1", t::binary::G1, c.memductance().back());
    row("binary.G0", t::binary::G0, c.memductance().front());
  }
  {
    const Run r = defaults("continuous");
    const auto& c = std::get<CurveMemristor>(r.device).curve();
    drive_rows("continuous", r, t::continuous::T, t::continuous::n_i, t::continuous::E,
               {t::continuous::F1, t::continuous::F2});
    row("continuous.G", t::continuous::G_norm, c.memductance().back());
  }
  {
    const Run r = defaults("hp");
    const auto& P = std::get<HpMemristor>(r.device).parameters();
    drive_rows("hp", r, t::hp::T, t::hp::n_i, t::hp::E, {t::hp::F1, t::hp::F2});
    row("hp.R1", t::hp::R1, P.R1);
    row("hp.R0", t::hp::R0, P.R0);
    row("hp.R_init", t::hp::R_init, P.R_init);
    row("hp.kappa", t::hp::kappa, P.kappa);
    row("hp.p", t::hp::p, P.p);
  }
  {
    const Run r = defaults("multilevel");
    const auto& P = std::get<MultilevelMemristor>(r.device).parameters();
    drive_rows("multilevel", r, t::multilevel::T, t::multilevel::n_i, t::multilevel::E,
               {t::multilevel::F1, t::multilevel::F2});
    row("multilevel.G1", t::multilevel::G1, P.G1);
    row("multilevel.G0", t::multilevel::G0, P.G0);
    row("multilevel.U0", t::multilevel::U0, P.U0);
  }
  {
    const Run r = defaults("dbmd");
    const auto& d = std::get<DbmdSetup>(r.device);
    const auto& P = d.P;
    namespace v = t::dbmd;
    drive_rows("dbmd", r, v::T, v::n_i, v::E, {v::F[0], v::F[1], v::F[2]});
    row("dbmd.E_neg", v::E_neg, r.drive.E_neg.value_or(0.0));
    const std::pair<const char*, std::pair<double, double>> vals[] = {
        {"Zdot", {v::Zdot, P.Zdot}},       {"U_e", {v::U_e, P.U_e}},
        {"phi_a0", {v::phi_a0, P.phi_a0}}, {"phi_a1", {v::phi_a1, P.phi_a1}},
        {"phi_ar", {v::phi_ar, P.phi_ar}}, {"w0", {v::w0, P.w0}},
        {"p", {v::p, P.p}},                {"U_c", {v::U_c, P.U_c}},
        {"R_e0", {v::R_e0, P.R_e0}},       {"R_e1", {v::R_e1, P.R_e1}},
        {"C_e", {v::C_e, P.C_e}},          {"phi_s0", {v::phi_s0, P.phi_s0}},
        {"phi_s1", {v::phi_s1, P.phi_s1}}, {"D_s", {v::D_s, P.D_s}},
        {"alpha_s", {v::alpha_s, P.alpha_s}}, {"I_s", {v::I_s, P.I_s}},
        {"n0", {v::n0, P.n0}},             {"n1", {v::n1, P.n1}},
        {"alpha_f", {v::alpha_f, P.alpha_f}}, {"U_theta", {v::U_theta, P.U_theta}},
        {"phi_t0", {v::phi_t0, P.phi_t0}}, {"alpha_t0", {v::alpha_t0, P.alpha_t0}},
        {"alpha_t1", {v::alpha_t1, P.alpha_t1}}, {"I_t", {v::I_t, P.I_t}},
        {"C_t", {v::C_t, P.C_t}},          {"R1", {v::R1, d.c.R_schottky}},
        {"R3", {v::R3, d.c.R_electrolyte}}, {"R7", {v::R7, d.c.R_tunnel}},
    };
    for (const auto& [name, tv] : vals) row(std::string("dbmd.") + name, tv.first, tv.second);
  }
  out << (diffs == 0 ? "selfcheck: all bundled defaults match the tables\n"
                     : "selfcheck: " + std::to_string(diffs) + " mismatches\n");
  return diffs == 0;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

struct DriveFlags {
  std::string config, model, excitation, out_dir;
  std::vector<std::string> sets;
  std::vector<double> freqs;
  std::optional<double> E, E_neg, T, t0, t_stop, periods, tolerance;
  std::optional<int> n_i;
};

inline void add_drive_flags(CLI::App* sub, DriveFlags& f, bool with_model) {
  sub->add_option("--config", f.config, "key = value configuration file");
  if (with_model) sub->add_option("--model", f.model, "binary | continuous | hp | multilevel | dbmd | curve-file");
  sub->add_option("--set", f.sets, "override a configuration key (key=value), repeatable");
  sub->add_option("--freq", f.freqs, "drive frequency in Hz, repeatable");
  sub->add_option("--excitation", f.excitation, "sine | triangular");
  sub->add_option("--amplitude", f.E, "positive amplitude E in V");
  sub->add_option("--negative-amplitude", f.E_neg, "negative amplitude E- in V (< 0)");
  sub->add_option("--T", f.T, "sampling period in s");
  sub->add_option("--t0", f.t0, "start time in s");
  sub->add_option("--t-stop", f.t_stop, "stop time in s (default: t0 + periods / F)");
  sub->add_option("--periods", f.periods, "periods per member when --t-stop is not given");
  sub->add_option("--n-i", f.n_i, "fixed-point sweeps per sample");
  sub->add_option("--tolerance", f.tolerance, "early-exit residual tolerance in V");
  sub->add_option("--out-dir", f.out_dir, "output directory");
}

inline Settings settings_from(const DriveFlags& f) {
  Settings s;
  if (!f.config.empty()) s.load_file(f.config);
  for (const auto& kv : f.sets) s.set_assignment(kv);
  auto num = [&](const char* key, const auto& opt) {
    if (opt) s.set(key, io::format_number(static_cast<double>(*opt)));
  };
  if (!f.model.empty()) s.set("model", f.model);
  if (!f.excitation.empty()) s.set("excitation", f.excitation);
  if (!f.out_dir.empty()) s.set("out_dir", f.out_dir);
  if (!f.freqs.empty()) {
    std::string list;
    for (double F : f.freqs) list += (list.empty() ? "" : " ") + io::format_number(F);
    s.set("frequencies_hz", list);
  }
  num("E_v", f.E);
  num("E_neg_v", f.E_neg);
  num("T_s", f.T);
  num("t0_s", f.t0);
  num("t_stop_s", f.t_stop);
  num("periods", f.periods);
  num("tolerance_v", f.tolerance);
  num("n_i", f.n_i);
  return s;
}

// Largest flux excursion of the source drive starting from zero flux.
inline double drive_flux_excursion(const Excitation& x) {
  const double pos = x.kind == Waveform::sine ? x.E / (std::numbers::pi * x.F) : x.E / (4.0 * x.F);
  return pos;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wave-digital emulation of memristive devices"};
  app.require_subcommand(1);

  DriveFlags emu, swp, val;
  unsigned jobs = 0;
  auto* c_emulate = app.add_subcommand("emulate", "run a model under a periodic drive and write traces");
  add_drive_flags(c_emulate, emu, true);
  auto* c_sweep = app.add_subcommand("sweep", "like emulate, frequencies run in parallel");
  add_drive_flags(c_sweep, swp, true);
  c_sweep->add_option("--jobs", jobs, "worker count (default: one per frequency)");

  std::string in_path, out_path;
  double id_T = 0.0;
  bool central = false;
  auto* c_identify = app.add_subcommand("identify", "characteristic curve from a t_s,u_v,i_a trace");
  c_identify->add_option("--input", in_path, "input trace CSV")->required();
  c_identify->add_option("--output", out_path, "output characteristic CSV")->required();
  c_identify->add_option("--T", id_T, "resampling period in s (default: mean input spacing)");
  c_identify->add_flag("--central", central, "central instead of forward difference quotients");

  std::string curve_path;
  auto* c_validate = app.add_subcommand("validate", "emulate an identified characteristic");
  c_validate->add_option("--curve", curve_path, "characteristic CSV")->required();
  add_drive_flags(c_validate, val, false);

  auto* c_self = app.add_subcommand("selfcheck", "compare bundled defaults with the parameter tables");

  std::vector<std::string> argv_store{"wdmem"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (c_self->parsed()) return selfcheck(out) ? kOk : kConfig;

    if (c_identify->parsed()) {
      std::ifstream is(in_path);
      if (!is) throw ConfigError("cannot open trace '" + in_path + "'");
      const SampleTrace tr = io::read_sample_trace_csv(is);
      IdentifyOptions opt;
      opt.T = id_T;
      opt.method = central ? Difference::central : Difference::forward;
      const Identification id = identify(tr, opt);
      std::ostringstream csv;
      io::write_characteristic_csv(csv, id.curve);
      io::atomic_write_file(out_path, csv.str());
      out << "identified " << id.curve.size() << " knots, validity range [" << io::format_number(id.curve.flux_min())
          << ", " << io::format_number(id.curve.flux_max()) << "] Wb" << (id.resampled ? " (resampled)" : "") << '\n';
      return kOk;
    }

    if (c_validate->parsed()) {
      Settings s = settings_from(val);
      s.set("model", "curve-file");
      s.set("curve_file", curve_path);
      const Run r = build_run(s, err);
      const auto& curve = std::get<CurveMemristor>(r.device).curve();
      for (double F : r.F) {
        Excitation x = r.drive;
        x.F = F;
        const double reach = drive_flux_excursion(x);
        if (reach > curve.flux_max() || curve.flux_min() > 0.0)
          err << "warning: drive at " << io::format_number(F) << " Hz reaches " << io::format_number(reach)
              << " Wb, outside the validity range [" << io::format_number(curve.flux_min()) << ", "
              << io::format_number(curve.flux_max()) << "] Wb; the curve is clamped there\n";
      }
      const auto members = run_all(r, 1);
      for (const auto& m : members) {
        double lo = m.trace.rows.front().z.front(), hi = lo;
        for (const auto& row : m.trace.rows) {
          lo = std::min(lo, row.z.front());
          hi = std::max(hi, row.z.front());
        }
        const double slack = 1e-9 * (curve.flux_max() - curve.flux_min());  // roundoff at the range edges
        if (lo < curve.flux_min() - slack || hi > curve.flux_max() + slack)
          err << "warning: " << io::format_number(m.F) << " Hz run queried the clamp region (flux ["
              << io::format_number(lo) << ", " << io::format_number(hi) << "] Wb)\n";
      }
      emit(r, members, out);
      return kOk;
    }

    const bool sweep = c_sweep->parsed();
    const Run r = build_run(settings_from(sweep ? swp : emu), err);
    const unsigned workers = sweep ? (jobs ? jobs : static_cast<unsigned>(r.F.size())) : 1;
    emit(r, run_all(r, workers), out);
    return kOk;
  } catch (const IdentificationError& e) {
    err << "identification error: " << e.what() << '\n';
    return kIdentification;
  } catch (const NumericError& e) {
    err << "numeric failure at t = " << io::format_number(e.time()) << " s: " << e.what() << '\n';
    return kNumeric;
  } catch (const PassivityError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }
}

}  // namespace wdmem::cli
