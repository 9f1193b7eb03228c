#pragma once

// Text formats: locale-independent numbers, trace and characteristic CSV,
// flat key = value configs, atomic file replacement.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "wdmem/errors.hpp"
#include "wdmem/identify.hpp"
#include "wdmem/models.hpp"
#include "wdmem/scenario.hpp"

namespace wdmem::io {

// Shortest round-trip decimal form; independent of the global locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Parses a decimal number. With comma_decimal, a lone ',' is read as the
// decimal separator ("0,1" -> 0.1).
inline double parse_number(std::string_view text, bool comma_decimal = false) {
  std::string s(trim(text));
  if (comma_decimal && s.find(',') != std::string::npos) {
    if (s.find('.') != std::string::npos || s.find(',') != s.rfind(','))
      throw FormatError("ambiguous number '" + s + "'");
    s[s.find(',')] = '.';
  }
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw FormatError("not a number: '" + std::string(trim(text)) + "'");
  return v;
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::vector<std::string> trace_header(const Trace& tr) {
  std::vector<std::string> h{"t_s", "e_v", "u_v", "i_a"};
  const std::size_t nz = tr.rows.empty() ? 1 : tr.rows.front().z.size();
  if (nz == 1) {
    h.push_back("z");
  } else {
    for (std::size_t k = 0; k < nz; ++k) h.push_back("z" + std::to_string(k));
  }
  h.push_back("G_s");
  for (const auto& c : tr.extra_columns) h.push_back(c);
  return h;
}

inline void write_trace_csv(std::ostream& os, const Trace& tr) {
  const auto h = trace_header(tr);
  for (std::size_t k = 0; k < h.size(); ++k) os << (k ? "," : "") << h[k];
  os << '\n';
  for (const auto& r : tr.rows) {
    os << format_number(r.t) << ',' << format_number(r.e) << ',' << format_number(r.u) << ',' << format_number(r.i);
    for (double z : r.z) os << ',' << format_number(z);
    os << ',' << format_number(r.G);
    for (double x : r.extra) os << ',' << format_number(x);
    os << '\n';
  }
}

namespace detail {
// Next non-empty, non-comment line; false at end of input.
inline bool next_data_line(std::istream& is, std::string& line, std::size_t& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    line = std::string(t);
    return true;
  }
  return false;
}
}  // namespace detail

// Reads `t_s,u_v,i_a` (columns located by name; header required).
inline SampleTrace read_sample_trace_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!detail::next_data_line(is, line, lineno)) throw FormatError("trace csv: empty input");
  const auto header = split(line, ',');
  auto col = [&](const char* name) {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    throw FormatError(std::string("trace csv: header lacks column '") + name + "'");
  };
  const std::size_t ct = col("t_s"), cu = col("u_v"), ci = col("i_a");
  SampleTrace s;
  while (detail::next_data_line(is, line, lineno)) {
    const auto f = split(line, ',');
    if (f.size() != header.size())
      throw FormatError("trace csv: line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                        " fields, expected " + std::to_string(header.size()));
    try {
      s.t.push_back(parse_number(f[ct]));
      s.u.push_back(parse_number(f[cu]));
      s.i.push_back(parse_number(f[ci]));
    } catch (const FormatError& e) {
      throw FormatError("trace csv: line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return s;
}

inline void write_sample_trace_csv(std::ostream& os, const SampleTrace& s) {
  os << "t_s,u_v,i_a\n";
  for (std::size_t k = 0; k < s.size(); ++k)
    os << format_number(s.t[k]) << ',' << format_number(s.u[k]) << ',' << format_number(s.i[k]) << '\n';
}

inline void write_characteristic_csv(std::ostream& os, const CharacteristicCurve& c) {
  os << "# validity_range_wb=" << format_number(c.flux_min()) << ',' << format_number(c.flux_max()) << '\n';
  os << "flux_wb,memductance_s\n";
  for (std::size_t k = 0; k < c.size(); ++k)
    os << format_number(c.flux()[k]) << ',' << format_number(c.memductance()[k]) << '\n';
}

inline CharacteristicCurve read_characteristic_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!detail::next_data_line(is, line, lineno)) throw FormatError("characteristic csv: empty input");
  const auto header = split(line, ',');
  if (header.size() != 2 || header[0] != "flux_wb" || header[1] != "memductance_s")
    throw FormatError("characteristic csv: header must be 'flux_wb,memductance_s'");
  std::vector<double> x, g;
  while (detail::next_data_line(is, line, lineno)) {
    const auto f = split(line, ',');
    if (f.size() != 2) throw FormatError("characteristic csv: line " + std::to_string(lineno) + " needs 2 fields");
    x.push_back(parse_number(f[0]));
    g.push_back(parse_number(f[1]));
  }
  return CharacteristicCurve(std::move(x), std::move(g));
}

// ---------------------------------------------------------------------------
// key = value configs
// ---------------------------------------------------------------------------

// Ordered key/value pairs; '#' starts a comment, later keys override earlier.
inline std::map<std::string, std::string> parse_key_values(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const auto body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw FormatError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    if (key.empty()) throw FormatError("config line " + std::to_string(lineno) + ": empty key");
    out[std::string(key)] = std::string(value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

// Writes to a sibling temporary and renames it over the target, so readers
// never see a partial file.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw ConfigError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError("cannot replace '" + path.string() + "'");
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace wdmem::io
