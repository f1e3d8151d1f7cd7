#pragma once

// System file format
// ------------------
// Line-oriented text. '#' starts a comment; blank lines are ignored. Sections:
//
//   [system]      key = value pairs: base_mva, base_kv, sync_freq (rad/s), optional reference_bus
//   [buses]       rows: id kind voltage_mag injection        (kind: generator | der | passive)
//   [lines]       rows: from to reactance
//   [generators]  rows: bus inertia damping droop_inverse turbine_tc reference
//   [ders]        rows: bus synthetic_inertia droop rating
//
// Quantities are per unit on the declared bases, except time constants (s) and sync_freq (rad/s).
// A DER's injection is the injection of its bus.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "freqdesign/error.hpp"
#include "freqdesign/system.hpp"

namespace freqdesign {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineParser {
 public:
  LineParser(std::string source, int line) : source_(std::move(source)), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Parse, source_ + ":" + std::to_string(line_) + ": " + msg);
  }

  double number(std::string_view tok, std::string_view field) const {
    double v = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || p != end)
      fail("field '" + std::string(field) + "': expected a number, got '" + std::string(tok) + "'");
    return v;
  }

  int integer(std::string_view tok, std::string_view field) const {
    int v = 0;
    const auto* end = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || p != end)
      fail("field '" + std::string(field) + "': expected an integer, got '" + std::string(tok) + "'");
    return v;
  }

  void expect_columns(const std::vector<std::string_view>& toks, std::size_t n, std::string_view layout) const {
    if (toks.size() != n)
      fail("expected " + std::to_string(n) + " columns (" + std::string(layout) + "), got " +
           std::to_string(toks.size()));
  }

 private:
  std::string source_;
  int line_;
};

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses a system file. Syntax errors raise Parse; semantic checks are left to validate().
inline SystemDescription parse_system(std::istream& in, const std::string& source = "<input>") {
  SystemDescription sys;
  bool have_mva = false, have_kv = false, have_freq = false, have_system = false;
  std::string section;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    detail::LineParser lp(source, lineno);
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') lp.fail("malformed section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section != "system" && section != "buses" && section != "lines" && section != "generators" &&
          section != "ders")
        lp.fail("unknown section [" + section + "]");
      if (section == "system") have_system = true;
      continue;
    }
    if (section.empty()) lp.fail("content before the first section header");

    if (section == "system") {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) lp.fail("expected 'key = value'");
      const auto key = detail::trim(line.substr(0, eq));
      const auto val = detail::trim(line.substr(eq + 1));
      if (key == "base_mva") {
        sys.base_mva = lp.number(val, key);
        have_mva = true;
      } else if (key == "base_kv") {
        sys.base_kv = lp.number(val, key);
        have_kv = true;
      } else if (key == "sync_freq") {
        sys.sync_freq = lp.number(val, key);
        have_freq = true;
      } else if (key == "reference_bus") {
        sys.reference_bus = lp.integer(val, key);
      } else {
        lp.fail("unknown key '" + std::string(key) + "' in [system]");
      }
      continue;
    }

    const auto toks = detail::split_ws(line);
    if (section == "buses") {
      lp.expect_columns(toks, 4, "id kind voltage_mag injection");
      Bus b;
      b.id = lp.integer(toks[0], "id");
      if (toks[1] == "generator") {
        b.kind = BusKind::Generator;
      } else if (toks[1] == "der") {
        b.kind = BusKind::Der;
      } else if (toks[1] == "passive") {
        b.kind = BusKind::Passive;
      } else {
        lp.fail("field 'kind': expected generator, der or passive, got '" + std::string(toks[1]) + "'");
      }
      b.voltage_mag = lp.number(toks[2], "voltage_mag");
      b.injection = lp.number(toks[3], "injection");
      sys.buses.push_back(b);
    } else if (section == "lines") {
      lp.expect_columns(toks, 3, "from to reactance");
      sys.lines.push_back(
          {lp.integer(toks[0], "from"), lp.integer(toks[1], "to"), lp.number(toks[2], "reactance")});
    } else if (section == "generators") {
      lp.expect_columns(toks, 6, "bus inertia damping droop_inverse turbine_tc reference");
      GeneratorParams g;
      g.bus = lp.integer(toks[0], "bus");
      g.inertia = lp.number(toks[1], "inertia");
      g.damping = lp.number(toks[2], "damping");
      g.droop_inverse = lp.number(toks[3], "droop_inverse");
      g.turbine_tc = lp.number(toks[4], "turbine_tc");
      g.reference = lp.number(toks[5], "reference");
      sys.generators.push_back(g);
    } else if (section == "ders") {
      lp.expect_columns(toks, 4, "bus synthetic_inertia droop rating");
      DerParams d;
      d.bus = lp.integer(toks[0], "bus");
      d.synthetic_inertia = lp.number(toks[1], "synthetic_inertia");
      d.droop = lp.number(toks[2], "droop");
      d.rating = lp.number(toks[3], "rating");
      sys.ders.push_back(d);
    }
  }
  detail::LineParser end(source, lineno);
  if (!have_system) end.fail("missing [system] section");
  if (!have_mva) end.fail("missing base_mva in [system]");
  if (!have_kv) end.fail("missing base_kv in [system]");
  if (!have_freq) end.fail("missing sync_freq in [system]");
  sync_der_injections(sys);
  return sys;
}

inline SystemDescription parse_system_string(const std::string& text, const std::string& source = "<string>") {
  std::istringstream in(text);
  return parse_system(in, source);
}

/// Reads, parses and validates a system file.
inline SystemDescription load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open system file '" + path + "'");
  auto sys = parse_system(in, path);
  validate(sys);
  return sys;
}

/// Canonical text form; parsing it back yields an identical SystemDescription.
inline std::string serialize_system(const SystemDescription& sys) {
  using detail::fmt17;
  std::ostringstream os;
  os << "[system]\n";
  os << "base_mva = " << fmt17(sys.base_mva) << "\n";
  os << "base_kv = " << fmt17(sys.base_kv) << "\n";
  os << "sync_freq = " << fmt17(sys.sync_freq) << "\n";
  if (sys.reference_bus) os << "reference_bus = " << *sys.reference_bus << "\n";
  os << "\n[buses]\n# id kind voltage_mag injection\n";
  for (const auto& b : sys.buses)
    os << b.id << ' ' << to_string(b.kind) << ' ' << fmt17(b.voltage_mag) << ' ' << fmt17(b.injection) << "\n";
  os << "\n[lines]\n# from to reactance\n";
  for (const auto& l : sys.lines) os << l.from << ' ' << l.to << ' ' << fmt17(l.reactance) << "\n";
  os << "\n[generators]\n# bus inertia damping droop_inverse turbine_tc reference\n";
  for (const auto& g : sys.generators)
    os << g.bus << ' ' << fmt17(g.inertia) << ' ' << fmt17(g.damping) << ' ' << fmt17(g.droop_inverse) << ' '
       << fmt17(g.turbine_tc) << ' ' << fmt17(g.reference) << "\n";
  os << "\n[ders]\n# bus synthetic_inertia droop rating\n";
  for (const auto& d : sys.ders)
    os << d.bus << ' ' << fmt17(d.synthetic_inertia) << ' ' << fmt17(d.droop) << ' ' << fmt17(d.rating) << "\n";
  return os.str();
}

/// FNV-1a hash of the canonical serialization, as 16 hex digits.
inline std::string parameter_hash(const SystemDescription& sys) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize_system(sys)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace freqdesign
