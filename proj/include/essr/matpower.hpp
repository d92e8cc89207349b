// matpower.hpp -- reader for the MATPOWER case subset used by this project.
//
// Parses the bus, gen, branch and baseMVA assignments of a .m case file.
// Quantities are converted to per-unit on baseMVA, branch reactance becomes a
// susceptance (1/x), and the single-period loads are replicated across a
// default three-period horizon until a load series is attached.
#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "essr/grid.hpp"

namespace essr {

namespace detail {

struct MpTokenizer {
  explicit MpTokenizer(const std::string& text) : s(text) {}

  const std::string& s;
  std::size_t pos = 0;
  int line = 1, col = 1;

  void advance(std::size_t n) {
    for (std::size_t k = 0; k < n && pos < s.size(); ++k, ++pos) {
      if (s[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  }

  void skip_ws_and_comments() {
    while (pos < s.size()) {
      const char ch = s[pos];
      if (ch == '%') {
        while (pos < s.size() && s[pos] != '\n') advance(1);
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        advance(1);
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws_and_comments();
    return pos >= s.size();
  }

  char peek() {
    skip_ws_and_comments();
    return pos < s.size() ? s[pos] : '\0';
  }

  bool consume(char ch) {
    skip_ws_and_comments();
    if (pos < s.size() && s[pos] == ch) {
      advance(1);
      return true;
    }
    return false;
  }

  double number() {
    skip_ws_and_comments();
    const int l = line, c = col;
    std::size_t end = pos;
    if (end < s.size() && (s[end] == '+' || s[end] == '-')) ++end;
    // Accept Inf for unlimited ratings.
    if (end + 2 < s.size() && (s[end] == 'I' || s[end] == 'i') &&
        (s.compare(end, 3, "Inf") == 0 || s.compare(end, 3, "inf") == 0)) {
      const bool neg = s[pos] == '-';
      advance(end + 3 - pos);
      return neg ? -std::numeric_limits<double>::infinity()
                 : std::numeric_limits<double>::infinity();
    }
    bool any = false;
    while (end < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' || s[end] == 'e' ||
            s[end] == 'E' ||
            ((s[end] == '+' || s[end] == '-') && end > pos &&
             (s[end - 1] == 'e' || s[end - 1] == 'E')))) {
      any = true;
      ++end;
    }
    if (!any) throw ParseError(l, c, "expected a number");
    const std::string tok = s.substr(pos, end - pos);
    advance(end - pos);
    try {
      return std::stod(tok);
    } catch (const std::exception&) {
      throw ParseError(l, c, "bad numeric literal '" + tok + "'");
    }
  }
};

// Finds "mpc.<field>" followed by '='; positions the tokenizer after '='.
inline bool seek_assignment(MpTokenizer& t, const std::string& field) {
  const std::string needle = "mpc." + field;
  std::size_t at = std::string::npos;
  std::size_t from = 0;
  while (true) {
    at = t.s.find(needle, from);
    if (at == std::string::npos) return false;
    const std::size_t after = at + needle.size();
    std::size_t k = after;
    while (k < t.s.size() && std::isspace(static_cast<unsigned char>(t.s[k]))) ++k;
    if (k < t.s.size() && t.s[k] == '=') {
      // Rewind tokenizer to the start and advance to k+1 for position info.
      t.pos = 0;
      t.line = 1;
      t.col = 1;
      t.advance(k + 1);
      return true;
    }
    from = after;
  }
}

inline std::vector<std::vector<double>> parse_matrix(MpTokenizer& t, const std::string& field) {
  if (!t.consume('['))
    throw ParseError(t.line, t.col, "expected '[' to open mpc." + field);
  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  while (true) {
    if (t.eof()) throw ParseError(t.line, t.col, "unterminated mpc." + field + " matrix");
    const char ch = t.peek();
    if (ch == ']') {
      t.consume(']');
      if (!row.empty()) rows.push_back(row);
      break;
    }
    if (ch == ';') {
      t.consume(';');
      if (!row.empty()) {
        rows.push_back(row);
        row.clear();
      }
      continue;
    }
    if (ch == ',') {
      t.consume(',');
      continue;
    }
    row.push_back(t.number());
  }
  return rows;
}

}  // namespace detail

inline NetworkCase import_matpower(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ParseError(1, 1, "empty case text");

  detail::MpTokenizer t(text);
  NetworkCase c;
  c.horizon = {"t0", "t1", "t2"};

  if (!detail::seek_assignment(t, "baseMVA"))
    throw ParseError(1, 1, "missing mpc.baseMVA");
  c.base_mva = t.number();
  if (!(c.base_mva > 0)) throw ParseError(t.line, t.col, "baseMVA must be positive");

  if (!detail::seek_assignment(t, "bus")) throw ParseError(1, 1, "missing mpc.bus");
  const auto bus_rows = detail::parse_matrix(t, "bus");
  if (!detail::seek_assignment(t, "gen")) throw ParseError(1, 1, "missing mpc.gen");
  const auto gen_rows = detail::parse_matrix(t, "gen");
  if (!detail::seek_assignment(t, "branch")) throw ParseError(1, 1, "missing mpc.branch");
  const auto branch_rows = detail::parse_matrix(t, "branch");

  int slack_bus = -1;
  for (const auto& r : bus_rows) {
    if (r.size() < 3) throw ParseError(1, 1, "bus row needs at least 3 columns");
    Bus b;
    b.id = static_cast<int>(r[0]);
    const double load = r[2] / c.base_mva;
    b.load_by_period.assign(c.horizon.size(), load);
    b.angle_min = -0.6;
    b.angle_max = 0.6;
    c.buses.push_back(b);
    if (r.size() > 1 && static_cast<int>(r[1]) == 3 && slack_bus < 0) slack_bus = b.id;
  }
  int gid = 0;
  for (const auto& r : gen_rows) {
    if (r.size() < 10) throw ParseError(1, 1, "gen row needs at least 10 columns");
    Generator g;
    g.id = ++gid;
    g.bus = static_cast<int>(r[0]);
    g.p_max = r[8] / c.base_mva;
    g.p_min = std::max(0.0, r[9] / c.base_mva);
    const double span = std::max(g.p_max - g.p_min, 1e-3);
    g.ramp_up = span;
    g.ramp_down = span;
    c.generators.push_back(g);
  }
  int lid = 0;
  for (const auto& r : branch_rows) {
    if (r.size() < 6) throw ParseError(1, 1, "branch row needs at least 6 columns");
    Line l;
    l.id = ++lid;
    l.from_bus = static_cast<int>(r[0]);
    l.to_bus = static_cast<int>(r[1]);
    const double x = r[3];
    if (x == 0.0)
      throw ParseError(1, 1, "branch " + std::to_string(lid) + " has zero reactance");
    l.susceptance = 1.0 / std::fabs(x);
    const double rate = r[5];
    l.capacity = (rate > 0 && std::isfinite(rate)) ? rate / c.base_mva : 99.0;
    c.lines.push_back(l);
  }

  // Reference: the file's slack bus when present, else the lowest-numbered
  // generator bus.
  if (slack_bus < 0)
    for (const Generator& g : c.generators)
      slack_bus = (slack_bus < 0) ? g.bus : std::min(slack_bus, g.bus);
  if (slack_bus >= 0) {
    const int bi = c.bus_index(slack_bus);
    if (bi >= 0) c.buses[bi].is_reference = true;
  }
  return c;
}

// Built-in fixtures.  seven_bus carries the published line capacities and
// loads; ieee118 parses the deterministic synthetic case text and applies the
// study defaults (uniform 0.25 p.u. ramp rates).
inline NetworkCase builtin_case(const std::string& name) {
  if (name == "seven_bus") return seven_bus_case();
  if (name == "ieee118") {
    NetworkCase c = import_matpower(ieee118_case_text());
    c.name = "ieee118";
    c.set_uniform_ramp(0.25);
    return c;
  }
  throw std::invalid_argument("unknown fixture '" + name + "' (want seven_bus or ieee118)");
}

inline std::string builtin_case_text(const std::string& name) {
  if (name == "ieee118") return ieee118_case_text();
  throw std::invalid_argument("no case text for fixture '" + name + "'");
}

}  // namespace essr
