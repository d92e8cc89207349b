// grid.hpp -- transmission network data model and built-in test systems.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace essr {

struct ParseError : std::runtime_error {
  ParseError(int line, int col, const std::string& what)
      : std::runtime_error("parse error at line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ": " + what),
        line(line),
        col(col) {}
  int line;
  int col;
};

struct Bus {
  int id = 0;
  std::vector<double> load_by_period;  // p.u., one entry per horizon period
  double angle_min = -0.6;             // radians
  double angle_max = 0.6;
  bool is_reference = false;
};

struct Line {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double susceptance = 0.0;  // p.u.
  double capacity = 0.0;     // p.u.; lower flow limit is -capacity
};

struct Generator {
  int id = 0;
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;    // per-period limit, p.u.
  double ramp_down = 0.0;  // per-period limit, p.u.
};

struct NetworkCase {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<std::string> horizon;  // period names, t0 first
  double base_mva = 100.0;
  std::string name;

  int num_periods() const { return static_cast<int>(horizon.size()); }

  int bus_index(int id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
      if (buses[i].id == id) return static_cast<int>(i);
    return -1;
  }
  int line_index(int id) const {
    for (std::size_t i = 0; i < lines.size(); ++i)
      if (lines[i].id == id) return static_cast<int>(i);
    return -1;
  }
  int generator_index(int id) const {
    for (std::size_t i = 0; i < generators.size(); ++i)
      if (generators[i].id == id) return static_cast<int>(i);
    return -1;
  }
  int reference_bus_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
      if (buses[i].is_reference) return static_cast<int>(i);
    return -1;
  }
  double total_load(int period) const {
    double s = 0.0;
    for (const Bus& b : buses)
      if (period < static_cast<int>(b.load_by_period.size())) s += b.load_by_period[period];
    return s;
  }
  double total_gen_capacity() const {
    double s = 0.0;
    for (const Generator& g : generators) s += g.p_max;
    return s;
  }

  void set_uniform_ramp(double r) {
    for (Generator& g : generators) {
      g.ramp_up = r;
      g.ramp_down = r;
    }
  }

  // Replaces a bus's load series; length must match the horizon.
  void attach_load_series(int bus_id, std::vector<double> series) {
    const int bi = bus_index(bus_id);
    if (bi < 0) throw std::invalid_argument("attach_load_series: unknown bus");
    if (series.size() != horizon.size())
      throw std::invalid_argument("attach_load_series: length mismatch");
    buses[bi].load_by_period = std::move(series);
  }
};

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_case(const NetworkCase& c) {
  ValidationReport rep;
  auto flag = [&](const std::string& code, const std::string& msg) {
    rep.violations.push_back({code, msg});
  };
  if (c.horizon.empty()) flag("horizon_empty", "case has no decision periods");
  std::map<int, int> bus_count, line_count, gen_count;
  for (const Bus& b : c.buses) ++bus_count[b.id];
  for (const Line& l : c.lines) ++line_count[l.id];
  for (const Generator& g : c.generators) ++gen_count[g.id];
  for (const auto& [id, n] : bus_count)
    if (n > 1) flag("duplicate_bus", "bus " + std::to_string(id) + " defined " +
                                         std::to_string(n) + " times");
  for (const auto& [id, n] : line_count)
    if (n > 1) flag("duplicate_line", "line " + std::to_string(id) + " defined " +
                                          std::to_string(n) + " times");
  for (const auto& [id, n] : gen_count)
    if (n > 1) flag("duplicate_generator", "generator " + std::to_string(id) + " defined " +
                                               std::to_string(n) + " times");

  int refs = 0;
  for (const Bus& b : c.buses) {
    if (b.is_reference) ++refs;
    if (!(b.angle_min < b.angle_max))
      flag("angle_bounds", "bus " + std::to_string(b.id) + " has angle_min >= angle_max");
    if (b.load_by_period.size() != c.horizon.size())
      flag("load_length", "bus " + std::to_string(b.id) + " has " +
                              std::to_string(b.load_by_period.size()) + " load entries for " +
                              std::to_string(c.horizon.size()) + " periods");
    for (double v : b.load_by_period)
      if (!std::isfinite(v)) flag("load_finite", "bus " + std::to_string(b.id) + " load not finite");
  }
  if (refs != 1)
    flag("reference_count", "expected exactly one reference bus, found " + std::to_string(refs));

  for (const Line& l : c.lines) {
    if (c.bus_index(l.from_bus) < 0)
      flag("line_endpoint", "line " + std::to_string(l.id) + " references missing bus " +
                                std::to_string(l.from_bus));
    if (c.bus_index(l.to_bus) < 0)
      flag("line_endpoint", "line " + std::to_string(l.id) + " references missing bus " +
                                std::to_string(l.to_bus));
    if (l.from_bus == l.to_bus)
      flag("line_loop", "line " + std::to_string(l.id) + " connects a bus to itself");
    if (!(l.susceptance > 0))
      flag("susceptance_positive", "line " + std::to_string(l.id) + " needs susceptance > 0");
    if (!(l.capacity > 0))
      flag("capacity_positive", "line " + std::to_string(l.id) + " needs capacity > 0");
  }
  for (const Generator& g : c.generators) {
    if (c.bus_index(g.bus) < 0)
      flag("generator_bus", "generator " + std::to_string(g.id) + " references missing bus " +
                                std::to_string(g.bus));
    if (!(0 <= g.p_min && g.p_min <= g.p_max))
      flag("generator_bounds", "generator " + std::to_string(g.id) + " needs 0 <= p_min <= p_max");
    if (!(g.ramp_up > 0) || !(g.ramp_down > 0))
      flag("ramp_positive", "generator " + std::to_string(g.id) + " needs positive ramp limits");
  }

  // Connectivity over all lines (the model carries no out-of-service flag).
  if (!c.buses.empty()) {
    std::vector<int> parent(c.buses.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (const Line& l : c.lines) {
      const int a = c.bus_index(l.from_bus), b = c.bus_index(l.to_bus);
      if (a < 0 || b < 0) continue;
      parent[find(a)] = find(b);
    }
    const int root = find(0);
    for (std::size_t i = 1; i < c.buses.size(); ++i)
      if (find(static_cast<int>(i)) != root) {
        flag("connectivity", "bus " + std::to_string(c.buses[i].id) +
                                 " is not connected to the reference component");
        break;
      }
  }
  return rep;
}

namespace detail {

// Deterministic 64-bit mixer used for the synthetic large test system.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double hash_unit(std::uint64_t a, std::uint64_t b) {
  return static_cast<double>(mix64(a * 0x9e3779b97f4a7c15ull + b) >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Seven-bus study system: three generators (buses 2, 5, 7), four loads, nine
// lines.  Reactances are not published for this system; every line uses a
// 10 p.u. susceptance, so flow tables derived from it are qualitative.
inline NetworkCase seven_bus_case() {
  NetworkCase c;
  c.name = "seven_bus";
  c.base_mva = 100.0;
  c.horizon = {"t0", "t1", "t2"};
  const double loads[7] = {0.4, 0.0, 0.4, 0.6, 0.0, 0.6, 0.0};
  for (int b = 1; b <= 7; ++b) {
    Bus bus;
    bus.id = b;
    bus.load_by_period.assign(3, loads[b - 1]);
    bus.angle_min = -0.6;
    bus.angle_max = 0.6;
    c.buses.push_back(bus);
  }
  const int ft[9][2] = {{1, 2}, {1, 4}, {1, 6}, {2, 3}, {3, 5}, {4, 5}, {4, 6}, {6, 7}, {3, 7}};
  const double cap[9] = {0.65, 0.65, 0.65, 0.9, 0.9, 0.8, 0.8, 0.9, 0.9};
  for (int l = 0; l < 9; ++l) {
    Line line;
    line.id = l + 1;
    line.from_bus = ft[l][0];
    line.to_bus = ft[l][1];
    line.susceptance = 10.0;
    line.capacity = cap[l];
    c.lines.push_back(line);
  }
  const int gbus[3] = {2, 5, 7};
  for (int g = 0; g < 3; ++g) {
    Generator gen;
    gen.id = g + 1;
    gen.bus = gbus[g];
    gen.p_min = 0.2;
    gen.p_max = 2.5;
    gen.ramp_up = 0.15;
    gen.ramp_down = 0.15;
    c.generators.push_back(gen);
  }
  c.buses[c.bus_index(2)].is_reference = true;  // lowest-numbered generator bus
  return c;
}

// Produces MATPOWER-style case text for a 118-bus test system with the
// dimensions of the classic IEEE case (118 buses, 186 branches, 54
// generators, 99 loads totalling 4242 MW).  Parameters are generated
// deterministically; the real IEEE per-line data is not reproduced here.
inline std::string ieee118_case_text() {
  using detail::hash_unit;
  std::string out;
  out.reserve(1 << 15);
  char buf[160];
  out += "function mpc = case118ess\n";
  out += "%% synthetic 118-bus system (IEEE-118 dimensions, deterministic data)\n";
  out += "mpc.version = '2';\n";
  out += "mpc.baseMVA = 100;\n";

  // 54 generator buses spread over 1..118.
  std::vector<int> gen_bus;
  for (int k = 0; k < 54; ++k) {
    int b = 1 + (k * 117) / 53;
    while (std::find(gen_bus.begin(), gen_bus.end(), b) != gen_bus.end()) ++b;
    gen_bus.push_back(b);
  }

  // Loads: every bus except multiples of six (99 load buses), scaled to
  // 4242 MW total.
  std::vector<double> load_mw(119, 0.0);
  double raw_sum = 0.0;
  for (int b = 1; b <= 118; ++b) {
    if (b % 6 == 0) continue;
    load_mw[b] = 15.0 + 65.0 * hash_unit(0x10adull, b);
    raw_sum += load_mw[b];
  }
  for (int b = 1; b <= 118; ++b) load_mw[b] *= 4242.0 / raw_sum;

  out += "mpc.bus = [\n";
  for (int b = 1; b <= 118; ++b) {
    const int type = (b == gen_bus[0]) ? 3 : (std::find(gen_bus.begin(), gen_bus.end(), b) !=
                                                      gen_bus.end()
                                                  ? 2
                                                  : 1);
    std::snprintf(buf, sizeof(buf), "\t%d\t%d\t%.4f\t%.4f\t0\t0\t1\t1\t0\t138\t1\t1.06\t0.94;\n",
                  b, type, load_mw[b], load_mw[b] * 0.25);
    out += buf;
  }
  out += "];\n";

  out += "mpc.gen = [\n";
  for (int k = 0; k < 54; ++k) {
    const double pmax = 60.0 + 120.0 * hash_unit(0x9e11, k);
    const double pmin = 0.15 * pmax;
    std::snprintf(buf, sizeof(buf),
                  "\t%d\t%.4f\t0\t300\t-300\t1.0\t100\t1\t%.4f\t%.4f;\n", gen_bus[k],
                  pmin, pmax, pmin);
    out += buf;
  }
  out += "];\n";

  // Branches: ring over 1..118 plus 68 deterministic chords (186 total).
  struct Edge {
    int a, b;
  };
  std::vector<Edge> edges;
  for (int b = 1; b <= 118; ++b) edges.push_back({b, b % 118 + 1});
  int added = 0;
  for (int k = 0; added < 68; ++k) {
    const int a = 1 + static_cast<int>(117.99 * hash_unit(0xcafe, 2 * k));
    const int span = 3 + static_cast<int>(40.0 * hash_unit(0xcafe, 2 * k + 1));
    const int b = (a - 1 + span) % 118 + 1;
    if (a == b) continue;
    bool dup = false;
    for (const Edge& e : edges)
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) {
        dup = true;
        break;
      }
    if (dup) continue;
    edges.push_back({a, b});
    ++added;
  }

  out += "mpc.branch = [\n";
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double x = 0.03 + 0.22 * hash_unit(0xb7a2ull, e);
    const double rate = 150.0 + 350.0 * hash_unit(0x7a7eull, e);
    std::snprintf(buf, sizeof(buf), "\t%d\t%d\t%.5f\t%.5f\t0\t%.1f\t%.1f\t%.1f\t0\t0\t1\t-360\t360;\n",
                  edges[e].a, edges[e].b, 0.1 * x, x, rate, rate, rate);
    out += buf;
  }
  out += "];\n";
  return out;
}

}  // namespace essr
