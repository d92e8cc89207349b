// polytope.hpp -- operating-region constraint assembly.
//
// Builders are pure functions of their inputs.  Sign conventions: a line's
// flow variable is positive from its from_bus toward its to_bus, and the
// nodal balance at bus b reads  sum(P_g at b) + inflow - outflow = load_bt.
// Flow, generator and angle limits are emitted as rows (not hard variable
// bounds) so the slack feasibility LP can price every violation; registry
// bounds remain on the variables as metadata for big-M derivation.
#pragma once

#include <functional>
#include <map>
#include <tuple>

#include "essr/grid.hpp"
#include "essr/linear.hpp"
#include "essr/scenario.hpp"
#include "essr/simplex.hpp"

namespace essr {

// Smallest switching constant this project uses for a line: with the line out
// of service the relaxed angle/flow rows must be slack for every in-bounds
// angle pair and flow.
inline double big_m_for_line(const Line& l, const NetworkCase& c) {
  const Bus& bf = c.buses[c.bus_index(l.from_bus)];
  const Bus& bt = c.buses[c.bus_index(l.to_bus)];
  return l.susceptance * ((bf.angle_max - bf.angle_min) + (bt.angle_max - bt.angle_min)) +
         l.capacity;
}

// Assembled system plus handles into its variable registry.  Slot index k is
// 0 for single-topology systems.
struct GridSystem {
  ConstraintSystem sys;
  int num_periods = 0;
  int num_slots = 1;
  std::map<std::tuple<int, int>, int> pgt;            // (gen idx, t) -> var
  std::map<std::tuple<int, int, int>, int> flow;      // (line idx, t, k) -> var
  std::map<std::tuple<int, int, int>, int> angle;     // (bus idx, t, k) -> var
  std::map<std::tuple<int, int, int>, int> line_state;  // (line idx, t, k) -> u var

  int pgt_var(int g, int t) const { return pgt.at({g, t}); }
  bool has_flow(int line, int t, int k = 0) const { return flow.count({line, t, k}) > 0; }
  int flow_var(int line, int t, int k = 0) const { return flow.at({line, t, k}); }
  int angle_var(int bus, int t, int k = 0) const { return angle.at({bus, t, k}); }

  // Pins the t0 output of every generator (the dispatch point under test).
  void pin_t0(const std::vector<double>& point) {
    if (static_cast<int>(point.size()) != count_gens())
      throw std::invalid_argument("pin_t0: one value per generator required");
    for (int g = 0; g < count_gens(); ++g) sys.pin(pgt_var(g, 0), point[g]);
  }
  int count_gens() const {
    int n = 0;
    for (const auto& [key, var] : pgt) n = std::max(n, std::get<0>(key) + 1);
    return n;
  }
};

namespace detail {

inline void add_gen_and_ramp_rows(const NetworkCase& c, GridSystem& gs) {
  const int T = c.num_periods();
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const Generator& gen = c.generators[g];
    for (int t = 0; t < T; ++t) {
      VarInfo v;
      v.kind = VarKind::GenOutput;
      v.g = static_cast<int>(g);
      v.t = t;
      v.lo = gen.p_min;
      v.hi = gen.p_max;
      gs.pgt[{static_cast<int>(g), t}] = gs.sys.add_var(v);
    }
  }
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const Generator& gen = c.generators[g];
    for (int t = 0; t < T; ++t) {
      const int var = gs.pgt_var(static_cast<int>(g), t);
      LinearRow up;
      up.tag = RowTag::GenBound;
      up.g = static_cast<int>(g);
      up.t = t;
      up.side = +1;
      up.terms = {{var, 1.0}};
      up.rhs = gen.p_max;
      gs.sys.add_row(up);
      LinearRow lo;
      lo.tag = RowTag::GenBound;
      lo.g = static_cast<int>(g);
      lo.t = t;
      lo.side = -1;
      lo.terms = {{var, -1.0}};
      lo.rhs = -gen.p_min;
      gs.sys.add_row(lo);
    }
    for (int t = 0; t + 1 < T; ++t) {
      const int now = gs.pgt_var(static_cast<int>(g), t);
      const int nxt = gs.pgt_var(static_cast<int>(g), t + 1);
      LinearRow up;
      up.tag = RowTag::Ramp;
      up.g = static_cast<int>(g);
      up.t = t;
      up.side = +1;
      up.terms = {{nxt, 1.0}, {now, -1.0}};
      up.rhs = gen.ramp_up;
      gs.sys.add_row(up);
      LinearRow dn;
      dn.tag = RowTag::Ramp;
      dn.g = static_cast<int>(g);
      dn.t = t;
      dn.side = -1;
      dn.terms = {{now, 1.0}, {nxt, -1.0}};
      dn.rhs = gen.ramp_down;
      gs.sys.add_row(dn);
    }
  }
}

// Registers angles for slot k and emits angle-bound and reference rows.
inline void add_angle_vars(const NetworkCase& c, GridSystem& gs, int k) {
  const int T = c.num_periods();
  const int ref = c.reference_bus_index();
  for (std::size_t b = 0; b < c.buses.size(); ++b)
    for (int t = 0; t < T; ++t) {
      VarInfo v;
      v.kind = VarKind::Angle;
      v.bus = static_cast<int>(b);
      v.t = t;
      v.k = gs.num_slots > 1 ? k : -1;
      v.lo = c.buses[b].angle_min;
      v.hi = c.buses[b].angle_max;
      gs.angle[{static_cast<int>(b), t, k}] = gs.sys.add_var(v);
    }
  for (std::size_t b = 0; b < c.buses.size(); ++b)
    for (int t = 0; t < T; ++t) {
      const int var = gs.angle_var(static_cast<int>(b), t, k);
      LinearRow up;
      up.tag = RowTag::AngleBound;
      up.bus = static_cast<int>(b);
      up.t = t;
      up.k = k;
      up.side = +1;
      up.terms = {{var, 1.0}};
      up.rhs = c.buses[b].angle_max;
      gs.sys.add_row(up);
      LinearRow lo = up;
      lo.side = -1;
      lo.terms = {{var, -1.0}};
      lo.rhs = -c.buses[b].angle_min;
      gs.sys.add_row(lo);
    }
  for (int t = 0; t < T; ++t) {
    LinearRow pin;
    pin.tag = RowTag::RefPin;
    pin.bus = ref;
    pin.t = t;
    pin.k = k;
    pin.sense = lp::RowSense::EQ;
    pin.terms = {{gs.angle_var(ref, t, k), 1.0}};
    pin.rhs = 0.0;
    gs.sys.add_row(pin);
  }
}

inline void add_balance_rows(const NetworkCase& c, GridSystem& gs, int k) {
  const int T = c.num_periods();
  for (std::size_t b = 0; b < c.buses.size(); ++b)
    for (int t = 0; t < T; ++t) {
      LinearRow row;
      row.tag = RowTag::Balance;
      row.bus = static_cast<int>(b);
      row.t = t;
      row.k = k;
      row.sense = lp::RowSense::EQ;
      for (std::size_t g = 0; g < c.generators.size(); ++g)
        if (c.bus_index(c.generators[g].bus) == static_cast<int>(b))
          row.terms.emplace_back(gs.pgt_var(static_cast<int>(g), t), 1.0);
      for (std::size_t l = 0; l < c.lines.size(); ++l) {
        if (!gs.has_flow(static_cast<int>(l), t, k)) continue;
        const int fv = gs.flow_var(static_cast<int>(l), t, k);
        if (c.bus_index(c.lines[l].from_bus) == static_cast<int>(b))
          row.terms.emplace_back(fv, -1.0);  // outflow
        else if (c.bus_index(c.lines[l].to_bus) == static_cast<int>(b))
          row.terms.emplace_back(fv, 1.0);  // inflow
      }
      row.rhs = c.buses[b].load_by_period[t];
      gs.sys.add_row(std::move(row));
    }
}

inline int add_flow_var(const NetworkCase& c, GridSystem& gs, int l, int t, int k) {
  VarInfo v;
  v.kind = VarKind::LineFlow;
  v.line = l;
  v.t = t;
  v.k = gs.num_slots > 1 ? k : -1;
  v.lo = -c.lines[l].capacity;
  v.hi = c.lines[l].capacity;
  const int var = gs.sys.add_var(v);
  gs.flow[{l, t, k}] = var;
  return var;
}

inline void add_hard_line_rows(const NetworkCase& c, GridSystem& gs, int l, int t, int k) {
  const Line& line = c.lines[l];
  const int fv = gs.flow_var(l, t, k);
  const int af = gs.angle_var(c.bus_index(line.from_bus), t, k);
  const int at = gs.angle_var(c.bus_index(line.to_bus), t, k);
  LinearRow fa;
  fa.tag = RowTag::FlowAngle;
  fa.line = l;
  fa.t = t;
  fa.k = k;
  fa.sense = lp::RowSense::EQ;
  fa.terms = {{fv, -1.0}, {af, line.susceptance}, {at, -line.susceptance}};
  fa.rhs = 0.0;
  gs.sys.add_row(std::move(fa));
  LinearRow up;
  up.tag = RowTag::FlowCap;
  up.line = l;
  up.t = t;
  up.k = k;
  up.side = +1;
  up.terms = {{fv, 1.0}};
  up.rhs = line.capacity;
  gs.sys.add_row(up);
  LinearRow lo = up;
  lo.side = -1;
  lo.terms = {{fv, -1.0}};
  lo.rhs = line.capacity;
  gs.sys.add_row(lo);
}

// Switched rows for an exposed (line, period): the on/off binary decouples the
// angle/flow identity through big-M and scales the capacity band.
inline void add_switched_line_rows(const NetworkCase& c, GridSystem& gs, int l, int t, int k,
                                   int u_var) {
  const Line& line = c.lines[l];
  const double M = big_m_for_line(line, c);
  if (!std::isfinite(M)) throw std::invalid_argument("big-M is not finite for line");
  const int fv = gs.flow_var(l, t, k);
  const int af = gs.angle_var(c.bus_index(line.from_bus), t, k);
  const int at = gs.angle_var(c.bus_index(line.to_bus), t, k);
  // B(th_f - th_t) - f + (1-u)M >= 0  ->  -B(th_f - th_t) + f + M u <= M
  LinearRow up;
  up.tag = RowTag::SwitchUpper;
  up.line = l;
  up.t = t;
  up.k = k;
  up.terms = {{fv, 1.0}, {af, -line.susceptance}, {at, line.susceptance}, {u_var, M}};
  up.rhs = M;
  gs.sys.add_row(std::move(up));
  // B(th_f - th_t) - f - (1-u)M <= 0  ->  B(th_f - th_t) - f + M u <= M
  LinearRow dn;
  dn.tag = RowTag::SwitchLower;
  dn.line = l;
  dn.t = t;
  dn.k = k;
  dn.terms = {{fv, -1.0}, {af, line.susceptance}, {at, -line.susceptance}, {u_var, M}};
  dn.rhs = M;
  gs.sys.add_row(std::move(dn));
  // u-scaled capacity band: -u cap <= f <= u cap.
  LinearRow cu;
  cu.tag = RowTag::SwitchCap;
  cu.line = l;
  cu.t = t;
  cu.k = k;
  cu.side = +1;
  cu.terms = {{fv, 1.0}, {u_var, -line.capacity}};
  cu.rhs = 0.0;
  gs.sys.add_row(cu);
  LinearRow cl = cu;
  cl.side = -1;
  cl.terms = {{fv, -1.0}, {u_var, -line.capacity}};
  gs.sys.add_row(cl);
}

}  // namespace detail

// Multi-period operating polytope for one known failure sequence.  Failed
// (line, period) pairs contribute no flow variable and no flow rows.
inline GridSystem build_essr(const NetworkCase& c, const FailureScenario& scenario) {
  if (c.num_periods() < 2)
    throw std::invalid_argument("build_essr: ramp rows need at least two periods");
  for (const auto& per : scenario.failed_by_period)
    for (int id : per)
      if (c.line_index(id) < 0)
        throw std::invalid_argument("build_essr: unknown line " + std::to_string(id));
  GridSystem gs;
  gs.num_periods = c.num_periods();
  gs.num_slots = 1;
  detail::add_gen_and_ramp_rows(c, gs);
  detail::add_angle_vars(c, gs, 0);
  for (std::size_t l = 0; l < c.lines.size(); ++l)
    for (int t = 0; t < c.num_periods(); ++t)
      if (!scenario.failed_at(c.lines[l].id, t)) detail::add_flow_var(c, gs, static_cast<int>(l), t, 0);
  detail::add_balance_rows(c, gs, 0);
  for (std::size_t l = 0; l < c.lines.size(); ++l)
    for (int t = 0; t < c.num_periods(); ++t)
      if (gs.has_flow(static_cast<int>(l), t, 0))
        detail::add_hard_line_rows(c, gs, static_cast<int>(l), t, 0);
  return gs;
}

// Event block: one topology-parameterized copy of the system with binary line
// states over the exposure domain.  A state u(l,t) exists from the line's
// first exposed period onward (failures persist).
struct EventBlock {
  GridSystem grid;
  // (line idx, period) in deterministic order; parallel to u_vars.
  std::vector<std::pair<int, int>> u_domain;
  std::vector<int> u_vars;

  // Binary pattern a scenario induces on the u domain (1 = in service).
  std::vector<int> pattern_for(const NetworkCase& c, const FailureScenario& s) const {
    std::vector<int> pat(u_domain.size(), 1);
    for (std::size_t i = 0; i < u_domain.size(); ++i) {
      const auto [l, t] = u_domain[i];
      if (s.failed_at(c.lines[l].id, t)) pat[i] = 0;
    }
    return pat;
  }
  void fix_pattern(const std::vector<int>& pat) {
    for (std::size_t i = 0; i < u_vars.size(); ++i)
      grid.sys.pin(u_vars[i], static_cast<double>(pat[i]));
  }
  void unfix_pattern() {
    for (int v : u_vars) grid.sys.unpin(v);
  }
};

inline EventBlock build_event_block(const NetworkCase& c, const ExposureModel& exposure) {
  if (c.num_periods() < 2)
    throw std::invalid_argument("build_event_block: need at least two periods");
  exposure.validate(c.num_periods());
  EventBlock eb;
  GridSystem& gs = eb.grid;
  gs.num_periods = c.num_periods();
  gs.num_slots = 1;
  detail::add_gen_and_ramp_rows(c, gs);
  detail::add_angle_vars(c, gs, 0);
  for (std::size_t l = 0; l < c.lines.size(); ++l)
    for (int t = 0; t < c.num_periods(); ++t) detail::add_flow_var(c, gs, static_cast<int>(l), t, 0);
  detail::add_balance_rows(c, gs, 0);

  std::map<int, int> first_exposed;  // line idx -> first exposed period
  for (int id : exposure.exposed_lines()) {
    const int l = c.line_index(id);
    if (l < 0) throw std::invalid_argument("exposure references unknown line " + std::to_string(id));
    first_exposed[l] = exposure.exposure_periods(id).front();
  }
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    for (int t = 0; t < c.num_periods(); ++t) {
      const auto it = first_exposed.find(static_cast<int>(l));
      if (it != first_exposed.end() && t >= it->second) {
        VarInfo v;
        v.kind = VarKind::LineState;
        v.line = static_cast<int>(l);
        v.t = t;
        v.lo = 0.0;
        v.hi = 1.0;
        v.integral = true;
        const int u = gs.sys.add_var(v);
        gs.line_state[{static_cast<int>(l), t, 0}] = u;
        eb.u_domain.emplace_back(static_cast<int>(l), t);
        eb.u_vars.push_back(u);
        detail::add_switched_line_rows(c, gs, static_cast<int>(l), t, 0, u);
      } else {
        detail::add_hard_line_rows(c, gs, static_cast<int>(l), t, 0);
      }
    }
  }
  return eb;
}

// Stacked multi-topology system: one angle/flow block per scenario slot with
// shared generator variables, and per-slot line states over the exposure
// domain of that slot's scenario tensor.
inline GridSystem build_multi_topology(const NetworkCase& c, const ScenarioSet& set,
                                       const ExposureModel& exposure) {
  if (set.size() < 1) throw std::invalid_argument("build_multi_topology: empty scenario set");
  if (c.num_periods() < 2)
    throw std::invalid_argument("build_multi_topology: need at least two periods");
  exposure.validate(c.num_periods());
  GridSystem gs;
  gs.num_periods = c.num_periods();
  gs.num_slots = set.size();
  detail::add_gen_and_ramp_rows(c, gs);

  std::map<int, int> first_exposed;
  for (int id : exposure.exposed_lines()) {
    const int l = c.line_index(id);
    if (l < 0) throw std::invalid_argument("exposure references unknown line " + std::to_string(id));
    first_exposed[l] = exposure.exposure_periods(id).front();
  }

  for (int k = 0; k < set.size(); ++k) {
    detail::add_angle_vars(c, gs, k);
    for (std::size_t l = 0; l < c.lines.size(); ++l)
      for (int t = 0; t < c.num_periods(); ++t) detail::add_flow_var(c, gs, static_cast<int>(l), t, k);
    detail::add_balance_rows(c, gs, k);
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
      for (int t = 0; t < c.num_periods(); ++t) {
        const auto it = first_exposed.find(static_cast<int>(l));
        if (it != first_exposed.end() && t >= it->second) {
          VarInfo v;
          v.kind = VarKind::LineState;
          v.line = static_cast<int>(l);
          v.t = t;
          v.k = k;
          v.lo = 0.0;
          v.hi = 1.0;
          v.integral = true;
          const int u = gs.sys.add_var(v);
          gs.line_state[{static_cast<int>(l), t, k}] = u;
          detail::add_switched_line_rows(c, gs, static_cast<int>(l), t, k, u);
        } else {
          detail::add_hard_line_rows(c, gs, static_cast<int>(l), t, k);
        }
      }
    }
  }
  return gs;
}

// Pins every slot's line states to the sampled tensor, which turns the
// stacked system into the literal all-scenarios LP.
inline void fix_multi_topology_states(GridSystem& gs, const NetworkCase& c,
                                      const ScenarioSet& set) {
  for (const auto& [key, var] : gs.line_state) {
    const auto [l, t, k] = key;
    const bool failed = set.scenarios[k].failed_at(c.lines[l].id, t);
    gs.sys.pin(var, failed ? 0.0 : 1.0);
  }
}

// ---- McCormick chains -------------------------------------------------------

// Chains z = prod(literals) where literal i is u_i (pattern 1) or 1-u_i
// (pattern 0).  Returns the z variable; chain auxiliaries follow the paper's
// recursive envelope rows.  For binary inputs the rows pin z to the exact
// match indicator.
inline int mccormick_chain(ConstraintSystem& sys, const std::vector<int>& u_vars,
                           const std::vector<int>& pattern, int scenario_slot) {
  if (u_vars.empty() || u_vars.size() != pattern.size())
    throw std::invalid_argument("mccormick_chain: need matching nonempty u/pattern");
  const int S = static_cast<int>(u_vars.size());

  // literal(i) = a_i * u_i + c_i
  auto lit_a = [&](int i) { return pattern[i] == 1 ? 1.0 : -1.0; };
  auto lit_c = [&](int i) { return pattern[i] == 1 ? 0.0 : 1.0; };

  VarInfo zv;
  zv.kind = VarKind::ScenarioSelect;
  zv.k = scenario_slot;
  zv.lo = 0.0;
  zv.hi = 1.0;
  zv.integral = true;
  const int z = sys.add_var(zv);

  if (S == 1) {
    LinearRow eq;
    eq.tag = RowTag::McCormick;
    eq.k = scenario_slot;
    eq.sense = lp::RowSense::EQ;
    eq.terms = {{z, 1.0}, {u_vars[0], -lit_a(0)}};
    eq.rhs = lit_c(0);
    sys.add_row(std::move(eq));
    return z;
  }

  std::vector<int> zeta(S + 1, -1);  // zeta[i] for i = 2..S; zeta[S] == z
  for (int i = 2; i < S; ++i) {
    VarInfo v;
    v.kind = VarKind::McCormickAux;
    v.k = scenario_slot;
    v.aux = i;
    v.lo = 0.0;
    v.hi = 1.0;
    v.integral = true;
    zeta[i] = sys.add_var(v);
  }
  zeta[S] = z;

  auto add = [&](std::vector<std::pair<int, double>> terms, double rhs) {
    LinearRow r;
    r.tag = RowTag::McCormick;
    r.k = scenario_slot;
    r.terms = std::move(terms);
    r.rhs = rhs;
    sys.add_row(std::move(r));
  };

  // zeta_2 >= lit_1 + lit_2 - 1  ->  a1 u1 + a2 u2 - zeta2 <= 1 - c1 - c2
  add({{u_vars[0], lit_a(0)}, {u_vars[1], lit_a(1)}, {zeta[2], -1.0}}, 1.0 - lit_c(0) - lit_c(1));
  // zeta_2 <= lit_1  ->  zeta2 - a1 u1 <= c1
  add({{zeta[2], 1.0}, {u_vars[0], -lit_a(0)}}, lit_c(0));
  // zeta_i <= lit_i (i = 2..S)
  for (int i = 2; i <= S; ++i)
    add({{zeta[i], 1.0}, {u_vars[i - 1], -lit_a(i - 1)}}, lit_c(i - 1));
  // zeta_i >= lit_i + zeta_{i-1} - 1 and zeta_i <= zeta_{i-1} (i = 3..S)
  for (int i = 3; i <= S; ++i) {
    add({{u_vars[i - 1], lit_a(i - 1)}, {zeta[i - 1], 1.0}, {zeta[i], -1.0}},
        1.0 - lit_c(i - 1));
    add({{zeta[i], 1.0}, {zeta[i - 1], -1.0}}, 0.0);
  }
  return z;
}

// Exactly one scenario selected.
inline int build_selection(ConstraintSystem& sys, const std::vector<int>& z_vars) {
  if (z_vars.empty()) throw std::invalid_argument("build_selection: no scenarios");
  LinearRow r;
  r.tag = RowTag::Selection;
  r.sense = lp::RowSense::EQ;
  for (int z : z_vars) r.terms.emplace_back(z, 1.0);
  r.rhs = 1.0;
  return sys.add_row(std::move(r));
}

// ---- slack feasibility ------------------------------------------------------

struct RowViolationEntry {
  int base_row = -1;
  RowTag tag = RowTag::Other;
  int bus = -1, line = -1, g = -1, t = -1, k = -1;
  double amount = 0.0;  // positive slack usage on this expanded row
};

struct FeasibilityCertificate {
  lp::SolveStatus status = lp::SolveStatus::NumericFailure;
  double value = 0.0;
  bool feasible = false;
  std::vector<double> point;  // primal values over the slack system registry
  std::vector<RowViolationEntry> violations;
  std::map<std::pair<int, int>, double> shed;  // (bus idx, period) -> load shed
  lp::LpSolution lp;
};

// Minimum-total-slack certificate for a slack-augmented system.  A zero
// optimum certifies the base polytope nonempty; deficit-side balance slack is
// reported as per-bus load shed.  When attribute_shed is set and the optimum
// is positive, a second stage re-optimizes at the same total slack while
// steering the violation onto balance rows, so ties read as load shed rather
// than as physics-row violations.
inline FeasibilityCertificate feasibility_value(const SlackSystem& slack,
                                                const lp::SolveOptions& opts = {},
                                                const lp::Basis* warm = nullptr,
                                                bool attribute_shed = true) {
  FeasibilityCertificate cert;
  lp::LpProblem p = slack.sys.to_lp();
  cert.lp = lp::solve_lp(p, opts, warm);
  cert.status = cert.lp.status;
  if (cert.status != lp::SolveStatus::Optimal) return cert;
  cert.value = std::max(0.0, cert.lp.objective);
  cert.feasible = cert.value <= 1e-6;
  cert.point = cert.lp.x;
  if (attribute_shed && !cert.feasible) {
    lp::LpProblem p2 = p;
    p2.unfinalize();
    const int cap = p2.add_row(lp::RowSense::LE, cert.value * (1.0 + 1e-9) + 1e-12);
    for (int e = 0; e < slack.num_inequalities(); ++e) {
      p2.add_entry(cap, slack.splus[e], 1.0);
      p2.add_entry(cap, slack.sminus[e], 1.0);
      const bool balance = slack.sys.rows[e].tag == RowTag::Balance;
      p2.obj[slack.splus[e]] = balance ? 0.0 : 1.0;
      p2.obj[slack.sminus[e]] = balance ? 0.0 : 1.0;
    }
    p2.finalize();
    const lp::LpSolution s2 = lp::solve_lp(p2, opts);
    if (s2.status == lp::SolveStatus::Optimal) cert.point = s2.x;
  }
  for (int e = 0; e < slack.num_inequalities(); ++e) {
    const double sp = cert.lp.x[slack.splus[e]];
    const double sm = cert.lp.x[slack.sminus[e]];
    const double used = sp + sm;
    if (used <= 1e-9) continue;
    const LinearRow& base = slack.sys.rows[e];
    RowViolationEntry v;
    v.base_row = slack.base_row[e];
    v.tag = base.tag;
    v.bus = base.bus;
    v.line = base.line;
    v.g = base.g;
    v.t = base.t;
    v.k = base.k;
    v.amount = used;
    cert.violations.push_back(v);
    if (base.tag == RowTag::Balance && slack.base_side[e] < 0 && sm > 1e-9) {
      // Negated side of the balance equality: slack there is unserved load.
      cert.shed[{base.bus, base.t}] += sm;
    }
  }
  return cert;
}

inline FeasibilityCertificate feasibility_value(const ConstraintSystem& base,
                                                const lp::SolveOptions& opts = {}) {
  return feasibility_value(augment_slacks(base), opts);
}

// Direct feasibility probe (no slacks): solves the zero objective over the
// hard rows.  Used as the independent cross-check of the slack certificate.
inline bool directly_feasible(const ConstraintSystem& base, const lp::SolveOptions& opts = {}) {
  ConstraintSystem sys = base;
  sys.objective.clear();
  sys.has_objective = false;
  lp::LpProblem p = sys.to_lp();
  const auto sol = lp::solve_lp(p, opts);
  if (sol.status == lp::SolveStatus::Optimal) return true;
  if (sol.status == lp::SolveStatus::Infeasible) return false;
  throw std::runtime_error("directly_feasible: solver returned " +
                           std::string(lp::to_string(sol.status)));
}

}  // namespace essr
