// region.hpp -- feasible dispatch region sweeps and flow reports.
//
// A dispatch point is feasible when its worst-case slack over the scenario
// set is zero.  Scenarios whose surviving network separates load from all
// generation ("islanding" sequences) shed load at every dispatch and carry no
// information about the dispatch choice; region analysis sets them aside by
// default and reports their unavoidable shed separately.  Sweeps walk the
// grid with per-scenario warm-started LPs: the event-block matrix is constant
// across cells, only pins move.
#pragma once

#include <array>
#include <functional>
#include <numeric>

#include "essr/kkt.hpp"
#include "essr/polytope.hpp"

namespace essr {

using DispatchPoint = std::vector<double>;

enum class CouplingMode { Recourse, Shared };

// True per scenario when some period's surviving topology cuts a load bus off
// from every generator (a purely structural test).
inline std::vector<bool> islanding_flags(const NetworkCase& c, const ScenarioSet& set) {
  std::vector<bool> flags(set.size(), false);
  for (int k = 0; k < set.size(); ++k) {
    const FailureScenario& s = set.scenarios[k];
    for (int t = 1; t < c.num_periods() && !flags[k]; ++t) {
      std::vector<int> parent(c.buses.size());
      std::iota(parent.begin(), parent.end(), 0);
      std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
      };
      for (const Line& l : c.lines) {
        if (s.failed_at(l.id, t)) continue;
        parent[find(c.bus_index(l.from_bus))] = find(c.bus_index(l.to_bus));
      }
      std::vector<bool> has_gen(c.buses.size(), false);
      for (const Generator& g : c.generators) has_gen[find(c.bus_index(g.bus))] = true;
      for (std::size_t b = 0; b < c.buses.size(); ++b) {
        const double load =
            t < static_cast<int>(c.buses[b].load_by_period.size()) ? c.buses[b].load_by_period[t] : 0.0;
        if (load > 0 && !has_gen[find(static_cast<int>(b))]) {
          flags[k] = true;
          break;
        }
      }
    }
  }
  return flags;
}

struct CellResult {
  DispatchPoint point;
  bool evaluated = false;  // false when the balanced generator left its bounds
  bool feasible = false;
  double shed = 0.0;
  int argmax_scenario = -1;
};

struct SweepAxis {
  int gen_index = 0;
  double min = 0.0, max = 0.0, step = 0.02;

  int points() const {
    if (!(step > 0)) throw std::invalid_argument("sweep axis step must be positive");
    return static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
  }
  double value(int i) const { return min + i * step; }
};

struct SweepSpec {
  NetworkCase network;
  ExposureModel exposure;
  ScenarioSet scenarios;
  CouplingMode mode = CouplingMode::Recourse;
  std::vector<SweepAxis> axes;     // one or two axes
  bool balance_remaining = true;   // remaining generators split the residual load
  double ramp_override = -1.0;     // < 0 keeps the case's ramp limits
  std::map<int, double> capacity_override;  // line id -> capacity (p.u.)
  bool skip_islanding = true;
  bool exact_shed = true;  // false: stop a cell at its first violated scenario
  std::int64_t cell_cap = 250000;
  lp::SolveOptions lp;
};

struct RegionGrid {
  std::vector<SweepAxis> axes;
  std::vector<int> shape;
  std::vector<CellResult> cells;  // row-major, first axis slowest
  std::vector<int> skipped_scenarios;
  double skipped_baseline_shed = 0.0;  // worst unavoidable shed among skipped
  int cells_feasible = 0;
  int cells_evaluated = 0;

  int index(const std::vector<int>& coord) const {
    int idx = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) idx = idx * shape[a] + coord[a];
    return idx;
  }
};

namespace detail {

inline NetworkCase apply_overrides(const SweepSpec& spec) {
  NetworkCase c = spec.network;
  if (spec.ramp_override > 0) c.set_uniform_ramp(spec.ramp_override);
  for (const auto& [line_id, cap] : spec.capacity_override) {
    const int li = c.line_index(line_id);
    if (li < 0) throw std::invalid_argument("capacity override for unknown line");
    c.lines[li].capacity = cap;
  }
  return c;
}

}  // namespace detail

// Evaluates one dispatch point.  Recourse mode prices each scenario with its
// own re-dispatch; shared mode solves the literal stacked system where one
// generator trajectory must serve every scenario simultaneously.
inline CellResult check_point(const NetworkCase& c, const ExposureModel& exposure,
                              const ScenarioSet& set, const DispatchPoint& point,
                              CouplingMode mode = CouplingMode::Recourse,
                              bool skip_islanding = true, const lp::SolveOptions& opts = {}) {
  if (point.size() != c.generators.size())
    throw std::invalid_argument("check_point: one t0 value per generator required");
  for (std::size_t g = 0; g < point.size(); ++g)
    if (point[g] < c.generators[g].p_min - 1e-9 || point[g] > c.generators[g].p_max + 1e-9)
      throw std::invalid_argument("check_point: point outside generator bounds");

  ScenarioSet use = set;
  std::vector<int> orig_index(set.size());
  std::iota(orig_index.begin(), orig_index.end(), 0);
  if (skip_islanding) {
    const std::vector<bool> island = islanding_flags(c, set);
    use.scenarios.clear();
    orig_index.clear();
    for (int k = 0; k < set.size(); ++k)
      if (!island[k]) {
        use.scenarios.push_back(set.scenarios[k]);
        orig_index.push_back(k);
      }
  }
  CellResult cell;
  cell.point = point;
  cell.evaluated = true;
  if (use.scenarios.empty()) {
    cell.feasible = true;
    return cell;
  }
  if (mode == CouplingMode::Recourse) {
    const WorstCaseReport rep = enumerate_worst_case(c, use, &point, opts);
    cell.shed = rep.value;
    cell.feasible = rep.value <= 1e-6;
    cell.argmax_scenario = rep.selected_scenario >= 0 ? orig_index[rep.selected_scenario] : -1;
  } else {
    GridSystem multi = build_multi_topology(c, use, exposure);
    fix_multi_topology_states(multi, c, use);
    multi.pin_t0(point);
    const FeasibilityCertificate cert = feasibility_value(augment_slacks(multi.sys), opts);
    if (cert.status != lp::SolveStatus::Optimal)
      throw std::runtime_error("check_point: stacked LP returned " +
                               std::string(lp::to_string(cert.status)));
    cell.shed = cert.value;
    cell.feasible = cert.feasible;
    // Attribute the stacked worst slice: the slot with the largest slack use.
    std::map<int, double> by_slot;
    for (const auto& v : cert.violations)
      if (v.k >= 0) by_slot[v.k] += v.amount;
    int arg = -1;
    for (const auto& [k, amount] : by_slot)
      if (arg < 0 || amount > by_slot[arg]) arg = k;
    cell.argmax_scenario = arg >= 0 ? orig_index[arg] : -1;
  }
  return cell;
}

// Grid sweep of the t0 dispatch plane.  Cells are row-major over the axes;
// the remaining generators (not on an axis) share the residual load equally
// when balance_remaining is set.
inline RegionGrid sweep_region(const SweepSpec& spec) {
  const NetworkCase c = detail::apply_overrides(spec);
  if (spec.axes.empty() || spec.axes.size() > 2)
    throw std::invalid_argument("sweep_region: one or two axes supported");

  RegionGrid grid;
  grid.axes = spec.axes;
  std::int64_t cells = 1;
  for (const auto& ax : spec.axes) {
    if (ax.gen_index < 0 || ax.gen_index >= static_cast<int>(c.generators.size()))
      throw std::invalid_argument("sweep_region: axis generator out of range");
    grid.shape.push_back(ax.points());
    cells *= ax.points();
  }
  if (cells > spec.cell_cap) throw CapExceeded("sweep_region: grid exceeds the cell cap");

  // Scenario filter.
  std::vector<FailureScenario> active;
  std::vector<int> active_index;
  const std::vector<bool> island = islanding_flags(c, spec.scenarios);
  for (int k = 0; k < spec.scenarios.size(); ++k) {
    if (spec.skip_islanding && island[k]) {
      grid.skipped_scenarios.push_back(k);
      continue;
    }
    active.push_back(spec.scenarios.scenarios[k]);
    active_index.push_back(k);
  }
  if (!grid.skipped_scenarios.empty()) {
    // Unavoidable shed of the skipped sequences at a free dispatch.
    ScenarioSet skipped;
    for (int k : grid.skipped_scenarios) skipped.scenarios.push_back(spec.scenarios.scenarios[k]);
    const WorstCaseReport rep = enumerate_worst_case(c, skipped, nullptr, spec.lp);
    grid.skipped_baseline_shed = rep.value;
  }

  // Remaining generators share the residual load equally.
  std::vector<int> rest;
  for (int g = 0; g < static_cast<int>(c.generators.size()); ++g) {
    bool on_axis = false;
    for (const auto& ax : spec.axes) on_axis = on_axis || ax.gen_index == g;
    if (!on_axis) rest.push_back(g);
  }
  const double total_load = c.total_load(0);

  // One warm evaluator per active scenario over the shared event-block
  // matrix; shared mode keeps a single stacked problem instead.
  EventBlock block = build_event_block(c, spec.exposure);
  std::vector<detail::BlockEvaluator> evals;
  std::vector<std::vector<int>> patterns;
  lp::LpProblem stacked;
  SlackSystem stacked_slack;
  GridSystem multi;
  lp::Basis stacked_basis;
  if (spec.mode == CouplingMode::Recourse) {
    for (const auto& s : active) {
      evals.emplace_back(block);
      evals.back().opts = spec.lp;
      patterns.push_back(block.pattern_for(c, s));
    }
  } else {
    ScenarioSet act;
    act.scenarios = active;
    multi = build_multi_topology(c, act, spec.exposure);
    fix_multi_topology_states(multi, c, act);
    stacked_slack = augment_slacks(multi.sys);
    stacked = stacked_slack.sys.to_lp();
  }

  std::vector<int> coord(spec.axes.size(), 0);
  grid.cells.resize(cells);
  for (std::int64_t idx = 0; idx < cells; ++idx) {
    // Decode row-major coordinates.
    std::int64_t rem = idx;
    for (int a = static_cast<int>(spec.axes.size()) - 1; a >= 0; --a) {
      coord[a] = static_cast<int>(rem % grid.shape[a]);
      rem /= grid.shape[a];
    }
    CellResult& cell = grid.cells[idx];
    cell.point.assign(c.generators.size(), 0.0);
    double axis_sum = 0.0;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      cell.point[spec.axes[a].gen_index] = spec.axes[a].value(coord[a]);
      axis_sum += cell.point[spec.axes[a].gen_index];
    }
    if (spec.balance_remaining && !rest.empty()) {
      const double share = (total_load - axis_sum) / static_cast<double>(rest.size());
      bool ok = true;
      for (int g : rest) {
        cell.point[g] = share;
        if (share < c.generators[g].p_min - 1e-9 || share > c.generators[g].p_max + 1e-9) ok = false;
      }
      if (!ok) {
        // Balanced output leaves its bounds: the cell is structurally
        // infeasible; record the bound violation as its shed figure.
        double viol = 0.0;
        for (int g : rest) {
          viol = std::max(viol, c.generators[g].p_min - share);
          viol = std::max(viol, share - c.generators[g].p_max);
        }
        cell.evaluated = false;
        cell.feasible = false;
        cell.shed = viol;
        continue;
      }
    }
    cell.evaluated = true;
    ++grid.cells_evaluated;

    if (spec.mode == CouplingMode::Recourse) {
      double worst = 0.0;
      int argmax = -1;
      for (std::size_t k = 0; k < evals.size(); ++k) {
        evals[k].set_t0(cell.point);
        const lp::LpSolution s = evals[k].eval(patterns[k]);
        if (s.status != lp::SolveStatus::Optimal)
          throw std::runtime_error("sweep_region: scenario LP returned " +
                                   std::string(lp::to_string(s.status)));
        if (s.objective > worst + 1e-12) {
          worst = s.objective;
          argmax = static_cast<int>(k);
        }
        if (!spec.exact_shed && worst > 1e-6) break;
      }
      cell.shed = std::max(0.0, worst);
      cell.feasible = cell.shed <= 1e-6;
      cell.argmax_scenario = argmax >= 0 ? active_index[argmax] : -1;
    } else {
      for (int g = 0; g < static_cast<int>(c.generators.size()); ++g) {
        const int var = multi.pgt_var(g, 0);
        stacked.col_lower[var] = cell.point[g];
        stacked.col_upper[var] = cell.point[g];
      }
      lp::LpSolution s = lp::solve_lp(stacked, spec.lp,
                                      stacked_basis.empty() ? nullptr : &stacked_basis);
      if (s.status != lp::SolveStatus::Optimal) {
        s = lp::solve_lp(stacked, spec.lp);
        if (s.status != lp::SolveStatus::Optimal)
          throw std::runtime_error("sweep_region: stacked LP returned " +
                                   std::string(lp::to_string(s.status)));
      }
      stacked_basis = s.basis;
      cell.shed = std::max(0.0, s.objective);
      cell.feasible = cell.shed <= 1e-6;
    }
    if (cell.feasible) ++grid.cells_feasible;
  }
  return grid;
}

// Solves the literal stacked shared-trajectory LP for a (possibly large)
// scenario set.  Every block is first priced separately with the generator
// trajectory held at the pinned t0 point, and those per-block optima become
// the starting values of the monolithic solve, leaving only the shared
// dispatch coordination to the simplex.
inline FeasibilityCertificate solve_stacked_shared(const NetworkCase& c,
                                                   const ExposureModel& exposure,
                                                   const ScenarioSet& set,
                                                   const DispatchPoint& t0,
                                                   const lp::SolveOptions& opts = {}) {
  GridSystem multi = build_multi_topology(c, set, exposure);
  fix_multi_topology_states(multi, c, set);
  multi.pin_t0(t0);
  const SlackSystem slack = augment_slacks(multi.sys);

  // Per-block pass with the whole trajectory pinned to the t0 point.
  EventBlock block = build_event_block(c, exposure);
  for (int g = 0; g < static_cast<int>(c.generators.size()); ++g)
    for (int t = 0; t < c.num_periods(); ++t) block.grid.sys.pin(block.grid.pgt_var(g, t), t0[g]);
  detail::BlockEvaluator ev(block);
  ev.opts = opts;
  lp::SolveOptions final_opts = opts;
  final_opts.start_values.assign(slack.sys.num_vars(), 0.0);
  for (int g = 0; g < static_cast<int>(c.generators.size()); ++g)
    for (int t = 0; t < c.num_periods(); ++t)
      final_opts.start_values[multi.pgt_var(g, t)] = t0[g];
  for (int k = 0; k < set.size(); ++k) {
    const lp::LpSolution s = ev.eval(block.pattern_for(c, set.scenarios[k]));
    if (s.status != lp::SolveStatus::Optimal)
      throw std::runtime_error("solve_stacked_shared: block LP returned " +
                               std::string(lp::to_string(s.status)));
    for (std::size_t l = 0; l < c.lines.size(); ++l)
      for (int t = 0; t < c.num_periods(); ++t)
        final_opts.start_values[multi.flow_var(static_cast<int>(l), t, k)] =
            s.x[block.grid.flow_var(static_cast<int>(l), t)];
    for (std::size_t b = 0; b < c.buses.size(); ++b)
      for (int t = 0; t < c.num_periods(); ++t)
        final_opts.start_values[multi.angle_var(static_cast<int>(b), t, k)] =
            s.x[block.grid.angle_var(static_cast<int>(b), t)];
  }
  return feasibility_value(slack, final_opts, nullptr, /*attribute_shed=*/false);
}

// ---- flow table --------------------------------------------------------------

struct FlowTableRow {
  int line_id = 0;
  int from_bus = 0, to_bus = 0;
  double capacity = 0.0;
  std::vector<double> flow;          // per period; NaN when the line is out
  std::vector<bool> in_service;      // per period
  std::vector<bool> binding;         // |flow| within 1e-6 of capacity
};

struct FlowTable {
  std::vector<std::string> periods;
  std::vector<FlowTableRow> rows;
  double shed_total = 0.0;
  std::map<std::pair<int, int>, double> shed;  // (bus idx, period)
  double max_balance_residual = 0.0;
};

// Per-line flows of the minimum-shed recourse solution for one scenario at a
// pinned t0 dispatch.
inline FlowTable flow_report(const NetworkCase& c, const FailureScenario& scenario,
                             const DispatchPoint& point, const lp::SolveOptions& opts = {}) {
  if (point.size() != c.generators.size())
    throw std::invalid_argument("flow_report: one t0 value per generator required");
  GridSystem gs = build_essr(c, scenario);
  gs.pin_t0(point);
  const SlackSystem sl = augment_slacks(gs.sys);
  const FeasibilityCertificate cert = feasibility_value(sl, opts);
  if (cert.status != lp::SolveStatus::Optimal)
    throw std::runtime_error("flow_report: scenario LP returned " +
                             std::string(lp::to_string(cert.status)));

  FlowTable table;
  table.periods = c.horizon;
  table.shed_total = cert.value;
  table.shed = cert.shed;
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    FlowTableRow row;
    row.line_id = c.lines[l].id;
    row.from_bus = c.lines[l].from_bus;
    row.to_bus = c.lines[l].to_bus;
    row.capacity = c.lines[l].capacity;
    for (int t = 0; t < c.num_periods(); ++t) {
      const bool alive = gs.has_flow(static_cast<int>(l), t);
      row.in_service.push_back(alive);
      if (!alive) {
        row.flow.push_back(std::numeric_limits<double>::quiet_NaN());
        row.binding.push_back(false);
        continue;
      }
      const double f = cert.point[gs.flow_var(static_cast<int>(l), t)];
      row.flow.push_back(f);
      row.binding.push_back(std::fabs(std::fabs(f) - c.lines[l].capacity) <= 1e-6);
    }
    table.rows.push_back(std::move(row));
  }
  // Balance residuals of the reported solution (gen + inflow - outflow - load
  // +/- slack must close to zero).
  for (int e = 0; e < sl.num_inequalities(); ++e) {
    const LinearRow& r = sl.sys.rows[e];
    if (r.tag != RowTag::Balance) continue;
    double act = 0.0;
    for (const auto& [j, cv] : r.terms) act += cv * cert.point[j];
    table.max_balance_residual =
        std::max(table.max_balance_residual, std::max(0.0, act - r.rhs));
  }
  return table;
}

// ---- exports ------------------------------------------------------------------

inline std::string region_to_csv(const RegionGrid& grid, const NetworkCase& c) {
  std::ostringstream os;
  os << "# skipped_scenarios=" << grid.skipped_scenarios.size()
     << " skipped_baseline_shed=" << grid.skipped_baseline_shed << "\n";
  for (std::size_t a = 0; a < grid.axes.size(); ++a)
    os << (a ? "," : "") << "g" << c.generators[grid.axes[a].gen_index].id;
  os << ",feasible,shed,argmax_scenario\n";
  char buf[64];
  for (const CellResult& cell : grid.cells) {
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      std::snprintf(buf, sizeof(buf), "%.6g", cell.point[grid.axes[a].gen_index]);
      os << (a ? "," : "") << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.9g", cell.shed);
    os << "," << (cell.feasible ? 1 : 0) << "," << buf << "," << cell.argmax_scenario << "\n";
  }
  return os.str();
}

// Gnuplot-ready matrix: rows follow the second axis (y), columns the first.
inline std::string region_to_gnuplot(const RegionGrid& grid) {
  if (grid.axes.size() != 2) throw std::invalid_argument("gnuplot export needs a 2-D grid");
  std::ostringstream os;
  for (int j = 0; j < grid.shape[1]; ++j) {
    for (int i = 0; i < grid.shape[0]; ++i) {
      const CellResult& cell = grid.cells[static_cast<std::size_t>(i) * grid.shape[1] + j];
      os << (i ? " " : "") << (cell.feasible ? 1 : 0);
    }
    os << "\n";
  }
  return os.str();
}

inline std::string flow_table_to_csv(const FlowTable& table) {
  std::ostringstream os;
  os << "line,from,to,capacity";
  for (std::size_t t = 1; t < table.periods.size(); ++t)
    os << ",flow_" << table.periods[t] << ",binding_" << table.periods[t];
  os << "\n";
  char buf[64];
  for (const FlowTableRow& r : table.rows) {
    os << r.line_id << "," << r.from_bus << "," << r.to_bus;
    std::snprintf(buf, sizeof(buf), "%.4g", r.capacity);
    os << "," << buf;
    for (std::size_t t = 1; t < table.periods.size(); ++t) {
      if (!r.in_service[t]) {
        os << ",-,0";
      } else {
        std::snprintf(buf, sizeof(buf), "%.6g", r.flow[t]);
        os << "," << buf << "," << (r.binding[t] ? 1 : 0);
      }
    }
    os << "\n";
  }
  std::snprintf(buf, sizeof(buf), "%.9g", table.shed_total);
  os << "# shed_total," << buf << "\n";
  return os.str();
}

}  // namespace essr
