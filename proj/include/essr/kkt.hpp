// kkt.hpp -- single-level reformulation of the worst-case feasibility game.
//
// The inner problem is the slack feasibility LP of a topology-parameterized
// operating block: min 1's+ + 1's- over A.Y + C.u + s+ - s- <= B with free
// operating variables.  Its KKT system is
//     A' alpha = 0            (stationarity over the operating columns)
//     beta = 1 + alpha,  gamma = 1 - alpha   (eliminated analytically)
//     0 <= alpha <= 1, primal rows, and complementarity
//     alpha .* rowslack = 0,  beta .* s+ = 0,  gamma .* s- = 0.
// Since beta >= 1 the s+ complementarity collapses to the hard fix s+ = 0.
// The remaining pairs get indicator binaries with big-M constants derived
// from the registry boxes.  The outer level walks the topology vector through
// McCormick scenario chains; maximizing total slack prices the most damaging
// sampled scenario while the defender re-dispatches freely.
#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include <json.hpp>

#include "essr/branch_bound.hpp"
#include "essr/polytope.hpp"

namespace essr {

struct ComplementarityPair {
  int row = -1;  // expanded inner row index
  int alpha_var = -1;
  int w_var = -1;             // alpha-vs-rowslack indicator
  int v_var = -1;             // gamma-vs-s- indicator
  int rowslack_cap_row = -1;  // rowslack <= M (1-w)
  int sminus_cap_row = -1;    // s- <= S (1-v)
  int sminus_alpha_row = -1;  // s- <= S alpha (implied tightening)
  double slack_bound = 0.0;   // M: rowslack bound at KKT points
  double sminus_bound = 0.0;  // S: s- bound at KKT points
};

struct KktSystem {
  ConstraintSystem sys;  // inner rows + stationarity (+ complementarity rows)
  std::vector<int> base_row;  // expanded row -> source row of the base system
  std::vector<int> base_side;
  std::vector<int> splus, sminus;
  std::vector<int> alpha;
  std::vector<ComplementarityPair> pairs;
  std::vector<int> stationarity_rows;
  int num_inner_rows = 0;
  int first_dual_var = 0;

  // beta and gamma were substituted out; they reconstruct exactly.
  static double beta_of(double alpha_value) { return 1.0 + alpha_value; }
  static double gamma_of(double alpha_value) { return 1.0 - alpha_value; }
};

namespace detail {

// Activity interval of a row over the registry boxes; pinned variables
// contribute their value, listed columns are skipped.
inline std::pair<double, double> activity_interval(const ConstraintSystem& sys,
                                                   const LinearRow& row,
                                                   int skip_a, int skip_b) {
  double lo = 0.0, hi = 0.0;
  for (const auto& [j, c] : row.terms) {
    if (j == skip_a || j == skip_b) continue;
    const VarInfo& v = sys.vars[j];
    if (v.fixed) {
      lo += c * v.value;
      hi += c * v.value;
    } else {
      lo += std::min(c * v.lo, c * v.hi);
      hi += std::max(c * v.lo, c * v.hi);
    }
  }
  return {lo, hi};
}

}  // namespace detail

// Derives the KKT rows of a slack system whose objective is the total slack.
// Stationarity covers free operating columns only: pinned dispatch entries
// and binary topology columns are parameters of the inner LP.
inline KktSystem derive_kkt(const SlackSystem& slack) {
  for (const auto& [j, c] : slack.sys.objective) {
    const VarKind k = slack.sys.vars[j].kind;
    if ((k != VarKind::SlackPlus && k != VarKind::SlackMinus) || c != 1.0)
      throw std::invalid_argument("derive_kkt: inner objective must be the total slack");
  }
  KktSystem kkt;
  kkt.sys = slack.sys;
  kkt.sys.objective.clear();
  kkt.sys.has_objective = false;
  kkt.base_row = slack.base_row;
  kkt.base_side = slack.base_side;
  kkt.splus = slack.splus;
  kkt.sminus = slack.sminus;
  kkt.num_inner_rows = slack.sys.num_rows();
  kkt.first_dual_var = kkt.sys.num_vars();

  for (int e = 0; e < kkt.num_inner_rows; ++e) {
    VarInfo a;
    a.kind = VarKind::DualAlpha;
    a.aux = e;
    a.lo = 0.0;
    a.hi = 1.0;
    kkt.alpha.push_back(kkt.sys.add_var(a));
  }

  // Stationarity: one equality per free operating column, coefficients taken
  // from that column of the inner rows.
  std::map<int, std::vector<std::pair<int, double>>> columns;
  for (int e = 0; e < kkt.num_inner_rows; ++e)
    for (const auto& [j, c] : kkt.sys.rows[e].terms) {
      const VarInfo& v = kkt.sys.vars[j];
      if (v.fixed) continue;
      if (v.kind != VarKind::GenOutput && v.kind != VarKind::LineFlow && v.kind != VarKind::Angle)
        continue;
      columns[j].emplace_back(kkt.alpha[e], c);
    }
  for (const auto& [j, terms] : columns) {
    LinearRow r;
    r.tag = RowTag::Stationarity;
    r.sense = lp::RowSense::EQ;
    r.terms = terms;
    r.rhs = 0.0;
    r.g = kkt.sys.vars[j].g;
    r.line = kkt.sys.vars[j].line;
    r.bus = kkt.sys.vars[j].bus;
    r.t = kkt.sys.vars[j].t;
    kkt.stationarity_rows.push_back(kkt.sys.add_row(std::move(r)));
  }

  for (int e = 0; e < kkt.num_inner_rows; ++e) {
    const LinearRow& row = kkt.sys.rows[e];
    const auto [act_lo, act_hi] =
        detail::activity_interval(kkt.sys, row, kkt.splus[e], kkt.sminus[e]);
    ComplementarityPair p;
    p.row = e;
    p.alpha_var = kkt.alpha[e];
    p.slack_bound = std::max(0.0, row.rhs - act_lo);
    p.sminus_bound = std::max(0.0, act_hi - row.rhs);
    kkt.pairs.push_back(p);
  }
  return kkt;
}

// Indicator-binary linearization.  The beta pair is exact without binaries:
// beta = 1 + alpha >= 1 forces s+ = 0, so s+ is pinned instead.  Each row
// then carries
//   alpha_e <= w_e,   rowslack_e <= M_e (1 - w_e),
//   alpha_e >= 1-v_e, s-_e      <= S_e (1 - v_e).
inline void linearize_complementarity(KktSystem& kkt) {
  for (const auto& p : kkt.pairs)
    if (!std::isfinite(p.slack_bound) || !std::isfinite(p.sminus_bound))
      throw std::invalid_argument(
          "linearize_complementarity: non-finite primal bound; tighten variable bounds");
  for (int e = 0; e < kkt.num_inner_rows; ++e) kkt.sys.pin(kkt.splus[e], 0.0);

  for (auto& p : kkt.pairs) {
    const LinearRow inner = kkt.sys.rows[p.row];
    {
      VarInfo w;
      w.kind = VarKind::Indicator;
      w.aux = p.row;
      w.lo = 0.0;
      w.hi = 1.0;
      w.integral = true;
      p.w_var = kkt.sys.add_var(w);
      LinearRow r;
      r.tag = RowTag::ComplAlpha;
      r.terms = {{p.alpha_var, 1.0}, {p.w_var, -1.0}};
      r.rhs = 0.0;
      kkt.sys.add_row(std::move(r));
    }
    {
      // rhs - a.x <= M (1 - w)  ->  -a.x + M w <= M - rhs
      LinearRow r;
      r.tag = RowTag::ComplRowSlack;
      r.terms = inner.terms;
      for (auto& [j, c] : r.terms) c = -c;
      r.terms.emplace_back(p.w_var, p.slack_bound);
      r.rhs = p.slack_bound - inner.rhs;
      p.rowslack_cap_row = kkt.sys.add_row(std::move(r));
    }
    VarInfo v;
    v.kind = VarKind::Indicator;
    v.aux = p.row + kkt.num_inner_rows;
    v.lo = 0.0;
    v.hi = 1.0;
    v.integral = true;
    p.v_var = kkt.sys.add_var(v);
    {
      // alpha >= 1 - v  ->  -alpha - v <= -1
      LinearRow r;
      r.tag = RowTag::ComplGamma;
      r.terms = {{p.alpha_var, -1.0}, {p.v_var, -1.0}};
      r.rhs = -1.0;
      kkt.sys.add_row(std::move(r));
    }
    {
      LinearRow r;
      r.tag = RowTag::ComplSlackCap;
      r.terms = {{kkt.sminus[p.row], 1.0}, {p.v_var, p.sminus_bound}};
      r.rhs = p.sminus_bound;
      p.sminus_cap_row = kkt.sys.add_row(std::move(r));
    }
    {
      // Implied tightening: s- > 0 forces alpha = 1 through the gamma pair,
      // so s- <= S alpha holds at every feasible point and sharpens the
      // relaxation objective.
      LinearRow r;
      r.tag = RowTag::ComplSlackCap;
      r.side = -1;
      r.terms = {{kkt.sminus[p.row], 1.0}, {p.alpha_var, -p.sminus_bound}};
      r.rhs = 0.0;
      p.sminus_alpha_row = kkt.sys.add_row(std::move(r));
    }
  }

  // Expanded equality pairs admit complementary dual representations; at any
  // inner optimum at most one side carries violation.  Both cuts preserve the
  // representable optima while trimming the relaxation.
  for (int e = 0; e + 1 < kkt.num_inner_rows; ++e) {
    if (kkt.base_side[e] != 1 || kkt.base_side[e + 1] != -1 ||
        kkt.base_row[e] != kkt.base_row[e + 1])
      continue;
    {
      LinearRow r;
      r.tag = RowTag::ComplGamma;
      r.side = +1;
      r.terms = {{kkt.alpha[e], 1.0}, {kkt.alpha[e + 1], 1.0}};
      r.rhs = 1.0;
      kkt.sys.add_row(std::move(r));
    }
    if (kkt.pairs[e].v_var >= 0 && kkt.pairs[e + 1].v_var >= 0) {
      LinearRow r;
      r.tag = RowTag::ComplGamma;
      r.side = -1;
      r.terms = {{kkt.pairs[e].v_var, -1.0}, {kkt.pairs[e + 1].v_var, -1.0}};
      r.rhs = -1.0;
      kkt.sys.add_row(std::move(r));
    }
  }
}

// Widens a pair's constants in place (bigger M stays valid, only looser).
// Rows originally compiled without an indicator grow one when the new bound
// makes them violable after all.
inline void widen_pair_bounds(KktSystem& kkt, ComplementarityPair& p, double slack_bound,
                              double sminus_bound) {
  if (slack_bound > p.slack_bound) {
    p.slack_bound = slack_bound;
    if (p.w_var < 0) {
      VarInfo w;
      w.kind = VarKind::Indicator;
      w.aux = p.row;
      w.lo = 0.0;
      w.hi = 1.0;
      w.integral = true;
      p.w_var = kkt.sys.add_var(w);
      LinearRow ca;
      ca.tag = RowTag::ComplAlpha;
      ca.terms = {{p.alpha_var, 1.0}, {p.w_var, -1.0}};
      ca.rhs = 0.0;
      kkt.sys.add_row(std::move(ca));
      LinearRow& r = kkt.sys.rows[p.rowslack_cap_row];
      r.terms.emplace_back(p.w_var, p.slack_bound);
      std::sort(r.terms.begin(), r.terms.end());
      r.rhs = p.slack_bound - kkt.sys.rows[p.row].rhs;
    } else {
      LinearRow& r = kkt.sys.rows[p.rowslack_cap_row];
      for (auto& [j, c] : r.terms)
        if (j == p.w_var) c = slack_bound;
      r.rhs = slack_bound - kkt.sys.rows[p.row].rhs;
    }
  }
  if (sminus_bound > p.sminus_bound) {
    p.sminus_bound = sminus_bound;
    if (p.v_var < 0) {
      kkt.sys.unpin(kkt.sminus[p.row]);
      VarInfo v;
      v.kind = VarKind::Indicator;
      v.aux = p.row + kkt.num_inner_rows;
      v.lo = 0.0;
      v.hi = 1.0;
      v.integral = true;
      p.v_var = kkt.sys.add_var(v);
      LinearRow g;
      g.tag = RowTag::ComplGamma;
      g.terms = {{p.alpha_var, -1.0}, {p.v_var, -1.0}};
      g.rhs = -1.0;
      kkt.sys.add_row(std::move(g));
      LinearRow cap;
      cap.tag = RowTag::ComplSlackCap;
      cap.terms = {{kkt.sminus[p.row], 1.0}, {p.v_var, p.sminus_bound}};
      cap.rhs = p.sminus_bound;
      p.sminus_cap_row = kkt.sys.add_row(std::move(cap));
      LinearRow imp;
      imp.tag = RowTag::ComplSlackCap;
      imp.side = -1;
      imp.terms = {{kkt.sminus[p.row], 1.0}, {p.alpha_var, -p.sminus_bound}};
      imp.rhs = 0.0;
      p.sminus_alpha_row = kkt.sys.add_row(std::move(imp));
    } else {
      LinearRow& r = kkt.sys.rows[p.sminus_cap_row];
      for (auto& [j, c] : r.terms)
        if (j == p.v_var) c = sminus_bound;
      r.rhs = sminus_bound;
      LinearRow& r2 = kkt.sys.rows[p.sminus_alpha_row];
      for (auto& [j, c] : r2.terms)
        if (j == p.alpha_var) c = -sminus_bound;
    }
  }
}

struct SingleLevelMilp {
  NetworkCase network;
  ExposureModel exposure;
  ScenarioSet scenarios;
  EventBlock block;  // registry prefix shared with the final system
  KktSystem kkt;     // the combined system lives in kkt.sys
  std::vector<int> z_vars;
  int selection_row = -1;
  int strong_duality_row = -1;
  // phi products in assembly order: (inner row, u var) pairs with C != 0.
  std::vector<std::tuple<int, int, int>> phi;  // (row e, u var, phi var)

  ConstraintSystem& sys() { return kkt.sys; }
  const ConstraintSystem& sys() const { return kkt.sys; }
};

// Assembles the complete single-level model: KKT rows of the inner slack LP,
// McCormick scenario chains over the shared topology vector, the single
// selection row, and (by default) the strong-duality equality tying total
// slack to the dual objective.  That equality holds at every feasible point
// and makes fixed-topology nodes bound exactly during branch and bound.
inline SingleLevelMilp assemble_single_level(const NetworkCase& c, const ExposureModel& exposure,
                                             const ScenarioSet& set,
                                             const std::vector<double>* t0_pin = nullptr,
                                             bool strong_duality_cut = true) {
  if (set.size() < 1) throw std::invalid_argument("assemble_single_level: empty scenario set");
  SingleLevelMilp m;
  m.network = c;
  m.exposure = exposure;
  m.scenarios = set;
  m.block = build_event_block(c, exposure);
  if (t0_pin) m.block.grid.pin_t0(*t0_pin);

  {
    std::set<std::vector<int>> seen;
    for (const auto& s : set.scenarios)
      if (!seen.insert(m.block.pattern_for(c, s)).second)
        throw std::invalid_argument("assemble_single_level: duplicate scenario patterns");
  }

  SlackSystem slack = augment_slacks(m.block.grid.sys);
  m.kkt = derive_kkt(slack);
  linearize_complementarity(m.kkt);
  ConstraintSystem& sys = m.kkt.sys;

  for (int k = 0; k < set.size(); ++k) {
    const std::vector<int> pattern = m.block.pattern_for(c, set.scenarios[k]);
    m.z_vars.push_back(mccormick_chain(sys, m.block.u_vars, pattern, k));
  }
  m.selection_row = build_selection(sys, m.z_vars);

  if (strong_duality_cut) {
    std::map<int, double> coef;  // var -> coefficient in the equality
    for (int e = 0; e < m.kkt.num_inner_rows; ++e) {
      coef[m.kkt.splus[e]] += 1.0;
      coef[m.kkt.sminus[e]] += 1.0;
      // Effective rhs folds pinned (parameter) columns into B.
      double rhs_eff = sys.rows[e].rhs;
      for (const auto& [j, cval] : sys.rows[e].terms)
        if (sys.vars[j].fixed) rhs_eff -= cval * sys.vars[j].value;
      coef[m.kkt.alpha[e]] += rhs_eff;
    }
    for (int e = 0; e < m.kkt.num_inner_rows; ++e) {
      for (const auto& [j, cval] : sys.rows[e].terms) {
        if (sys.vars[j].kind != VarKind::LineState) continue;
        VarInfo phi;
        phi.kind = VarKind::DualProduct;
        phi.aux = static_cast<int>(m.phi.size());
        phi.lo = 0.0;
        phi.hi = 1.0;
        const int pv = sys.add_var(phi);
        m.phi.emplace_back(e, j, pv);
        const int av = m.kkt.alpha[e];
        LinearRow r1;  // phi <= alpha
        r1.tag = RowTag::StrongDuality;
        r1.terms = {{pv, 1.0}, {av, -1.0}};
        r1.rhs = 0.0;
        sys.add_row(std::move(r1));
        LinearRow r2;  // phi <= u
        r2.tag = RowTag::StrongDuality;
        r2.terms = {{pv, 1.0}, {j, -1.0}};
        r2.rhs = 0.0;
        sys.add_row(std::move(r2));
        LinearRow r3;  // phi >= alpha + u - 1
        r3.tag = RowTag::StrongDuality;
        r3.terms = {{av, 1.0}, {j, 1.0}, {pv, -1.0}};
        r3.rhs = 1.0;
        sys.add_row(std::move(r3));
        coef[pv] -= cval;  // dual objective: + C phi enters with minus here
      }
    }
    LinearRow sd;
    sd.tag = RowTag::StrongDuality;
    sd.sense = lp::RowSense::EQ;
    sd.rhs = 0.0;
    for (const auto& [j, cv] : coef)
      if (cv != 0.0) sd.terms.emplace_back(j, cv);
    m.strong_duality_row = sys.add_row(std::move(sd));
  }

  sys.objective.clear();
  for (int e = 0; e < m.kkt.num_inner_rows; ++e) {
    sys.objective.emplace_back(m.kkt.splus[e], -1.0);
    sys.objective.emplace_back(m.kkt.sminus[e], -1.0);
  }
  sys.has_objective = true;
  return m;
}

struct WorstCaseReport {
  bool complete = false;
  double value = 0.0;       // worst-case total slack F
  double best_bound = 0.0;  // upper bound on F when incomplete
  int selected_scenario = -1;
  std::map<std::pair<int, int>, double> shed;  // (bus idx, period) -> p.u.
  std::vector<std::string> binding_rows;
  std::vector<double> per_scenario;  // filled by the enumeration engine
  std::string engine;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  double wall_time_s = 0.0;
};

struct WorstCaseOptions {
  lp::SolveOptions lp;
  std::int64_t node_limit = 200000;
  double time_limit_s = 300.0;
  bool strong_duality_cut = true;  // must match the assembly flag
  bool seed_incumbent = true;
  std::ostream* log = nullptr;
};

namespace detail {

// Inner slack LP over the event block with the topology pattern pinned by
// bounds; one constant matrix serves every scenario (and every t0 pin), so
// consecutive solves warm-start each other.
struct BlockEvaluator {
  explicit BlockEvaluator(const EventBlock& block)
      : block_(block), slack_(augment_slacks(block.grid.sys)), problem_(slack_.sys.to_lp()) {}

  void set_t0(const std::vector<double>& point) {
    for (int g = 0; g < block_.grid.count_gens(); ++g) {
      const int var = block_.grid.pgt_var(g, 0);
      problem_.col_lower[var] = point[g];
      problem_.col_upper[var] = point[g];
    }
  }
  lp::LpSolution eval(const std::vector<int>& pattern) {
    for (std::size_t i = 0; i < block_.u_vars.size(); ++i) {
      problem_.col_lower[block_.u_vars[i]] = pattern[i];
      problem_.col_upper[block_.u_vars[i]] = pattern[i];
    }
    lp::LpSolution s = lp::solve_lp(problem_, opts, basis_.empty() ? nullptr : &basis_);
    if (s.status == lp::SolveStatus::Optimal)
      basis_ = s.basis;
    else if (s.status != lp::SolveStatus::Optimal && !basis_.empty()) {
      basis_ = lp::Basis{};
      s = lp::solve_lp(problem_, opts);
      if (s.status == lp::SolveStatus::Optimal) basis_ = s.basis;
    }
    return s;
  }
  const SlackSystem& slack() const { return slack_; }

  const EventBlock& block_;
  SlackSystem slack_;
  lp::LpProblem problem_;
  lp::Basis basis_;
  lp::SolveOptions opts;
};

// Lifts an inner LP optimum at a fixed pattern to a full single-level point:
// duals become alpha, indicators follow the binding pattern, chains take
// their literal prefix products.
inline std::vector<double> kkt_point_from_lp(const SingleLevelMilp& m,
                                             const lp::LpSolution& lp_sol,
                                             const std::vector<int>& pattern) {
  const ConstraintSystem& sys = m.sys();
  std::vector<double> x(sys.num_vars(), 0.0);
  const int inner_vars = static_cast<int>(lp_sol.x.size());
  for (int j = 0; j < inner_vars && j < sys.num_vars(); ++j) x[j] = lp_sol.x[j];
  for (std::size_t i = 0; i < m.block.u_vars.size(); ++i)
    x[m.block.u_vars[i]] = pattern[i];
  for (int e = 0; e < m.kkt.num_inner_rows; ++e) {
    x[m.kkt.splus[e]] = 0.0;
    x[m.kkt.alpha[e]] = std::clamp(-lp_sol.row_dual[e], 0.0, 1.0);
  }
  // Canonical complementary representation for expanded equality pairs.
  for (int e = 0; e + 1 < m.kkt.num_inner_rows; ++e) {
    if (m.kkt.base_side[e] != 1 || m.kkt.base_side[e + 1] != -1 ||
        m.kkt.base_row[e] != m.kkt.base_row[e + 1])
      continue;
    const double net = x[m.kkt.alpha[e]] - x[m.kkt.alpha[e + 1]];
    x[m.kkt.alpha[e]] = std::max(net, 0.0);
    x[m.kkt.alpha[e + 1]] = std::max(-net, 0.0);
  }
  for (int e = 0; e < m.kkt.num_inner_rows; ++e) {
    const ComplementarityPair& p = m.kkt.pairs[e];
    const LinearRow& row = sys.rows[e];
    double act = 0.0;
    for (const auto& [j, cv] : row.terms) act += cv * x[j];
    const double rowslack = row.rhs - act;
    if (p.w_var >= 0)
      x[p.w_var] = rowslack <= 1e-6 * (1.0 + std::fabs(row.rhs)) ? 1.0 : 0.0;
    if (p.v_var >= 0) x[p.v_var] = x[m.kkt.sminus[e]] > 1e-6 ? 0.0 : 1.0;
  }
  for (int k = 0; k < m.scenarios.size(); ++k) {
    const std::vector<int> pat_k = m.block.pattern_for(m.network, m.scenarios.scenarios[k]);
    std::vector<double> prefixes(pat_k.size(), 0.0);
    double prefix = 1.0;
    for (std::size_t i = 0; i < pat_k.size(); ++i) {
      const double u = x[m.block.u_vars[i]];
      prefix *= pat_k[i] == 1 ? u : 1.0 - u;
      prefixes[i] = prefix;
    }
    for (int j = 0; j < sys.num_vars(); ++j) {
      const VarInfo& v = sys.vars[j];
      if (v.k != k) continue;
      if (v.kind == VarKind::McCormickAux)
        x[j] = prefixes[v.aux - 1];
      else if (v.kind == VarKind::ScenarioSelect)
        x[j] = prefixes.back();
    }
  }
  for (const auto& [e, uvar, pvar] : m.phi) x[pvar] = x[m.kkt.alpha[e]] * x[uvar];
  return x;
}

}  // namespace detail

// Per-scenario enumeration oracle: one slack LP per scenario over the
// dropped-variable per-topology polytope, re-optimized from scratch.
inline WorstCaseReport enumerate_worst_case(const NetworkCase& c, const ScenarioSet& set,
                                            const std::vector<double>* t0_pin = nullptr,
                                            const lp::SolveOptions& opts = {}) {
  if (set.size() < 1) throw std::invalid_argument("enumerate_worst_case: empty scenario set");
  const auto t_start = std::chrono::steady_clock::now();
  WorstCaseReport rep;
  rep.engine = "enumeration";
  rep.value = -1.0;
  for (int k = 0; k < set.size(); ++k) {
    GridSystem gs = build_essr(c, set.scenarios[k]);
    if (t0_pin) gs.pin_t0(*t0_pin);
    const SlackSystem sl = augment_slacks(gs.sys);
    const FeasibilityCertificate cert = feasibility_value(sl, opts);
    if (cert.status != lp::SolveStatus::Optimal)
      throw std::runtime_error("enumerate_worst_case: scenario LP returned " +
                               std::string(lp::to_string(cert.status)));
    rep.per_scenario.push_back(cert.value);
    rep.lp_iterations += cert.lp.iterations;
    if (cert.value > rep.value + 1e-12) {
      rep.value = cert.value;
      rep.selected_scenario = k;
      rep.shed = cert.shed;
      rep.binding_rows.clear();
      for (int e = 0; e < sl.num_inequalities(); ++e) {
        double act = 0.0;
        for (const auto& [j, cv] : sl.sys.rows[e].terms) act += cv * cert.point[j];
        if (std::fabs(act - sl.sys.rows[e].rhs) <= 1e-6)
          rep.binding_rows.push_back(sl.sys.rows[e].label());
      }
    }
  }
  rep.complete = true;
  rep.best_bound = rep.value;
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

// Solves the single-level model by branch and bound.  A scenario-fixing
// heuristic seeds the incumbent; topology binaries branch before indicator
// binaries.
inline WorstCaseReport solve_worst_case(SingleLevelMilp& m, const WorstCaseOptions& opts = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  WorstCaseReport rep;
  rep.engine = "kkt_milp";
  ConstraintSystem& sys = m.sys();

  std::vector<double> incumbent;
  double incumbent_value = -1.0;
  int incumbent_scenario = -1;
  if (opts.seed_incumbent) {
    detail::BlockEvaluator ev(m.block);
    ev.opts = opts.lp;
    for (int k = 0; k < m.scenarios.size(); ++k) {
      // Respect selector or topology pins a caller may have applied.
      if (sys.vars[m.z_vars[k]].fixed && sys.vars[m.z_vars[k]].value < 0.5) continue;
      bool conflict = false;
      const std::vector<int> pattern = m.block.pattern_for(m.network, m.scenarios.scenarios[k]);
      for (int other = 0; other < m.scenarios.size() && !conflict; ++other)
        if (other != k && sys.vars[m.z_vars[other]].fixed &&
            sys.vars[m.z_vars[other]].value > 0.5)
          conflict = true;
      for (std::size_t i = 0; i < m.block.u_vars.size() && !conflict; ++i)
        if (sys.vars[m.block.u_vars[i]].fixed &&
            std::fabs(sys.vars[m.block.u_vars[i]].value - pattern[i]) > 0.5)
          conflict = true;
      if (conflict) continue;
      lp::LpSolution s = ev.eval(pattern);
      if (s.status != lp::SolveStatus::Optimal) continue;
      if (s.objective > incumbent_value + 1e-12) {
        incumbent_value = s.objective;
        incumbent_scenario = k;
        incumbent = detail::kkt_point_from_lp(m, s, pattern);
      }
    }
    // Deterministic widening: the lifted point must satisfy the cap rows.
    if (!incumbent.empty()) {
      for (auto& p : m.kkt.pairs) {
        const LinearRow& inner = sys.rows[p.row];
        double act = 0.0;
        for (const auto& [j, cv] : inner.terms) act += cv * incumbent[j];
        const double rowslack = inner.rhs - act;
        const double sm = incumbent[m.kkt.sminus[p.row]];
        widen_pair_bounds(m.kkt, p,
                          rowslack > p.slack_bound - 1e-9 ? rowslack * 1.25 + 1e-6 : 0.0,
                          sm > p.sminus_bound - 1e-9 ? sm * 1.25 + 1e-6 : 0.0);
      }
    }
  }

  lp::LpProblem p = sys.to_lp();
  const std::vector<int> ints = sys.integer_vars();
  lp::MilpOptions mo;
  mo.lp = opts.lp;
  mo.node_limit = opts.node_limit;
  mo.time_limit_s = opts.time_limit_s;
  mo.log = opts.log;
  if (!incumbent.empty()) mo.initial_solution = incumbent;
  mo.branch_priority.assign(sys.num_vars(), 0);
  for (int j = 0; j < sys.num_vars(); ++j) {
    const VarKind k = sys.vars[j].kind;
    if (k == VarKind::LineState || k == VarKind::ScenarioSelect || k == VarKind::McCormickAux)
      mo.branch_priority[j] = 1;
  }
  const lp::MilpSolution sol = lp::solve_milp(p, ints, mo);
  rep.nodes = sol.nodes;
  rep.lp_iterations = sol.lp_iterations;
  rep.complete = sol.status == lp::MilpStatus::Optimal;
  if (sol.status == lp::MilpStatus::Infeasible)
    throw std::runtime_error("solve_worst_case: single-level model infeasible");
  if (!sol.has_incumbent) {
    rep.value = incumbent_value;
    rep.selected_scenario = incumbent_scenario;
    rep.best_bound = -sol.best_bound;
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
  }

  rep.value = std::max(0.0, -sol.objective);
  rep.best_bound = std::max(rep.value, -sol.best_bound);
  for (int k = 0; k < static_cast<int>(m.z_vars.size()); ++k)
    if (sol.x[m.z_vars[k]] > 0.5) rep.selected_scenario = k;
  for (int e = 0; e < m.kkt.num_inner_rows; ++e) {
    const LinearRow& row = sys.rows[e];
    const double sm = sol.x[m.kkt.sminus[e]];
    if (row.tag == RowTag::Balance && m.kkt.base_side[e] < 0 && sm > 1e-7)
      rep.shed[{row.bus, row.t}] += sm;
    double act = 0.0;
    for (const auto& [j, cv] : row.terms) act += cv * sol.x[j];
    if (std::fabs(act - row.rhs) <= 1e-6) rep.binding_rows.push_back(row.label());
  }
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

inline nlohmann::json report_to_json(const WorstCaseReport& r, const NetworkCase& c) {
  nlohmann::json j;
  j["engine"] = r.engine;
  j["complete"] = r.complete;
  j["value"] = r.value;
  j["best_bound"] = r.best_bound;
  j["selected_scenario"] = r.selected_scenario;
  j["shed"] = nlohmann::json::array();
  for (const auto& [key, amount] : r.shed) {
    j["shed"].push_back({{"bus", c.buses[key.first].id},
                         {"period", key.second < static_cast<int>(c.horizon.size())
                                        ? c.horizon[key.second]
                                        : std::to_string(key.second)},
                         {"amount", amount}});
  }
  j["binding_rows"] = r.binding_rows;
  if (!r.per_scenario.empty()) j["per_scenario"] = r.per_scenario;
  j["nodes"] = r.nodes;
  j["lp_iterations"] = r.lp_iterations;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

}  // namespace essr
