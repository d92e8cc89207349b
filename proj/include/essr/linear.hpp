// linear.hpp -- typed variable registry and sparse constraint systems.
//
// Systems store equality rows once; slack augmentation expands them into
// inequality pairs at solve time so each physical constraint keeps a single
// violation measure.  Registry bounds are metadata: operating variables enter
// LPs free (their limits are rows), while binaries, duals and slacks carry
// hard bounds.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "essr/lp.hpp"

namespace essr {

enum class VarKind : unsigned char {
  GenOutput,       // P_gt
  LineFlow,        // flow on a line in a period (per scenario slot)
  Angle,           // bus voltage angle
  LineState,       // binary line on/off state u
  ScenarioSelect,  // binary scenario selector z
  McCormickAux,    // binary chain variable
  SlackPlus,
  SlackMinus,
  DualAlpha,    // inequality multiplier, in [0,1]
  Indicator,    // complementarity indicator binary
  DualProduct,  // linearized alpha*u product
};

inline const char* to_string(VarKind k) {
  switch (k) {
    case VarKind::GenOutput: return "P";
    case VarKind::LineFlow: return "F";
    case VarKind::Angle: return "TH";
    case VarKind::LineState: return "U";
    case VarKind::ScenarioSelect: return "Z";
    case VarKind::McCormickAux: return "ZETA";
    case VarKind::SlackPlus: return "SP";
    case VarKind::SlackMinus: return "SM";
    case VarKind::DualAlpha: return "AL";
    case VarKind::Indicator: return "W";
    case VarKind::DualProduct: return "PHI";
  }
  return "?";
}

struct VarInfo {
  VarKind kind = VarKind::GenOutput;
  int g = -1;     // generator index
  int line = -1;  // line index
  int bus = -1;   // bus index
  int t = -1;     // period index
  int k = -1;     // scenario slot
  int aux = -1;   // chain position, row index for slacks/duals
  double lo = 0.0, hi = 0.0;  // registry bounds (metadata for operating vars)
  bool integral = false;
  bool fixed = false;  // hard-pinned to `value` in every solve
  double value = 0.0;

  std::string name() const {
    std::ostringstream os;
    os << to_string(kind);
    if (g >= 0) os << "_g" << g;
    if (line >= 0) os << "_l" << line;
    if (bus >= 0) os << "_b" << bus;
    if (t >= 0) os << "_t" << t;
    if (k >= 0) os << "_k" << k;
    if (aux >= 0) os << "_a" << aux;
    return os.str();
  }
};

enum class RowTag : unsigned char {
  Balance,
  FlowAngle,
  FlowCap,
  Ramp,
  GenBound,
  AngleBound,
  RefPin,
  SwitchUpper,  // big-M relaxed flow/angle row, >= side
  SwitchLower,  // big-M relaxed flow/angle row, <= side
  SwitchCap,    // state-scaled flow capacity
  McCormick,
  Selection,
  Stationarity,
  ComplAlpha,     // alpha_i <= w_i
  ComplRowSlack,  // row slack <= M (1 - w_i)
  ComplGamma,     // alpha_i >= 1 - v_i
  ComplSlackCap,  // s-_i <= S (1 - v_i)
  StrongDuality,
  Other,
};

inline const char* to_string(RowTag t) {
  switch (t) {
    case RowTag::Balance: return "balance";
    case RowTag::FlowAngle: return "flow_angle";
    case RowTag::FlowCap: return "flow_cap";
    case RowTag::Ramp: return "ramp";
    case RowTag::GenBound: return "gen_bound";
    case RowTag::AngleBound: return "angle_bound";
    case RowTag::RefPin: return "ref_pin";
    case RowTag::SwitchUpper: return "switch_upper";
    case RowTag::SwitchLower: return "switch_lower";
    case RowTag::SwitchCap: return "switch_cap";
    case RowTag::McCormick: return "mccormick";
    case RowTag::Selection: return "selection";
    case RowTag::Stationarity: return "stationarity";
    case RowTag::ComplAlpha: return "compl_alpha";
    case RowTag::ComplRowSlack: return "compl_row_slack";
    case RowTag::ComplGamma: return "compl_gamma";
    case RowTag::ComplSlackCap: return "compl_slack_cap";
    case RowTag::StrongDuality: return "strong_duality";
    case RowTag::Other: return "other";
  }
  return "?";
}

struct LinearRow {
  std::vector<std::pair<int, double>> terms;  // (var index, coefficient)
  lp::RowSense sense = lp::RowSense::LE;
  double rhs = 0.0;
  RowTag tag = RowTag::Other;
  int bus = -1, line = -1, g = -1, t = -1, k = -1;
  int side = 0;  // +1 upper / -1 lower for paired bound rows

  std::string label() const {
    std::ostringstream os;
    os << to_string(tag);
    if (bus >= 0) os << "_b" << bus;
    if (line >= 0) os << "_l" << line;
    if (g >= 0) os << "_g" << g;
    if (t >= 0) os << "_t" << t;
    if (k >= 0) os << "_k" << k;
    if (side > 0) os << "_up";
    if (side < 0) os << "_lo";
    return os.str();
  }
};

struct ConstraintSystem {
  std::vector<VarInfo> vars;
  std::vector<LinearRow> rows;
  std::vector<std::pair<int, double>> objective;  // minimize; empty = none
  bool has_objective = false;

  int add_var(VarInfo v) {
    vars.push_back(std::move(v));
    return static_cast<int>(vars.size()) - 1;
  }
  int add_row(LinearRow r) {
    std::sort(r.terms.begin(), r.terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    validate_row(r);
    rows.push_back(std::move(r));
    return static_cast<int>(rows.size()) - 1;
  }
  int num_vars() const { return static_cast<int>(vars.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  void pin(int var, double value) {
    vars[var].fixed = true;
    vars[var].value = value;
  }
  void unpin(int var) { vars[var].fixed = false; }

  bool is_operating(int var) const {
    const VarKind k = vars[var].kind;
    return k == VarKind::GenOutput || k == VarKind::LineFlow || k == VarKind::Angle;
  }

  // Hard LP bounds for a variable under this project's conventions.
  std::pair<double, double> lp_bounds(int var) const {
    const VarInfo& v = vars[var];
    if (v.fixed) return {v.value, v.value};
    if (is_operating(var)) return {-lp::kInf, lp::kInf};
    return {v.lo, v.hi};
  }

  lp::LpProblem to_lp() const {
    lp::LpProblem p;
    for (int j = 0; j < num_vars(); ++j) {
      const auto [lo, hi] = lp_bounds(j);
      double c = 0.0;
      p.add_col(lo, hi, c, vars[j].name());
    }
    for (const auto& [j, c] : objective) p.obj[j] = c;
    for (int i = 0; i < num_rows(); ++i) {
      const LinearRow& r = rows[i];
      p.add_row(r.sense, r.rhs, r.label());
      for (const auto& [j, c] : r.terms) p.add_entry(i, j, c);
    }
    p.finalize();
    return p;
  }

  std::vector<int> integer_vars() const {
    std::vector<int> out;
    for (int j = 0; j < num_vars(); ++j)
      if (vars[j].integral && !vars[j].fixed) out.push_back(j);
    return out;
  }

  // Human-readable dump for debugging and the documented debug format.
  std::string dump() const {
    std::ostringstream os;
    os << "vars " << num_vars() << " rows " << num_rows() << "\n";
    for (int i = 0; i < num_rows(); ++i) {
      const LinearRow& r = rows[i];
      os << r.label() << ": ";
      for (const auto& [j, c] : r.terms) {
        os << (c >= 0 ? "+" : "") << c << "*" << vars[j].name() << " ";
      }
      os << (r.sense == lp::RowSense::EQ ? "== " : "<= ") << r.rhs << "\n";
    }
    return os.str();
  }

 private:
  void validate_row(const LinearRow& r) const {
    int prev = -1;
    for (const auto& [j, c] : r.terms) {
      if (j < 0 || j >= num_vars()) throw std::out_of_range("row references unknown variable");
      if (!std::isfinite(c)) throw std::invalid_argument("row coefficient not finite");
      if (j == prev) throw std::invalid_argument("duplicate variable within a row");
      prev = j;
    }
    if (!std::isfinite(r.rhs)) throw std::invalid_argument("row rhs not finite");
  }
};

// Slack-augmented copy of a system: equalities expand into inequality pairs,
// every inequality row i gains s+_i and s-_i, and the objective becomes the
// total slack.
struct SlackSystem {
  ConstraintSystem sys;
  std::vector<int> base_row;    // expanded row -> source row in the base system
  std::vector<int> base_side;   // +1: original direction, -1: negated equality side
  std::vector<int> splus;       // expanded row -> s+ var
  std::vector<int> sminus;      // expanded row -> s- var
  int first_slack_var = 0;      // vars below this index mirror the base system

  int num_inequalities() const { return static_cast<int>(base_row.size()); }
};

inline SlackSystem augment_slacks(const ConstraintSystem& base) {
  if (base.has_objective)
    throw std::invalid_argument("augment_slacks: system already has an objective");
  SlackSystem out;
  out.sys.vars = base.vars;
  out.first_slack_var = base.num_vars();

  struct Pending {
    std::vector<std::pair<int, double>> terms;
    double rhs;
    int src;
    int side;
    LinearRow proto;
  };
  std::vector<Pending> pend;
  for (int i = 0; i < base.num_rows(); ++i) {
    const LinearRow& r = base.rows[i];
    if (r.sense == lp::RowSense::LE) {
      pend.push_back({r.terms, r.rhs, i, +1, r});
    } else {
      pend.push_back({r.terms, r.rhs, i, +1, r});
      Pending neg{r.terms, -r.rhs, i, -1, r};
      for (auto& [j, c] : neg.terms) c = -c;
      pend.push_back(std::move(neg));
    }
  }

  for (std::size_t e = 0; e < pend.size(); ++e) {
    VarInfo sp;
    sp.kind = VarKind::SlackPlus;
    sp.aux = static_cast<int>(e);
    sp.lo = 0.0;
    sp.hi = lp::kInf;
    VarInfo sm = sp;
    sm.kind = VarKind::SlackMinus;
    const int vp = out.sys.add_var(sp);
    const int vm = out.sys.add_var(sm);
    LinearRow row = pend[e].proto;
    row.sense = lp::RowSense::LE;
    row.rhs = pend[e].rhs;
    row.terms = pend[e].terms;
    row.terms.emplace_back(vp, 1.0);
    row.terms.emplace_back(vm, -1.0);
    out.sys.add_row(std::move(row));
    out.base_row.push_back(pend[e].src);
    out.base_side.push_back(pend[e].side);
    out.splus.push_back(vp);
    out.sminus.push_back(vm);
  }
  for (int e = 0; e < out.num_inequalities(); ++e) {
    out.sys.objective.emplace_back(out.splus[e], 1.0);
    out.sys.objective.emplace_back(out.sminus[e], 1.0);
  }
  out.sys.has_objective = true;
  return out;
}

}  // namespace essr
