// branch_bound.hpp -- best-bound branch and bound on top of the simplex.
//
// Nodes re-solve with the dual simplex from the parent basis (only bounds
// change down a branch).  Branching is most-fractional with ties broken by
// lowest column index; an optional per-column priority lets callers branch
// structural decisions before auxiliary indicators.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <queue>
#include <vector>

#include "essr/lp.hpp"
#include "essr/simplex.hpp"

namespace essr::lp {

namespace detail {

struct BbNode {
  std::int64_t id = 0;
  double bound = -kInf;  // parent LP objective (minimization lower bound)
  std::vector<std::pair<int, std::pair<double, double>>> fixes;
  std::shared_ptr<const Basis> warm;
};

struct BbNodeOrder {
  bool operator()(const std::shared_ptr<BbNode>& a, const std::shared_ptr<BbNode>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;  // min-heap on bound
    return a->id > b->id;
  }
};

}  // namespace detail

inline MilpSolution solve_milp(const LpProblem& problem, const std::vector<int>& integer_cols,
                               const MilpOptions& opts = {}) {
  using detail::BbNode;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  MilpSolution out;
  LpProblem p = problem;  // bounds are mutated per node
  if (!p.finalized()) p.finalize();
  const std::vector<double> root_lo = p.col_lower, root_hi = p.col_upper;

  for (int j : integer_cols) {
    if (j < 0 || j >= p.num_cols()) throw std::out_of_range("solve_milp: integer column");
    if (p.col_lower[j] == -kInf || p.col_upper[j] == kInf)
      throw std::invalid_argument("solve_milp: integer variables need finite bounds");
  }

  std::vector<unsigned char> is_int(p.num_cols(), 0);
  for (int j : integer_cols) is_int[j] = 1;

  auto fractional = [&](const std::vector<double>& x, int* arg) -> bool {
    double best_score = -1.0;
    int best_pri = std::numeric_limits<int>::min();
    int best_j = -1;
    for (int j : integer_cols) {
      const double f = x[j] - std::floor(x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist <= opts.integrality_tol) continue;
      const int pri =
          (j < static_cast<int>(opts.branch_priority.size())) ? opts.branch_priority[j] : 0;
      const double score = dist;  // most fractional
      if (pri > best_pri || (pri == best_pri && score > best_score + 1e-12)) {
        best_pri = pri;
        best_score = score;
        best_j = j;
      }
    }
    *arg = best_j;
    return best_j >= 0;
  };

  auto check_candidate = [&](const std::vector<double>& x) -> bool {
    if (static_cast<int>(x.size()) != p.num_cols()) return false;
    for (int j = 0; j < p.num_cols(); ++j) {
      if (x[j] < root_lo[j] - 1e-6 || x[j] > root_hi[j] + 1e-6) return false;
      if (is_int[j] && std::fabs(x[j] - std::round(x[j])) > opts.integrality_tol) return false;
    }
    std::vector<double> act(p.num_rows(), 0.0);
    for (int j = 0; j < p.num_cols(); ++j) {
      if (x[j] == 0.0) continue;
      for (std::int64_t k = p.col_start[j]; k < p.col_start[j + 1]; ++k)
        act[p.row_index[k]] += p.coef[k] * x[j];
    }
    for (int i = 0; i < p.num_rows(); ++i) {
      const double scale = 1.0 + std::fabs(p.rhs[i]);
      if (p.sense[i] == RowSense::LE && act[i] > p.rhs[i] + 1e-6 * scale) return false;
      if (p.sense[i] == RowSense::GE && act[i] < p.rhs[i] - 1e-6 * scale) return false;
      if (p.sense[i] == RowSense::EQ && std::fabs(act[i] - p.rhs[i]) > 1e-6 * scale) return false;
    }
    return true;
  };

  double incumbent_obj = kInf;
  std::vector<double> incumbent;
  if (!opts.initial_solution.empty() && check_candidate(opts.initial_solution)) {
    incumbent = opts.initial_solution;
    incumbent_obj = 0.0;
    for (int j = 0; j < p.num_cols(); ++j) incumbent_obj += p.obj[j] * incumbent[j];
    out.has_incumbent = true;
  }

  std::priority_queue<std::shared_ptr<BbNode>, std::vector<std::shared_ptr<BbNode>>,
                      detail::BbNodeOrder>
      open;
  std::int64_t next_id = 0;
  bool clean = true;  // no numeric trouble anywhere

  auto root = std::make_shared<BbNode>();
  root->id = next_id++;
  root->bound = -kInf;
  open.push(root);

  SolveOptions lp_opts = opts.lp;

  while (!open.empty()) {
    auto node = open.top();
    open.pop();
    if (node->bound >= incumbent_obj - opts.gap_abs) continue;  // pruned by bound

    // Plunge: dive depth-first from this node,队 queueing the siblings, so an
    // incumbent appears early even without a seeded solution.
    std::shared_ptr<BbNode> cur = node;
    while (cur) {
      if (out.nodes >= opts.node_limit ||
          (opts.time_limit_s > 0 && elapsed() > opts.time_limit_s)) {
        double frontier = std::min(incumbent_obj, cur->bound);
        if (!open.empty()) frontier = std::min(frontier, open.top()->bound);
        out.best_bound = frontier;
        out.status = MilpStatus::LimitReached;
        if (out.has_incumbent) {
          out.objective = incumbent_obj;
          out.x = incumbent;
        }
        return out;
      }
      if (cur->bound >= incumbent_obj - opts.gap_abs) break;

      for (int j = 0; j < p.num_cols(); ++j) {
        p.col_lower[j] = root_lo[j];
        p.col_upper[j] = root_hi[j];
      }
      for (const auto& f : cur->fixes) {
        p.col_lower[f.first] = f.second.first;
        p.col_upper[f.first] = f.second.second;
      }

      ++out.nodes;
      LpSolution rel = solve_lp(p, lp_opts, cur->warm ? cur->warm.get() : nullptr);
      if (rel.status == SolveStatus::NumericFailure && cur->warm) {
        rel = solve_lp(p, lp_opts);  // cold retry
      }
      out.lp_iterations += rel.iterations;
      if (opts.log && out.nodes % opts.log_every == 0)
        (*opts.log) << "[bb] node=" << out.nodes << " open=" << open.size()
                    << " bound=" << cur->bound << " inc="
                    << (out.has_incumbent ? incumbent_obj : kInf) << "\n";

      if (rel.status == SolveStatus::Infeasible) break;
      if (rel.status != SolveStatus::Optimal) {
        clean = false;
        break;
      }
      if (rel.objective >= incumbent_obj - opts.gap_abs) break;

      int bj = -1;
      if (!fractional(rel.x, &bj)) {
        std::vector<double> x = rel.x;
        for (int j : integer_cols) x[j] = std::round(x[j]);
        incumbent = x;
        incumbent_obj = rel.objective;
        out.has_incumbent = true;
        break;
      }

      const double xv = rel.x[bj];
      auto basis = std::make_shared<Basis>(rel.basis);
      auto down = std::make_shared<BbNode>();
      down->id = next_id++;
      down->bound = rel.objective;
      down->fixes = cur->fixes;
      down->fixes.emplace_back(bj, std::make_pair(root_lo[bj], std::floor(xv)));
      down->warm = basis;
      auto up = std::make_shared<BbNode>();
      up->id = next_id++;
      up->bound = rel.objective;
      up->fixes = cur->fixes;
      up->fixes.emplace_back(bj, std::make_pair(std::ceil(xv), root_hi[bj]));
      up->warm = basis;
      // Dive toward the rounded side of the branching value.
      const bool go_up = (xv - std::floor(xv)) >= 0.5;
      open.push(go_up ? down : up);
      cur = go_up ? up : down;
    }
  }

  if (out.has_incumbent) {
    out.objective = incumbent_obj;
    out.best_bound = incumbent_obj;
    out.x = incumbent;
    out.status = clean ? MilpStatus::Optimal : MilpStatus::LimitReached;
  } else {
    out.status = clean ? MilpStatus::Infeasible : MilpStatus::LimitReached;
    out.best_bound = kInf;
  }
  return out;
}

}  // namespace essr::lp
