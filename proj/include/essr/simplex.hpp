// simplex.hpp -- bounded-variable revised simplex with duals.
//
// Internal form: every row gets a logical column (slack ranges encode the row
// sense), so the constraint set is A_aug * x = rhs with simple bounds on all
// columns.  The basis is factorized with a Gilbert-Peierls sparse LU and kept
// current through product-form eta updates.  A dual simplex loop re-optimizes
// warm bases after bound or rhs changes (branch-and-bound nodes, dispatch
// sweeps); the primal loop handles cold solves via a single-pass crash plus
// phase-1 artificials.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "essr/lp.hpp"

namespace essr::lp {

namespace detail {

// Sparse LU of the basis matrix, row-pivoted, columns factored in a
// fill-reducing order (ascending column nonzero count).
class LuFactor {
 public:
  // cols: for each basis position, begin/end into (row,val) arrays.
  struct ColView {
    const int* idx;
    const double* val;
    int len;
  };

  bool factor(int m, const std::vector<ColView>& cols) {
    m_ = m;
    p_.assign(m, -1);
    pinv_.assign(m, -1);
    fcol_of_pos_.assign(m, -1);
    pos_of_fcol_.assign(m, -1);
    lcol_ptr_.assign(1, 0);
    lrow_.clear();
    lval_.clear();
    ucol_ptr_.assign(1, 0);
    upos_.clear();
    uval_.clear();
    udiag_.assign(m, 0.0);
    utrans_ptr_.clear();  // transposed adjacency rebuilt on demand

    // Factor sparsest columns first; singletons produce no fill.
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return cols[a].len < cols[b].len;
    });

    std::vector<double> x(m, 0.0);
    std::vector<int> touched;
    std::vector<int> stack, stack_entry;
    std::vector<int> topo;
    std::vector<unsigned char> mark(m, 0);
    touched.reserve(64);
    topo.reserve(64);

    for (int step = 0; step < m; ++step) {
      const int pos = order[step];
      const ColView& c = cols[pos];
      // Sparse solve L * x = B(:,pos) over already-pivoted columns.
      topo.clear();
      touched.clear();
      for (int k = 0; k < c.len; ++k) {
        const int r = c.idx[k];
        if (!mark[r]) dfs_reach(r, mark, stack, stack_entry, topo, touched);
      }
      for (int k = 0; k < c.len; ++k) x[c.idx[k]] += c.val[k];
      // topo holds rows in reverse topological order of dependence.
      for (int t = static_cast<int>(topo.size()) - 1; t >= 0; --t) {
        const int r = topo[t];
        const int f = pinv_[r];
        if (f < 0) continue;
        const double xr = x[r];
        if (xr == 0.0) continue;
        for (std::int64_t q = lcol_ptr_[f]; q < lcol_ptr_[f + 1]; ++q)
          x[lrow_[q]] -= lval_[q] * xr;
      }
      // Pivot: largest magnitude among unpivoted rows.
      int prow = -1;
      double pmax = 0.0;
      for (int r : touched) {
        if (pinv_[r] >= 0) continue;
        const double a = std::fabs(x[r]);
        if (a > pmax || (a == pmax && prow >= 0 && r < prow)) {
          pmax = a;
          prow = r;
        }
      }
      if (prow < 0 || pmax < 1e-11) {
        for (int r : touched) {
          x[r] = 0.0;
          mark[r] = 0;
        }
        return false;  // singular
      }
      const int f = step;
      const double piv = x[prow];
      p_[f] = prow;
      pinv_[prow] = f;
      fcol_of_pos_[pos] = f;
      pos_of_fcol_[f] = pos;
      udiag_[f] = piv;
      for (int r : touched) {
        const double v = x[r];
        x[r] = 0.0;
        mark[r] = 0;
        if (r == prow || v == 0.0) continue;
        if (pinv_[r] >= 0 && pinv_[r] < f) {
          upos_.push_back(pinv_[r]);
          uval_.push_back(v);
        } else if (pinv_[r] < 0) {
          lrow_.push_back(r);
          lval_.push_back(v / piv);
        }
      }
      ucol_ptr_.push_back(static_cast<std::int64_t>(upos_.size()));
      lcol_ptr_.push_back(static_cast<std::int64_t>(lrow_.size()));
    }
    return true;
  }

  // Solve B z = rhs.  rhs indexed by row; result indexed by basis position.
  void ftran(std::vector<double>& work_rows, std::vector<double>& out_pos) const {
    for (int f = 0; f < m_; ++f) {
      const double xr = work_rows[p_[f]];
      if (xr == 0.0) continue;
      for (std::int64_t q = lcol_ptr_[f]; q < lcol_ptr_[f + 1]; ++q)
        work_rows[lrow_[q]] -= lval_[q] * xr;
    }
    for (int f = m_ - 1; f >= 0; --f) {
      const double z = work_rows[p_[f]] / udiag_[f];
      work_rows[p_[f]] = 0.0;
      out_pos[pos_of_fcol_[f]] = z;
      if (z == 0.0) continue;
      for (std::int64_t q = ucol_ptr_[f]; q < ucol_ptr_[f + 1]; ++q)
        work_rows[p_[upos_[q]]] -= uval_[q] * z;
    }
  }

  // Solve B^T y = c.  c indexed by basis position; result indexed by row.
  void btran(const std::vector<double>& c_pos, std::vector<double>& out_rows,
             std::vector<double>& work) const {
    // U^T w = c (forward over factor columns).
    for (int f = 0; f < m_; ++f) {
      double s = c_pos[pos_of_fcol_[f]];
      for (std::int64_t q = ucol_ptr_[f]; q < ucol_ptr_[f + 1]; ++q)
        s -= uval_[q] * work[upos_[q]];
      work[f] = s / udiag_[f];
    }
    // L^T t = w (backward), scatter by pivot row.
    for (int f = m_ - 1; f >= 0; --f) {
      double s = work[f];
      for (std::int64_t q = lcol_ptr_[f]; q < lcol_ptr_[f + 1]; ++q)
        s -= lval_[q] * out_rows[lrow_[q]];
      out_rows[p_[f]] = s;
    }
    for (int f = 0; f < m_; ++f) work[f] = 0.0;
  }

  std::int64_t nonzeros() const {
    return static_cast<std::int64_t>(lval_.size() + uval_.size()) + m_;
  }

  // ---- sparse-rhs solves ----------------------------------------------------
  // Both directions keep a dense work vector plus an explicit touched set, so
  // the cost scales with the reach of the right-hand side rather than with m.

  // Solve B z = rhs for a sparse rhs given as (row, value) pairs.  out_pos
  // must be zero on entry; touched_pos returns the written positions.
  void solve_sparse(const std::vector<std::pair<int, double>>& rhs,
                    std::vector<double>& out_pos, std::vector<int>& touched_pos) {
    ensure_scratch();
    // L x = rhs over rows.
    topo_.clear();
    touched_rows_.clear();
    for (const auto& [r, v] : rhs)
      if (!mark_[r]) dfs_reach(r, mark_, stack_, stack_entry_, topo_, touched_rows_);
    for (const auto& [r, v] : rhs) xrow_[r] += v;
    for (int t = static_cast<int>(topo_.size()) - 1; t >= 0; --t) {
      const int r = topo_[t];
      const double xr = xrow_[r];
      if (xr == 0.0) continue;
      const int f = pinv_[r];
      for (std::int64_t q = lcol_ptr_[f]; q < lcol_ptr_[f + 1]; ++q)
        xrow_[lrow_[q]] -= lval_[q] * xr;
    }
    // U z = x backward over the reach of the nonzero factor positions.
    reach_.clear();
    for (int r : touched_rows_)
      if (xrow_[r] != 0.0) collect_reach_u(pinv_[r]);
    std::sort(reach_.begin(), reach_.end(), std::greater<int>());
    for (int f : reach_) {
      const double z = xrow_[p_[f]] / udiag_[f];
      xrow_[p_[f]] = 0.0;
      fmark_[f] = 0;
      if (z != 0.0) {
        out_pos[pos_of_fcol_[f]] = z;
        touched_pos.push_back(pos_of_fcol_[f]);
        for (std::int64_t q = ucol_ptr_[f]; q < ucol_ptr_[f + 1]; ++q)
          xrow_[p_[upos_[q]]] -= uval_[q] * z;
      }
    }
    for (int r : touched_rows_) {
      xrow_[r] = 0.0;
      mark_[r] = 0;
    }
  }

  // Solve B^T y = c for a sparse c given as (position, value) pairs.  out_rows
  // must be zero on entry; touched_rows returns the written rows.
  void solve_transposed_sparse(const std::vector<std::pair<int, double>>& rhs,
                               std::vector<double>& out_rows, std::vector<int>& touched_rows) {
    ensure_scratch();
    // U^T w = c forward over the reach in the transposed structure.
    reach_.clear();
    for (const auto& [pos, v] : rhs) {
      xpos_[fcol_of_pos_[pos]] += v;
      collect_reach_ut(fcol_of_pos_[pos]);
    }
    std::sort(reach_.begin(), reach_.end());
    for (int f : reach_) {
      double s = xpos_[f];
      for (std::int64_t q = ucol_ptr_[f]; q < ucol_ptr_[f + 1]; ++q) s -= uval_[q] * wpos_[upos_[q]];
      wpos_[f] = s / udiag_[f];
    }
    // L^T t = w backward; result scattered by pivot row.
    reach2_.clear();
    for (int f : reach_)
      if (wpos_[f] != 0.0) collect_reach_lt(f);
    std::sort(reach2_.begin(), reach2_.end(), std::greater<int>());
    for (int f : reach2_) {
      double s = wpos_[f];
      for (std::int64_t q = lcol_ptr_[f]; q < lcol_ptr_[f + 1]; ++q)
        s -= lval_[q] * out_rows[lrow_[q]];
      if (s != 0.0) {
        out_rows[p_[f]] = s;
        touched_rows.push_back(p_[f]);
      }
    }
    for (int f : reach_) {
      xpos_[f] = 0.0;
      wpos_[f] = 0.0;
      fmark_[f] = 0;
    }
    for (int f : reach2_) {
      wpos_[f] = 0.0;
      fmark2_[f] = 0;
    }
  }

 private:
  void ensure_scratch() {
    if (static_cast<int>(xrow_.size()) != m_) {
      xrow_.assign(m_, 0.0);
      xpos_.assign(m_, 0.0);
      wpos_.assign(m_, 0.0);
      mark_.assign(m_, 0);
      fmark_.assign(m_, 0);
      fmark2_.assign(m_, 0);
    }
    if (utrans_ptr_.empty()) build_transposes();
  }

  void build_transposes() {
    // U row adjacency: for factor j, the columns k with U[j,k] != 0.
    utrans_ptr_.assign(m_ + 1, 0);
    for (std::int64_t q = 0; q < static_cast<std::int64_t>(upos_.size()); ++q)
      ++utrans_ptr_[upos_[q] + 1];
    for (int f = 0; f < m_; ++f) utrans_ptr_[f + 1] += utrans_ptr_[f];
    utrans_col_.assign(upos_.size(), 0);
    {
      std::vector<std::int64_t> next(utrans_ptr_.begin(), utrans_ptr_.end() - 1);
      for (int k = 0; k < m_; ++k)
        for (std::int64_t q = ucol_ptr_[k]; q < ucol_ptr_[k + 1]; ++q)
          utrans_col_[next[upos_[q]]++] = k;
    }
    // L column-to-later-factor adjacency: for factor g, the columns f whose
    // Lcol contains row p_[g].
    ltrans_ptr_.assign(m_ + 1, 0);
    for (std::int64_t q = 0; q < static_cast<std::int64_t>(lrow_.size()); ++q)
      ++ltrans_ptr_[pinv_[lrow_[q]] + 1];
    for (int f = 0; f < m_; ++f) ltrans_ptr_[f + 1] += ltrans_ptr_[f];
    ltrans_col_.assign(lrow_.size(), 0);
    {
      std::vector<std::int64_t> next(ltrans_ptr_.begin(), ltrans_ptr_.end() - 1);
      for (int f = 0; f < m_; ++f)
        for (std::int64_t q = lcol_ptr_[f]; q < lcol_ptr_[f + 1]; ++q)
          ltrans_col_[next[pinv_[lrow_[q]]]++] = f;
    }
  }

  // Reach over U edges k -> j (j < k), collected into reach_ with fmark_.
  void collect_reach_u(int root) {
    if (fmark_[root]) return;
    stack_.clear();
    stack_entry_.clear();
    stack_.push_back(root);
    stack_entry_.push_back(0);
    fmark_[root] = 1;
    while (!stack_.empty()) {
      const int k = stack_.back();
      std::int64_t q = ucol_ptr_[k] + stack_entry_.back();
      bool descended = false;
      for (; q < ucol_ptr_[k + 1]; ++q) {
        const int child = upos_[q];
        stack_entry_.back() = static_cast<int>(q - ucol_ptr_[k]) + 1;
        if (!fmark_[child]) {
          fmark_[child] = 1;
          stack_.push_back(child);
          stack_entry_.push_back(0);
          descended = true;
          break;
        }
      }
      if (!descended) {
        reach_.push_back(k);
        stack_.pop_back();
        stack_entry_.pop_back();
      }
    }
  }

  // Reach over U^T edges j -> k (k > j) using the transposed adjacency.
  void collect_reach_ut(int root) {
    if (fmark_[root]) return;
    stack_.clear();
    stack_entry_.clear();
    stack_.push_back(root);
    stack_entry_.push_back(0);
    fmark_[root] = 1;
    while (!stack_.empty()) {
      const int j = stack_.back();
      std::int64_t q = utrans_ptr_[j] + stack_entry_.back();
      bool descended = false;
      for (; q < utrans_ptr_[j + 1]; ++q) {
        const int child = utrans_col_[q];
        stack_entry_.back() = static_cast<int>(q - utrans_ptr_[j]) + 1;
        if (!fmark_[child]) {
          fmark_[child] = 1;
          stack_.push_back(child);
          stack_entry_.push_back(0);
          descended = true;
          break;
        }
      }
      if (!descended) {
        reach_.push_back(j);
        stack_.pop_back();
        stack_entry_.pop_back();
      }
    }
  }

  // Reach over L^T edges g -> f (f < g) using the L transpose adjacency.
  void collect_reach_lt(int root) {
    if (fmark2_[root]) return;
    stack_.clear();
    stack_entry_.clear();
    stack_.push_back(root);
    stack_entry_.push_back(0);
    fmark2_[root] = 1;
    while (!stack_.empty()) {
      const int g = stack_.back();
      std::int64_t q = ltrans_ptr_[g] + stack_entry_.back();
      bool descended = false;
      for (; q < ltrans_ptr_[g + 1]; ++q) {
        const int child = ltrans_col_[q];
        stack_entry_.back() = static_cast<int>(q - ltrans_ptr_[g]) + 1;
        if (!fmark2_[child]) {
          fmark2_[child] = 1;
          stack_.push_back(child);
          stack_entry_.push_back(0);
          descended = true;
          break;
        }
      }
      if (!descended) {
        reach2_.push_back(g);
        stack_.pop_back();
        stack_entry_.pop_back();
      }
    }
  }
  void dfs_reach(int root, std::vector<unsigned char>& mark, std::vector<int>& stack,
                 std::vector<int>& stack_entry, std::vector<int>& topo,
                 std::vector<int>& touched) const {
    stack.clear();
    stack_entry.clear();
    stack.push_back(root);
    stack_entry.push_back(0);
    mark[root] = 1;
    touched.push_back(root);
    while (!stack.empty()) {
      const int r = stack.back();
      const int f = pinv_[r];
      std::int64_t q = stack_entry.back();
      bool descended = false;
      if (f >= 0) {
        for (std::int64_t e = lcol_ptr_[f] + q; e < lcol_ptr_[f + 1]; ++e) {
          const int child = lrow_[e];
          stack_entry.back() = static_cast<int>(e - lcol_ptr_[f]) + 1;
          if (!mark[child]) {
            mark[child] = 1;
            touched.push_back(child);
            stack.push_back(child);
            stack_entry.push_back(0);
            descended = true;
            break;
          }
        }
      }
      if (!descended) {
        topo.push_back(r);
        stack.pop_back();
        stack_entry.pop_back();
      }
    }
  }

  int m_ = 0;
  std::vector<int> p_, pinv_;
  std::vector<int> fcol_of_pos_, pos_of_fcol_;
  std::vector<std::int64_t> lcol_ptr_, ucol_ptr_;
  std::vector<int> lrow_, upos_;
  std::vector<double> lval_, uval_, udiag_;
  // Scratch for the sparse-rhs solves.
  std::vector<double> xrow_, xpos_, wpos_;
  std::vector<unsigned char> mark_, fmark_, fmark2_;
  std::vector<int> stack_, stack_entry_, topo_, touched_rows_, reach_, reach2_;
  std::vector<std::int64_t> utrans_ptr_, ltrans_ptr_;
  std::vector<int> utrans_col_, ltrans_col_;
};

}  // namespace detail

class SimplexSolver {
 public:
  explicit SimplexSolver(const LpProblem& p, const SolveOptions& opts = {})
      : p_(p), opts_(opts) {
    if (!p.finalized()) throw std::logic_error("SimplexSolver: problem not finalized");
    n_ = p.num_cols();
    m_ = p.num_rows();
    nl_ = n_ + m_;  // structurals + logicals
    build_bounds();
  }

  // Solves from scratch or from a warm basis (bounds/rhs may have changed
  // since the basis was produced; objective must match).
  LpSolution solve(const Basis* warm = nullptr) {
    start_ = Clock::now();
    iters_ = 0;
    refactors_ = 0;
    arti_rows_.clear();
    LpSolution sol;

    for (int j = 0; j < nl_; ++j)
      if (lo_[j] > hi_[j] + 1e-12) {
        sol.status = SolveStatus::Infeasible;
        finish(sol);
        return sol;
      }

    bool warm_ok = warm && !warm->empty() && adopt_basis(*warm);
    if (warm_ok) {
      compute_basic_values();
      const SolveStatus st = dual_loop();
      if (st == SolveStatus::Optimal) {
        // Dual loop reached primal feasibility; confirm dual feasibility and
        // clean up with primal iterations if needed.
        const SolveStatus st2 = primal_loop(/*phase1=*/false);
        if (st2 == SolveStatus::Optimal) return finalize_solution(sol);
        if (st2 == SolveStatus::Unbounded) {
          sol.status = SolveStatus::Unbounded;
          finish(sol);
          return sol;
        }
        if (st2 == SolveStatus::IterLimit || st2 == SolveStatus::TimeLimit) {
          sol.status = st2;
          finish(sol);
          return sol;
        }
        warm_ok = false;  // numeric trouble: fall through to cold solve
      } else if (st == SolveStatus::Infeasible) {
        sol.status = SolveStatus::Infeasible;
        finish(sol);
        return sol;
      } else if (st == SolveStatus::IterLimit || st == SolveStatus::TimeLimit) {
        sol.status = st;
        finish(sol);
        return sol;
      } else {
        warm_ok = false;
      }
    }

    // Cold start: logical basis, crash singleton columns, artificials.
    cold_start();
    if (!arti_rows_.empty()) {
      const SolveStatus st = primal_loop(/*phase1=*/true);
      if (st != SolveStatus::Optimal) {
        sol.status = (st == SolveStatus::Unbounded) ? SolveStatus::NumericFailure : st;
        finish(sol);
        return sol;
      }
      double infeas = 0.0;
      for (int r : arti_rows_) infeas += std::fabs(value_of(arti_col(r)));
      if (infeas > opts_.feas_tol * std::max(1.0, rhs_norm_)) {
        sol.status = SolveStatus::Infeasible;
        finish(sol);
        return sol;
      }
      lock_artificials();
    }
    const SolveStatus st = primal_loop(/*phase1=*/false);
    if (st != SolveStatus::Optimal) {
      sol.status = st;
      finish(sol);
      return sol;
    }
    return finalize_solution(sol);
  }

  std::int64_t iterations() const { return iters_; }

 private:
  using Clock = std::chrono::steady_clock;

  // ---- augmented matrix access -------------------------------------------
  // Columns: [0,n_) structural, [n_, n_+m_) logicals, artificials virtual.
  struct Ent {
    int row;
    double val;
  };

  int col_len(int j) const {
    if (j < n_) return static_cast<int>(p_.col_start[j + 1] - p_.col_start[j]);
    return 1;
  }
  Ent col_ent(int j, int k) const {
    if (j < n_)
      return {p_.row_index[p_.col_start[j] + k], p_.coef[p_.col_start[j] + k]};
    if (j < nl_) return {j - n_, 1.0};
    return {arti_rows_[j - nl_], arti_sign_[j - nl_]};
  }
  int num_cols_total() const { return nl_ + static_cast<int>(arti_rows_.size()); }
  int arti_col(int row) const {
    for (std::size_t k = 0; k < arti_rows_.size(); ++k)
      if (arti_rows_[k] == row) return nl_ + static_cast<int>(k);
    return -1;
  }

  void build_bounds() {
    lo_.assign(nl_, 0.0);
    hi_.assign(nl_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = p_.col_lower[j];
      hi_[j] = p_.col_upper[j];
    }
    for (int i = 0; i < m_; ++i) {
      switch (p_.sense[i]) {
        case RowSense::LE:
          lo_[n_ + i] = 0.0;
          hi_[n_ + i] = kInf;
          break;
        case RowSense::GE:
          lo_[n_ + i] = -kInf;
          hi_[n_ + i] = 0.0;
          break;
        case RowSense::EQ:
          lo_[n_ + i] = 0.0;
          hi_[n_ + i] = 0.0;
          break;
      }
    }
    rhs_norm_ = 0.0;
    for (int i = 0; i < m_; ++i) rhs_norm_ = std::max(rhs_norm_, std::fabs(p_.rhs[i]));
  }

  double cost_of(int j) const {
    if (phase1_) return j >= nl_ ? 1.0 : 0.0;
    if (j < n_) return p_.obj[j];
    return 0.0;
  }

  double value_of(int j) const { return x_[j]; }

  bool is_fixed(int j) const { return lo_[j] == hi_[j]; }
  bool is_free(int j) const { return lo_[j] == -kInf && hi_[j] == kInf; }

  // ---- basis state --------------------------------------------------------
  void cold_start() {
    basic_.assign(m_, 0);
    status_.assign(nl_, ColStatus::AtLower);
    x_.assign(nl_, 0.0);
    const bool hinted = static_cast<int>(opts_.start_values.size()) == n_;
    for (int j = 0; j < n_; ++j) {
      const double hint = hinted ? opts_.start_values[j] : 0.0;
      if (is_free(j)) {
        status_[j] = ColStatus::FreeAt;
        x_[j] = hint;
      } else if (hinted && !is_fixed(j)) {
        const bool upper = hi_[j] != kInf && (lo_[j] == -kInf || hint - lo_[j] > hi_[j] - hint);
        status_[j] = upper ? ColStatus::AtUpper : ColStatus::AtLower;
        x_[j] = upper ? hi_[j] : lo_[j];
      } else if (lo_[j] == -kInf || (hi_[j] != kInf && std::fabs(hi_[j]) < std::fabs(lo_[j]))) {
        status_[j] = ColStatus::AtUpper;
        x_[j] = hi_[j];
      } else {
        status_[j] = ColStatus::AtLower;
        x_[j] = lo_[j];
      }
    }
    for (int i = 0; i < m_; ++i) {
      basic_[i] = n_ + i;
      status_[n_ + i] = ColStatus::Basic;
    }
    compute_basic_values();

    // Crash: rows whose logical sits outside its range pull in a singleton
    // structural column that can absorb the residual; otherwise the row gets
    // a phase-1 artificial.  Slack-style pairs mean most rows offer one
    // workable singleton per direction.
    std::vector<int> single_head(m_, -1), single_next(n_, -1);
    for (int j = n_ - 1; j >= 0; --j)
      if (col_len(j) == 1 && !is_fixed(j) && status_[j] != ColStatus::Basic) {
        const Ent e = col_ent(j, 0);
        if (std::fabs(e.val) > 1e-9) {
          single_next[j] = single_head[e.row];
          single_head[e.row] = j;
        }
      }
    std::vector<int> need_arti;
    for (int i = 0; i < m_; ++i) {
      const int lj = basic_[i];
      if (lj != n_ + i) continue;
      const double v = x_[lj];
      if (v >= lo_[lj] - 1e-9 && v <= hi_[lj] + 1e-9) continue;
      bool fixed_up = false;
      const double target = (v < lo_[lj]) ? lo_[lj] : hi_[lj];
      for (int j = single_head[i]; j >= 0; j = single_next[j]) {
        const Ent e = col_ent(j, 0);
        // Want logical value within range: logical = rhs_i - a_j * x_j - rest.
        const double xj_new = x_[j] + (v - target) / e.val;
        if (xj_new >= lo_[j] - 1e-9 && xj_new <= hi_[j] + 1e-9) {
          // Swap into basis; the (now nonbasic) logical lands on target.
          status_[j] = ColStatus::Basic;
          x_[j] = xj_new;
          basic_[i] = j;
          status_[lj] = (target == lo_[lj]) ? ColStatus::AtLower : ColStatus::AtUpper;
          x_[lj] = target;
          fixed_up = true;
          break;
        }
      }
      if (!fixed_up) need_arti.push_back(i);
    }
    if (!need_arti.empty()) {
      arti_rows_ = need_arti;
      arti_sign_.assign(arti_rows_.size(), 1.0);
      status_.resize(num_cols_total(), ColStatus::AtLower);
      x_.resize(num_cols_total(), 0.0);
      lo_.resize(num_cols_total(), 0.0);
      hi_.resize(num_cols_total(), kInf);
      compute_basic_values();
      for (std::size_t k = 0; k < arti_rows_.size(); ++k) {
        const int i = arti_rows_[k];
        const int lj = basic_[i];
        double v = x_[lj];
        double target;
        if (v < lo_[lj])
          target = lo_[lj];
        else if (v > hi_[lj])
          target = hi_[lj];
        else {
          // Row became feasible after crash; artificial stays at zero.
          arti_sign_[k] = 1.0;
          continue;
        }
        // basic_[i] keeps its column; artificial becomes the basic one.
        // Residual the artificial must carry: a = v - target with sign chosen
        // so the artificial is nonnegative.
        const double resid = v - target;
        arti_sign_[k] = resid > 0 ? 1.0 : -1.0;
        const int aj = nl_ + static_cast<int>(k);
        status_[lj] = is_fixed(lj) ? ColStatus::AtLower
                                   : (target == lo_[lj] ? ColStatus::AtLower : ColStatus::AtUpper);
        x_[lj] = target;
        status_[aj] = ColStatus::Basic;
        basic_[i] = aj;
        x_[aj] = std::fabs(resid);
      }
    }
    must_refactor_ = true;
    phase1_ = !arti_rows_.empty();
  }

  void lock_artificials() {
    for (std::size_t k = 0; k < arti_rows_.size(); ++k) {
      const int aj = nl_ + static_cast<int>(k);
      lo_[aj] = 0.0;
      hi_[aj] = 0.0;
      if (status_[aj] != ColStatus::Basic) {
        status_[aj] = ColStatus::AtLower;
        x_[aj] = 0.0;
      }
    }
    phase1_ = false;
  }

  bool adopt_basis(const Basis& b) {
    if (static_cast<int>(b.basic.size()) != m_ ||
        static_cast<int>(b.status.size()) != nl_)
      return false;
    basic_ = b.basic;
    status_ = b.status;
    x_.assign(nl_, 0.0);
    std::vector<unsigned char> seen(nl_, 0);
    for (int i = 0; i < m_; ++i) {
      const int j = basic_[i];
      if (j < 0 || j >= nl_ || seen[j]) return false;
      seen[j] = 1;
      if (status_[j] != ColStatus::Basic) return false;
    }
    for (int j = 0; j < nl_; ++j) {
      switch (status_[j]) {
        case ColStatus::Basic:
          if (!seen[j]) return false;
          break;
        case ColStatus::AtLower:
          if (lo_[j] == -kInf) return false;
          x_[j] = lo_[j];
          break;
        case ColStatus::AtUpper:
          if (hi_[j] == kInf) return false;
          x_[j] = hi_[j];
          break;
        case ColStatus::FreeAt:
          x_[j] = (j < static_cast<int>(b.value.size())) ? b.value[j] : 0.0;
          break;
      }
    }
    phase1_ = false;
    must_refactor_ = true;
    return refactorize();
  }

  // ---- factorization ------------------------------------------------------
  bool refactorize() {
    std::vector<detail::LuFactor::ColView> views(m_);
    scratch_idx_.clear();
    scratch_val_.clear();
    scratch_ptr_.assign(m_ + 1, 0);
    for (int i = 0; i < m_; ++i) {
      const int j = basic_[i];
      const int len = col_len(j);
      for (int k = 0; k < len; ++k) {
        const Ent e = col_ent(j, k);
        scratch_idx_.push_back(e.row);
        scratch_val_.push_back(e.val);
      }
      scratch_ptr_[i + 1] = static_cast<std::int64_t>(scratch_idx_.size());
    }
    for (int i = 0; i < m_; ++i)
      views[i] = {scratch_idx_.data() + scratch_ptr_[i],
                  scratch_val_.data() + scratch_ptr_[i],
                  static_cast<int>(scratch_ptr_[i + 1] - scratch_ptr_[i])};
    if (!lu_.factor(m_, views)) return false;
    etas_pos_.clear();
    etas_val_.clear();
    etas_ptr_.assign(1, 0);
    etas_r_.clear();
    ++refactors_;
    must_refactor_ = false;
    if (work_rows_.size() != static_cast<std::size_t>(m_)) {
      work_rows_.assign(m_, 0.0);
      work_pos_.assign(m_, 0.0);
      work_pos2_.assign(m_, 0.0);
    }
    return true;
  }

  void ftran(std::vector<double>& rhs_rows, std::vector<double>& out_pos) {
    lu_.ftran(rhs_rows, out_pos);
    for (std::size_t e = 0; e < etas_r_.size(); ++e) {
      const int r = etas_r_[e];
      double zr = out_pos[r];
      // eta diag stored as first entry
      const std::int64_t b = etas_ptr_[e], eend = etas_ptr_[e + 1];
      zr /= etas_val_[b];
      out_pos[r] = zr;
      if (zr != 0.0)
        for (std::int64_t q = b + 1; q < eend; ++q)
          out_pos[etas_pos_[q]] -= etas_val_[q] * zr;
    }
  }

  void btran(const std::vector<double>& c_pos, std::vector<double>& out_rows) {
    std::vector<double>& t = work_pos2_;
    for (int i = 0; i < m_; ++i) t[i] = c_pos[i];
    for (int e = static_cast<int>(etas_r_.size()) - 1; e >= 0; --e) {
      const int r = etas_r_[e];
      const std::int64_t b = etas_ptr_[e], eend = etas_ptr_[e + 1];
      double s = t[r];
      for (std::int64_t q = b + 1; q < eend; ++q) s -= etas_val_[q] * t[etas_pos_[q]];
      t[r] = s / etas_val_[b];
    }
    lu_.btran(t, out_rows, work_pos_);
  }

  void append_eta(const std::vector<double>& w_pos, int r) {
    etas_r_.push_back(r);
    etas_val_.push_back(w_pos[r]);
    etas_pos_.push_back(r);
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double v = w_pos[i];
      if (v != 0.0) {
        etas_pos_.push_back(i);
        etas_val_.push_back(v);
      }
    }
    etas_ptr_.push_back(static_cast<std::int64_t>(etas_pos_.size()));
  }

  void append_eta_sparse(const std::vector<double>& w_pos, const std::vector<int>& touched,
                         int r) {
    etas_r_.push_back(r);
    etas_val_.push_back(w_pos[r]);
    etas_pos_.push_back(r);
    for (int i : touched) {
      if (i == r) continue;
      const double v = w_pos[i];
      if (v != 0.0) {
        etas_pos_.push_back(i);
        etas_val_.push_back(v);
      }
    }
    etas_ptr_.push_back(static_cast<std::int64_t>(etas_pos_.size()));
  }

  // Direction through the basis for one column, sparse end to end.  w must be
  // zero on entry; wtouch collects its nonzero positions (deduplicated).
  void ftran_col_sparse(int col, std::vector<double>& w, std::vector<int>& wtouch) {
    rhs_buf_.clear();
    const int len = col_len(col);
    for (int k = 0; k < len; ++k) {
      const Ent e = col_ent(col, k);
      rhs_buf_.emplace_back(e.row, e.val);
    }
    lu_.solve_sparse(rhs_buf_, w, wtouch);
    if (wmark_.size() != static_cast<std::size_t>(m_)) wmark_.assign(m_, 0);
    for (int i : wtouch) wmark_[i] = 1;
    for (std::size_t e = 0; e < etas_r_.size(); ++e) {
      const int r = etas_r_[e];
      double zr = w[r];
      if (zr == 0.0) continue;
      const std::int64_t b = etas_ptr_[e], eend = etas_ptr_[e + 1];
      zr /= etas_val_[b];
      w[r] = zr;
      for (std::int64_t q = b + 1; q < eend; ++q) {
        const int i = etas_pos_[q];
        w[i] -= etas_val_[q] * zr;
        if (!wmark_[i]) {
          wmark_[i] = 1;
          wtouch.push_back(i);
        }
      }
    }
    for (int i : wtouch) wmark_[i] = 0;
  }

  // rho = B^-T e_r, sparse.  out must be zero on entry.
  void btran_unit_sparse(int rpos, std::vector<double>& out_rows,
                         std::vector<int>& touched_rows) {
    if (tpos_.size() != static_cast<std::size_t>(m_)) tpos_.assign(m_, 0.0);
    if (tmark_.size() != static_cast<std::size_t>(m_)) tmark_.assign(m_, 0);
    ttouch_.clear();
    tpos_[rpos] = 1.0;
    tmark_[rpos] = 1;
    ttouch_.push_back(rpos);
    for (int e = static_cast<int>(etas_r_.size()) - 1; e >= 0; --e) {
      const int r = etas_r_[e];
      const std::int64_t b = etas_ptr_[e], eend = etas_ptr_[e + 1];
      double s = tpos_[r];
      bool any = s != 0.0;
      for (std::int64_t q = b + 1; q < eend; ++q) {
        const double tv = tpos_[etas_pos_[q]];
        if (tv != 0.0) {
          s -= etas_val_[q] * tv;
          any = true;
        }
      }
      if (!any) continue;
      tpos_[r] = s / etas_val_[b];
      if (!tmark_[r]) {
        tmark_[r] = 1;
        ttouch_.push_back(r);
      }
    }
    rhs_buf_.clear();
    for (int i : ttouch_) {
      if (tpos_[i] != 0.0) rhs_buf_.emplace_back(i, tpos_[i]);
      tpos_[i] = 0.0;
      tmark_[i] = 0;
    }
    lu_.solve_transposed_sparse(rhs_buf_, out_rows, touched_rows);
  }

  void compute_basic_values() {
    if (work_rows_.size() != static_cast<std::size_t>(m_)) {
      work_rows_.assign(m_, 0.0);
      work_pos_.assign(m_, 0.0);
      work_pos2_.assign(m_, 0.0);
    }
    if (must_refactor_ || etas_r_.size() > 0 || true) {
      if (!refactorize()) {
        // Singular warm basis is handled by caller (adopt_basis fails);
        // during iteration this is a hard numeric problem.
        numeric_trouble_ = true;
        return;
      }
    }
    std::vector<double>& r = work_rows_;
    for (int i = 0; i < m_; ++i) r[i] = p_.rhs[i];
    for (int j = 0; j < num_cols_total(); ++j) {
      if (status_[j] == ColStatus::Basic) continue;
      const double v = x_[j];
      if (v == 0.0) continue;
      const int len = col_len(j);
      for (int k = 0; k < len; ++k) {
        const Ent e = col_ent(j, k);
        r[e.row] -= e.val * v;
      }
    }
    std::vector<double>& z = work_pos_;
    ftran(r, z);
    for (int i = 0; i < m_; ++i) {
      x_[basic_[i]] = z[i];
      z[i] = 0.0;
      r[i] = 0.0;
    }
  }

  // ---- primal simplex -----------------------------------------------------
  // The dual vector is maintained across pivots (rank-one updates through the
  // leaving row's btran) and recomputed from scratch at every
  // refactorization, so a pricing pass costs only the scanned window.
  SolveStatus primal_loop(bool phase1) {
    phase1_ = phase1;
    std::int64_t stall = 0;
    bool bland = false;
    const std::int64_t limit = iter_budget();
    std::vector<double>& y = y_;
    std::vector<double> cb(m_, 0.0), w(m_, 0.0), rho(m_, 0.0);
    std::vector<int> wtouch, rtouch;
    if (static_cast<int>(y.size()) != m_) y.assign(m_, 0.0);
    int since_refactor = 0;
    bool duals_fresh = false;

    while (true) {
      if (iters_ >= limit) return SolveStatus::IterLimit;
      if (time_exceeded()) return SolveStatus::TimeLimit;
      if (must_refactor_ || since_refactor >= refactor_every() ||
          static_cast<std::int64_t>(etas_val_.size()) > 4 * lu_.nonzeros() + 4096) {
        compute_basic_values();
        if (numeric_trouble_) return SolveStatus::NumericFailure;
        since_refactor = 0;
        duals_fresh = false;
      }
      if (!duals_fresh) {
        for (int i = 0; i < m_; ++i) cb[i] = cost_of(basic_[i]);
        btran(cb, y);
        duals_fresh = true;
      }

      int q = -1;
      double best = opts_.opt_tol;
      int dirq = 0;
      const int ncols = num_cols_total();
      const int window = bland ? ncols : std::max(4096, ncols / price_window_divisor_);
      int scanned = 0;
      int j = bland ? 0 : price_cursor_ % std::max(ncols, 1);
      for (; scanned < ncols; ++scanned, ++j) {
        if (j >= ncols) j = 0;
        if (q >= 0 && scanned >= window) break;
        if (status_[j] == ColStatus::Basic) continue;
        if (is_fixed(j)) continue;
        double d = cost_of(j);
        const int len = col_len(j);
        for (int k = 0; k < len; ++k) {
          const Ent e = col_ent(j, k);
          d -= e.val * y[e.row];
        }
        int dir = 0;
        double v = 0.0;
        switch (status_[j]) {
          case ColStatus::AtLower:
            if (d < -opts_.opt_tol) {
              dir = +1;
              v = -d;
            }
            break;
          case ColStatus::AtUpper:
            if (d > opts_.opt_tol) {
              dir = -1;
              v = d;
            }
            break;
          case ColStatus::FreeAt:
            if (d < -opts_.opt_tol) {
              dir = +1;
              v = -d;
            } else if (d > opts_.opt_tol) {
              dir = -1;
              v = d;
            }
            break;
          default:
            break;
        }
        if (dir != 0) {
          if (bland) {
            best = v;
            q = j;
            dirq = dir;
            break;
          }
          if (v > best) {
            best = v;
            q = j;
            dirq = dir;
          }
        }
      }
      if (q < 0) return SolveStatus::Optimal;
      price_cursor_ = q + 1;
      const double dq = best * (dirq > 0 ? -1.0 : 1.0);  // signed reduced cost

      // Direction through the basis.
      wtouch.clear();
      ftran_col_sparse(q, w, wtouch);

      // Ratio test over the direction's support: x_B changes by -dir*step*w.
      double step = kInf;
      bool flip = false;
      if (lo_[q] != -kInf && hi_[q] != kInf) {
        step = hi_[q] - lo_[q];
        flip = true;
      }
      int leave = -1;
      double leave_pivot = 0.0;
      int leave_side = 0;  // -1 to lower, +1 to upper
      for (int i : wtouch) {
        const double wi = dirq * w[i];
        if (std::fabs(wi) <= opts_.pivot_tol) continue;
        const int bj = basic_[i];
        double cand;
        int side;
        if (wi > 0) {
          if (lo_[bj] == -kInf) continue;
          cand = (x_[bj] - lo_[bj]) / wi;
          side = -1;
        } else {
          if (hi_[bj] == kInf) continue;
          cand = (x_[bj] - hi_[bj]) / wi;
          side = +1;
        }
        if (cand < 0) cand = 0;
        const bool better =
            cand < step - 1e-10 ||
            (cand < step + 1e-10 &&
             (leave < 0 || std::fabs(w[i]) > std::fabs(leave_pivot) + 1e-12));
        if (better) {
          step = cand;
          leave = i;
          leave_pivot = w[i];
          leave_side = side;
          flip = false;
        }
      }
      if (step == kInf) {
        for (int i : wtouch) w[i] = 0.0;
        // A stale dual vector can fake an improving ray; trust the verdict
        // only from a fresh factorization.
        if (++unbounded_rejects_ <= 2) {
          must_refactor_ = true;
          duals_fresh = false;
          continue;
        }
        return phase1_ ? SolveStatus::NumericFailure : SolveStatus::Unbounded;
      }
      unbounded_rejects_ = 0;
      if (!flip && leave >= 0 && std::fabs(w[leave]) < 1e-9) {
        for (int i : wtouch) w[i] = 0.0;
        if (++pivot_rejects_ > 8) return SolveStatus::NumericFailure;
        must_refactor_ = true;
        continue;
      }
      pivot_rejects_ = 0;

      ++iters_;
      ++since_refactor;
      if (step <= 1e-10)
        ++stall;
      else
        stall = 0;
      if (stall > opts_.stall_limit) bland = true;
      if (stall > 16 * static_cast<std::int64_t>(opts_.stall_limit))
        return SolveStatus::NumericFailure;
      if (opts_.log && iters_ % opts_.log_every == 0)
        (*opts_.log) << "[lp] it=" << iters_ << " ph=" << (phase1_ ? 1 : 2)
                     << " obj=" << current_objective() << "\n";

      if (flip) {
        for (int i : wtouch) {
          x_[basic_[i]] -= dirq * step * w[i];
          w[i] = 0.0;
        }
        x_[q] = (dirq > 0) ? hi_[q] : lo_[q];
        status_[q] = (dirq > 0) ? ColStatus::AtUpper : ColStatus::AtLower;
      } else {
        // Dual update before the eta changes the factorized basis:
        // y += (d_q / w_leave) * (B^-T e_leave).
        rtouch.clear();
        btran_unit_sparse(leave, rho, rtouch);
        const double scale = dq / w[leave];
        for (int r : rtouch) {
          y[r] += scale * rho[r];
          rho[r] = 0.0;
        }
        for (int i : wtouch) x_[basic_[i]] -= dirq * step * w[i];
        const int bj = basic_[leave];
        x_[q] = x_[q] + dirq * step;
        x_[bj] = (leave_side < 0) ? lo_[bj] : hi_[bj];
        status_[bj] = (leave_side < 0) ? ColStatus::AtLower : ColStatus::AtUpper;
        if (is_fixed(bj)) status_[bj] = ColStatus::AtLower;
        status_[q] = ColStatus::Basic;
        basic_[leave] = q;
        append_eta_sparse(w, wtouch, leave);
        for (int i : wtouch) w[i] = 0.0;
      }
    }
  }

  // ---- dual simplex -------------------------------------------------------
  SolveStatus dual_loop() {
    phase1_ = false;
    const std::int64_t limit = iter_budget();
    std::vector<double> y(m_, 0.0), cb(m_, 0.0), rho(m_, 0.0), w(m_, 0.0), epos(m_, 0.0);
    int since_refactor = 0;
    std::int64_t stall = 0;
    bool bland = false;

    while (true) {
      if (iters_ >= limit) return SolveStatus::IterLimit;
      if (time_exceeded()) return SolveStatus::TimeLimit;
      if (must_refactor_ || since_refactor >= refactor_every() ||
          static_cast<std::int64_t>(etas_val_.size()) > 4 * lu_.nonzeros() + 4096) {
        compute_basic_values();
        if (numeric_trouble_) return SolveStatus::NumericFailure;
        since_refactor = 0;
      }

      // Most-violating basic variable leaves (first violating under Bland).
      int r = -1;
      double best_v = primal_tol();
      int below = 0;
      for (int i = 0; i < m_; ++i) {
        const int bj = basic_[i];
        const double v = x_[bj];
        const double under = lo_[bj] - v;
        const double over = v - hi_[bj];
        if (under > best_v) {
          best_v = under;
          r = i;
          below = 1;
        } else if (over > best_v) {
          best_v = over;
          r = i;
          below = 0;
        }
        if (bland && r >= 0) break;
      }
      if (r < 0) return SolveStatus::Optimal;  // primal feasible

      for (int i = 0; i < m_; ++i) cb[i] = cost_of(basic_[i]);
      btran(cb, y);
      for (int i = 0; i < m_; ++i) epos[i] = 0.0;
      epos[r] = 1.0;
      btran(epos, rho);
      epos[r] = 0.0;

      // Entering: keep dual feasibility, smallest |d_j / alpha_j|.
      const int ncols = num_cols_total();
      int q = -1;
      double best_ratio = kInf;
      double alpha_q = 0.0;
      for (int j = 0; j < ncols; ++j) {
        if (status_[j] == ColStatus::Basic || is_fixed(j)) continue;
        double alpha = 0.0;
        const int len = col_len(j);
        for (int k = 0; k < len; ++k) {
          const Ent e = col_ent(j, k);
          alpha += e.val * rho[e.row];
        }
        if (std::fabs(alpha) <= opts_.pivot_tol) continue;
        // Leaving variable must move toward its violated bound:
        // below: x_B[r] increases; above: decreases.  x_B[r] change is
        // -alpha * delta_j.
        int dir = 0;
        if (below) {
          if (status_[j] == ColStatus::AtLower && alpha < 0)
            dir = +1;
          else if (status_[j] == ColStatus::AtUpper && alpha > 0)
            dir = -1;
          else if (status_[j] == ColStatus::FreeAt)
            dir = alpha < 0 ? +1 : -1;
        } else {
          if (status_[j] == ColStatus::AtLower && alpha > 0)
            dir = +1;
          else if (status_[j] == ColStatus::AtUpper && alpha < 0)
            dir = -1;
          else if (status_[j] == ColStatus::FreeAt)
            dir = alpha > 0 ? +1 : -1;
        }
        if (dir == 0) continue;
        double d = cost_of(j);
        for (int k = 0; k < len; ++k) {
          const Ent e = col_ent(j, k);
          d -= e.val * y[e.row];
        }
        const double ratio = std::fabs(d) / std::fabs(alpha);
        const bool better =
            q < 0 || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && std::fabs(alpha) > std::fabs(alpha_q) + 1e-12);
        if (better) {
          best_ratio = ratio;
          q = j;
          alpha_q = alpha;
          if (bland) break;
        }
      }
      if (q < 0) return SolveStatus::Infeasible;  // dual ray: primal infeasible

      // Pivot: drive x_B[r] exactly to its violated bound.
      std::vector<double>& rr = work_rows_;
      const int len = col_len(q);
      for (int k = 0; k < len; ++k) {
        const Ent e = col_ent(q, k);
        rr[e.row] += e.val;
      }
      ftran(rr, w);
      for (int i = 0; i < m_; ++i) rr[i] = 0.0;
      if (std::fabs(w[r]) < 1e-9) {
        for (int i = 0; i < m_; ++i) w[i] = 0.0;
        if (++pivot_rejects_ > 8) return SolveStatus::NumericFailure;
        must_refactor_ = true;
        continue;
      }
      pivot_rejects_ = 0;
      const int bj = basic_[r];
      const double target = below ? lo_[bj] : hi_[bj];
      const double delta = (x_[bj] - target) / w[r];

      ++iters_;
      ++since_refactor;
      if (std::fabs(delta) <= 1e-12)
        ++stall;
      else
        stall = 0;
      if (stall > opts_.stall_limit) bland = true;
      if (stall > 16 * static_cast<std::int64_t>(opts_.stall_limit))
        return SolveStatus::NumericFailure;
      if (opts_.log && iters_ % opts_.log_every == 0)
        (*opts_.log) << "[lp] it=" << iters_ << " ph=d obj=" << current_objective() << "\n";

      for (int i = 0; i < m_; ++i)
        if (w[i] != 0.0) x_[basic_[i]] -= delta * w[i];
      x_[q] = x_[q] + delta;
      x_[bj] = target;
      status_[bj] = below ? ColStatus::AtLower : ColStatus::AtUpper;
      if (is_fixed(bj)) status_[bj] = ColStatus::AtLower;
      status_[q] = ColStatus::Basic;
      basic_[r] = q;
      append_eta(w, r);
      for (int i = 0; i < m_; ++i) w[i] = 0.0;
    }
  }

  // ---- wrap-up ------------------------------------------------------------
  double current_objective() const {
    double o = 0.0;
    for (int j = 0; j < num_cols_total(); ++j)
      if (cost_of(j) != 0.0) o += cost_of(j) * x_[j];
    return o;
  }

  double primal_tol() const { return opts_.feas_tol * std::max(1.0, rhs_norm_); }

  int refactor_every() const {
    return std::max(opts_.refactor_interval, std::min(2048, m_ / 128));
  }

  std::int64_t iter_budget() const {
    return opts_.iter_limit > 0 ? opts_.iter_limit
                                : 20000 + 200 * static_cast<std::int64_t>(m_ + n_);
  }

  bool time_exceeded() const {
    if (opts_.time_limit_s <= 0) return false;
    if ((iters_ & 0xff) != 0) return false;
    const auto dt = std::chrono::duration<double>(Clock::now() - start_).count();
    return dt > opts_.time_limit_s;
  }

  LpSolution finalize_solution(LpSolution& sol) {
    compute_basic_values();  // fresh factorization for clean duals
    if (numeric_trouble_) {
      sol.status = SolveStatus::NumericFailure;
      finish(sol);
      return sol;
    }
    std::vector<double> y(m_, 0.0), cb(m_, 0.0);
    for (int i = 0; i < m_; ++i) cb[i] = cost_of(basic_[i]);
    btran(cb, y);

    sol.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) sol.x[j] = x_[j];
    sol.row_dual.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) sol.row_dual[i] = y[i];
    sol.row_activity.assign(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for (std::int64_t k = p_.col_start[j]; k < p_.col_start[j + 1]; ++k)
        sol.row_activity[p_.row_index[k]] += p_.coef[k] * x_[j];
    }
    sol.reduced_cost.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      double d = p_.obj[j];
      for (std::int64_t k = p_.col_start[j]; k < p_.col_start[j + 1]; ++k)
        d -= p_.coef[k] * y[p_.row_index[k]];
      sol.reduced_cost[j] = d;
    }
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += p_.obj[j] * x_[j];
    sol.iterations = iters_;
    sol.refactorizations = refactors_;

    // Residual checks: primal, dual, complementarity, gap.
    double pres = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double act = sol.row_activity[i];
      switch (p_.sense[i]) {
        case RowSense::LE: pres = std::max(pres, act - p_.rhs[i]); break;
        case RowSense::GE: pres = std::max(pres, p_.rhs[i] - act); break;
        case RowSense::EQ: pres = std::max(pres, std::fabs(act - p_.rhs[i])); break;
      }
    }
    for (int j = 0; j < n_; ++j) {
      if (p_.col_lower[j] != -kInf) pres = std::max(pres, p_.col_lower[j] - x_[j]);
      if (p_.col_upper[j] != kInf) pres = std::max(pres, x_[j] - p_.col_upper[j]);
    }
    double dres = 0.0, comp = 0.0;
    for (int j = 0; j < n_; ++j) {
      const double d = sol.reduced_cost[j];
      switch (status_[j]) {
        case ColStatus::Basic: dres = std::max(dres, std::fabs(d)); break;
        case ColStatus::AtLower:
          if (!is_fixed(j)) dres = std::max(dres, -d);
          break;
        case ColStatus::AtUpper:
          if (!is_fixed(j)) dres = std::max(dres, d);
          break;
        case ColStatus::FreeAt: dres = std::max(dres, std::fabs(d)); break;
      }
    }
    for (int i = 0; i < m_; ++i) {
      const int lj = n_ + i;
      const double d = -y[i];
      if (status_[lj] == ColStatus::Basic) {
        dres = std::max(dres, std::fabs(d));
      } else if (!is_fixed(lj)) {
        if (status_[lj] == ColStatus::AtLower) dres = std::max(dres, -d);
        if (status_[lj] == ColStatus::AtUpper) dres = std::max(dres, d);
      }
      const double slack = p_.rhs[i] - sol.row_activity[i];
      comp = std::max(comp, std::fabs(y[i] * slack));
    }
    double dual_obj = 0.0;
    for (int i = 0; i < m_; ++i) dual_obj += y[i] * p_.rhs[i];
    for (int j = 0; j < n_; ++j) {
      const double d = sol.reduced_cost[j];
      if (status_[j] == ColStatus::AtLower && p_.col_lower[j] != -kInf)
        dual_obj += d * p_.col_lower[j];
      else if (status_[j] == ColStatus::AtUpper && p_.col_upper[j] != kInf)
        dual_obj += d * p_.col_upper[j];
      else if (is_fixed(j))
        dual_obj += d * p_.col_lower[j];
    }
    sol.max_primal_residual = std::max(0.0, pres);
    sol.max_dual_residual = std::max(0.0, dres);
    sol.max_compl_residual = comp;
    sol.rel_gap = std::fabs(sol.objective - dual_obj) / (1.0 + std::fabs(sol.objective));

    const double scale = std::max(1.0, rhs_norm_);
    if (opts_.self_check &&
        (sol.max_primal_residual > 50 * opts_.feas_tol * scale ||
         sol.max_dual_residual > 50 * opts_.opt_tol * scale ||
         sol.rel_gap > 1e-6)) {
      sol.status = SolveStatus::NumericFailure;
    } else {
      sol.status = SolveStatus::Optimal;
    }
    finish(sol);
    return sol;
  }

  void finish(LpSolution& sol) {
    sol.iterations = iters_;
    sol.refactorizations = refactors_;
    if (sol.status == SolveStatus::Optimal || sol.status == SolveStatus::IterLimit ||
        sol.status == SolveStatus::TimeLimit) {
      sol.basis.basic = basic_;
      sol.basis.status.assign(status_.begin(), status_.begin() + nl_);
      sol.basis.value.assign(nl_, 0.0);
      for (int j = 0; j < nl_; ++j) sol.basis.value[j] = x_[j];
      // Artificial columns must not leak into a reusable basis.
      for (int i = 0; i < m_; ++i)
        if (basic_[i] >= nl_) {
          sol.basis.basic.clear();
          sol.basis.status.clear();
          sol.basis.value.clear();
          break;
        }
    }
  }

  const LpProblem& p_;
  SolveOptions opts_;
  int n_ = 0, m_ = 0, nl_ = 0;
  std::vector<double> lo_, hi_;
  std::vector<int> basic_;
  std::vector<ColStatus> status_;
  std::vector<double> x_;
  std::vector<int> arti_rows_;
  std::vector<double> arti_sign_;
  detail::LuFactor lu_;
  std::vector<int> etas_r_;
  std::vector<std::int64_t> etas_ptr_;
  std::vector<int> etas_pos_;
  std::vector<double> etas_val_;
  std::vector<double> work_rows_, work_pos_, work_pos2_;
  std::vector<double> y_, tpos_;
  std::vector<unsigned char> wmark_, tmark_;
  std::vector<int> ttouch_;
  std::vector<std::pair<int, double>> rhs_buf_;
  std::vector<int> scratch_idx_;
  std::vector<double> scratch_val_;
  std::vector<std::int64_t> scratch_ptr_;
  double rhs_norm_ = 0.0;
  int price_cursor_ = 0;
  int price_window_divisor_ = 8;  // fraction of columns priced per pass
  bool phase1_ = false;
  bool must_refactor_ = true;
  bool numeric_trouble_ = false;
  int pivot_rejects_ = 0;
  int unbounded_rejects_ = 0;
  std::int64_t iters_ = 0;
  int refactors_ = 0;
  Clock::time_point start_;
};

inline LpSolution solve_lp(const LpProblem& p, const SolveOptions& opts = {},
                           const Basis* warm = nullptr) {
  SimplexSolver s(p, opts);
  return s.solve(warm);
}

}  // namespace essr::lp
