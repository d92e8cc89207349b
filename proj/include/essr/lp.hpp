// lp.hpp -- problem and solution containers for the built-in LP/MILP engine.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace essr::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : char { LE = 'L', GE = 'G', EQ = 'E' };

enum class SolveStatus {
  Optimal,
  Infeasible,
  Unbounded,
  IterLimit,
  TimeLimit,
  NumericFailure,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterLimit: return "iter_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::NumericFailure: return "numeric_failure";
  }
  return "unknown";
}

// Sparse minimization problem, column-major.  Rows may be LE/GE/EQ; columns
// carry bounds (infinite allowed).  Build with add_col/add_row/add_entry, then
// finalize() once; bounds and rhs stay mutable afterwards so warm-started
// re-solves can tweak them in place.
struct LpProblem {
  std::vector<double> obj;
  std::vector<double> col_lower, col_upper;
  std::vector<RowSense> sense;
  std::vector<double> rhs;
  std::vector<std::string> col_name, row_name;

  // CSC storage, valid after finalize().
  std::vector<std::int64_t> col_start;
  std::vector<int> row_index;
  std::vector<double> coef;

  int num_cols() const { return static_cast<int>(obj.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }
  std::int64_t num_nonzeros() const { return static_cast<std::int64_t>(coef.size()); }
  bool finalized() const { return finalized_; }

  int add_col(double lo, double hi, double cost, std::string name = {}) {
    if (finalized_) throw std::logic_error("LpProblem: add_col after finalize");
    obj.push_back(cost);
    col_lower.push_back(lo);
    col_upper.push_back(hi);
    col_name.push_back(std::move(name));
    return num_cols() - 1;
  }

  int add_row(RowSense s, double b, std::string name = {}) {
    if (finalized_) throw std::logic_error("LpProblem: add_row after finalize");
    sense.push_back(s);
    rhs.push_back(b);
    row_name.push_back(std::move(name));
    return num_rows() - 1;
  }

  void add_entry(int row, int col, double v) {
    if (finalized_) throw std::logic_error("LpProblem: add_entry after finalize");
    if (v == 0.0) return;
    trip_row_.push_back(row);
    trip_col_.push_back(col);
    trip_val_.push_back(v);
  }

  // Moves CSC storage back into triplet form so rows/columns can be appended.
  void unfinalize() {
    if (!finalized_) return;
    for (int j = 0; j < num_cols(); ++j)
      for (std::int64_t k = col_start[j]; k < col_start[j + 1]; ++k) {
        trip_row_.push_back(row_index[k]);
        trip_col_.push_back(j);
        trip_val_.push_back(coef[k]);
      }
    col_start.clear();
    row_index.clear();
    coef.clear();
    finalized_ = false;
  }

  // Sorts triplets into CSC, summing duplicates.  Throws on malformed input.
  void finalize() {
    if (finalized_) return;
    const int n = num_cols(), m = num_rows();
    for (std::size_t k = 0; k < trip_row_.size(); ++k) {
      if (trip_row_[k] < 0 || trip_row_[k] >= m || trip_col_[k] < 0 || trip_col_[k] >= n)
        throw std::out_of_range("LpProblem: entry index out of range");
      if (!std::isfinite(trip_val_[k]))
        throw std::invalid_argument("LpProblem: non-finite coefficient");
    }
    std::vector<std::int64_t> count(static_cast<std::size_t>(n) + 1, 0);
    for (int c : trip_col_) ++count[static_cast<std::size_t>(c) + 1];
    col_start.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int j = 0; j < n; ++j) col_start[j + 1] = col_start[j] + count[j + 1];
    row_index.assign(trip_row_.size(), 0);
    coef.assign(trip_val_.size(), 0.0);
    std::vector<std::int64_t> next(col_start.begin(), col_start.end() - 1);
    for (std::size_t k = 0; k < trip_row_.size(); ++k) {
      const std::int64_t p = next[trip_col_[k]]++;
      row_index[p] = trip_row_[k];
      coef[p] = trip_val_[k];
    }
    // Sort rows within each column and merge duplicates.
    std::vector<std::int64_t> ns;
    ns.reserve(static_cast<std::size_t>(n) + 1);
    std::int64_t w = 0;
    std::vector<std::pair<int, double>> buf;
    std::vector<std::int64_t> new_start(static_cast<std::size_t>(n) + 1, 0);
    for (int j = 0; j < n; ++j) {
      buf.clear();
      for (std::int64_t p = col_start[j]; p < col_start[j + 1]; ++p)
        buf.emplace_back(row_index[p], coef[p]);
      std::sort(buf.begin(), buf.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      new_start[j] = w;
      for (std::size_t k = 0; k < buf.size(); ++k) {
        if (w > new_start[j] && row_index[w - 1] == buf[k].first)
          coef[w - 1] += buf[k].second;
        else {
          row_index[w] = buf[k].first;
          coef[w] = buf[k].second;
          ++w;
        }
      }
    }
    new_start[n] = w;
    col_start = std::move(new_start);
    row_index.resize(w);
    coef.resize(w);
    trip_row_.clear();
    trip_col_.clear();
    trip_val_.clear();
    trip_row_.shrink_to_fit();
    trip_col_.shrink_to_fit();
    trip_val_.shrink_to_fit();
    finalized_ = true;
  }

 private:
  std::vector<int> trip_row_, trip_col_;
  std::vector<double> trip_val_;
  bool finalized_ = false;
};

enum class ColStatus : unsigned char { Basic, AtLower, AtUpper, FreeAt };

// Basis snapshot for warm starts.  Covers structural columns plus one logical
// per row (indices num_cols .. num_cols+num_rows-1).
struct Basis {
  std::vector<int> basic;
  std::vector<ColStatus> status;
  std::vector<double> value;  // nonbasic resting values (FreeAt and bounds)
  bool empty() const { return basic.empty(); }
};

struct SolveOptions {
  // Optional starting values for structural columns: free columns rest at
  // the given value, bounded ones at their nearest bound; the crash basis
  // then absorbs row residuals through slack singletons.
  std::vector<double> start_values;
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  double pivot_tol = 1e-9;
  std::int64_t iter_limit = -1;  // -1: scaled default
  double time_limit_s = -1.0;    // -1: none
  int refactor_interval = 96;
  int stall_limit = 5000;  // consecutive degenerate pivots before Bland's rule
  std::ostream* log = nullptr;
  std::int64_t log_every = 10000;
  bool self_check = true;
};

struct LpSolution {
  SolveStatus status = SolveStatus::NumericFailure;
  double objective = 0.0;
  std::vector<double> x;             // structural columns
  std::vector<double> row_activity;  // A x
  std::vector<double> row_dual;      // shadow prices d(obj)/d(rhs)
  std::vector<double> reduced_cost;  // structural columns
  std::int64_t iterations = 0;
  int refactorizations = 0;
  double max_primal_residual = 0.0;
  double max_dual_residual = 0.0;
  double max_compl_residual = 0.0;
  double rel_gap = 0.0;
  Basis basis;
};

struct MilpOptions {
  SolveOptions lp;
  double integrality_tol = 1e-6;
  double gap_abs = 1e-9;
  std::int64_t node_limit = 2'000'000;
  double time_limit_s = -1.0;
  std::ostream* log = nullptr;
  std::int64_t log_every = 1000;
  // Optional feasible point used as the initial incumbent (checked first).
  std::vector<double> initial_solution;
  // Optional per-column branching priority; higher branches first.
  std::vector<int> branch_priority;
};

enum class MilpStatus { Optimal, Infeasible, LimitReached };

inline const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "optimal";
    case MilpStatus::Infeasible: return "infeasible";
    case MilpStatus::LimitReached: return "limit_reached";
  }
  return "unknown";
}

struct MilpSolution {
  MilpStatus status = MilpStatus::LimitReached;
  bool has_incumbent = false;
  double objective = 0.0;   // incumbent objective (minimization)
  double best_bound = -kInf;
  std::vector<double> x;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
};

}  // namespace essr::lp
