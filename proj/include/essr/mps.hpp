// mps.hpp -- fixed-format MPS writer and reader for LP/MILP interchange.
//
// The writer emits ROWS/COLUMNS/RHS/BOUNDS with INTORG/INTEND markers; names
// longer than eight characters are renamed deterministically and reported in
// a sidecar map.  The reader accepts the writer's output (whitespace-split
// fields) so exported problems can be re-imported and checked structurally.
#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "essr/lp.hpp"

namespace essr::lp {

struct MpsExport {
  std::string text;
  // new name -> original name, only for entries that had to be renamed
  std::vector<std::pair<std::string, std::string>> renamed;
};

namespace detail {

inline std::string fmt_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> mps_names(const std::vector<std::string>& given,
                                          char prefix, std::size_t count,
                                          std::vector<std::pair<std::string, std::string>>* renamed) {
  std::vector<std::string> out(count);
  std::set<std::string> used;
  bool rename_all = false;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string& g = i < given.size() ? given[i] : std::string();
    if (g.empty() || g.size() > 8 || g.find(' ') != std::string::npos || used.count(g)) {
      rename_all = rename_all || !g.empty();
      out[i].clear();
    } else {
      out[i] = g;
      used.insert(g);
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!out[i].empty()) continue;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%07lu", prefix, static_cast<unsigned long>(i + 1));
    out[i] = buf;
    if (renamed && i < given.size() && !given[i].empty())
      renamed->emplace_back(out[i], given[i]);
  }
  (void)rename_all;
  return out;
}

}  // namespace detail

inline MpsExport export_mps(const LpProblem& p, const std::vector<int>& integer_cols,
                            const std::string& name = "ESSR") {
  if (!p.finalized()) throw std::logic_error("export_mps: problem not finalized");
  MpsExport ex;
  std::vector<std::string> rn = detail::mps_names(p.row_name, 'R', p.num_rows(), &ex.renamed);
  std::vector<std::string> cn = detail::mps_names(p.col_name, 'C', p.num_cols(), &ex.renamed);
  std::vector<unsigned char> is_int(p.num_cols(), 0);
  for (int j : integer_cols) is_int[j] = 1;

  std::ostringstream os;
  os << "NAME          " << name << "\n";
  os << "ROWS\n";
  os << " N  COST\n";
  for (int i = 0; i < p.num_rows(); ++i) {
    char s = static_cast<char>(p.sense[i]);
    os << " " << s << "  " << rn[i] << "\n";
  }
  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  char mbuf[24];
  for (int j = 0; j < p.num_cols(); ++j) {
    if (is_int[j] && !in_int) {
      std::snprintf(mbuf, sizeof(mbuf), "M%07d", ++marker);
      os << "    " << mbuf << "  'MARKER'                 'INTORG'\n";
      in_int = true;
    } else if (!is_int[j] && in_int) {
      std::snprintf(mbuf, sizeof(mbuf), "M%07d", ++marker);
      os << "    " << mbuf << "  'MARKER'                 'INTEND'\n";
      in_int = false;
    }
    if (p.obj[j] != 0.0)
      os << "    " << cn[j] << "  COST  " << detail::fmt_value(p.obj[j]) << "\n";
    for (std::int64_t k = p.col_start[j]; k < p.col_start[j + 1]; ++k)
      os << "    " << cn[j] << "  " << rn[p.row_index[k]] << "  "
         << detail::fmt_value(p.coef[k]) << "\n";
  }
  if (in_int) {
    std::snprintf(mbuf, sizeof(mbuf), "M%07d", ++marker);
    os << "    " << mbuf << "  'MARKER'                 'INTEND'\n";
  }
  os << "RHS\n";
  for (int i = 0; i < p.num_rows(); ++i)
    if (p.rhs[i] != 0.0)
      os << "    RHS  " << rn[i] << "  " << detail::fmt_value(p.rhs[i]) << "\n";
  os << "BOUNDS\n";
  for (int j = 0; j < p.num_cols(); ++j) {
    const double lo = p.col_lower[j], hi = p.col_upper[j];
    if (lo == 0.0 && hi == kInf) continue;
    if (lo == hi) {
      os << " FX BND  " << cn[j] << "  " << detail::fmt_value(lo) << "\n";
      continue;
    }
    if (lo == -kInf && hi == kInf) {
      os << " FR BND  " << cn[j] << "\n";
      continue;
    }
    if (lo == -kInf)
      os << " MI BND  " << cn[j] << "\n";
    else if (lo != 0.0)
      os << " LO BND  " << cn[j] << "  " << detail::fmt_value(lo) << "\n";
    if (hi != kInf) os << " UP BND  " << cn[j] << "  " << detail::fmt_value(hi) << "\n";
  }
  os << "ENDATA\n";
  ex.text = os.str();
  return ex;
}

struct MpsImport {
  LpProblem problem;
  std::vector<int> integer_cols;
  std::string name;
};

inline MpsImport import_mps(const std::string& text) {
  MpsImport im;
  std::istringstream is(text);
  std::string line;
  enum Section { None, Rows, Columns, Rhs, Ranges, Bounds, Done } sec = None;
  std::map<std::string, int> row_of, col_of;
  std::string obj_row;
  bool in_int = false;
  std::vector<std::pair<double, double>> pending_bounds;

  auto get_col = [&](const std::string& cname) -> int {
    auto it = col_of.find(cname);
    if (it != col_of.end()) return it->second;
    const int j = im.problem.add_col(0.0, kInf, 0.0, cname);
    col_of.emplace(cname, j);
    if (in_int) im.integer_cols.push_back(j);
    return j;
  };

  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ls(line);
    std::vector<std::string> f;
    std::string tok;
    while (ls >> tok) f.push_back(tok);
    if (f.empty()) continue;
    if (line[0] != ' ') {
      const std::string& s = f[0];
      if (s == "NAME") {
        if (f.size() > 1) im.name = f[1];
      } else if (s == "ROWS")
        sec = Rows;
      else if (s == "COLUMNS")
        sec = Columns;
      else if (s == "RHS")
        sec = Rhs;
      else if (s == "RANGES")
        sec = Ranges;
      else if (s == "BOUNDS")
        sec = Bounds;
      else if (s == "ENDATA")
        sec = Done;
      else
        throw std::runtime_error("import_mps: unknown section " + s);
      continue;
    }
    switch (sec) {
      case Rows: {
        if (f.size() < 2) throw std::runtime_error("import_mps: bad ROWS line");
        const std::string& t = f[0];
        if (t == "N") {
          if (obj_row.empty()) obj_row = f[1];
        } else {
          RowSense s;
          if (t == "L")
            s = RowSense::LE;
          else if (t == "G")
            s = RowSense::GE;
          else if (t == "E")
            s = RowSense::EQ;
          else
            throw std::runtime_error("import_mps: bad row sense " + t);
          row_of.emplace(f[1], im.problem.add_row(s, 0.0, f[1]));
        }
        break;
      }
      case Columns: {
        if (f.size() >= 3 && f[1] == "'MARKER'") {
          if (f[2] == "'INTORG'")
            in_int = true;
          else if (f[2] == "'INTEND'")
            in_int = false;
          break;
        }
        if (f.size() < 3) throw std::runtime_error("import_mps: bad COLUMNS line");
        const int j = get_col(f[0]);
        for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
          const std::string& rname = f[k];
          const double v = std::stod(f[k + 1]);
          if (rname == obj_row) {
            im.problem.obj[j] = v;
          } else {
            auto it = row_of.find(rname);
            if (it == row_of.end()) throw std::runtime_error("import_mps: unknown row " + rname);
            im.problem.add_entry(it->second, j, v);
          }
        }
        break;
      }
      case Rhs: {
        if (f.size() < 3) throw std::runtime_error("import_mps: bad RHS line");
        for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
          auto it = row_of.find(f[k]);
          if (it == row_of.end()) throw std::runtime_error("import_mps: unknown row " + f[k]);
          im.problem.rhs[it->second] = std::stod(f[k + 1]);
        }
        break;
      }
      case Ranges:
        throw std::runtime_error("import_mps: RANGES not supported");
      case Bounds: {
        if (f.size() < 3) throw std::runtime_error("import_mps: bad BOUNDS line");
        const std::string& t = f[0];
        const int j = get_col(f[2]);
        const double v = f.size() > 3 ? std::stod(f[3]) : 0.0;
        if (t == "UP")
          im.problem.col_upper[j] = v;
        else if (t == "LO")
          im.problem.col_lower[j] = v;
        else if (t == "FX") {
          im.problem.col_lower[j] = v;
          im.problem.col_upper[j] = v;
        } else if (t == "FR") {
          im.problem.col_lower[j] = -kInf;
          im.problem.col_upper[j] = kInf;
        } else if (t == "MI")
          im.problem.col_lower[j] = -kInf;
        else if (t == "PL")
          im.problem.col_upper[j] = kInf;
        else if (t == "BV") {
          im.problem.col_lower[j] = 0.0;
          im.problem.col_upper[j] = 1.0;
        } else
          throw std::runtime_error("import_mps: bound type " + t);
        break;
      }
      case None:
      case Done:
        break;
    }
  }
  (void)pending_bounds;
  im.problem.finalize();
  return im;
}

}  // namespace essr::lp
