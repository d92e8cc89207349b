// scenario.hpp -- storm exposure model and sequential topology scenarios.
//
// A line is exposed in a period when the exposure model carries an entry for
// it; failures are cumulative over the event (no repair while it unfolds).
// Scenario sets come from exhaustive enumeration (small systems) or Monte
// Carlo sampling with one deterministic RNG stream per draw, so a sampled set
// is a prefix-stable function of (seed, draw index).
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "essr/grid.hpp"

namespace essr {

struct ExposureEntry {
  int line_id = 0;
  int period = 1;  // horizon index; the pre-event period t0 is index 0
  double probability = 0.0;
};

struct ExposureModel {
  std::vector<ExposureEntry> entries;

  std::vector<int> exposed_lines() const {
    std::set<int> s;
    for (const auto& e : entries) s.insert(e.line_id);
    return {s.begin(), s.end()};
  }
  // Periods (ascending) in which a line is exposed.
  std::vector<int> exposure_periods(int line_id) const {
    std::set<int> s;
    for (const auto& e : entries)
      if (e.line_id == line_id) s.insert(e.period);
    return {s.begin(), s.end()};
  }
  double probability(int line_id, int period) const {
    for (const auto& e : entries)
      if (e.line_id == line_id && e.period == period) return e.probability;
    return 0.0;
  }
  void validate(int num_periods) const {
    for (const auto& e : entries) {
      if (e.probability < 0.0 || e.probability > 1.0)
        throw std::invalid_argument("exposure probability outside [0,1]");
      if (e.period < 1 || e.period >= num_periods)
        throw std::invalid_argument("exposure period outside the event horizon");
    }
  }
};

struct FailureScenario {
  // Cumulative failed-line sets for periods 1..N-1 (sorted line ids).
  std::vector<std::vector<int>> failed_by_period;
  double weight = 0.0;

  std::string key() const {
    std::ostringstream os;
    for (const auto& s : failed_by_period) {
      os << '|';
      for (int id : s) os << id << ',';
    }
    return os.str();
  }
  bool failed_at(int line_id, int period) const {
    if (period < 1 || period > static_cast<int>(failed_by_period.size())) return false;
    const auto& s = failed_by_period[period - 1];
    return std::find(s.begin(), s.end(), line_id) != s.end();
  }
  int total_failures() const {
    return failed_by_period.empty() ? 0 : static_cast<int>(failed_by_period.back().size());
  }
};

struct ScenarioSet {
  std::vector<FailureScenario> scenarios;
  std::uint64_t seed = 0;
  std::int64_t draw_count = 0;

  int size() const { return static_cast<int>(scenarios.size()); }
};

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Orders scenarios the way the study tables list them: per period, smaller
// cumulative sets first, then lexicographically by line id.
inline bool scenario_before(const FailureScenario& a, const FailureScenario& b) {
  const std::size_t np = std::max(a.failed_by_period.size(), b.failed_by_period.size());
  for (std::size_t t = 0; t < np; ++t) {
    static const std::vector<int> kEmpty;
    const auto& sa = t < a.failed_by_period.size() ? a.failed_by_period[t] : kEmpty;
    const auto& sb = t < b.failed_by_period.size() ? b.failed_by_period[t] : kEmpty;
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return false;
}

inline void sort_and_check(ScenarioSet& set) {
  std::sort(set.scenarios.begin(), set.scenarios.end(), scenario_before);
  double total = 0.0;
  for (const auto& s : set.scenarios) total += s.weight;
  if (!set.scenarios.empty() && std::fabs(total - 1.0) > 1e-9)
    throw std::logic_error("scenario weights do not sum to 1");
}

}  // namespace detail

// Every cumulative failure sequence consistent with the exposure windows,
// weighted by its exact Bernoulli path probability.
inline ScenarioSet enumerate_scenarios(const ExposureModel& model, int num_periods,
                                       std::int64_t cap = 4096) {
  model.validate(num_periods);
  const std::vector<int> lines = model.exposed_lines();
  std::vector<std::vector<int>> windows;  // per line, exposure periods
  std::int64_t combos = 1;
  for (int id : lines) {
    windows.push_back(model.exposure_periods(id));
    combos *= static_cast<std::int64_t>(windows.back().size()) + 1;
    if (combos > cap)
      throw CapExceeded("scenario enumeration would exceed cap (" + std::to_string(cap) +
                        "); sample instead");
  }

  ScenarioSet out;
  out.draw_count = 0;
  std::vector<int> fail_period(lines.size(), 0);  // 0 = never, else period
  std::vector<int> choice(lines.size(), -1);      // -1 = never, else window index

  const int event_periods = num_periods - 1;
  std::function<void(std::size_t, double)> rec = [&](std::size_t li, double prob) {
    if (li == lines.size()) {
      FailureScenario s;
      s.failed_by_period.assign(event_periods, {});
      for (std::size_t k = 0; k < lines.size(); ++k) {
        if (fail_period[k] == 0) continue;
        for (int t = fail_period[k]; t <= event_periods; ++t)
          s.failed_by_period[t - 1].push_back(lines[k]);
      }
      for (auto& v : s.failed_by_period) std::sort(v.begin(), v.end());
      s.weight = prob;
      out.scenarios.push_back(std::move(s));
      return;
    }
    const auto& w = windows[li];
    // Survives every exposure.
    double survive = 1.0;
    for (int t : w) survive *= 1.0 - model.probability(lines[li], t);
    fail_period[li] = 0;
    rec(li + 1, prob * survive);
    // Fails at its j-th exposed period, having survived the earlier ones.
    double sofar = 1.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double p = model.probability(lines[li], w[j]);
      if (p > 0.0) {
        fail_period[li] = w[j];
        rec(li + 1, prob * sofar * p);
      }
      sofar *= 1.0 - p;
    }
    fail_period[li] = 0;
  };
  rec(0, 1.0);

  // Merge identical paths (possible when a probability is exactly 0 or 1).
  std::map<std::string, FailureScenario> uniq;
  for (auto& s : out.scenarios) {
    auto [it, fresh] = uniq.emplace(s.key(), s);
    if (!fresh) it->second.weight += s.weight;
  }
  out.scenarios.clear();
  for (auto& [k, s] : uniq)
    if (s.weight > 0.0) out.scenarios.push_back(std::move(s));
  detail::sort_and_check(out);
  return out;
}

// Per-draw stream seed (split from mt19937_64 seeding); documented so
// scenario files are reproducible across platforms.
inline std::uint64_t scenario_stream_seed(std::uint64_t seed, std::int64_t draw) {
  return detail::mix64(seed ^ detail::mix64(0x853c49e6748fea9bull + static_cast<std::uint64_t>(draw)));
}

// Monte Carlo sampling: each exposed line fails in an exposed period with its
// entry probability if it has not failed yet.  Draw d uses its own RNG stream
// derived from (seed, d), so the first N draws of a longer run reproduce a
// shorter run exactly.
inline ScenarioSet sample_scenarios(const ExposureModel& model, int num_periods,
                                    std::int64_t draws, std::uint64_t seed) {
  model.validate(num_periods);
  if (draws < 1) throw std::invalid_argument("sample_scenarios: draws must be >= 1");
  const std::vector<int> lines = model.exposed_lines();
  const int event_periods = num_periods - 1;

  // Entries in deterministic (period, line) order drive the u64 stream.
  std::vector<ExposureEntry> ordered = model.entries;
  std::sort(ordered.begin(), ordered.end(), [](const ExposureEntry& a, const ExposureEntry& b) {
    if (a.period != b.period) return a.period < b.period;
    return a.line_id < b.line_id;
  });

  std::map<std::string, std::pair<FailureScenario, std::int64_t>> uniq;
  for (std::int64_t d = 0; d < draws; ++d) {
    std::mt19937_64 eng(scenario_stream_seed(seed, d));
    std::set<int> failed;
    FailureScenario s;
    s.failed_by_period.assign(event_periods, {});
    for (const auto& e : ordered) {
      if (failed.count(e.line_id)) continue;
      const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
      if (u < e.probability) {
        failed.insert(e.line_id);
        for (int t = e.period; t <= event_periods; ++t)
          s.failed_by_period[t - 1].push_back(e.line_id);
      }
    }
    for (auto& v : s.failed_by_period) std::sort(v.begin(), v.end());
    auto [it, fresh] = uniq.emplace(s.key(), std::make_pair(s, 0));
    ++it->second.second;
  }

  ScenarioSet out;
  out.seed = seed;
  out.draw_count = draws;
  for (auto& [k, sc] : uniq) {
    sc.first.weight = static_cast<double>(sc.second) / static_cast<double>(draws);
    out.scenarios.push_back(std::move(sc.first));
  }
  detail::sort_and_check(out);
  return out;
}

// Known line states r over (exposed line, event period, scenario):
// 1 in service, 0 failed.  Lines outside the exposure set never fail and are
// not part of the tensor.
struct LineStateTensor {
  std::vector<int> exposed_lines;  // sorted line ids
  int event_periods = 0;           // periods t1..tN
  int scenario_count = 0;
  std::vector<unsigned char> state;  // [k][line][period]

  int line_slot(int line_id) const {
    for (std::size_t i = 0; i < exposed_lines.size(); ++i)
      if (exposed_lines[i] == line_id) return static_cast<int>(i);
    return -1;
  }
  // period is the horizon index (>= 1).
  unsigned char r(int scenario, int line_id, int period) const {
    const int slot = line_slot(line_id);
    if (slot < 0 || period < 1 || period > event_periods)
      throw std::out_of_range("LineStateTensor::r");
    return state[(static_cast<std::size_t>(scenario) * exposed_lines.size() + slot) *
                     event_periods +
                 (period - 1)];
  }
};

inline LineStateTensor line_state_tensor(const ScenarioSet& set, const NetworkCase& c,
                                         const ExposureModel& model) {
  LineStateTensor t;
  t.exposed_lines = model.exposed_lines();
  t.event_periods = c.num_periods() - 1;
  t.scenario_count = set.size();
  for (int id : t.exposed_lines)
    if (c.line_index(id) < 0)
      throw std::invalid_argument("line_state_tensor: unknown line " + std::to_string(id));
  for (const auto& s : set.scenarios)
    for (const auto& per : s.failed_by_period)
      for (int id : per)
        if (c.line_index(id) < 0)
          throw std::invalid_argument("line_state_tensor: unknown line " + std::to_string(id));
  t.state.assign(static_cast<std::size_t>(t.scenario_count) * t.exposed_lines.size() *
                     std::max(t.event_periods, 0),
                 1);
  for (int k = 0; k < t.scenario_count; ++k) {
    const auto& s = set.scenarios[k];
    for (int per = 1; per <= t.event_periods; ++per) {
      if (per > static_cast<int>(s.failed_by_period.size())) break;
      for (int id : s.failed_by_period[per - 1]) {
        const int slot = t.line_slot(id);
        if (slot < 0)
          throw std::invalid_argument("line_state_tensor: failed line " + std::to_string(id) +
                                      " is not in the exposure set");
        t.state[(static_cast<std::size_t>(k) * t.exposed_lines.size() + slot) * t.event_periods +
                (per - 1)] = 0;
      }
    }
  }
  return t;
}

// ---- JSON ------------------------------------------------------------------

inline nlohmann::json scenarios_to_json(const ScenarioSet& set,
                                        const std::vector<std::string>& horizon) {
  nlohmann::json j;
  j["seed"] = set.seed;
  j["draw_count"] = set.draw_count;
  j["scenarios"] = nlohmann::json::array();
  for (const auto& s : set.scenarios) {
    nlohmann::json js;
    js["weight"] = s.weight;
    js["failed_by_period"] = nlohmann::json::array();
    for (std::size_t t = 0; t < s.failed_by_period.size(); ++t) {
      nlohmann::json jp;
      jp["period"] = (t + 1 < horizon.size()) ? horizon[t + 1] : ("t" + std::to_string(t + 1));
      jp["failed"] = s.failed_by_period[t];
      js["failed_by_period"].push_back(jp);
    }
    j["scenarios"].push_back(js);
  }
  return j;
}

inline ScenarioSet scenarios_from_json(const nlohmann::json& j) {
  ScenarioSet set;
  set.seed = j.value("seed", 0ull);
  set.draw_count = j.value("draw_count", std::int64_t{0});
  for (const auto& js : j.at("scenarios")) {
    FailureScenario s;
    s.weight = js.at("weight").get<double>();
    for (const auto& jp : js.at("failed_by_period"))
      s.failed_by_period.push_back(jp.at("failed").get<std::vector<int>>());
    for (auto& v : s.failed_by_period) std::sort(v.begin(), v.end());
    set.scenarios.push_back(std::move(s));
  }
  return set;
}

inline nlohmann::json exposure_to_json(const ExposureModel& m) {
  nlohmann::json j;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : m.entries)
    j["entries"].push_back({{"line", e.line_id}, {"period", e.period}, {"p", e.probability}});
  return j;
}

inline ExposureModel exposure_from_json(const nlohmann::json& j) {
  ExposureModel m;
  for (const auto& je : j.at("entries"))
    m.entries.push_back(
        {je.at("line").get<int>(), je.at("period").get<int>(), je.at("p").get<double>()});
  return m;
}

// Documented exposure windows for the built-in systems.
//   seven_bus: line 1 (b1-b2) in t1; line 2 (b1-b4) in t1 and t2; line 3
//              (b1-b6) in t2.  Enumerating these windows yields the twelve
//              study scenarios.
//   ieee118:   ten consecutive corridor lines exposed in t1 and t2.
inline ExposureModel builtin_exposure(const std::string& name, double p = 0.05) {
  ExposureModel m;
  if (name == "seven_bus" || name == "table2") {
    m.entries = {{1, 1, p}, {2, 1, p}, {2, 2, p}, {3, 2, p}};
    return m;
  }
  if (name == "ieee118") {
    for (int line = 30; line < 40; ++line) {
      m.entries.push_back({line, 1, p});
      m.entries.push_back({line, 2, p});
    }
    return m;
  }
  throw std::invalid_argument("unknown exposure fixture '" + name + "'");
}

}  // namespace essr
