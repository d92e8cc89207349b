// case_json.hpp -- native JSON case schema (documented in the README).
#pragma once

#include <json.hpp>

#include "essr/grid.hpp"

namespace essr {

inline nlohmann::json case_to_json(const NetworkCase& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["base_mva"] = c.base_mva;
  j["horizon"] = c.horizon;
  j["buses"] = nlohmann::json::array();
  for (const Bus& b : c.buses) {
    j["buses"].push_back({{"id", b.id},
                          {"load", b.load_by_period},
                          {"angle_min", b.angle_min},
                          {"angle_max", b.angle_max},
                          {"reference", b.is_reference}});
  }
  j["lines"] = nlohmann::json::array();
  for (const Line& l : c.lines) {
    j["lines"].push_back({{"id", l.id},
                          {"from", l.from_bus},
                          {"to", l.to_bus},
                          {"susceptance", l.susceptance},
                          {"capacity", l.capacity}});
  }
  j["generators"] = nlohmann::json::array();
  for (const Generator& g : c.generators) {
    j["generators"].push_back({{"id", g.id},
                               {"bus", g.bus},
                               {"p_min", g.p_min},
                               {"p_max", g.p_max},
                               {"ramp_up", g.ramp_up},
                               {"ramp_down", g.ramp_down}});
  }
  return j;
}

inline NetworkCase case_from_json(const nlohmann::json& j) {
  NetworkCase c;
  c.name = j.value("name", std::string());
  c.base_mva = j.value("base_mva", 100.0);
  c.horizon = j.at("horizon").get<std::vector<std::string>>();
  for (const auto& jb : j.at("buses")) {
    Bus b;
    b.id = jb.at("id").get<int>();
    b.load_by_period = jb.at("load").get<std::vector<double>>();
    b.angle_min = jb.value("angle_min", -0.6);
    b.angle_max = jb.value("angle_max", 0.6);
    b.is_reference = jb.value("reference", false);
    c.buses.push_back(std::move(b));
  }
  for (const auto& jl : j.at("lines")) {
    Line l;
    l.id = jl.at("id").get<int>();
    l.from_bus = jl.at("from").get<int>();
    l.to_bus = jl.at("to").get<int>();
    l.susceptance = jl.at("susceptance").get<double>();
    l.capacity = jl.at("capacity").get<double>();
    c.lines.push_back(l);
  }
  for (const auto& jg : j.at("generators")) {
    Generator g;
    g.id = jg.at("id").get<int>();
    g.bus = jg.at("bus").get<int>();
    g.p_min = jg.at("p_min").get<double>();
    g.p_max = jg.at("p_max").get<double>();
    g.ramp_up = jg.at("ramp_up").get<double>();
    g.ramp_down = jg.at("ramp_down").get<double>();
    c.generators.push_back(g);
  }
  return c;
}

inline bool case_equal(const NetworkCase& a, const NetworkCase& b) {
  if (a.base_mva != b.base_mva || a.horizon != b.horizon) return false;
  if (a.buses.size() != b.buses.size() || a.lines.size() != b.lines.size() ||
      a.generators.size() != b.generators.size())
    return false;
  for (std::size_t i = 0; i < a.buses.size(); ++i) {
    const Bus &x = a.buses[i], &y = b.buses[i];
    if (x.id != y.id || x.load_by_period != y.load_by_period || x.angle_min != y.angle_min ||
        x.angle_max != y.angle_max || x.is_reference != y.is_reference)
      return false;
  }
  for (std::size_t i = 0; i < a.lines.size(); ++i) {
    const Line &x = a.lines[i], &y = b.lines[i];
    if (x.id != y.id || x.from_bus != y.from_bus || x.to_bus != y.to_bus ||
        x.susceptance != y.susceptance || x.capacity != y.capacity)
      return false;
  }
  for (std::size_t i = 0; i < a.generators.size(); ++i) {
    const Generator &x = a.generators[i], &y = b.generators[i];
    if (x.id != y.id || x.bus != y.bus || x.p_min != y.p_min || x.p_max != y.p_max ||
        x.ramp_up != y.ramp_up || x.ramp_down != y.ramp_down)
      return false;
  }
  return true;
}

}  // namespace essr
