// runio.hpp -- run manifests and file helpers shared by the CLI.
#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "essr/case_json.hpp"
#include "essr/matpower.hpp"
#include "essr/version.hpp"

namespace essr {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// Loads a case from a fixture name, a .m MATPOWER file, or the native JSON
// schema (by extension).
inline NetworkCase load_case(const std::string& spec) {
  if (spec == "seven_bus" || spec == "ieee118") return builtin_case(spec);
  const std::string text = read_file(spec);
  if (spec.size() > 2 && spec.substr(spec.size() - 2) == ".m") return import_matpower(text);
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json")
    return case_from_json(nlohmann::json::parse(text));
  // Fall back on content sniffing.
  if (text.find("mpc.") != std::string::npos) return import_matpower(text);
  return case_from_json(nlohmann::json::parse(text));
}

struct RunManifest {
  std::vector<std::string> argv;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  bool seed_used = false;
  double wall_time_s = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool"] = "essr";
    j["version"] = ESSR_VERSION;
    j["argv"] = argv;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    if (seed_used) j["seed"] = seed;
    j["wall_time_s"] = wall_time_s;
    return j;
  }
};

}  // namespace essr
