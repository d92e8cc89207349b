// essr -- resilience analysis front end.
//
// Subcommands: case validate, scen gen, feas check, worst solve,
// region sweep, export mps.  Every run writes its outputs plus a manifest
// (argv, inputs, seed, version, wall time) into --out.  Exit codes: 0 clean,
// 1 domain findings (violations found or positive worst-case shed), 2 usage
// error, 3 solver failure.
#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "essr/kkt.hpp"
#include "essr/mps.hpp"
#include "essr/region.hpp"
#include "essr/runio.hpp"
#include "essr/scenario.hpp"
#include "essr/version.hpp"

namespace {

using namespace essr;

constexpr int kExitOk = 0;
constexpr int kExitFinding = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;

struct CommonArgs {
  std::string case_spec;
  std::string out_dir = ".";
  double ramp = -1.0;
  std::vector<double> t0;
};

NetworkCase resolve_case(const CommonArgs& a, RunManifest& man) {
  NetworkCase c = load_case(a.case_spec);
  if (a.case_spec != "seven_bus" && a.case_spec != "ieee118") man.inputs.push_back(a.case_spec);
  if (a.ramp > 0) c.set_uniform_ramp(a.ramp);
  return c;
}

struct ScenArgs {
  std::string scen_file;   // scenario JSON file, or the literal "table2"
  std::string exposure;    // exposure model JSON file
  std::int64_t draws = 0;  // Monte Carlo draw count (0 = enumerate)
  std::uint64_t seed = 1;
  double p = 0.05;
};

ExposureModel resolve_exposure(const ScenArgs& s, const NetworkCase& c, RunManifest& man) {
  if (!s.exposure.empty()) {
    man.inputs.push_back(s.exposure);
    return exposure_from_json(nlohmann::json::parse(read_file(s.exposure)));
  }
  if (s.scen_file == "table2" || c.name == "seven_bus") return builtin_exposure("seven_bus", s.p);
  if (c.name == "ieee118") return builtin_exposure("ieee118", s.p);
  throw CLI::ValidationError("need --exposure (or a fixture with built-in windows)");
}

ScenarioSet resolve_scenarios(const ScenArgs& s, const NetworkCase& c, const ExposureModel& m,
                              RunManifest& man) {
  if (!s.scen_file.empty() && s.scen_file != "table2") {
    man.inputs.push_back(s.scen_file);
    return scenarios_from_json(nlohmann::json::parse(read_file(s.scen_file)));
  }
  if (s.draws > 0) {
    man.seed = s.seed;
    man.seed_used = true;
    return sample_scenarios(m, c.num_periods(), s.draws, s.seed);
  }
  return enumerate_scenarios(m, c.num_periods());
}

void add_common(CLI::App* cmd, CommonArgs& a, bool with_t0 = true) {
  cmd->add_option("--fixture,--case", a.case_spec,
                  "fixture name (seven_bus, ieee118) or case file (.m / .json)")
      ->required();
  cmd->add_option("--out", a.out_dir, "output directory");
  cmd->add_option("--ramp", a.ramp, "override every generator's ramp limit (p.u.)");
  if (with_t0)
    cmd->add_option("--t0", a.t0, "pin the t0 dispatch (one value per generator)")
        ->delimiter(',');
}

void add_scen(CLI::App* cmd, ScenArgs& s) {
  cmd->add_option("--scen", s.scen_file, "scenario set JSON (or the literal 'table2')");
  cmd->add_option("--exposure", s.exposure, "exposure model JSON");
  cmd->add_option("--draws", s.draws, "Monte Carlo draws (omit to enumerate)");
  cmd->add_option("--seed", s.seed, "sampling seed");
  cmd->add_option("--p", s.p, "failure probability for built-in exposure windows");
}

void finish_manifest(RunManifest& man, const CommonArgs& a,
                     std::chrono::steady_clock::time_point t0) {
  man.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string path = a.out_dir + "/manifest.json";
  write_file(path, man.to_json().dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"extended steady-state security region toolkit"};
  app.set_version_flag("--version", ESSR_VERSION);
  app.require_subcommand(1);

  RunManifest man;
  for (int i = 0; i < argc; ++i) man.argv.push_back(argv[i]);
  const auto t_start = std::chrono::steady_clock::now();
  int exit_code = kExitOk;

  // ---- case validate --------------------------------------------------------
  auto* case_cmd = app.add_subcommand("case", "network case utilities");
  case_cmd->require_subcommand(1);
  auto* validate = case_cmd->add_subcommand("validate", "check case invariants");
  CommonArgs va;
  add_common(validate, va, false);
  validate->callback([&] {
    NetworkCase c = resolve_case(va, man);
    const ValidationReport rep = validate_case(c);
    nlohmann::json j;
    j["case"] = c.name.empty() ? va.case_spec : c.name;
    j["buses"] = c.buses.size();
    j["lines"] = c.lines.size();
    j["generators"] = c.generators.size();
    j["violations"] = nlohmann::json::array();
    for (const auto& v : rep.violations) j["violations"].push_back({{"code", v.code}, {"message", v.message}});
    write_file(va.out_dir + "/validation.json", j.dump(2) + "\n");
    man.outputs.push_back("validation.json");
    for (const auto& v : rep.violations) std::cerr << v.code << ": " << v.message << "\n";
    std::cout << (rep.ok() ? "case is valid" : "case has findings") << " ("
              << rep.violations.size() << " violation(s))\n";
    finish_manifest(man, va, t_start);
    if (!rep.ok()) exit_code = kExitFinding;
  });

  // ---- scen gen --------------------------------------------------------------
  auto* scen_cmd = app.add_subcommand("scen", "scenario utilities");
  scen_cmd->require_subcommand(1);
  auto* gen = scen_cmd->add_subcommand("gen", "enumerate or sample failure scenarios");
  CommonArgs ga;
  ScenArgs gs;
  add_common(gen, ga, false);
  add_scen(gen, gs);
  gen->callback([&] {
    NetworkCase c = resolve_case(ga, man);
    const ExposureModel m = resolve_exposure(gs, c, man);
    const ScenarioSet set = resolve_scenarios(gs, c, m, man);
    write_file(ga.out_dir + "/scenarios.json",
               scenarios_to_json(set, c.horizon).dump(2) + "\n");
    man.outputs.push_back("scenarios.json");
    std::cout << "scenarios: " << set.size() << " (draws " << set.draw_count << ")\n";
    finish_manifest(man, ga, t_start);
  });

  // ---- feas check -------------------------------------------------------------
  auto* feas_cmd = app.add_subcommand("feas", "feasibility certificates");
  feas_cmd->require_subcommand(1);
  auto* check = feas_cmd->add_subcommand("check", "slack feasibility of one scenario");
  CommonArgs fa;
  ScenArgs fs;
  int scenario_index = 0;
  add_common(check, fa);
  add_scen(check, fs);
  check->add_option("--scenario-index", scenario_index, "scenario to certify (default 0)");
  check->callback([&] {
    NetworkCase c = resolve_case(fa, man);
    const ExposureModel m = resolve_exposure(fs, c, man);
    const ScenarioSet set = resolve_scenarios(fs, c, m, man);
    if (scenario_index < 0 || scenario_index >= set.size())
      throw CLI::ValidationError("--scenario-index out of range");
    GridSystem gsys = build_essr(c, set.scenarios[scenario_index]);
    if (!fa.t0.empty()) gsys.pin_t0(fa.t0);
    const FeasibilityCertificate cert = feasibility_value(augment_slacks(gsys.sys));
    if (cert.status != lp::SolveStatus::Optimal) {
      std::cerr << "solver: " << lp::to_string(cert.status) << "\n";
      exit_code = kExitSolver;
      return;
    }
    nlohmann::json j;
    j["value"] = cert.value;
    j["feasible"] = cert.feasible;
    j["scenario_index"] = scenario_index;
    j["shed"] = nlohmann::json::array();
    for (const auto& [key, amount] : cert.shed)
      j["shed"].push_back({{"bus", c.buses[key.first].id},
                           {"period", c.horizon[key.second]},
                           {"amount", amount}});
    j["violations"] = nlohmann::json::array();
    for (const auto& v : cert.violations)
      j["violations"].push_back({{"row", to_string(v.tag)}, {"amount", v.amount}});
    write_file(fa.out_dir + "/feasibility.json", j.dump(2) + "\n");
    man.outputs.push_back("feasibility.json");
    std::cout << "f = " << cert.value << (cert.feasible ? " (feasible)" : " (infeasible)")
              << "\n";
    finish_manifest(man, fa, t_start);
    if (!cert.feasible) exit_code = kExitFinding;
  });

  // ---- worst solve -------------------------------------------------------------
  auto* worst_cmd = app.add_subcommand("worst", "worst-case analysis");
  worst_cmd->require_subcommand(1);
  auto* solve = worst_cmd->add_subcommand("solve", "max-min shed over the scenario set");
  CommonArgs wa;
  ScenArgs ws;
  bool use_oracle = false;
  bool skip_islanded = false;
  double time_limit = 300.0;
  add_common(solve, wa);
  add_scen(solve, ws);
  solve->add_flag("--oracle", use_oracle, "per-scenario enumeration instead of the MILP");
  solve->add_flag("--skip-islanded", skip_islanded,
                  "set aside scenarios that island load from all generation");
  solve->add_option("--time-limit", time_limit, "MILP time limit in seconds");
  solve->callback([&] {
    NetworkCase c = resolve_case(wa, man);
    const ExposureModel m = resolve_exposure(ws, c, man);
    ScenarioSet set = resolve_scenarios(ws, c, m, man);
    if (skip_islanded) {
      const std::vector<bool> island = islanding_flags(c, set);
      ScenarioSet keep;
      keep.seed = set.seed;
      keep.draw_count = set.draw_count;
      for (int k = 0; k < set.size(); ++k)
        if (!island[k]) keep.scenarios.push_back(set.scenarios[k]);
      set = keep;
    }
    const std::vector<double>* pin = wa.t0.empty() ? nullptr : &wa.t0;
    WorstCaseReport rep;
    try {
      if (use_oracle) {
        rep = enumerate_worst_case(c, set, pin);
      } else {
        SingleLevelMilp milp = assemble_single_level(c, m, set, pin);
        WorstCaseOptions opts;
        opts.time_limit_s = time_limit;
        rep = solve_worst_case(milp, opts);
      }
    } catch (const std::exception& e) {
      std::cerr << "solver failure: " << e.what() << "\n";
      exit_code = kExitSolver;
      return;
    }
    write_file(wa.out_dir + "/worst_case.json", report_to_json(rep, c).dump(2) + "\n");
    man.outputs.push_back("worst_case.json");
    std::cout << "F = " << rep.value << " (scenario " << rep.selected_scenario + 1 << " of "
              << set.size() << (rep.complete ? "" : ", incomplete") << ")\n";
    finish_manifest(man, wa, t_start);
    if (!rep.complete)
      exit_code = kExitSolver;
    else if (rep.value > 1e-6)
      exit_code = kExitFinding;
  });

  // ---- region sweep --------------------------------------------------------------
  auto* region_cmd = app.add_subcommand("region", "dispatch region analysis");
  region_cmd->require_subcommand(1);
  auto* sweep = region_cmd->add_subcommand("sweep", "grid sweep driven by a config file");
  std::string config_path;
  std::string sweep_out;
  sweep->add_option("--config", config_path, "sweep config JSON")->required();
  sweep->add_option("--out", sweep_out, "output directory (overrides config)");
  sweep->callback([&] {
    man.inputs.push_back(config_path);
    const nlohmann::json cfg = nlohmann::json::parse(read_file(config_path));
    SweepSpec spec;
    CommonArgs ra;
    ra.case_spec = cfg.at("case").get<std::string>();
    ra.out_dir = sweep_out.empty() ? cfg.value("out_dir", std::string(".")) : sweep_out;
    spec.network = load_case(ra.case_spec);
    if (cfg.contains("ramp")) spec.ramp_override = cfg["ramp"].get<double>();

    const std::string source = cfg.value("scenario_source", std::string());
    const bool has_file = cfg.contains("scenario_file");
    if (source.empty() && !has_file)
      throw CLI::ValidationError("config: missing scenario source (scenario_source"
                                 " = enumerate|sample, or scenario_file)");
    if (!source.empty() && has_file)
      throw CLI::ValidationError("config: exactly one scenario source allowed");
    if (cfg.contains("exposure_file")) {
      man.inputs.push_back(cfg["exposure_file"].get<std::string>());
      spec.exposure =
          exposure_from_json(nlohmann::json::parse(read_file(cfg["exposure_file"].get<std::string>())));
    } else {
      spec.exposure = builtin_exposure(spec.network.name, cfg.value("p", 0.05));
    }
    if (has_file) {
      man.inputs.push_back(cfg["scenario_file"].get<std::string>());
      spec.scenarios = scenarios_from_json(
          nlohmann::json::parse(read_file(cfg["scenario_file"].get<std::string>())));
    } else if (source == "enumerate") {
      spec.scenarios = enumerate_scenarios(spec.exposure, spec.network.num_periods());
    } else if (source == "sample") {
      man.seed = cfg.value("seed", 1ull);
      man.seed_used = true;
      spec.scenarios = sample_scenarios(spec.exposure, spec.network.num_periods(),
                                        cfg.value("draws", std::int64_t{1000}), man.seed);
    } else {
      throw CLI::ValidationError("config: scenario_source must be enumerate or sample");
    }

    spec.mode = cfg.value("mode", std::string("recourse")) == "shared" ? CouplingMode::Shared
                                                                       : CouplingMode::Recourse;
    spec.skip_islanding = cfg.value("skip_islanding", true);
    spec.exact_shed = cfg.value("exact_shed", true);
    for (const auto& ja : cfg.at("axes")) {
      SweepAxis ax;
      ax.gen_index = ja.at("gen").get<int>();
      ax.min = ja.at("min").get<double>();
      ax.max = ja.at("max").get<double>();
      ax.step = ja.value("step", 0.02);
      spec.axes.push_back(ax);
    }
    if (cfg.contains("capacity_override"))
      for (const auto& [key, val] : cfg["capacity_override"].items())
        spec.capacity_override[std::stoi(key)] = val.get<double>();

    const RegionGrid grid = sweep_region(spec);
    write_file(ra.out_dir + "/region.csv", region_to_csv(grid, spec.network));
    man.outputs.push_back("region.csv");
    if (grid.axes.size() == 2) {
      write_file(ra.out_dir + "/region_matrix.dat", region_to_gnuplot(grid));
      man.outputs.push_back("region_matrix.dat");
    }
    std::cout << "cells " << grid.cells.size() << ", feasible " << grid.cells_feasible << "\n";
    finish_manifest(man, ra, t_start);
  });

  // ---- export mps -----------------------------------------------------------------
  auto* export_cmd = app.add_subcommand("export", "model export");
  export_cmd->require_subcommand(1);
  auto* mps = export_cmd->add_subcommand("mps", "write an MPS file for external solvers");
  CommonArgs xa;
  ScenArgs xs;
  std::string what = "milp";
  int export_scenario = 0;
  add_common(mps, xa);
  add_scen(mps, xs);
  mps->add_option("--what", what, "essr | stacked | milp")
      ->check(CLI::IsMember({"essr", "stacked", "milp"}));
  mps->add_option("--scenario-index", export_scenario, "scenario for --what essr");
  mps->callback([&] {
    NetworkCase c = resolve_case(xa, man);
    const ExposureModel m = resolve_exposure(xs, c, man);
    const ScenarioSet set = resolve_scenarios(xs, c, m, man);
    lp::LpProblem problem;
    std::vector<int> ints;
    if (what == "essr") {
      if (export_scenario < 0 || export_scenario >= set.size())
        throw CLI::ValidationError("--scenario-index out of range");
      GridSystem gsys = build_essr(c, set.scenarios[export_scenario]);
      if (!xa.t0.empty()) gsys.pin_t0(xa.t0);
      problem = augment_slacks(gsys.sys).sys.to_lp();
    } else if (what == "stacked") {
      GridSystem multi = build_multi_topology(c, set, m);
      fix_multi_topology_states(multi, c, set);
      if (!xa.t0.empty()) multi.pin_t0(xa.t0);
      problem = augment_slacks(multi.sys).sys.to_lp();
    } else {
      SingleLevelMilp milp =
          assemble_single_level(c, m, set, xa.t0.empty() ? nullptr : &xa.t0);
      problem = milp.sys().to_lp();
      for (int j : milp.sys().integer_vars()) ints.push_back(j);
    }
    const lp::MpsExport ex = lp::export_mps(problem, ints, "ESSR");
    write_file(xa.out_dir + "/model.mps", ex.text);
    man.outputs.push_back("model.mps");
    if (!ex.renamed.empty()) {
      nlohmann::json nm;
      for (const auto& [nn, oo] : ex.renamed) nm[nn] = oo;
      write_file(xa.out_dir + "/model_names.json", nm.dump(2) + "\n");
      man.outputs.push_back("model_names.json");
    }
    std::cout << "mps: " << problem.num_rows() << " rows, " << problem.num_cols()
              << " cols, " << ints.size() << " integers\n";
    finish_manifest(man, xa, t_start);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const CapExceeded& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitSolver;
  }
  return exit_code;
}
