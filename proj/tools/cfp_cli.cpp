#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "cfp/errors.hpp"
#include "cfp/io.hpp"

namespace fs = std::filesystem;
using namespace cfp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCollision = 3;
constexpr int kExitVerification = 4;

struct RunArgs {
  std::string scenario;
  std::string mode = "full";
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  double z_max = 0.0;
};

struct AgentArgs {
  std::string scenario;
  double dt_pred = 1e-3;
  std::string weights = "1,1";
  std::size_t cap = 64;
  std::string out = ".";
};

struct VerifyArgs {
  std::string claims = "all";
  std::optional<std::size_t> n;
  std::uint64_t seed = 1;
  std::string out;
};

struct PhaseArgs {
  double v = 1.0;
  double k_cf = 1.0;
  std::string grid = "-5:5:0.5";
  std::string out;
};

struct CompareArgs {
  std::string scenario;
  std::optional<double> eta;
  std::optional<double> rho0;
  std::string out = ".";
};

struct ExportArgs {
  std::string name = "u-trap";
  std::string out;
  std::uint64_t seed = 1;
};

Scenario prepare(const ScenarioFile& file, const std::optional<double>& dt, const std::optional<double>& horizon,
                 const std::optional<std::uint64_t>& seed) {
  Scenario sc = file.scenario;
  if (dt) sc.dt = *dt;
  if (horizon) sc.horizon = *horizon;
  if (seed) sc.seed = *seed;
  validate_scenario(sc);
  return sc;
}

void warn_params(const Scenario& sc, bool v_bounds_active) {
  const ValidationReport rep = validate_params(sc.params, v_bounds_active);
  for (const auto& c : rep.checks) {
    if (!c.passed) std::cerr << "warning: " << c.name << " violated (requires " << c.detail << "), guarantees void\n";
  }
}

void write_csv(const fs::path& path, const Trajectory& tr) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_trajectory_csv(os, tr);
}

int cmd_run(const RunArgs& a) {
  const auto mode = parse_mode(a.mode);
  if (!mode) throw ScenarioError("unknown mode '" + a.mode + "'");
  const Scenario sc = prepare(load_scenario(a.scenario), a.dt, a.horizon, a.seed);
  warn_params(sc, *mode != Mode::CfOnly);
  SimOptions opt;
  opt.mode = *mode;
  opt.disturbance = {a.z_max, sc.seed};
  const Trajectory tr = simulate(sc, opt);
  const Metrics m = metrics(tr, sc.obstacles);
  fs::create_directories(a.out);
  write_csv(fs::path(a.out) / "trajectory.csv", tr);
  write_text_file(fs::path(a.out) / "metrics.json", metrics_to_json(m, tr).dump(2) + "\n");
  std::cout << "termination: " << to_string(tr.terminated_by) << "\nlength_m: " << m.path_length
            << "\nduration_s: " << m.duration << "\nmin_dist_m: " << m.min_obstacle_distance
            << "\ncomp_time_us: " << m.mean_step_compute_time * 1e6 << '\n';
  return tr.terminated_by == Termination::Collision ? kExitCollision : kExitOk;
}

CostWeights parse_weights(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ScenarioError("weights: expected w_len,w_dist");
  CostWeights w;
  try {
    w.w_len = std::stod(s.substr(0, comma));
    w.w_dist = std::stod(s.substr(comma + 1));
  } catch (const std::exception&) {
    throw ScenarioError("weights: expected w_len,w_dist");
  }
  if (!(w.w_len >= 0.0) || !(w.w_dist >= 0.0)) throw ScenarioError("weights must be non-negative");
  return w;
}

int cmd_agents(const AgentArgs& a) {
  const Scenario sc = prepare(load_scenario(a.scenario), std::nullopt, std::nullopt, std::nullopt);
  if (!(a.dt_pred > 0.0)) throw ScenarioError("dt-pred must be positive");
  warn_params(sc, true);
  AgentOptions opt;
  opt.dt_pred = a.dt_pred;
  opt.weights = parse_weights(a.weights);
  opt.cap = a.cap;
  opt.sim.record_samples = true;
  const AgentTree tree = run_agents(sc, opt);
  fs::create_directories(a.out);
  write_text_file(fs::path(a.out) / "agents.json", agent_tree_to_json(tree, sc.obstacles).dump(2) + "\n");
  const auto best = select_best(tree.agents);
  std::cout << "agents: " << tree.agents.size() << "\nmax_concurrent: " << tree.max_concurrent
            << "\nmean_prediction_time_ms: " << mean_prediction_time(tree) * 1e3 << '\n';
  if (!best) {
    std::cout << "no feasible agent\n";
    return kExitCollision;
  }
  const Agent& b = tree.agents[*best];
  write_csv(fs::path(a.out) / "best_trajectory.csv", b.trajectory);
  std::cout << "best: " << b.id << " cost " << b.cost << (b.reached_goal ? " (goal reached)" : "") << '\n';
  return kExitOk;
}

int cmd_verify(const VerifyArgs& a) {
  const std::vector<CheckResult> results = run_verification(a.claims, a.n, a.seed);
  write_verification_table(std::cout, results);
  if (!a.out.empty()) write_text_file(a.out, verification_report_to_json(results).dump(2) + "\n");
  bool all = true;
  for (const auto& r : results) all = all && r.passed();
  return all ? kExitOk : kExitVerification;
}

int cmd_phase(const PhaseArgs& a) {
  if (!(a.v > 0.0) || !(a.k_cf > 0.0)) throw ScenarioError("v and k-cf must be positive");
  const PhaseGrid grid = parse_phase_grid(a.grid);
  if (a.out.empty()) {
    write_phase_csv(std::cout, a.v, a.k_cf, grid);
  } else {
    std::ofstream os(a.out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + a.out);
    write_phase_csv(os, a.v, a.k_cf, grid);
  }
  return kExitOk;
}

int cmd_compare_apf(const CompareArgs& a) {
  const ScenarioFile file = load_scenario(a.scenario);
  const Scenario sc = prepare(file, std::nullopt, std::nullopt, std::nullopt);
  ApfParams apf = file.apf.value_or(ApfParams{});
  if (a.eta) apf.eta = *a.eta;
  if (a.rho0) apf.rho0 = *a.rho0;
  SimOptions opt;
  opt.mode = Mode::Full;
  const Trajectory cfp_tr = simulate(sc, opt);
  Trajectory apf_tr;
  try {
    apf_tr = simulate_apf(sc, apf);
  } catch (const CollisionError&) {
    apf_tr.terminated_by = Termination::Collision;
  }
  const Metrics mc = metrics(cfp_tr, sc.obstacles);
  const Metrics ma = metrics(apf_tr, sc.obstacles);
  const nlohmann::json doc = {{"cfp", metrics_to_json(mc, cfp_tr)}, {"apf", metrics_to_json(ma, apf_tr)}};
  fs::create_directories(a.out);
  write_text_file(fs::path(a.out) / "compare.json", doc.dump(2) + "\n");
  std::cout << std::left << std::setw(8) << "planner" << std::setw(14) << "termination" << std::setw(12) << "length_m"
            << std::setw(12) << "duration_s" << std::setw(12) << "min_dist_m" << "comp_time_us\n";
  const auto row = [](const char* name, const Metrics& m, const Trajectory& t) {
    std::cout << std::left << std::setw(8) << name << std::setw(14) << to_string(t.terminated_by) << std::setw(12)
              << m.path_length << std::setw(12) << m.duration << std::setw(12) << m.min_obstacle_distance
              << m.mean_step_compute_time * 1e6 << '\n';
  };
  row("CFP", mc, cfp_tr);
  row("APF", ma, apf_tr);
  return kExitOk;
}

int cmd_export(const ExportArgs& a) {
  std::optional<ApfParams> apf;
  Scenario sc;
  if (a.name == "u-trap") {
    sc = u_trap_scenario();
    apf = u_trap_apf_params();
  } else {
    const std::vector<Scenario> battery = scenario_battery(a.seed);
    if (a.name == "free") {
      sc = battery[0];
    } else if (a.name == "single") {
      sc = battery[1];
    } else if (a.name == "cluttered") {
      sc = battery[2];
    } else {
      throw ScenarioError("unknown scenario '" + a.name + "'");
    }
  }
  const std::string text = scenario_to_json(sc, apf).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Circular-field motion planner: simulation, virtual agents and verification"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate one scenario; writes trajectory.csv and metrics.json");
  run->add_option("--scenario", run_args.scenario, "Scenario JSON file")->required();
  run->add_option("--mode", run_args.mode, "Dynamics: cf, full or disturbed")->check(CLI::IsMember({"cf", "full", "disturbed"}));
  run->add_option("--dt", run_args.dt, "Override the integration step [s]");
  run->add_option("--horizon", run_args.horizon, "Override the horizon [s]");
  run->add_option("--seed", run_args.seed, "Override the scenario seed");
  run->add_option("--z-max", run_args.z_max, "Disturbance magnitude for --mode disturbed");
  run->add_option("--out", run_args.out, "Output directory");

  AgentArgs agent_args;
  auto* agents = app.add_subcommand("agents", "Roll out virtual agents; writes agents.json and best_trajectory.csv");
  agents->add_option("--scenario", agent_args.scenario, "Scenario JSON file")->required();
  agents->add_option("--dt-pred", agent_args.dt_pred, "Prediction step [s]");
  agents->add_option("--weights", agent_args.weights, "Cost weights w_len,w_dist");
  agents->add_option("--cap", agent_args.cap, "Maximum number of concurrent agents");
  agents->add_option("--out", agent_args.out, "Output directory");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Run the numerical verification suite");
  verify->add_option("--claims", verify_args.claims, "Comma-separated claim ids or check names, or 'all'");
  verify->add_option("--n", verify_args.n, "Cases per check");
  verify->add_option("--seed", verify_args.seed, "Base seed");
  verify->add_option("--out", verify_args.out, "Write the JSON report here");

  PhaseArgs phase_args;
  auto* phase = app.add_subcommand("phase", "Sample the R-S vector field on a grid (CSV)");
  phase->add_option("--v", phase_args.v, "Robot speed [m/s]");
  phase->add_option("--k-cf", phase_args.k_cf, "CF gain");
  phase->add_option("--grid", phase_args.grid, "min:max:step or rmin:rmax:smin:smax:step");
  phase->add_option("--out", phase_args.out, "CSV file (default stdout)");

  CompareArgs cmp_args;
  auto* cmp = app.add_subcommand("compare-apf", "Run CFP and the potential-field baseline on one scenario");
  cmp->add_option("--scenario", cmp_args.scenario, "Scenario JSON file")->required();
  cmp->add_option("--eta", cmp_args.eta, "APF repulsion gain");
  cmp->add_option("--rho0", cmp_args.rho0, "APF influence distance [m]");
  cmp->add_option("--out", cmp_args.out, "Output directory");

  ExportArgs export_args;
  auto* exp = app.add_subcommand("export", "Write a built-in scenario as JSON");
  exp->add_option("--name", export_args.name, "u-trap, free, single or cluttered")
      ->check(CLI::IsMember({"u-trap", "free", "single", "cluttered"}));
  exp->add_option("--seed", export_args.seed, "Seed for randomly generated clouds");
  exp->add_option("--out", export_args.out, "JSON file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*agents) return cmd_agents(agent_args);
    if (*verify) return cmd_verify(verify_args);
    if (*phase) return cmd_phase(phase_args);
    if (*cmp) return cmd_compare_apf(cmp_args);
    if (*exp) return cmd_export(export_args);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const CollisionError& e) {
    std::cerr << "collision: " << e.what() << '\n';
    return kExitCollision;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
