#include "cfp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cfp/errors.hpp"

namespace cfp {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ScenarioError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ScenarioError(where + ": unknown key '" + it.key() + "'");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ScenarioError(where + ": missing key '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ScenarioError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ScenarioError(where + ": non-finite number");
  return v;
}

Vec3 vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ScenarioError(where + ": expected [x, y, z]");
  return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

void read_number(const json& obj, const char* key, double& out, const std::string& where) {
  const auto it = obj.find(key);
  if (it != obj.end()) out = number(*it, where + "." + key);
}

PlannerParams params_from_json(const json& j) {
  const std::string where = "params";
  reject_unknown(j, {"k_cf", "k_p", "k_v", "v_min", "v_max", "d_max", "d_min", "eps_min", "xi", "k_vlc_scale"},
                 where);
  PlannerParams p;
  read_number(j, "k_cf", p.k_cf, where);
  read_number(j, "k_p", p.k_p, where);
  read_number(j, "k_v", p.k_v, where);
  read_number(j, "v_min", p.v_min, where);
  read_number(j, "v_max", p.v_max, where);
  read_number(j, "d_max", p.d_max, where);
  read_number(j, "d_min", p.d_min, where);
  read_number(j, "eps_min", p.eps_min, where);
  read_number(j, "xi", p.xi, where);
  read_number(j, "k_vlc_scale", p.k_vlc_scale, where);
  if (p.k_cf <= 0.0 || p.k_p <= 0.0 || p.k_v <= 0.0) throw ScenarioError("params: gains must be positive");
  if (!(0.0 < p.v_min && p.v_min < p.v_max)) throw ScenarioError("params: need 0 < v_min < v_max");
  if (!(0.0 < p.d_min && p.d_min < p.d_max)) throw ScenarioError("params: need 0 < d_min < d_max");
  if (p.eps_min <= 0.0 || p.xi <= 0.0) throw ScenarioError("params: eps_min and xi must be positive");
  if (p.k_vlc_scale < 0.0) throw ScenarioError("params: k_vlc_scale must be non-negative");
  return p;
}

std::string fmt17(double v) {
  v += 0.0;
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

ScenarioFile scenario_from_json(const json& doc) {
  reject_unknown(doc, {"start", "goal", "obstacles", "params", "dt", "horizon", "planar", "seed", "apf"}, "scenario");
  ScenarioFile out;
  Scenario& sc = out.scenario;

  const json& start = require(doc, "start", "scenario");
  reject_unknown(start, {"position", "velocity"}, "start");
  sc.start.position = vec3(require(start, "position", "start"), "start.position");
  if (start.contains("velocity")) sc.start.velocity = vec3(start["velocity"], "start.velocity");
  sc.goal = vec3(require(doc, "goal", "scenario"), "goal");

  const json& obs = require(doc, "obstacles", "scenario");
  if (!obs.is_array()) throw ScenarioError("obstacles: expected an array");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string where = "obstacles[" + std::to_string(i) + "]";
    reject_unknown(obs[i], {"points", "b"}, where);
    const json& pts = require(obs[i], "points", where);
    if (!pts.is_array()) throw ScenarioError(where + ".points: expected an array");
    std::vector<Vec3> points;
    points.reserve(pts.size());
    for (const auto& p : pts) points.push_back(vec3(p, where + ".points"));
    sc.obstacles.emplace_back(static_cast<int>(i), std::move(points), vec3(require(obs[i], "b", where), where + ".b"));
  }

  if (doc.contains("params")) sc.params = params_from_json(doc["params"]);
  read_number(doc, "dt", sc.dt, "scenario");
  read_number(doc, "horizon", sc.horizon, "scenario");
  if (doc.contains("planar")) {
    if (!doc["planar"].is_boolean()) throw ScenarioError("planar: expected a boolean");
    sc.planar = doc["planar"].get<bool>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ScenarioError("seed: expected a non-negative integer");
    sc.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("apf")) {
    const json& a = doc["apf"];
    reject_unknown(a, {"eta", "rho0"}, "apf");
    ApfParams apf;
    read_number(a, "eta", apf.eta, "apf");
    read_number(a, "rho0", apf.rho0, "apf");
    if (apf.eta < 0.0 || apf.rho0 <= 0.0) throw ScenarioError("apf: need eta >= 0 and rho0 > 0");
    out.apf = apf;
  }
  validate_scenario(sc);
  return out;
}

json scenario_to_json(const Scenario& sc, const std::optional<ApfParams>& apf) {
  json obstacles = json::array();
  for (const auto& o : sc.obstacles) {
    json pts = json::array();
    for (const auto& p : o.points()) pts.push_back(to_json(p));
    obstacles.push_back({{"points", std::move(pts)}, {"b", to_json(o.b())}});
  }
  const PlannerParams& p = sc.params;
  json doc = {
      {"start", {{"position", to_json(sc.start.position)}, {"velocity", to_json(sc.start.velocity)}}},
      {"goal", to_json(sc.goal)},
      {"obstacles", std::move(obstacles)},
      {"params",
       {{"k_cf", p.k_cf},
        {"k_p", p.k_p},
        {"k_v", p.k_v},
        {"v_min", p.v_min},
        {"v_max", p.v_max},
        {"d_max", p.d_max},
        {"d_min", p.d_min},
        {"eps_min", p.eps_min},
        {"xi", p.xi},
        {"k_vlc_scale", p.k_vlc_scale}}},
      {"dt", sc.dt},
      {"horizon", sc.horizon},
      {"planar", sc.planar},
      {"seed", sc.seed},
  };
  if (apf) doc["apf"] = {{"eta", apf->eta}, {"rho0", apf->rho0}};
  return doc;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
  return scenario_from_json(doc);
}

void save_scenario(const std::filesystem::path& path, const Scenario& scenario, const std::optional<ApfParams>& apf) {
  write_text_file(path, scenario_to_json(scenario, apf).dump(2) + "\n");
}

std::string trajectory_csv_header() {
  return "t,x,y,z,vx,vy,vz,R,S,eps,Vb,fcf_x,fcf_y,fcf_z,fvlc_x,fvlc_y,fvlc_z,gate";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  os << trajectory_csv_header() << '\n';
  for (const auto& s : trajectory.samples) {
    const double vals[] = {s.t,
                           s.position.x,
                           s.position.y,
                           s.position.z,
                           s.velocity.x,
                           s.velocity.y,
                           s.velocity.z,
                           s.has_aux ? s.aux.R : nan,
                           s.has_aux ? s.aux.S : nan,
                           s.has_aux ? s.aux.eps : nan,
                           s.has_aux ? s.aux.v_b : nan,
                           s.force.f_cf.x,
                           s.force.f_cf.y,
                           s.force.f_cf.z,
                           s.force.f_vlc.x,
                           s.force.f_vlc.y,
                           s.force.f_vlc.z};
    for (double v : vals) os << fmt17(v) << ',';
    os << s.force.k_vlc << '\n';
  }
}

json metrics_to_json(const Metrics& m, const Trajectory& trajectory) {
  return {{"length_m", m.path_length},
          {"duration_s", m.duration},
          {"min_dist_m", finite_or_null(m.min_obstacle_distance)},
          {"comp_time_us", m.mean_step_compute_time * 1e6},
          {"termination", std::string(to_string(trajectory.terminated_by))},
          {"kcf_adaptations", trajectory.kcf_adaptations}};
}

json agent_tree_to_json(const AgentTree& tree, std::span<const Obstacle> obstacles) {
  json agents = json::array();
  for (const auto& a : tree.agents) {
    json b = json::object();
    for (const auto& [id, v] : a.b_assignment) b[std::to_string(id)] = to_json(v);
    const Metrics m = metrics(a.trajectory, obstacles);
    agents.push_back({{"id", a.id},
                      {"parent", a.parent_id},
                      {"split_step", a.split_step},
                      {"status", std::string(to_string(a.status))},
                      {"reached_goal", a.reached_goal},
                      {"cost", finite_or_null(a.cost)},
                      {"b", std::move(b)},
                      {"length_m", m.path_length},
                      {"duration_s", m.duration},
                      {"min_dist_m", finite_or_null(m.min_obstacle_distance)},
                      {"prediction_time_ms", a.prediction_time_s * 1e3}});
  }
  json events = json::array();
  for (const auto& e : tree.events) {
    events.push_back({{"kind", e.kind == AgentEvent::Kind::Split ? "split" : "prune"},
                      {"agent", e.agent_id},
                      {"other", e.other_id},
                      {"obstacle", e.obstacle_id},
                      {"step", e.step}});
  }
  const auto best = select_best(tree.agents);
  return {{"dt_pred", tree.dt_pred},
          {"max_concurrent", tree.max_concurrent},
          {"mean_prediction_time_ms", mean_prediction_time(tree) * 1e3},
          {"best", best ? json(tree.agents[*best].id) : json(nullptr)},
          {"agents", std::move(agents)},
          {"events", std::move(events)}};
}

json verification_report_to_json(std::span<const CheckResult> results) {
  json checks = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed();
    checks.push_back({{"claim", r.claim},
                      {"status", std::string(to_string(r.status))},
                      {"n_cases", r.n_cases},
                      {"n_pass", r.n_pass},
                      {"n_inconclusive", r.n_inconclusive},
                      {"worst_margin", finite_or_null(r.worst_margin)},
                      {"tolerance", r.tolerance},
                      {"seed", r.seed},
                      {"detail", r.detail}});
  }
  json claims = json::array();
  for (const auto& c : claims_manifest()) {
    std::string status = "not run";
    for (const auto& r : results) {
      if (r.claim == c.runner) status = std::string(to_string(r.status));
    }
    claims.push_back({{"id", std::string(c.id)}, {"runner", std::string(c.runner)}, {"status", status}});
  }
  return {{"all_passed", all}, {"checks", std::move(checks)}, {"claims", std::move(claims)}};
}

void write_verification_table(std::ostream& os, std::span<const CheckResult> results) {
  os << std::left << std::setw(28) << "check" << std::setw(14) << "status" << std::setw(14) << "cases"
     << std::setw(14) << "worst margin" << "detail\n";
  for (const auto& r : results) {
    std::ostringstream cases;
    cases << r.n_pass << '/' << r.n_cases;
    std::ostringstream margin;
    margin << std::setprecision(4) << r.worst_margin;
    os << std::left << std::setw(28) << r.claim << std::setw(14) << to_string(r.status) << std::setw(14)
       << cases.str() << std::setw(14) << margin.str() << r.detail << '\n';
  }
}

PhaseGrid parse_phase_grid(const std::string& spec) {
  std::vector<double> v;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("grid: bad number '" + item + "'");
    }
    if (used != item.size() || !std::isfinite(x)) throw std::invalid_argument("grid: bad number '" + item + "'");
    v.push_back(x);
  }
  PhaseGrid g;
  if (v.size() == 3) {
    g = {v[0], v[1], v[0], v[1], v[2]};
  } else if (v.size() == 5) {
    g = {v[0], v[1], v[2], v[3], v[4]};
  } else {
    throw std::invalid_argument("grid: expected min:max:step or rmin:rmax:smin:smax:step");
  }
  if (g.step <= 0.0 || g.r_max < g.r_min || g.s_max < g.s_min) throw std::invalid_argument("grid: empty range");
  return g;
}

void write_phase_csv(std::ostream& os, double v_norm, double k_cf, const PhaseGrid& grid) {
  const double c = k_cf / (v_norm * v_norm);
  const auto count = [&](double lo, double hi) {
    return static_cast<long>(std::floor((hi - lo) / grid.step + 1e-9)) + 1;
  };
  const long nr = count(grid.r_min, grid.r_max);
  const long ns = count(grid.s_min, grid.s_max);
  os << "R,S,Rdot,Sdot,ray_S\n";
  for (long i = 0; i < nr; ++i) {
    const double R = grid.r_min + static_cast<double>(i) * grid.step;
    for (long j = 0; j < ns; ++j) {
      const double S = grid.s_min + static_cast<double>(j) * grid.step;
      if (R == 0.0 && S == 0.0) continue;
      const RSRates r = rs_derivatives(R, S, v_norm, k_cf);
      os << fmt17(R) << ',' << fmt17(S) << ',' << fmt17(r.r_dot) << ',' << fmt17(r.s_dot) << ',' << fmt17(-c * R)
         << '\n';
    }
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace cfp
