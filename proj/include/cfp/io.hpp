#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfp/agents.hpp"
#include "cfp/verification.hpp"

namespace cfp {

// Parsed scenario document. `apf` is present when the file carries baseline
// repulsion parameters.
struct ScenarioFile {
  Scenario scenario;
  std::optional<ApfParams> apf;
};

// Strict schema: unknown keys, wrong types, non-finite numbers and vectors
// that are not 3-arrays raise ScenarioError. Obstacle ids follow list order.
ScenarioFile scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario, const std::optional<ApfParams>& apf = std::nullopt);
ScenarioFile load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path, const Scenario& scenario,
                   const std::optional<ApfParams>& apf = std::nullopt);

// One row per sample:
// t,x,y,z,vx,vy,vz,R,S,eps,Vb,fcf_x,fcf_y,fcf_z,fvlc_x,fvlc_y,fvlc_z,gate
// Numbers use 17 significant digits; auxiliary columns are "nan" when no
// obstacle point exists.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);
std::string trajectory_csv_header();

// length_m, duration_s, min_dist_m (null without obstacles), comp_time_us,
// plus termination and k_cf adaptation count.
nlohmann::json metrics_to_json(const Metrics& m, const Trajectory& trajectory);

nlohmann::json agent_tree_to_json(const AgentTree& tree, std::span<const Obstacle> obstacles);

nlohmann::json verification_report_to_json(std::span<const CheckResult> results);
void write_verification_table(std::ostream& os, std::span<const CheckResult> results);

struct PhaseGrid {
  double r_min = -5.0;
  double r_max = 5.0;
  double s_min = -5.0;
  double s_max = 5.0;
  double step = 0.5;
};

// "rmin:rmax:step" or "rmin:rmax:smin:smax:step". Throws std::invalid_argument.
PhaseGrid parse_phase_grid(const std::string& spec);

// R,S,Rdot,Sdot,ray_S with ray_S = -c R; the origin is skipped.
void write_phase_csv(std::ostream& os, double v_norm, double k_cf, const PhaseGrid& grid);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace cfp
