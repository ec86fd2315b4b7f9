#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfp/vec3.hpp"

namespace cfp {

struct RobotState {
  Vec3 position;  // [m]
  Vec3 velocity;  // [m/s]
  double time = 0.0;
};

// A static obstacle given as a point cloud. All points share one magnetic
// field vector `b` (unit length).
class Obstacle {
 public:
  static constexpr double kDuplicateTolerance = 1e-9;
  static constexpr double kUnitTolerance = 1e-12;

  // Validates |b| = 1 and a non-empty cloud; drops points closer than
  // kDuplicateTolerance to an earlier point. Throws ScenarioError.
  Obstacle(int id, std::vector<Vec3> points, Vec3 b);

  int id() const { return id_; }
  const std::vector<Vec3>& points() const { return points_; }
  const Vec3& b() const { return b_; }
  std::size_t size() const { return points_.size(); }

 private:
  int id_;
  std::vector<Vec3> points_;
  Vec3 b_;
};

struct PlannerParams {
  double k_cf = 1.0;
  double k_p = 1.0;
  double k_v = 1.0;
  double v_max = 1.0;   // ẋ_max [m/s]
  double v_min = 0.5;   // ẋ_min [m/s]
  double d_max = 1.0;   // CF activation radius [m]
  double d_min = 0.1;   // k_cf adaptation radius [m]
  double eps_min = 1e-2;
  double xi = 0.05;     // goal ball where the VLC gate is forced on [m]
  double k_vlc_scale = 1.0;

  double c_min() const { return k_cf / (v_max * v_max); }
  double c_max() const { return k_cf / (v_min * v_min); }
};

struct ConstraintCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConstraintCheck> checks;

  bool all_passed() const;
  const ConstraintCheck* find(std::string_view name) const;
};

// Upper limit on c_max for the disturbed critical-quadrant guarantee:
// (c_min^2 + 1)/c_min when c_min >= 1, otherwise 2.
double c_max_limit(double c_min);

// Advisory check of every parameter constraint. Never throws; a failed check
// means the avoidance guarantees are void, not that simulation is impossible.
// The c_max condition is only evaluated when `v_bounds_active` is set.
ValidationReport validate_params(const PlannerParams& params, bool v_bounds_active);

struct Scenario {
  RobotState start;
  Vec3 goal;
  std::vector<Obstacle> obstacles;
  PlannerParams params;
  double dt = 1e-3;
  double horizon = 10.0;
  bool planar = true;
  std::uint64_t seed = 0;
};

// Structural checks (start outside every point's 1e-6 m ball, planar
// consistency, dt/horizon positive). Throws ScenarioError.
void validate_scenario(const Scenario& scenario);

struct NearestPoint {
  std::size_t obstacle_index = 0;  // position in the obstacle list
  int obstacle_id = 0;
  std::size_t point_index = 0;
  double distance = 0.0;
  Vec3 point;
};

// Globally nearest obstacle point; ties go to the lowest (obstacle id,
// point index). std::nullopt when the world holds no points.
std::optional<NearestPoint> nearest_obstacle_point(const Vec3& x, std::span<const Obstacle> obstacles);

std::size_t total_point_count(std::span<const Obstacle> obstacles);

}  // namespace cfp
