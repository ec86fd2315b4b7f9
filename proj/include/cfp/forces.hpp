#pragma once

#include <span>
#include <vector>

#include "cfp/vec3.hpp"
#include "cfp/world.hpp"

namespace cfp {

// Below this distance-vector length the robot is considered to sit on the
// obstacle point and the circular field is undefined.
inline constexpr double kAtPointTolerance = 1e-12;
// Below this relative speed the field direction is undefined; the CF force is
// set to zero and the sample is flagged as stalled.
inline constexpr double kStalledSpeed = 1e-9;

// A field/force value together with the stalled-velocity diagnostic.
struct FieldSample {
  Vec3 value;
  bool stalled = false;
};

// Artificial current on an obstacle point: (d/|d|) x b.
// Throws CollisionError when |d| < kAtPointTolerance.
Vec3 artificial_current(const Vec3& d, const Vec3& b);

// Artificial magnetic field (k_cf/|d|) c x (d_dot/|d_dot|).
FieldSample magnetic_field(const Vec3& d, const Vec3& d_dot, const Vec3& b, double k_cf);

// CF force of one obstacle point: (d_dot/|d_dot|) x B when |d| <= d_max,
// zero otherwise.
FieldSample cf_force_point(const Vec3& d, const Vec3& d_dot, const Vec3& b, double k_cf, double d_max);

// Per-obstacle field configuration used by the CF superposition. Virtual
// agents and the k_cf adaptation override the scenario defaults here.
struct ObstacleField {
  Vec3 b;
  double k_cf = 1.0;
};

std::vector<ObstacleField> default_fields(std::span<const Obstacle> obstacles, const PlannerParams& params);

struct PointContribution {
  int obstacle_id = 0;
  std::size_t point_index = 0;
  Vec3 force;
};

enum class ExecutionPolicy {
  Serial,    // plain loop; the reference kernel
  Parallel,  // OpenMP over fixed-size chunks, combined in chunk order
  Auto,      // Parallel once the cloud holds kParallelThreshold points
};

inline constexpr std::size_t kParallelChunk = 256;
inline constexpr std::size_t kParallelThreshold = 2048;

struct CfResult {
  Vec3 force;
  bool stalled = false;
  std::size_t active_points = 0;
  std::vector<PointContribution> contributions;  // only filled on request
};

// Superposition of the per-point CF forces over every point within d_max.
// Obstacles are static, so d_dot equals the robot velocity.
// `fields` must hold one entry per obstacle.
CfResult cf_force_total(const RobotState& state, std::span<const Obstacle> obstacles,
                        std::span<const ObstacleField> fields, double d_max,
                        ExecutionPolicy policy = ExecutionPolicy::Serial, bool record_contributions = false);

// Reference implementation kept for tests and the benchmark.
CfResult cf_force_total_serial(const RobotState& state, std::span<const Obstacle> obstacles,
                               std::span<const ObstacleField> fields, double d_max, bool record_contributions);

CfResult cf_force_total_parallel(const RobotState& state, std::span<const Obstacle> obstacles,
                                 std::span<const ObstacleField> fields, double d_max);

// Velocity-limited attractive force -k_v (x_dot - nu v_d) with
// v_d = (k_p/k_v)(x_g - x) and nu = min(1, v_max/|v_d|) (nu = 1 at |v_d| = 0).
Vec3 vlc_force(const RobotState& state, const Vec3& goal, double k_p, double k_v, double v_max);

// Goal-force gate: 0 iff the VLC force would slow the robot (x_dot.F <= 0)
// while it is already at or below v_min and outside the goal ball xi.
// A robot exactly at rest gets 1 (the VLC force cannot slow it further).
int k_vlc_gate(const RobotState& state, const Vec3& goal, const Vec3& f_vlc, double v_min, double xi);

struct ForceBreakdown {
  Vec3 f_cf;
  Vec3 f_vlc;
  int k_vlc = 1;
  Vec3 f_total;
  bool stalled = false;
  std::vector<PointContribution> per_point;
};

struct SteeringOptions {
  ExecutionPolicy policy = ExecutionPolicy::Serial;
  bool record_contributions = false;
  bool include_vlc = true;  // false: CF-only dynamics
};

// F_s = F_CF + k_vlc_scale * k_VLC * F_VLC. When `fields` is empty the
// scenario defaults (obstacle b, params.k_cf) are used.
ForceBreakdown steering_force(const RobotState& state, std::span<const Obstacle> obstacles, const Vec3& goal,
                              const PlannerParams& params, std::span<const ObstacleField> fields = {},
                              const SteeringOptions& options = {});

}  // namespace cfp
