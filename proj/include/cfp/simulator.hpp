#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "cfp/aux_analysis.hpp"
#include "cfp/forces.hpp"
#include "cfp/world.hpp"

namespace cfp {

enum class Mode { CfOnly, Full, Disturbed };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);  // "cf", "full", "disturbed"

enum class Termination { Horizon, GoalReached, Collision, Stalled };

std::string_view to_string(Termination t);

// Piecewise-constant disturbance: each step draws a uniformly random direction
// (in the x-y plane for planar scenarios) with magnitude z_max.
struct DisturbanceProfile {
  double z_max = 0.0;
  std::uint64_t seed = 0;
};

class DisturbanceGenerator {
 public:
  DisturbanceGenerator(const DisturbanceProfile& profile, bool planar);
  Vec3 next();

 private:
  double z_max_;
  bool planar_;
  std::mt19937_64 rng_;
};

struct StopRules {
  double collision_radius = 1e-3;
  std::optional<double> goal_tolerance;  // defaults to params.xi
  bool stop_at_goal = true;
  double stall_speed = 1e-6;
  int stall_steps = 100;
};


struct Sample {
  double t = 0.0;
  Vec3 position;
  Vec3 velocity;
  ForceBreakdown force;  // per_point left empty
  Vec3 disturbance;
  AuxState aux;          // w.r.t. the nearest obstacle point
  bool has_aux = false;
  int nearest_obstacle_id = -1;
  double nearest_distance = 0.0;
  bool kcf_adapted = false;
};

struct SimOptions {
  Mode mode = Mode::Full;
  DisturbanceProfile disturbance;
  StopRules stop;
  bool adapt_kcf = true;
  ExecutionPolicy policy = ExecutionPolicy::Auto;
  std::vector<ObstacleField> fields;  // empty: scenario defaults
  bool record_samples = true;          // false: only the terminal sample is kept
  std::function<void(const Sample&)> on_sample;  // called for every step
};

struct Trajectory {
  std::vector<Sample> samples;
  Termination terminated_by = Termination::Horizon;
  double dt = 0.0;
  std::size_t kcf_adaptations = 0;
  double total_force_time_s = 0.0;  // wall time spent in steering_force

  bool empty() const { return samples.empty(); }
  const Sample& back() const { return samples.back(); }
};

// Explicit Euler with a fixed ordering: velocity is updated with the force,
// position with the old velocity. Planar states get zero z-components.
// Throws IntegrationError on a non-finite force.
RobotState step_euler(const RobotState& state, const Vec3& force, double dt, bool planar = false);

// Fixed-step simulation of the unit point mass under the steering force.
Trajectory simulate(const Scenario& scenario, const SimOptions& options);

// Incremental form of `simulate`, used by the virtual agents to pause a
// rollout when a new obstacle comes into range and resume it in children.
class Simulation {
 public:
  Simulation(const Scenario& scenario, SimOptions options);

  // Records the current state and advances one step. Returns false once the
  // run has terminated (the terminal sample is recorded).
  bool advance();
  bool finished() const { return finished_; }

  const RobotState& state() const { return state_; }
  std::size_t step_index() const { return step_; }
  const Trajectory& trajectory() const { return traj_; }
  Trajectory take_trajectory() { return std::move(traj_); }
  std::span<const ObstacleField> fields() const { return fields_; }
  // Changes the field direction of one obstacle; its gain is left untouched.
  void set_field_direction(std::size_t obstacle_index, const Vec3& b);
  // Restarts the disturbance stream (no-op outside Disturbed mode).
  void reseed_disturbance(std::uint64_t seed);
  const SimOptions& options() const { return options_; }

 private:
  void record(Sample&& s);

  const Scenario* scenario_;
  SimOptions options_;
  std::vector<ObstacleField> fields_;
  std::vector<double> base_k_;
  std::optional<DisturbanceGenerator> disturbance_;
  RobotState state_;
  Trajectory traj_;
  std::size_t step_ = 0;
  std::size_t n_steps_ = 0;
  int stall_count_ = 0;
  bool finished_ = false;
  double goal_tol_ = 0.0;
};

struct RSTrace {
  std::vector<double> t;
  std::vector<double> R;
  std::vector<double> S;
  bool collided = false;
};

// Additive rate terms for the RS system (e.g. a projected disturbance).
using RSPerturbation = std::function<RSRates(double t, double R, double S)>;

// Euler integration of the autonomous R-S system at constant speed. Stops
// early (collided = true) once sqrt(R^2+S^2)/v drops below collision_radius.
RSTrace simulate_rs(double R0, double S0, double v_norm, double k_cf, double dt, double horizon,
                    const RSPerturbation& perturbation = {}, double collision_radius = 1e-3);

struct ApfParams {
  double eta = 1.0;   // repulsion gain
  double rho0 = 1.0;  // repulsion influence distance [m]
};

// Classic potential-field baseline: VLC attraction plus, per point within
// rho0, eta (1/rho - 1/rho0)/rho^2 along the unit vector away from the point.
Vec3 apf_baseline(const RobotState& state, std::span<const Obstacle> obstacles, const Vec3& goal,
                  const PlannerParams& params, const ApfParams& apf);

Trajectory simulate_apf(const Scenario& scenario, const ApfParams& apf, const StopRules& stop = {});

struct Metrics {
  double path_length = 0.0;            // [m]
  double duration = 0.0;               // [s]
  double min_obstacle_distance = 0.0;  // [m], +inf without obstacles
  double mean_step_compute_time = 0.0; // [s]
};

Metrics metrics(const Trajectory& trajectory, std::span<const Obstacle> obstacles);

}  // namespace cfp
