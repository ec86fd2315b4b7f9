#pragma once

#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfp/simulator.hpp"

namespace cfp {

enum class AgentStatus { Running, Finished, Collided, Pruned };

std::string_view to_string(AgentStatus s);

struct Agent {
  int id = 0;
  int parent_id = -1;        // -1 for the root
  std::size_t split_step = 0;  // step at which this agent branched off its parent
  std::map<int, Vec3> b_assignment;  // obstacle id -> field direction
  Trajectory trajectory;
  double cost = std::numeric_limits<double>::infinity();
  AgentStatus status = AgentStatus::Running;
  bool reached_goal = false;
  double prediction_time_s = 0.0;  // wall time of this agent's own rollout segments
};

struct CostWeights {
  double w_len = 1.0;
  double w_dist = 1.0;
  std::optional<double> d_safe;  // defaults to params.d_min
};

// w_len * length + w_dist * max(0, d_safe - min distance); +inf on collision.
double agent_cost(const Trajectory& trajectory, std::span<const Obstacle> obstacles, const CostWeights& w,
                  double d_safe);

struct AgentOptions {
  double dt_pred = 1e-3;
  std::optional<double> horizon;  // defaults to the scenario horizon
  CostWeights weights;
  std::size_t cap = 64;           // maximum number of concurrently running agents
  SimOptions sim;                 // mode/disturbance/stop rules of each rollout
  bool parallel = true;
};

struct AgentEvent {
  enum class Kind { Split, Prune } kind = Kind::Split;
  int agent_id = 0;
  int other_id = -1;     // Split: new child id
  int obstacle_id = -1;  // Split: the obstacle that came into range
  std::size_t step = 0;
};

struct AgentTree {
  std::vector<Agent> agents;  // indexed by id
  std::vector<AgentEvent> events;
  std::size_t max_concurrent = 0;
  double dt_pred = 0.0;
};

// Rolls out all virtual agents. The root starts with no b assignment; when a
// rollout first comes within d_max of an unassigned obstacle it forks: the
// running agent keeps the obstacle's own b and a new child takes -b. Both
// share the prefix bit-identically. Fork order and ids are deterministic.
AgentTree run_agents(const Scenario& scenario, const AgentOptions& options = {});

// Best Finished agent: goal-reaching first, then lowest cost, then lowest id.
// nullopt signals that no feasible agent exists.
std::optional<std::size_t> select_best(std::span<const Agent> agents);

double mean_prediction_time(const AgentTree& tree);

// Signed angle swept around `center` (z-component, radians). Its sign tells
// on which side a planar path passed the point.
double swept_angle(const Trajectory& trajectory, const Vec3& center);

Vec3 centroid(const Obstacle& obstacle);

struct ControllerResult {
  Trajectory trajectory;
  std::vector<std::map<int, Vec3>> selections;  // applied assignment per cycle
  std::size_t infeasible_cycles = 0;
};

// Closed-loop run: the controller ticks at scenario.dt and, every
// `cycle_steps` ticks, launches an agent prediction from the current state.
// The prediction launched at one cycle boundary is applied at the next one;
// until then the current assignment is kept. In asynchronous mode the
// prediction runs on a separate thread while the control loop keeps ticking.
class ReplanningController {
 public:
  ReplanningController(const Scenario& scenario, AgentOptions options, std::size_t cycle_steps = 100,
                       bool asynchronous = true);
  ControllerResult run();

 private:
  const Scenario* scenario_;
  AgentOptions options_;
  std::size_t cycle_steps_;
  bool asynchronous_;
};

}  // namespace cfp
