#include "cfp/agents.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace cfp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double min_distance(const Obstacle& obs, const Vec3& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : obs.points()) best = std::min(best, distance(x, p));
  return best;
}

struct Live {
  Simulation sim;
  std::size_t agent;
  std::optional<std::size_t> pending;  // obstacle index that came into range
};

void finalize(Agent& a, Simulation& sim, std::span<const Obstacle> obstacles, const CostWeights& w,
              double d_safe) {
  a.trajectory = sim.take_trajectory();
  a.status = a.trajectory.terminated_by == Termination::Collision ? AgentStatus::Collided : AgentStatus::Finished;
  a.reached_goal = a.trajectory.terminated_by == Termination::GoalReached;
  a.cost = agent_cost(a.trajectory, obstacles, w, d_safe);
}

}  // namespace

std::string_view to_string(AgentStatus s) {
  switch (s) {
    case AgentStatus::Running: return "Running";
    case AgentStatus::Finished: return "Finished";
    case AgentStatus::Collided: return "Collided";
    case AgentStatus::Pruned: return "Pruned";
  }
  return "?";
}

double agent_cost(const Trajectory& trajectory, std::span<const Obstacle> obstacles, const CostWeights& w,
                  double d_safe) {
  if (trajectory.terminated_by == Termination::Collision) return std::numeric_limits<double>::infinity();
  const Metrics m = metrics(trajectory, obstacles);
  const double clearance = obstacles.empty() ? 0.0 : std::max(0.0, d_safe - m.min_obstacle_distance);
  return w.w_len * m.path_length + w.w_dist * clearance;
}

AgentTree run_agents(const Scenario& scenario, const AgentOptions& options) {
  Scenario pred = scenario;
  pred.dt = options.dt_pred;
  pred.horizon = options.horizon.value_or(scenario.horizon);
  const auto& obstacles = pred.obstacles;
  const double d_max = pred.params.d_max;
  const double d_safe = options.weights.d_safe.value_or(pred.params.d_min);

  AgentTree tree;
  tree.dt_pred = pred.dt;
  tree.agents.push_back(Agent{});
  std::vector<Live> live;
  live.push_back(Live{Simulation(pred, options.sim), 0, std::nullopt});
  tree.max_concurrent = 1;

  while (!live.empty()) {
    const auto n_live = static_cast<std::ptrdiff_t>(live.size());
#pragma omp parallel for schedule(dynamic) if (options.parallel && n_live > 1)
    for (std::ptrdiff_t i = 0; i < n_live; ++i) {
      Live& l = live[static_cast<std::size_t>(i)];
      Agent& a = tree.agents[l.agent];
      const auto t0 = std::chrono::steady_clock::now();
      for (;;) {
        const Vec3 x = l.sim.state().position;
        for (std::size_t j = 0; j < obstacles.size() && !l.pending; ++j) {
          if (!a.b_assignment.contains(obstacles[j].id()) && min_distance(obstacles[j], x) <= d_max) l.pending = j;
        }
        if (l.pending || !l.sim.advance()) break;
      }
      a.prediction_time_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    std::vector<Live> next;
    for (auto& l : live) {
      if (!l.pending) {
        finalize(tree.agents[l.agent], l.sim, obstacles, options.weights, d_safe);
        continue;
      }
      const std::size_t j = *l.pending;
      const int oid = obstacles[j].id();
      const Vec3 b = obstacles[j].b();
      l.pending.reset();

      Live child{l.sim, tree.agents.size(), std::nullopt};
      l.sim.set_field_direction(j, b);
      child.sim.set_field_direction(j, -b);

      Agent c;
      c.id = static_cast<int>(child.agent);
      c.parent_id = tree.agents[l.agent].id;
      c.split_step = l.sim.step_index();
      tree.agents[l.agent].b_assignment[oid] = b;
      c.b_assignment = tree.agents[l.agent].b_assignment;
      c.b_assignment[oid] = -b;
      child.sim.reseed_disturbance(splitmix64(options.sim.disturbance.seed ^ static_cast<std::uint64_t>(c.id)));
      tree.events.push_back({AgentEvent::Kind::Split, tree.agents[l.agent].id, c.id, oid, c.split_step});
      tree.agents.push_back(std::move(c));
      next.push_back(std::move(l));
      next.push_back(std::move(child));
    }

    while (next.size() > options.cap) {
      // Prune the running agent with the highest partial cost, ties by highest id.
      std::size_t worst = 0;
      double worst_cost = -1.0;
      for (std::size_t i = 0; i < next.size(); ++i) {
        const double c = agent_cost(next[i].sim.trajectory(), obstacles, options.weights, d_safe);
        if (c > worst_cost || (c == worst_cost && next[i].agent > next[worst].agent)) {
          worst = i;
          worst_cost = c;
        }
      }
      Agent& a = tree.agents[next[worst].agent];
      a.trajectory = next[worst].sim.take_trajectory();
      a.status = AgentStatus::Pruned;
      a.cost = std::numeric_limits<double>::infinity();
      tree.events.push_back({AgentEvent::Kind::Prune, a.id, -1, -1, next[worst].sim.step_index()});
      next.erase(next.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    std::sort(next.begin(), next.end(), [](const Live& a, const Live& b) { return a.agent < b.agent; });
    tree.max_concurrent = std::max(tree.max_concurrent, next.size());
    live = std::move(next);
  }
  return tree;
}

std::optional<std::size_t> select_best(std::span<const Agent> agents) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Agent& a = agents[i];
    if (a.status != AgentStatus::Finished) continue;
    if (!best) {
      best = i;
      continue;
    }
    const Agent& b = agents[*best];
    const auto key_a = std::make_tuple(!a.reached_goal, a.cost, a.id);
    const auto key_b = std::make_tuple(!b.reached_goal, b.cost, b.id);
    if (key_a < key_b) best = i;
  }
  return best;
}

double mean_prediction_time(const AgentTree& tree) {
  if (tree.agents.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& a : tree.agents) sum += a.prediction_time_s;
  return sum / static_cast<double>(tree.agents.size());
}

double swept_angle(const Trajectory& trajectory, const Vec3& center) {
  double total = 0.0;
  const auto& s = trajectory.samples;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const Vec3 a = s[i - 1].position - center;
    const Vec3 b = s[i].position - center;
    total += std::atan2(cross(a, b).z, dot(a, b));
  }
  return total;
}

Vec3 centroid(const Obstacle& obstacle) {
  Vec3 c;
  for (const auto& p : obstacle.points()) c += p;
  return c / static_cast<double>(obstacle.size());
}

ReplanningController::ReplanningController(const Scenario& scenario, AgentOptions options, std::size_t cycle_steps,
                                           bool asynchronous)
    : scenario_(&scenario), options_(std::move(options)), cycle_steps_(std::max<std::size_t>(cycle_steps, 1)),
      asynchronous_(asynchronous) {}

ControllerResult ReplanningController::run() {
  ControllerResult out;
  Simulation control(*scenario_, options_.sim);
  std::map<int, Vec3> current;
  std::future<AgentTree> pending;
  const auto policy = asynchronous_ ? std::launch::async : std::launch::deferred;

  for (std::size_t k = 0;; ++k) {
    if (k % cycle_steps_ == 0) {
      if (pending.valid()) {
        // The control loop runs faster than real time here, so it waits at the
        // boundary where the previous prediction is due.
        const AgentTree tree = pending.get();
        if (const auto best = select_best(tree.agents)) {
          current = tree.agents[*best].b_assignment;
          for (const auto& [oid, b] : current) {
            for (std::size_t j = 0; j < scenario_->obstacles.size(); ++j) {
              if (scenario_->obstacles[j].id() == oid) control.set_field_direction(j, b);
            }
          }
        } else {
          ++out.infeasible_cycles;
        }
        out.selections.push_back(current);
      }
      Scenario pred = *scenario_;
      pred.start = control.state();
      pred.start.time = 0.0;
      pending = std::async(policy, [pred = std::move(pred), opts = options_]() { return run_agents(pred, opts); });
    }
    if (!control.advance()) break;
  }
  out.trajectory = control.take_trajectory();
  return out;
}

}  // namespace cfp
