#include "cfp/simulator.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "cfp/errors.hpp"

namespace cfp {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::CfOnly: return "cf";
    case Mode::Full: return "full";
    case Mode::Disturbed: return "disturbed";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "cf") return Mode::CfOnly;
  if (s == "full") return Mode::Full;
  if (s == "disturbed") return Mode::Disturbed;
  return std::nullopt;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Horizon: return "Horizon";
    case Termination::GoalReached: return "GoalReached";
    case Termination::Collision: return "Collision";
    case Termination::Stalled: return "Stalled";
  }
  return "?";
}

DisturbanceGenerator::DisturbanceGenerator(const DisturbanceProfile& profile, bool planar)
    : z_max_(profile.z_max), planar_(planar), rng_(profile.seed) {}

Vec3 DisturbanceGenerator::next() {
  if (planar_) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double a = angle(rng_);
    return {z_max_ * std::cos(a), z_max_ * std::sin(a), 0.0};
  }
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 d;
  do {
    d = {n(rng_), n(rng_), n(rng_)};
  } while (d.norm() < 1e-12);
  return (z_max_ / d.norm()) * d;
}

RobotState step_euler(const RobotState& state, const Vec3& force, double dt, bool planar) {
  if (!force.is_finite()) throw IntegrationError("step_euler: non-finite force");
  RobotState next;
  next.velocity = state.velocity + dt * force;
  next.position = state.position + dt * state.velocity;
  next.time = state.time + dt;
  if (planar) {
    next.velocity.z = 0.0;
    next.position.z = 0.0;
  }
  return next;
}

Simulation::Simulation(const Scenario& scenario, SimOptions options)
    : scenario_(&scenario), options_(std::move(options)), state_(scenario.start) {
  fields_ = options_.fields.empty() ? default_fields(scenario.obstacles, scenario.params) : options_.fields;
  if (fields_.size() != scenario.obstacles.size()) {
    throw ScenarioError("simulation: one field entry per obstacle required");
  }
  base_k_.reserve(fields_.size());
  for (const auto& f : fields_) base_k_.push_back(f.k_cf);
  if (options_.mode == Mode::Disturbed) disturbance_.emplace(options_.disturbance, scenario.planar);
  n_steps_ = static_cast<std::size_t>(std::llround(scenario.horizon / scenario.dt));
  goal_tol_ = options_.stop.goal_tolerance.value_or(scenario.params.xi);
  traj_.dt = scenario.dt;
  if (options_.record_samples) traj_.samples.reserve(std::min<std::size_t>(n_steps_ + 1, 1u << 20));
}

void Simulation::set_field_direction(std::size_t obstacle_index, const Vec3& b) {
  fields_.at(obstacle_index).b = b;
}

void Simulation::reseed_disturbance(std::uint64_t seed) {
  if (!disturbance_) return;
  DisturbanceProfile prof = options_.disturbance;
  prof.seed = seed;
  disturbance_.emplace(prof, scenario_->planar);
}

void Simulation::record(Sample&& s) {
  if (options_.on_sample) options_.on_sample(s);
  if (options_.record_samples || traj_.samples.empty()) {
    traj_.samples.push_back(std::move(s));
  } else {
    traj_.samples.back() = std::move(s);
  }
}

bool Simulation::advance() {
  if (finished_) return false;
  const Scenario& sc = *scenario_;
  const PlannerParams& p = sc.params;

  state_.time = static_cast<double>(step_) * sc.dt;
  Sample s;
  s.t = state_.time;
  s.position = state_.position;
  s.velocity = state_.velocity;

  const auto nearest = nearest_obstacle_point(state_.position, sc.obstacles);
  if (nearest) {
    s.nearest_obstacle_id = nearest->obstacle_id;
    s.nearest_distance = nearest->distance;
    if (nearest->distance < options_.stop.collision_radius) {
      record(std::move(s));
      traj_.terminated_by = Termination::Collision;
      finished_ = true;
      return false;
    }
    const std::size_t k = nearest->obstacle_index;
    // An adapted gain only lives while its obstacle stays the closest one in range.
    for (std::size_t j = 0; j < fields_.size(); ++j) {
      if (fields_[j].k_cf != base_k_[j] && (j != k || nearest->distance > p.d_max)) fields_[j].k_cf = base_k_[j];
    }
    const Vec3 x = state_.position - nearest->point;
    s.aux = aux_state(x, state_.velocity, fields_[k].b, fields_[k].k_cf);
    s.has_aux = s.aux.v_norm > 0.0;
    if (options_.adapt_kcf && s.has_aux) {
      const KcfAdaptation ad = adapt_kcf(s.aux, fields_[k].k_cf, p.eps_min, nearest->distance, p.d_min);
      if (ad.fired) {
        fields_[k].k_cf = ad.k_cf;
        s.aux = aux_state(x, state_.velocity, fields_[k].b, fields_[k].k_cf);
        s.kcf_adapted = true;
        ++traj_.kcf_adaptations;
      }
    }
  }

  SteeringOptions so;
  so.policy = options_.policy;
  so.include_vlc = options_.mode != Mode::CfOnly;
  const auto t0 = std::chrono::steady_clock::now();
  s.force = steering_force(state_, sc.obstacles, sc.goal, p, fields_, so);
  traj_.total_force_time_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (disturbance_) s.disturbance = disturbance_->next();
  const Vec3 total = s.force.f_total + s.disturbance;
  const int gate = s.force.k_vlc;
  record(std::move(s));

  if (options_.mode != Mode::CfOnly && options_.stop.stop_at_goal && distance(state_.position, sc.goal) <= goal_tol_) {
    traj_.terminated_by = Termination::GoalReached;
    finished_ = true;
  } else {
    const bool gate_on = options_.mode == Mode::CfOnly || gate == 1;
    stall_count_ = (state_.velocity.norm() < options_.stop.stall_speed && gate_on) ? stall_count_ + 1 : 0;
    if (stall_count_ >= options_.stop.stall_steps) {
      traj_.terminated_by = Termination::Stalled;
      finished_ = true;
    } else if (step_ >= n_steps_) {
      traj_.terminated_by = Termination::Horizon;
      finished_ = true;
    }
  }
  if (finished_) return false;

  state_ = step_euler(state_, total, sc.dt, sc.planar);
  ++step_;
  return true;
}

Trajectory simulate(const Scenario& scenario, const SimOptions& options) {
  Simulation sim(scenario, options);
  while (sim.advance()) {
  }
  return sim.take_trajectory();
}

RSTrace simulate_rs(double R0, double S0, double v_norm, double k_cf, double dt, double horizon,
                    const RSPerturbation& perturbation, double collision_radius) {
  if (R0 == 0.0 && S0 == 0.0) throw CollisionError("simulate_rs: start at the origin");
  RSTrace tr;
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
  tr.t.reserve(n + 1);
  tr.R.reserve(n + 1);
  tr.S.reserve(n + 1);
  const double rs_floor = collision_radius * v_norm;
  double R = R0;
  double S = S0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * dt;
    tr.t.push_back(t);
    tr.R.push_back(R);
    tr.S.push_back(S);
    if (std::sqrt(R * R + S * S) < rs_floor) {
      tr.collided = true;
      break;
    }
    if (i == n) break;
    RSRates r = rs_derivatives(R, S, v_norm, k_cf);
    if (perturbation) {
      const RSRates extra = perturbation(t, R, S);
      r.r_dot += extra.r_dot;
      r.s_dot += extra.s_dot;
    }
    R += dt * r.r_dot;
    S += dt * r.s_dot;
  }
  return tr;
}

Vec3 apf_baseline(const RobotState& state, std::span<const Obstacle> obstacles, const Vec3& goal,
                  const PlannerParams& params, const ApfParams& apf) {
  Vec3 f = vlc_force(state, goal, params.k_p, params.k_v, params.v_max);
  for (const auto& obs : obstacles) {
    for (const auto& pt : obs.points()) {
      const Vec3 d = state.position - pt;
      const double rho = d.norm();
      if (rho > apf.rho0) continue;
      if (rho < kAtPointTolerance) throw CollisionError("apf_baseline: robot at obstacle point");
      f += (apf.eta * (1.0 / rho - 1.0 / apf.rho0) / (rho * rho * rho)) * d;
    }
  }
  return f;
}

Trajectory simulate_apf(const Scenario& sc, const ApfParams& apf, const StopRules& stop) {
  Trajectory traj;
  traj.dt = sc.dt;
  const auto n = static_cast<std::size_t>(std::llround(sc.horizon / sc.dt));
  const double goal_tol = stop.goal_tolerance.value_or(sc.params.xi);
  RobotState state = sc.start;
  int stall = 0;
  for (std::size_t i = 0;; ++i) {
    state.time = static_cast<double>(i) * sc.dt;
    Sample s;
    s.t = state.time;
    s.position = state.position;
    s.velocity = state.velocity;
    if (const auto nearest = nearest_obstacle_point(state.position, sc.obstacles)) {
      s.nearest_obstacle_id = nearest->obstacle_id;
      s.nearest_distance = nearest->distance;
      if (nearest->distance < stop.collision_radius) {
        traj.samples.push_back(s);
        traj.terminated_by = Termination::Collision;
        return traj;
      }
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Vec3 f = apf_baseline(state, sc.obstacles, sc.goal, sc.params, apf);
    traj.total_force_time_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    s.force.f_total = f;
    s.force.k_vlc = 1;
    traj.samples.push_back(s);
    if (stop.stop_at_goal && distance(state.position, sc.goal) <= goal_tol) {
      traj.terminated_by = Termination::GoalReached;
      return traj;
    }
    stall = state.velocity.norm() < stop.stall_speed ? stall + 1 : 0;
    if (stall >= stop.stall_steps) {
      traj.terminated_by = Termination::Stalled;
      return traj;
    }
    if (i >= n) {
      traj.terminated_by = Termination::Horizon;
      return traj;
    }
    state = step_euler(state, f, sc.dt, sc.planar);
  }
}

Metrics metrics(const Trajectory& trajectory, std::span<const Obstacle> obstacles) {
  Metrics m;
  const auto& s = trajectory.samples;
  if (s.empty()) return m;
  for (std::size_t i = 1; i < s.size(); ++i) m.path_length += distance(s[i].position, s[i - 1].position);
  m.duration = s.back().t - s.front().t;
  m.min_obstacle_distance = std::numeric_limits<double>::infinity();
  for (const auto& smp : s) {
    for (const auto& obs : obstacles) {
      for (const auto& p : obs.points()) m.min_obstacle_distance = std::min(m.min_obstacle_distance, distance(smp.position, p));
    }
  }
  m.mean_step_compute_time = trajectory.total_force_time_s / static_cast<double>(s.size());
  return m;
}

}  // namespace cfp
