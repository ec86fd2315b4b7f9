// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cfp/agents.hpp"
#include "cfp/aux_analysis.hpp"
#include "cfp/forces.hpp"
#include "cfp/simulator.hpp"
#include "cfp/verification.hpp"
#include "oracles.hpp"

using namespace cfp;
using clock_type = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass = true;
  std::ostringstream info;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      info << "[failed: " << what << "] ";
    }
  }
  void runner(const CheckResult& r) {
    info << r.claim << ' ' << r.n_pass << '/' << r.n_cases << "; ";
    require(r.passed(), r.claim + " " + r.detail);
  }
};

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// Speed drift of CF-only runs at two step sizes.
void criterion_1(Outcome& o) {
  const auto t0 = clock_type::now();
  const CheckResult coarse = check_velocity_invariance(100, kSeed, 1e-3, 5.0);
  const CheckResult fine = check_velocity_invariance(100, kSeed, 1e-5, 5.0);
  const double elapsed = seconds_since(t0);
  o.runner(coarse);
  o.runner(fine);
  o.require(coarse.tolerance == 1e-3 && fine.tolerance == 1e-5, "tolerances");
  o.info << "worst margin dt=1e-3 " << coarse.worst_margin << ", dt=1e-5 " << fine.worst_margin << "; runtime "
         << elapsed << " s";
  o.require(elapsed < 30.0, "runtime >= 30 s");
}

// R^2 + S^2 = |x|^2 |x_dot|^2 at every sample, with the right-hand side rebuilt
// from positions by an exhaustive nearest-point scan.
void criterion_2(Outcome& o) {
  o.runner(check_rs_identity(20, kSeed));
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  std::size_t samples = 0;
  for (int run = 0; run < 5; ++run) {
    Scenario sc;
    std::vector<Vec3> pts;
    std::vector<std::vector<oracle::V3>> clouds(1);
    for (int i = 0; i < 40; ++i) {
      const Vec3 p{2.0 + 0.5 * u(rng), 0.5 * u(rng), 0.0};
      pts.push_back(p);
      clouds[0].push_back({p.x, p.y, 0.0});
    }
    sc.obstacles.emplace_back(0, pts, Vec3{0, 0, run % 2 ? 1.0 : -1.0});
    sc.start.velocity = {0.8, 0.2 * u(rng), 0.0};
    sc.params.k_cf = 0.3;
    sc.params.d_max = 1.0;
    sc.horizon = 4.0;
    SimOptions opt;
    opt.mode = Mode::CfOnly;
    const Trajectory tr = simulate(sc, opt);
    for (const Sample& s : tr.samples) {
      if (!s.has_aux) continue;
      const auto nn = oracle::brute_nearest({s.position.x, s.position.y, 0.0}, clouds);
      const double rhs = nn.dist * nn.dist * s.velocity.squared_norm();
      worst = std::max(worst, std::abs(s.aux.rs_norm_sq() - rhs) / rhs);
      ++samples;
    }
  }
  o.info << "independent recheck " << samples << " samples, worst rel err " << worst;
  o.require(samples > 0 && worst <= 1e-9, "identity error above 1e-9");
}

// Heading sweep: collisions only at the derived ray heading; the collision
// measure halves with the grid spacing.
void criterion_3(Outcome& o) {
  // eps = S + cR = 0 on the unit circle with x = (1,0,0), |v| = 1, c = 1:
  // S = sin th, R = cos th, so tan th = -1 with R < 0.
  double ray_deg = -1.0;
  for (int i = 0; i < 3600; ++i) {
    const double th = 2.0 * M_PI * i / 3600.0;
    const oracle::V3 x{1, 0, 0}, v{std::cos(th), std::sin(th), 0};
    const double eps = oracle::cross(x, v)[2] + oracle::dot(x, v);
    if (oracle::dot(x, v) < 0 && oracle::cross(x, v)[2] > 0 && std::abs(eps) < 1e-12) ray_deg = i / 10.0;
  }
  o.info << "derived ray heading " << ray_deg << " deg; ";
  o.require(ray_deg == 135.0, "ray heading");

  const CheckResult r = check_collision_ray(3600, kSeed);
  o.runner(r);
  const HeadingSweep coarse = sweep_headings_rs(3600, 1.0, 1.0, 1.0, 1e-3, 20.0);
  const HeadingSweep fine = sweep_headings_rs(7200, 1.0, 1.0, 1.0, 1e-3, 20.0);
  for (const HeadingSweep* sw : {&coarse, &fine}) {
    const double cell = 360.0 / static_cast<double>(sw->n_headings);
    o.require(!sw->collided.empty(), "no collision found on the ray");
    for (auto i : sw->collided) o.require(std::abs(cell * static_cast<double>(i) - ray_deg) <= cell, "collision off the ray");
  }
  const double ratio = fine.collision_measure_deg / coarse.collision_measure_deg;
  o.info << "measure " << coarse.collision_measure_deg << " -> " << fine.collision_measure_deg << " deg (ratio " << ratio
         << ")";
  o.require(std::abs(ratio - 0.5) < 1e-9, "measure did not halve");
}

// Time to the origin from the ray, RK4 oracle against S0 (1 + c^2)/k.
void criterion_4(Outcome& o) {
  o.runner(check_ray_collision_time(3, kSeed));
  for (double c : {0.5, 1.0, 2.0}) {
    const double v = 1.0;
    const double k = c * v * v;
    const double S0 = 1.0;
    const double R0 = -S0 / c;
    const double predicted = collision_time_on_ray(S0, c, k);
    const double t = oracle::rs_time_to_origin(R0, S0, v, k, 1e-5, 10.0, 1e-4);
    const double rel = std::abs(t - predicted) / predicted;
    o.info << "c=" << c << " rel err " << rel << "; ";
    o.require(t > 0.0 && rel <= 0.02, "time off by more than 2%");
  }
}

void criterion_5(Outcome& o) {
  o.runner(check_moving_away(500, kSeed));
  o.runner(check_following_field(500, kSeed));
  o.runner(check_critical_quadrant(500, kSeed));
  o.runner(check_epsilon_dynamics(1000, kSeed));
}

void criterion_6(Outcome& o) {
  o.runner(check_disturbed_rates(1000, kSeed));
  o.runner(check_disturbed_moving_away(500, kSeed));
  o.runner(check_disturbed_following_field(500, kSeed));
  o.runner(check_disturbed_critical(500, kSeed));
}

void criterion_7(Outcome& o) {
  const CheckResult r = check_velocity_bounds(12, kSeed);
  o.runner(r);
  o.info << "largest tol " << r.tolerance;
}

double huber(const Vec3& x, const Vec3& g, const PlannerParams& p) {
  const double e = (x - g).norm();
  const double a = p.k_v * p.v_max / p.k_p;  // knee
  return e <= a ? 0.5 * p.k_p * e * e : p.k_p * a * (e - 0.5 * a);
}

// Cluttered goal run, Lyapunov monotonicity, table metrics and the U-trap.
void criterion_8(Outcome& o) {
  const Scenario sc = scenario_battery(kSeed)[2];
  o.require(sc.obstacles.size() >= 3, "fewer than 3 obstacles");
  for (const auto& ob : sc.obstacles) o.require(ob.size() >= 50, "obstacle with < 50 points");
  SimOptions opt;
  opt.stop.goal_tolerance = 0.05;
  const Trajectory tr = simulate(sc, opt);
  const Metrics m = metrics(tr, sc.obstacles);
  o.require(tr.terminated_by == Termination::GoalReached, "goal not reached");
  o.require(distance(tr.back().position, sc.goal) <= 0.05, "terminal distance");
  o.require(m.min_obstacle_distance > opt.stop.collision_radius, "collision");

  const PlannerParams& p = sc.params;
  double worst = std::numeric_limits<double>::infinity();
  std::size_t gated = 0;
  for (std::size_t j = 0; j + 1 < tr.samples.size(); ++j) {
    const Sample& a = tr.samples[j];
    if (a.force.k_vlc != 1) continue;
    const Sample& b = tr.samples[j + 1];
    const double v0 = 0.5 * a.velocity.squared_norm() + huber(a.position, sc.goal, p);
    const double v1 = 0.5 * b.velocity.squared_norm() + huber(b.position, sc.goal, p);
    // Euler defect: dt^2/2 (|F|^2 + k_p |v|^2) bounds the second-order terms
    const double allow = 0.5 * sc.dt * sc.dt * (a.force.f_total.squared_norm() + p.k_p * a.velocity.squared_norm()) +
                         1e-12 * (1.0 + std::abs(v0));
    worst = std::min(worst, allow - (v1 - v0));
    ++gated;
  }
  o.require(worst >= 0.0, "Lyapunov increase beyond the per-step tolerance");

  char row[160];
  std::snprintf(row, sizeof row, "| CFP | Length %.2f m | Duration %.1f s | Min. Dist. %.2f m | Comp. Time %.1f us |",
                m.path_length, m.duration, m.min_obstacle_distance, m.mean_step_compute_time * 1e6);
  o.info << row << ' ' << gated << " gated steps, worst Lyapunov margin " << worst << "; ";

  const Scenario trap = u_trap_scenario();
  const Trajectory apf = simulate_apf(trap, u_trap_apf_params());
  const Trajectory cfp = simulate(trap, {});
  o.info << "U-trap APF " << to_string(apf.terminated_by) << ", CFP " << to_string(cfp.terminated_by);
  o.require(apf.terminated_by == Termination::Stalled, "APF not stalled");
  o.require(cfp.terminated_by == Termination::GoalReached, "CFP failed the U-trap");
}

// Property test of the adapted gain plus the simulated runner.
void criterion_9(Outcome& o) {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double eps_min = 0.05;
  double worst = 0.0;
  int fired = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = 0.3 + 2.0 * u(rng);
    const double k = 0.1 + 2.0 * u(rng);
    const double R = -(0.01 + u(rng));
    const double c = k / (v * v);
    const double eps = (2.0 * u(rng) - 1.0) * eps_min * 0.999;
    const double S = eps - c * R;
    if (!(S > 0.0)) continue;
    AuxState a;
    a.R = R;
    a.S = S;
    a.c = c;
    a.eps = S + c * R;
    a.v_norm = v;
    const KcfAdaptation ad = adapt_kcf(a, k, eps_min, 0.01, 0.1);
    if (!ad.fired) {
      o.require(false, "adaptation did not fire");
      continue;
    }
    ++fired;
    const double new_eps = S + ad.k_cf / (v * v) * R;
    const double want = a.eps >= 0.0 ? eps_min : -eps_min;
    worst = std::max(worst, std::abs(new_eps - want));
  }
  o.info << fired << " adaptations, worst |eps - eps_min sgn| " << worst << "; ";
  o.require(worst <= 1e-12, "recomputed eps off");
  o.runner(check_kcf_adaptation(10000, kSeed));
}

void criterion_10(Outcome& o) {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100000; ++i) {
    const double c_min = std::exp(std::log(0.1) + u(rng) * std::log(100.0));
    const double c = c_min * (1.0 + 3.0 * u(rng));
    const double R = -std::exp(-3.0 + 6.0 * u(rng));
    const double S = -c * R * (1.0 + 1e-6 + 5.0 * u(rng));  // S + cR > 0
    const double ratio = R * S / (R * R + S * S);
    const double bound = c_min >= 1.0 ? -c_min / (c_min * c_min + 1.0) : -0.5;
    margin = std::min(margin, ratio - bound);
  }
  o.info << "independent samples 100000, min margin " << margin << "; ";
  o.require(margin > 0.0, "ratio bound violated");
  o.runner(check_rs_ratio_bound(100000, kSeed));
  o.runner(check_small_s_barrier(200, kSeed));
}

// Virtual agents around one point obstacle for 3600 headings.
void criterion_11(Outcome& o) {
  auto scenario_for = [](double th) {
    Scenario sc;
    sc.params.k_cf = 1.0;
    sc.params.d_max = 2.0;
    sc.params.v_min = 0.5;
    sc.params.v_max = 1.0;
    sc.start.position = {1.0, 0.0, 0.0};
    sc.start.velocity = {std::cos(th), std::sin(th), 0.0};
    sc.goal = {-3.0, 0.0, 0.0};
    sc.obstacles.emplace_back(0, std::vector<Vec3>{{0.0, 0.0, 0.0}}, Vec3{0, 0, 1});
    sc.horizon = 4.0;
    return sc;
  };
  AgentOptions opt;
  opt.dt_pred = 1e-3;
  opt.sim.record_samples = false;
  opt.sim.mode = Mode::CfOnly;
  opt.sim.adapt_kcf = false;
  std::size_t without_finished = 0, collided = 0;
  for (int i = 0; i < 3600; ++i) {
    const AgentTree t = run_agents(scenario_for(2.0 * M_PI * i / 3600.0), opt);
    bool any = false;
    for (const auto& a : t.agents) {
      any = any || a.status == AgentStatus::Finished;
      collided += a.status == AgentStatus::Collided;
    }
    without_finished += !any;
  }
  o.info << "3600 headings, " << collided << " collided agents, " << without_finished << " without a finished agent; ";
  o.require(without_finished == 0, "heading without a finished agent");

  AgentOptions det;
  det.dt_pred = 1e-2;
  const Scenario sc = scenario_battery(kSeed)[2];
  const AgentTree a = run_agents(sc, det);
  const AgentTree b = run_agents(sc, det);
  det.parallel = false;
  const AgentTree c = run_agents(sc, det);
  const auto ba = select_best(a.agents), bb = select_best(b.agents), bc = select_best(c.agents);
  o.require(ba && ba == bb && ba == bc, "selection differs");
  if (ba && bb && bc) {
    o.require(a.agents[*ba].cost == b.agents[*bb].cost && a.agents[*ba].cost == c.agents[*bc].cost, "cost differs");
    o.info << "deterministic best agent " << *ba << " cost " << a.agents[*ba].cost << "; ";
  }

  Scenario many;
  many.params = cluttered_params();
  many.start.velocity = {0.5, 0, 0};
  many.goal = {6, 0, 0};
  for (int j = 0; j < 5; ++j) {
    const double ang = 0.4 + 0.6 * j;
    many.obstacles.emplace_back(j, std::vector<Vec3>{{0.5 * std::cos(ang), 0.5 * std::sin(ang), 0}}, Vec3{0, 0, 1});
  }
  AgentOptions capo;
  capo.dt_pred = 1e-2;
  capo.horizon = 2.0;
  capo.sim.record_samples = false;
  const AgentTree t = run_agents(many, capo);
  o.info << "default cap " << capo.cap << ", max concurrent " << t.max_concurrent;
  o.require(capo.cap >= 22 && t.max_concurrent >= 22, "cap below 22");
}

// Steering force with 1000 in-range points.
void criterion_12(Outcome& o) {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI), rad(0.2, 0.9);
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i) {
    const double a = ang(rng), r = rad(rng);
    pts.push_back({r * std::cos(a), r * std::sin(a), 0.0});
  }
  std::vector<Obstacle> obs;
  obs.emplace_back(0, pts, Vec3{0, 0, 1});
  PlannerParams p;
  p.d_max = 1.0;
  RobotState s;
  s.velocity = {0.6, 0.4, 0.0};
  SteeringOptions so;
  so.policy = ExecutionPolicy::Auto;
  std::vector<double> ticks;
  volatile double sink = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const auto t0 = clock_type::now();
    const ForceBreakdown f = steering_force(s, obs, {5, 0, 0}, p, {}, so);
    ticks.push_back(seconds_since(t0));
    sink = sink + f.f_total.x;
  }
  std::sort(ticks.begin(), ticks.end());
  const double median = ticks[ticks.size() / 2];
  const double p99 = ticks[ticks.size() * 99 / 100];
  o.info << "median " << median * 1e6 << " us, p99 " << p99 * 1e6 << " us per tick";
  o.require(median < 1e-3, "median tick >= 1 ms");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"velocity invariance", criterion_1},
      {"R-S identity", criterion_2},
      {"collision ray iff", criterion_3},
      {"ray collision time", criterion_4},
      {"quadrant guarantees", criterion_5},
      {"disturbance robustness", criterion_6},
      {"velocity envelope", criterion_7},
      {"goal convergence", criterion_8},
      {"k_cf adaptation", criterion_9},
      {"ratio bound and uniform barrier", criterion_10},
      {"virtual agents", criterion_11},
      {"force evaluation time", criterion_12},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = clock_type::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::printf("%s criterion %2zu %-32s (%.1f s) %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                seconds_since(t0), o.info.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
