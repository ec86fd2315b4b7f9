#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cfp/aux_analysis.hpp"
#include "cfp/errors.hpp"
#include "cfp/simulator.hpp"
#include "cfp/verification.hpp"
#include "oracles.hpp"

using namespace cfp;

namespace {

Scenario single_point(const Vec3& start, const Vec3& v0, double k = 1.0) {
  Scenario sc;
  sc.start.position = start;
  sc.start.velocity = v0;
  sc.obstacles.emplace_back(0, std::vector<Vec3>{{0, 0, 0}}, Vec3{0, 0, 1});
  sc.params.k_cf = k;
  sc.params.d_max = 10.0;
  sc.goal = {50, 0, 0};
  return sc;
}

}  // namespace

TEST_CASE("euler step ordering") {
  RobotState s;
  s.velocity = {1, 0, 0};
  auto n = step_euler(s, {}, 1e-3);
  CHECK(n.position == Vec3{1e-3, 0, 0});
  n = step_euler(s, {0, 2, 0}, 0.5);
  CHECK(n.velocity == Vec3{1, 1, 0});
  CHECK(n.position == Vec3{0.5, 0, 0});  // old velocity moves the position
  s.velocity = {0, 0, 3};
  CHECK(step_euler(s, {0, 0, 1}, 0.1, true).position.z == 0.0);
  CHECK_THROWS_AS(step_euler(s, {NAN, 0, 0}, 0.1), IntegrationError);
}

TEST_CASE("constant force integrates exactly") {
  RobotState s;
  s.velocity = {0.5, 0, 0};
  const int n = 1000;
  const double dt = 1e-3;
  for (int i = 0; i < n; ++i) s = step_euler(s, {0, 1, 0}, dt);
  CHECK(std::abs(s.velocity.y - n * dt) <= 1e-12);
  // position: sum of old velocities
  CHECK(s.position.y == doctest::Approx(dt * dt * n * (n - 1) / 2.0).epsilon(1e-12));
}

TEST_CASE("row count and uniform time grid") {
  Scenario sc;
  sc.start.velocity = {1, 0, 0};
  sc.goal = {100, 0, 0};
  sc.horizon = 0.5;
  sc.dt = 1e-3;
  const Trajectory tr = simulate(sc, {});
  CHECK(tr.terminated_by == Termination::Horizon);
  CHECK(tr.samples.size() == 501);
  for (std::size_t i = 0; i < tr.samples.size(); ++i) CHECK(tr.samples[i].t == doctest::Approx(i * 1e-3));
}

TEST_CASE("obstacle-free run reaches the goal") {
  Scenario sc;
  sc.start.velocity = {0, 0.5, 0};
  sc.goal = {3, 1, 0};
  sc.params = cluttered_params();
  sc.horizon = 30;
  const Trajectory tr = simulate(sc, {});
  CHECK(tr.terminated_by == Termination::GoalReached);
  CHECK(distance(tr.back().position, sc.goal) <= sc.params.xi);
}

TEST_CASE("CF-only speed drift and step halving") {
  const Scenario coarse = [] {
    auto s = single_point({1, 0, 0}, {-0.6, 0.8, 0}, 0.5);
    s.horizon = 1.0;
    s.dt = 1e-4;
    return s;
  }();
  SimOptions opt;
  opt.mode = Mode::CfOnly;
  opt.adapt_kcf = false;
  const Trajectory a = simulate(coarse, opt);
  Scenario fine = coarse;
  fine.dt = 5e-5;
  const Trajectory b = simulate(fine, opt);
  const double v0 = coarse.start.velocity.norm();
  const double da = std::abs(a.back().velocity.norm() - v0) / v0;
  const double db = std::abs(b.back().velocity.norm() - v0) / v0;
  CHECK(da <= 1e-3);
  CHECK(db < da);  // Euler drift shrinks with the step
}

TEST_CASE("Cartesian Euler follows the RK4 oracle") {
  Scenario sc = single_point({1.5, 0.2, 0}, {-0.8, 0.1, 0}, 0.6);
  sc.horizon = 2.0;
  sc.dt = 1e-5;
  SimOptions opt;
  opt.mode = Mode::CfOnly;
  opt.adapt_kcf = false;
  const Trajectory tr = simulate(sc, opt);
  const oracle::PlanarPoint sys{0.6, 1.0};
  std::array<double, 4> s{1.5, 0.2, -0.8, 0.1};
  for (int i = 0; i < 2000; ++i) s = sys.rk4(s, 1e-3);
  const Sample& e = tr.back();
  CHECK(std::hypot(e.position.x - s[0], e.position.y - s[1]) < 1e-4);
}

TEST_CASE("aux trace agrees with simulate_rs") {
  Scenario sc = single_point({1.0, 0.3, 0}, {-0.5, 0.5, 0}, 0.8);
  sc.horizon = 1.0;
  sc.dt = 1e-5;
  SimOptions opt;
  opt.mode = Mode::CfOnly;
  opt.adapt_kcf = false;
  const Trajectory tr = simulate(sc, opt);
  const auto& a0 = tr.samples.front().aux;
  const RSTrace rs = simulate_rs(a0.R, a0.S, a0.v_norm, 0.8, 1e-5, 1.0);
  REQUIRE(rs.R.size() == tr.samples.size());
  const auto& e = tr.back().aux;
  CHECK(e.R == doctest::Approx(rs.R.back()).epsilon(1e-3));
  CHECK(e.S == doctest::Approx(rs.S.back()).epsilon(1e-3));
}

TEST_CASE("simulate_rs quadrant behaviour") {
  const RSTrace f = simulate_rs(0, -1, 1, 1, 1e-3, 5);
  for (std::size_t i = 1; i < f.S.size(); ++i) CHECK(f.S[i] <= f.S[i - 1] + 1e-15);
  const RSTrace c = simulate_rs(-3, 3, 1, 0.5, 1e-3, 20);
  const double tau = exit_time_bound(-3, 3, 0.5, 0.5).tau_max;
  double exit = -1;
  for (std::size_t i = 0; i < c.R.size(); ++i) {
    if (c.R[i] >= 0) {
      exit = c.t[i];
      break;
    }
  }
  CHECK(exit > 0);
  CHECK(exit <= tau);
  const double S0 = 1.0;
  const RSTrace ray = simulate_rs(-S0, S0, 1, 1, 1e-4, 5, {}, 1e-4);
  CHECK(ray.collided);
  CHECK(ray.t.back() == doctest::Approx(collision_time_on_ray(S0, 1, 1)).epsilon(1e-3));
  CHECK_THROWS_AS(simulate_rs(0, 0, 1, 1, 1e-3, 1), CollisionError);
}

TEST_CASE("on-ray Cartesian run collides near the predicted time") {
  const double h = std::sqrt(0.5);
  Scenario sc = single_point({1, 0, 0}, {-h, h, 0}, 1.0);
  sc.horizon = 3.0;
  SimOptions opt;
  opt.mode = Mode::CfOnly;
  opt.adapt_kcf = false;
  // the ray repels, so Euler drift keeps the path just off the point; the
  // closest approach shrinks with dt and happens at the predicted time
  double prev = 1.0;
  for (double dt : {1e-4, 1e-5}) {
    sc.dt = dt;
    double dmin = 1.0, tmin = 0.0;
    SimOptions o = opt;
    o.record_samples = false;
    o.on_sample = [&](const Sample& s) {
      if (s.nearest_distance < dmin) {
        dmin = s.nearest_distance;
        tmin = s.t;
      }
    };
    simulate(sc, o);
    CHECK(dmin < prev);
    CHECK(tmin == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
    prev = dmin;
  }
  sc.dt = 1e-5;
  opt.stop.collision_radius = 1e-2;
  const Trajectory tr = simulate(sc, opt);
  CHECK(tr.terminated_by == Termination::Collision);
  CHECK(tr.back().t == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("off-ray head-on run respects the distance bound") {
  Scenario sc = single_point({1, 0, 0}, {-0.8, 0.6, 0}, 1.0);
  sc.dt = 1e-4;
  sc.horizon = 5.0;
  SimOptions opt;
  opt.mode = Mode::CfOnly;
  opt.adapt_kcf = false;
  const Trajectory tr = simulate(sc, opt);
  CHECK(tr.terminated_by == Termination::Horizon);
  DistanceBoundInputs in;
  in.aux0 = tr.samples.front().aux;
  const double bound = min_distance_bound(in);
  CHECK(bound > 0.0);
  double critical_min = 1e9;
  for (const auto& s : tr.samples) {
    if (s.aux.R < 0.0 && s.aux.S > 0.0) critical_min = std::min(critical_min, s.nearest_distance);
  }
  CHECK(critical_min >= 0.99 * bound);
}

TEST_CASE("disturbance generator is seeded and bounded") {
  DisturbanceGenerator a({0.3, 7}, true), b({0.3, 7}, true);
  for (int i = 0; i < 100; ++i) {
    const Vec3 za = a.next();
    CHECK(za == b.next());
    CHECK(za.norm() == doctest::Approx(0.3));
    CHECK(za.z == 0.0);
  }
}

TEST_CASE("metrics") {
  Trajectory tr;
  tr.dt = 0.1;
  for (int i = 0; i <= 10; ++i) {
    Sample s;
    s.t = 0.1 * i;
    s.position = {0.1 * i, 0, 0};
    tr.samples.push_back(s);
  }
  std::vector<Obstacle> obs;
  obs.emplace_back(0, std::vector<Vec3>{{0.5, 0.4, 0}}, Vec3{0, 0, 1});
  const Metrics m = metrics(tr, obs);
  CHECK(m.path_length == doctest::Approx(1.0));
  CHECK(m.duration == doctest::Approx(1.0));
  CHECK(m.min_obstacle_distance == doctest::Approx(0.4));
  CHECK(std::isinf(metrics(tr, std::vector<Obstacle>{}).min_obstacle_distance));

  Trajectory arc;
  const double r = 2.0, w = 0.5, dt = 1e-3;
  for (int i = 0; i <= 2000; ++i) {
    Sample s;
    s.t = i * dt;
    s.position = {r * std::cos(w * s.t), r * std::sin(w * s.t), 0};
    arc.samples.push_back(s);
  }
  CHECK(metrics(arc, {}).path_length == doctest::Approx(r * w * 2.0).epsilon(1e-3));
}

TEST_CASE("APF baseline") {
  PlannerParams p;
  RobotState s;
  std::vector<Obstacle> far;
  far.emplace_back(0, std::vector<Vec3>{{10, 10, 0}}, Vec3{0, 0, 1});
  const Vec3 goal{2, 0, 0};
  CHECK(apf_baseline(s, far, goal, p, {1.0, 1.0}) == vlc_force(s, goal, p.k_p, p.k_v, p.v_max));
  std::vector<Obstacle> near;
  near.emplace_back(0, std::vector<Vec3>{{0.5, 0, 0}}, Vec3{0, 0, 1});
  const Vec3 f = apf_baseline(s, near, goal, p, {1.0, 1.0});
  // eta (1/rho - 1/rho0)/rho^2 = 1 * (2 - 1) * 4 = 4 pointing away
  CHECK(f.x == doctest::Approx(vlc_force(s, goal, p.k_p, p.k_v, p.v_max).x - 4.0));
}

TEST_CASE("APF stalls in the U-trap while CFP gets through") {
  const Scenario sc = u_trap_scenario();
  const Trajectory apf = simulate_apf(sc, u_trap_apf_params());
  CHECK(apf.terminated_by == Termination::Stalled);
  const Trajectory cfp = simulate(sc, {});
  CHECK(cfp.terminated_by == Termination::GoalReached);
}
