#include <doctest.h>

#include <random>

#include "cfp/errors.hpp"
#include "cfp/world.hpp"
#include "oracles.hpp"

using namespace cfp;

TEST_CASE("c_max bound: k=1, v in [1,1] passes") {
  PlannerParams p;
  p.k_cf = 1.0;
  p.v_min = 1.0;
  p.v_max = 1.0;
  const auto r = validate_params(p, true);
  const auto* c = r.find("c_max_bound");
  REQUIRE(c != nullptr);
  CHECK(c->passed);
}

TEST_CASE("c_max bound: k=1, v_min=0.5, v_max=1 fails") {
  PlannerParams p;
  p.k_cf = 1.0;
  p.v_min = 0.5;
  p.v_max = 1.0;
  const auto r = validate_params(p, true);
  CHECK_FALSE(r.find("c_max_bound")->passed);
  CHECK_FALSE(r.all_passed());
}

TEST_CASE("c_max bound: k=2, v in [1,1] passes against (c_min^2+1)/c_min") {
  PlannerParams p;
  p.k_cf = 2.0;
  p.v_min = 1.0;
  p.v_max = 1.0;
  CHECK(validate_params(p, true).find("c_max_bound")->passed);
  CHECK(c_max_limit(2.0) == doctest::Approx(2.5));
  CHECK(c_max_limit(0.5) == doctest::Approx(2.0));
}

TEST_CASE("c_max bound is skipped without velocity bounds") {
  PlannerParams p;
  p.v_min = 0.1;
  CHECK(validate_params(p, false).find("c_max_bound")->passed);
}

TEST_CASE("validate_params reports each constraint and is pure") {
  PlannerParams p;
  p.d_min = 2.0;
  p.eps_min = 0.0;
  p.xi = -1.0;
  const auto a = validate_params(p, false);
  const auto b = validate_params(p, false);
  CHECK_FALSE(a.find("d_min_lt_d_max")->passed);
  CHECK_FALSE(a.find("eps_min_positive")->passed);
  CHECK_FALSE(a.find("xi_positive")->passed);
  CHECK(a.find("gains_positive")->passed);
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    CHECK(a.checks[i].name == b.checks[i].name);
    CHECK(a.checks[i].passed == b.checks[i].passed);
  }
}

TEST_CASE("obstacle construction") {
  const Vec3 up{0, 0, 1};
  CHECK_THROWS_AS(Obstacle(0, {}, up), ScenarioError);
  CHECK_THROWS_AS(Obstacle(0, {{1, 0, 0}}, Vec3{0, 0, 2}), ScenarioError);
  const Obstacle o(3, {{1, 0, 0}, {1, 0, 0}, {1 + 5e-10, 0, 0}, {2, 0, 0}}, up);
  CHECK(o.size() == 2);
  CHECK(o.points()[1] == Vec3{2, 0, 0});
  CHECK(o.id() == 3);
}

TEST_CASE("nearest point examples") {
  const Vec3 up{0, 0, 1};
  std::vector<Obstacle> obs;
  obs.emplace_back(0, std::vector<Vec3>{{1, 0, 0}, {0, 2, 0}}, up);
  auto n = nearest_obstacle_point({0, 0, 0}, obs);
  REQUIRE(n);
  CHECK(n->point == Vec3{1, 0, 0});
  CHECK(n->distance == doctest::Approx(1.0));

  std::vector<Obstacle> tie;
  tie.emplace_back(0, std::vector<Vec3>{{1, 0, 0}, {-1, 0, 0}}, up);
  n = nearest_obstacle_point({0, 0, 0}, tie);
  CHECK(n->point_index == 0);

  std::vector<Obstacle> tie2;
  tie2.emplace_back(1, std::vector<Vec3>{{1, 0, 0}}, up);
  tie2.emplace_back(0, std::vector<Vec3>{{-1, 0, 0}}, up);
  n = nearest_obstacle_point({0, 0, 0}, tie2);
  CHECK(n->obstacle_id == 0);

  CHECK_FALSE(nearest_obstacle_point({0, 0, 0}, std::vector<Obstacle>{}).has_value());
}

TEST_CASE("nearest point agrees with exhaustive scan") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<oracle::V3>> clouds(3);
    std::vector<Obstacle> obs;
    for (int c = 0; c < 3; ++c) {
      std::vector<Vec3> pts;
      for (int i = 0; i < 34; ++i) {
        const Vec3 p{u(rng), u(rng), u(rng)};
        pts.push_back(p);
        clouds[c].push_back({p.x, p.y, p.z});
      }
      obs.emplace_back(c, pts, Vec3{0, 0, 1});
    }
    const Vec3 x{u(rng), u(rng), u(rng)};
    const auto want = oracle::brute_nearest({x.x, x.y, x.z}, clouds);
    const auto got = nearest_obstacle_point(x, obs);
    REQUIRE(got);
    CHECK(got->obstacle_index == want.cloud);
    CHECK(got->point_index == want.index);
    CHECK(got->distance == doctest::Approx(want.dist).epsilon(1e-14));
  }
}

TEST_CASE("scenario validation") {
  Scenario s;
  s.goal = {1, 0, 0};
  s.obstacles.emplace_back(0, std::vector<Vec3>{{0, 0, 0}}, Vec3{0, 0, 1});
  CHECK_THROWS_AS(validate_scenario(s), ScenarioError);  // start on a point
  s.start.position = {0, 1, 0};
  CHECK_NOTHROW(validate_scenario(s));
  s.dt = 0.0;
  CHECK_THROWS_AS(validate_scenario(s), ScenarioError);
  s.dt = 1e-3;
  s.obstacles.clear();
  s.obstacles.emplace_back(0, std::vector<Vec3>{{2, 0, 0}}, Vec3{1, 0, 0});
  CHECK_THROWS_AS(validate_scenario(s), ScenarioError);  // planar needs b = +-z
  s.planar = false;
  CHECK_NOTHROW(validate_scenario(s));
}
