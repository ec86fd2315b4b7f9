#include "cfp/world.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <sstream>

#include "cfp/errors.hpp"

namespace cfp {

Obstacle::Obstacle(int id, std::vector<Vec3> points, Vec3 b) : id_(id), b_(b) {
  if (points.empty()) {
    throw ScenarioError("obstacle " + std::to_string(id) + ": empty point cloud");
  }
  if (!b.is_finite() || std::abs(b.norm() - 1.0) > kUnitTolerance) {
    throw ScenarioError("obstacle " + std::to_string(id) + ": magnetic field vector must have unit length");
  }
  // Hash grid with cell size equal to the tolerance: a duplicate can only sit
  // in one of the 27 cells around a point.
  struct CellHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& c) const {
      std::uint64_t h = 1469598103934665603ull;
      for (auto v : c) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ull;
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<std::size_t>, CellHash> grid;
  grid.reserve(points.size());
  const auto cell_of = [](const Vec3& p) {
    return std::array<std::int64_t, 3>{static_cast<std::int64_t>(std::floor(p.x / kDuplicateTolerance)),
                                       static_cast<std::int64_t>(std::floor(p.y / kDuplicateTolerance)),
                                       static_cast<std::int64_t>(std::floor(p.z / kDuplicateTolerance))};
  };
  points_.reserve(points.size());
  for (const auto& p : points) {
    if (!p.is_finite()) {
      throw ScenarioError("obstacle " + std::to_string(id) + ": non-finite point");
    }
    const auto c = cell_of(p);
    bool duplicate = false;
    for (std::int64_t dx = -1; dx <= 1 && !duplicate; ++dx) {
      for (std::int64_t dy = -1; dy <= 1 && !duplicate; ++dy) {
        for (std::int64_t dz = -1; dz <= 1 && !duplicate; ++dz) {
          const auto it = grid.find({c[0] + dx, c[1] + dy, c[2] + dz});
          if (it == grid.end()) continue;
          for (std::size_t k : it->second) {
            if (distance(points_[k], p) <= kDuplicateTolerance) {
              duplicate = true;
              break;
            }
          }
        }
      }
    }
    if (duplicate) continue;
    grid[c].push_back(points_.size());
    points_.push_back(p);
  }
}

bool ValidationReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const ConstraintCheck* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

double c_max_limit(double c_min) { return c_min >= 1.0 ? (c_min * c_min + 1.0) / c_min : 2.0; }

namespace {

std::string fmt_pair(const char* lhs, double a, const char* op, const char* rhs, double b) {
  std::ostringstream os;
  os.precision(6);
  os << lhs << '=' << a << ' ' << op << ' ' << rhs << '=' << b;
  return os.str();
}

}  // namespace

ValidationReport validate_params(const PlannerParams& p, bool v_bounds_active) {
  ValidationReport r;
  r.checks.push_back({"gains_positive", p.k_cf > 0.0 && p.k_p > 0.0 && p.k_v > 0.0, "k_cf, k_p, k_v > 0"});
  r.checks.push_back({"v_min_lt_v_max", p.v_min > 0.0 && p.v_min < p.v_max,
                      fmt_pair("v_min", p.v_min, "<", "v_max", p.v_max)});
  r.checks.push_back({"d_min_lt_d_max", p.d_min > 0.0 && p.d_min < p.d_max,
                      fmt_pair("d_min", p.d_min, "<", "d_max", p.d_max)});
  r.checks.push_back({"eps_min_positive", p.eps_min > 0.0, "eps_min > 0"});
  r.checks.push_back({"xi_positive", p.xi > 0.0, "xi > 0"});
  r.checks.push_back({"k_vlc_scale_nonnegative", p.k_vlc_scale >= 0.0, "k_vlc_scale >= 0"});
  if (v_bounds_active) {
    const bool speeds_ok = p.v_min > 0.0 && p.v_max > 0.0;
    const double c_min = speeds_ok ? p.c_min() : 0.0;
    const double c_max = speeds_ok ? p.c_max() : 0.0;
    const double limit = c_max_limit(c_min);
    r.checks.push_back({"c_max_bound", speeds_ok && c_max < limit, fmt_pair("c_max", c_max, "<", "limit", limit)});
  } else {
    r.checks.push_back({"c_max_bound", true, "not evaluated (velocity bounds inactive)"});
  }
  return r;
}

void validate_scenario(const Scenario& s) {
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw ScenarioError("dt must be positive");
  if (!(s.horizon > 0.0) || !std::isfinite(s.horizon)) throw ScenarioError("horizon must be positive");
  if (!s.start.position.is_finite() || !s.start.velocity.is_finite() || !s.goal.is_finite()) {
    throw ScenarioError("start state and goal must be finite");
  }
  for (const auto& obs : s.obstacles) {
    for (const auto& p : obs.points()) {
      if (distance(p, s.start.position) < 1e-6) {
        throw ScenarioError("start position lies inside obstacle " + std::to_string(obs.id()));
      }
    }
  }
  if (s.planar) {
    if (s.start.position.z != 0.0 || s.start.velocity.z != 0.0 || s.goal.z != 0.0) {
      throw ScenarioError("planar scenario requires zero z-components");
    }
    for (const auto& obs : s.obstacles) {
      const Vec3& b = obs.b();
      if (b.x != 0.0 || b.y != 0.0 || std::abs(b.z) != 1.0) {
        throw ScenarioError("planar scenario requires b = (0,0,+-1) for obstacle " + std::to_string(obs.id()));
      }
      for (const auto& p : obs.points()) {
        if (p.z != 0.0) throw ScenarioError("planar scenario requires z = 0 for obstacle points");
      }
    }
  }
}

std::optional<NearestPoint> nearest_obstacle_point(const Vec3& x, std::span<const Obstacle> obstacles) {
  std::optional<NearestPoint> best;
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const auto& obs = obstacles[k];
    const auto& pts = obs.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = distance(x, pts[i]);
      bool better = !best || d < best->distance;
      if (best && d == best->distance) {
        better = obs.id() < best->obstacle_id || (obs.id() == best->obstacle_id && i < best->point_index);
      }
      if (better) best = NearestPoint{k, obs.id(), i, d, pts[i]};
    }
  }
  return best;
}

std::size_t total_point_count(std::span<const Obstacle> obstacles) {
  std::size_t n = 0;
  for (const auto& o : obstacles) n += o.size();
  return n;
}

}  // namespace cfp
