#include "cfp/forces.hpp"

#include <algorithm>
#include <exception>
#include <stdexcept>

#include "cfp/errors.hpp"

namespace cfp {

Vec3 artificial_current(const Vec3& d, const Vec3& b) {
  const double n = d.norm();
  if (n < kAtPointTolerance) throw CollisionError("robot at obstacle point");
  return cross(d / n, b);
}

FieldSample magnetic_field(const Vec3& d, const Vec3& d_dot, const Vec3& b, double k_cf) {
  const Vec3 c = artificial_current(d, b);
  const double speed = d_dot.norm();
  if (speed < kStalledSpeed) return {Vec3{}, true};
  return {(k_cf / d.norm()) * cross(c, d_dot / speed), false};
}

FieldSample cf_force_point(const Vec3& d, const Vec3& d_dot, const Vec3& b, double k_cf, double d_max) {
  if (d.norm() > d_max) return {};
  const FieldSample field = magnetic_field(d, d_dot, b, k_cf);
  if (field.stalled) return field;
  return {cross(d_dot / d_dot.norm(), field.value), false};
}

std::vector<ObstacleField> default_fields(std::span<const Obstacle> obstacles, const PlannerParams& params) {
  std::vector<ObstacleField> f;
  f.reserve(obstacles.size());
  for (const auto& o : obstacles) f.push_back({o.b(), params.k_cf});
  return f;
}

namespace {

// Static world: the relative velocity d_dot = x_dot - p_dot with p_dot = 0.
constexpr Vec3 kObstacleVelocity{0.0, 0.0, 0.0};

struct Chunk {
  std::size_t obstacle;
  std::size_t begin;
  std::size_t end;
};

struct ChunkSum {
  Vec3 force;
  bool stalled = false;
  std::size_t active = 0;
};

ChunkSum sum_chunk(const RobotState& state, const Obstacle& obs, const ObstacleField& field, double d_max,
                   std::size_t begin, std::size_t end) {
  ChunkSum s;
  const Vec3 d_dot = state.velocity - kObstacleVelocity;
  const auto& pts = obs.points();
  for (std::size_t i = begin; i < end; ++i) {
    const Vec3 d = state.position - pts[i];
    if (d.norm() > d_max) continue;
    ++s.active;
    const FieldSample f = cf_force_point(d, d_dot, field.b, field.k_cf, d_max);
    if (f.stalled) {
      s.stalled = true;
      continue;
    }
    s.force += f.value;
  }
  return s;
}

}  // namespace

CfResult cf_force_total_serial(const RobotState& state, std::span<const Obstacle> obstacles,
                               std::span<const ObstacleField> fields, double d_max, bool record_contributions) {
  CfResult r;
  const Vec3 d_dot = state.velocity - kObstacleVelocity;
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const auto& pts = obstacles[k].points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec3 d = state.position - pts[i];
      if (d.norm() > d_max) continue;
      ++r.active_points;
      const FieldSample f = cf_force_point(d, d_dot, fields[k].b, fields[k].k_cf, d_max);
      if (f.stalled) {
        r.stalled = true;
        continue;
      }
      r.force += f.value;
      if (record_contributions) r.contributions.push_back({obstacles[k].id(), i, f.value});
    }
  }
  if (r.stalled) {
    r.force = Vec3{};
    r.contributions.clear();
  }
  return r;
}

CfResult cf_force_total_parallel(const RobotState& state, std::span<const Obstacle> obstacles,
                                 std::span<const ObstacleField> fields, double d_max) {
  std::vector<Chunk> chunks;
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const std::size_t n = obstacles[k].size();
    for (std::size_t b = 0; b < n; b += kParallelChunk) chunks.push_back({k, b, std::min(n, b + kParallelChunk)});
  }
  std::vector<ChunkSum> partial(chunks.size());
  const auto n_chunks = static_cast<std::ptrdiff_t>(chunks.size());

  // Exceptions must not escape the parallel region; capture and rethrow.
  std::exception_ptr error;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
    const Chunk& ch = chunks[static_cast<std::size_t>(c)];
    try {
      partial[static_cast<std::size_t>(c)] =
          sum_chunk(state, obstacles[ch.obstacle], fields[ch.obstacle], d_max, ch.begin, ch.end);
    } catch (...) {
#pragma omp critical(cfp_force_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  CfResult r;
  for (const auto& p : partial) {
    r.force += p.force;
    r.stalled = r.stalled || p.stalled;
    r.active_points += p.active;
  }
  if (r.stalled) r.force = Vec3{};
  return r;
}

CfResult cf_force_total(const RobotState& state, std::span<const Obstacle> obstacles,
                        std::span<const ObstacleField> fields, double d_max, ExecutionPolicy policy,
                        bool record_contributions) {
  if (fields.size() != obstacles.size()) {
    throw std::invalid_argument("cf_force_total: one field entry per obstacle required");
  }
  const bool parallel = !record_contributions &&
                        (policy == ExecutionPolicy::Parallel ||
                         (policy == ExecutionPolicy::Auto && total_point_count(obstacles) >= kParallelThreshold));
  return parallel ? cf_force_total_parallel(state, obstacles, fields, d_max)
                  : cf_force_total_serial(state, obstacles, fields, d_max, record_contributions);
}

Vec3 vlc_force(const RobotState& state, const Vec3& goal, double k_p, double k_v, double v_max) {
  const Vec3 v_d = (k_p / k_v) * (goal - state.position);
  const double vd_norm = v_d.norm();
  const double nu = vd_norm > 0.0 ? std::min(1.0, v_max / vd_norm) : 1.0;
  return -k_v * (state.velocity - nu * v_d);
}

int k_vlc_gate(const RobotState& state, const Vec3& goal, const Vec3& f_vlc, double v_min, double xi) {
  if (state.velocity == Vec3{}) return 1;
  const bool slowing = dot(state.velocity, f_vlc) <= 0.0;
  const bool slow = state.velocity.norm() <= v_min;
  const bool far = distance(goal, state.position) > xi;
  return (slowing && slow && far) ? 0 : 1;
}

ForceBreakdown steering_force(const RobotState& state, std::span<const Obstacle> obstacles, const Vec3& goal,
                              const PlannerParams& params, std::span<const ObstacleField> fields,
                              const SteeringOptions& options) {
  std::vector<ObstacleField> defaults;
  if (fields.empty()) {
    defaults = default_fields(obstacles, params);
    fields = defaults;
  }
  ForceBreakdown out;
  CfResult cf = cf_force_total(state, obstacles, fields, params.d_max, options.policy, options.record_contributions);
  out.f_cf = cf.force;
  out.stalled = cf.stalled;
  out.per_point = std::move(cf.contributions);
  if (options.include_vlc) {
    out.f_vlc = vlc_force(state, goal, params.k_p, params.k_v, params.v_max);
    out.k_vlc = k_vlc_gate(state, goal, out.f_vlc, params.v_min, params.xi);
    out.f_total = out.f_cf + (params.k_vlc_scale * out.k_vlc) * out.f_vlc;
  } else {
    out.k_vlc = 0;
    out.f_total = out.f_cf;
  }
  return out;
}

}  // namespace cfp
