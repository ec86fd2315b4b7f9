#include "cfp/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "cfp/errors.hpp"

namespace cfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 case_rng(std::uint64_t seed, std::uint64_t stream, std::size_t index) {
  return std::mt19937_64(mix(mix(seed ^ (stream * 0x632be59bd9b4e019ULL)) + index));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Accumulates per-case outcomes into a CheckResult.
struct Tally {
  CheckResult r;
  std::ostringstream note;

  Tally(std::string claim, std::uint64_t seed, double tolerance) {
    r.claim = std::move(claim);
    r.seed = seed;
    r.tolerance = tolerance;
    r.worst_margin = kInf;
  }
  void add(double margin, bool inconclusive = false) {
    ++r.n_cases;
    if (inconclusive) {
      ++r.n_inconclusive;
      return;
    }
    r.worst_margin = std::min(r.worst_margin, margin);
    if (margin >= 0.0) ++r.n_pass;
  }
  CheckResult finish() {
    if (r.n_pass == r.n_cases) {
      r.status = CheckStatus::Pass;
    } else if (r.n_pass + r.n_inconclusive == r.n_cases) {
      r.status = CheckStatus::Inconclusive;
    } else {
      r.status = CheckStatus::Fail;
    }
    r.detail = note.str();
    return r;
  }
};

CheckResult combine(std::string claim, std::span<const CheckResult> parts, std::uint64_t seed) {
  CheckResult out;
  out.claim = std::move(claim);
  out.seed = seed;
  out.worst_margin = kInf;
  bool fail = false;
  bool inconclusive = false;
  std::ostringstream d;
  for (const auto& p : parts) {
    out.n_cases += p.n_cases;
    out.n_pass += p.n_pass;
    out.n_inconclusive += p.n_inconclusive;
    out.worst_margin = std::min(out.worst_margin, p.worst_margin);
    out.tolerance = std::max(out.tolerance, p.tolerance);
    fail = fail || p.status == CheckStatus::Fail;
    inconclusive = inconclusive || p.status == CheckStatus::Inconclusive;
    d << p.claim << ": " << to_string(p.status) << "; ";
  }
  out.status = fail ? CheckStatus::Fail : inconclusive ? CheckStatus::Inconclusive : CheckStatus::Pass;
  out.detail = d.str();
  return out;
}

// Planar state with prescribed R and S w.r.t. the origin for b = +z.
struct PlanarIC {
  Vec3 x;
  Vec3 v;
};

PlanarIC ic_from_polar(double radius, double speed, double alpha) {
  // velocity along +x; alpha is the angle of (R, S)/(radius*speed)
  const double R = radius * speed * std::cos(alpha);
  const double S = radius * speed * std::sin(alpha);
  return {{R / speed, -S / speed, 0.0}, {speed, 0.0, 0.0}};
}

struct RSSample {
  double R;
  double S;
};

// Euler integration of the R-S system; stops on leaving the quadrant when asked.
template <class Visit>
void integrate_rs(double R, double S, double v, double k, double dt, double horizon, Visit&& visit) {
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
  for (std::size_t i = 0; i <= n; ++i) {
    if (!visit(static_cast<double>(i) * dt, R, S)) return;
    if (R == 0.0 && S == 0.0) return;
    const RSRates r = rs_derivatives(R, S, v, k);
    R += dt * r.r_dot;
    S += dt * r.s_dot;
  }
}

struct DisturbedSetup {
  double k = 1.0;
  double v0 = 1.0;
  double v_min = 0.8;
  double v_max = 1.25;
  double c_min() const { return k / (v_max * v_max); }
  double c_max() const { return k / (v_min * v_min); }
};

Obstacle random_cloud(std::mt19937_64& rng, int id, const Vec3& center, std::size_t m, double spread, const Vec3& b) {
  std::vector<Vec3> pts;
  pts.reserve(m);
  pts.push_back(center);
  while (pts.size() < m) {
    const double a = uniform(rng, 0.0, 2.0 * kPi);
    const double r = spread * std::sqrt(uniform(rng, 0.0, 1.0));
    pts.push_back(center + Vec3{r * std::cos(a), r * std::sin(a), 0.0});
  }
  return Obstacle(id, std::move(pts), b);
}

// Planar CF-only scenario: a point obstacle that the straight-line path passes
// at a lateral offset, with moderate gain/speed ratio.
Scenario random_cf_scenario(std::mt19937_64& rng, double duration) {
  Scenario sc;
  const double heading = uniform(rng, 0.0, 2.0 * kPi);
  const Vec3 dir{std::cos(heading), std::sin(heading), 0.0};
  const Vec3 lat{-dir.y, dir.x, 0.0};
  const double speed = uniform(rng, 1.0, 2.0);
  const double ahead = uniform(rng, 1.5, 3.0);
  const double offset = uniform(rng, 0.4, 0.8) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
  const Vec3 b{0.0, 0.0, uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0};
  sc.start.position = {0.0, 0.0, 0.0};
  sc.start.velocity = speed * dir;
  sc.obstacles.emplace_back(0, std::vector<Vec3>{ahead * dir + offset * lat}, b);
  sc.goal = 100.0 * dir;
  sc.params.k_cf = uniform(rng, 0.05, 0.25);
  sc.horizon = duration;
  sc.planar = true;
  return sc;
}

// Forward difference along a linear path, extrapolated to second order.
template <class F>
double richardson(F&& f, double f0, double h) {
  const double d1 = (f(h) - f0) / h;
  const double d2 = (f(0.5 * h) - f0) / (0.5 * h);
  return 2.0 * d2 - d1;
}

Vec3 cf_point_accel(const Vec3& x, const Vec3& v, double k, double b_z) {
  const FieldSample f = cf_force_point(x, v, {0.0, 0.0, b_z}, k, kInf);
  return f.value;
}

}  // namespace

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

// ---------------------------------------------------------------------------

OracleTrace oracle_integrate(const OdeRhs& rhs, std::vector<double> y0, double t_end, const OracleOptions& opt) {
  const std::size_t dim = y0.size();
  auto run = [&](std::size_t sub, std::vector<std::vector<double>>& out) -> bool {
    out.assign(opt.n_out + 1, {});
    std::vector<double> y = y0, k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    const double h = t_end / static_cast<double>(opt.n_out * sub);
    out[0] = y;
    for (std::size_t i = 0; i < opt.n_out; ++i) {
      for (std::size_t j = 0; j < sub; ++j) {
        const double t = static_cast<double>(i * sub + j) * h;
        rhs(t, y, k1);
        for (std::size_t d = 0; d < dim; ++d) tmp[d] = y[d] + 0.5 * h * k1[d];
        rhs(t + 0.5 * h, tmp, k2);
        for (std::size_t d = 0; d < dim; ++d) tmp[d] = y[d] + 0.5 * h * k2[d];
        rhs(t + 0.5 * h, tmp, k3);
        for (std::size_t d = 0; d < dim; ++d) tmp[d] = y[d] + h * k3[d];
        rhs(t + h, tmp, k4);
        for (std::size_t d = 0; d < dim; ++d) y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
      }
      for (double v : y) {
        if (!std::isfinite(v)) return false;
      }
      out[i + 1] = y;
    }
    return true;
  };

  OracleTrace tr;
  tr.t.resize(opt.n_out + 1);
  for (std::size_t i = 0; i <= opt.n_out; ++i) tr.t[i] = t_end * static_cast<double>(i) / static_cast<double>(opt.n_out);
  std::vector<std::vector<double>> prev, cur;
  std::size_t sub = std::max<std::size_t>(opt.substeps0, 1);
  bool prev_ok = run(sub, prev);
  tr.last_difference = kInf;
  for (int h = 1; h <= opt.max_halvings; ++h) {
    sub *= 2;
    const bool ok = run(sub, cur);
    tr.halvings = h;
    if (ok && prev_ok) {
      double diff = 0.0;
      for (std::size_t i = 0; i < cur.size(); ++i) {
        for (std::size_t d = 0; d < dim; ++d) diff = std::max(diff, std::abs(cur[i][d] - prev[i][d]));
      }
      tr.last_difference = diff;
      if (diff < opt.tol) {
        tr.converged = true;
        tr.y = std::move(cur);
        return tr;
      }
    }
    prev = std::move(cur);
    prev_ok = ok;
  }
  if (prev_ok) tr.y = std::move(prev);
  return tr;
}

OdeRhs point_cf_rhs(double k_cf, double b_z) {
  return [k_cf, b_z](double, std::span<const double> y, std::span<double> dy) {
    const Vec3 x{y[0], y[1], 0.0};
    const Vec3 v{y[2], y[3], 0.0};
    const Vec3 a = cf_point_accel(x, v, k_cf, b_z);
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = a.x;
    dy[3] = a.y;
  };
}

// ---------------------------------------------------------------------------

PointRunStats run_point(const Vec3& x0, const Vec3& v0, const PointRunOptions& opt) {
  const Vec3 b{0.0, 0.0, opt.b_z};
  DisturbanceGenerator gen({opt.z_max, opt.seed}, true);
  const auto hold = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.z_hold / opt.dt)));
  const auto n = static_cast<std::size_t>(std::llround(opt.horizon / opt.dt));

  PointRunStats st;
  Vec3 x = x0;
  Vec3 v = v0;
  Vec3 z;
  const double s0 = dot(cross(x0, v0), b);
  const double r0 = dot(x0, v0);
  const bool critical0 = r0 < 0.0 && s0 > 0.0;
  const double vb0 = 1.0 / x0.squared_norm();
  st.min_distance = st.min_distance_critical = st.min_abs_eps_critical = kInf;
  st.min_R = kInf;
  st.min_S_sq_ratio = kInf;
  st.min_speed = kInf;
  st.max_speed = 0.0;

  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * opt.dt;
    st.end_time = t;
    const double d = x.norm();
    const double speed = v.norm();
    const double R = dot(x, v);
    const double S = dot(cross(x, v), b);
    const double vb = 1.0 / (d * d);
    st.min_distance = std::min(st.min_distance, d);
    st.min_R = std::min(st.min_R, R);
    st.max_v_b = std::max(st.max_v_b, vb);
    st.max_v_b_ratio = std::max(st.max_v_b_ratio, vb / vb0);
    st.min_speed = std::min(st.min_speed, speed);
    st.max_speed = std::max(st.max_speed, speed);
    if (s0 != 0.0) st.min_S_sq_ratio = std::min(st.min_S_sq_ratio, (S * S) / (s0 * s0));
    const bool critical = R < 0.0 && S > 0.0;
    if (critical) {
      const double c = opt.k_cf / (speed * speed);
      st.min_distance_critical = std::min(st.min_distance_critical, d);
      st.min_abs_eps_critical = std::min(st.min_abs_eps_critical, std::abs(S + c * R));
    }
    if (d < opt.collision_radius) {
      st.collided = true;
      return st;
    }
    if (st.exit_time < 0.0) {
      const bool left = critical0 ? !critical : (r0 < 0.0 && R >= 0.0);
      if (left) {
        st.exit_time = t;
        if (opt.stop_on_quadrant_exit) return st;
      }
    }
    if (opt.x_max > 0.0 && d > opt.x_max) return st;
    if (i == n) break;
    if (opt.z_max > 0.0 && i % hold == 0) z = gen.next();
    const Vec3 a = cf_point_accel(x, v, opt.k_cf, opt.b_z) + z;
    x += opt.dt * v;
    v += opt.dt * a;
  }
  return st;
}

HeadingSweep sweep_headings_rs(std::size_t n, double radius, double speed, double k_cf, double dt, double horizon) {
  HeadingSweep out;
  out.n_headings = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    const AuxState a = aux_state({radius, 0.0, 0.0}, {speed * std::cos(th), speed * std::sin(th), 0.0},
                                 {0.0, 0.0, 1.0}, k_cf);
    if (!(a.R < 0.0 && a.S > 0.0)) continue;
    const RSTrace tr = simulate_rs(a.R, a.S, speed, k_cf, dt, horizon);
    if (tr.collided) out.collided.push_back(i);
  }
  out.collision_measure_deg = 360.0 * static_cast<double>(out.collided.size()) / static_cast<double>(n);
  return out;
}

// ---------------------------------------------------------------------------

CheckResult check_velocity_invariance(std::size_t n, std::uint64_t seed, double dt, double duration) {
  // Explicit Euler grows the speed by dt^2 |F|^2 per step: the relative drift
  // is O(dt); the tolerance equals dt.
  Tally tally("speed_invariance", seed, dt);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 1, i);
    Scenario sc = random_cf_scenario(rng, duration);
    sc.dt = dt;
    SimOptions opt;
    opt.mode = Mode::CfOnly;
    opt.adapt_kcf = false;
    opt.record_samples = false;
    opt.policy = ExecutionPolicy::Serial;
    const double v0 = sc.start.velocity.norm();
    double drift = 0.0;
    double dmin = kInf;
    opt.on_sample = [&](const Sample& s) {
      drift = std::max(drift, std::abs(s.velocity.norm() / v0 - 1.0));
      if (s.nearest_obstacle_id >= 0) dmin = std::min(dmin, s.nearest_distance);
    };
    const Trajectory tr = simulate(sc, opt);
    const bool collided = tr.terminated_by == Termination::Collision;
    if (collided || drift > dt) {
      tally.note << "case " << i << ": drift " << drift << " k " << sc.params.k_cf << " v " << v0 << " dmin " << dmin
                 << "; ";
    }
    tally.add(collided ? -1.0 : dt - drift);
  }
  return tally.finish();
}

CheckResult check_rs_identity(std::size_t n, std::uint64_t seed) {
  constexpr double tol = 1e-9;
  Tally tally("rs_identity", seed, tol);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 2, i);
    Scenario sc = random_cf_scenario(rng, 3.0);
    SimOptions opt;
    opt.mode = Mode::CfOnly;
    opt.record_samples = false;
    double worst = 0.0;
    opt.on_sample = [&](const Sample& s) {
      if (!s.has_aux) return;
      const double lhs = s.aux.R * s.aux.R + s.aux.S * s.aux.S;
      const double rhs = s.nearest_distance * s.nearest_distance * s.velocity.squared_norm();
      worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    };
    simulate(sc, opt);
    tally.add(tol - worst);
  }
  return tally.finish();
}

namespace {

struct RSCase {
  double v;
  double k;
  double R;
  double S;
};

// alpha range selects the quadrant; c in [0.25, 4], |x| in [0.2, 3].
RSCase sample_rs(std::mt19937_64& rng, double a_lo, double a_hi) {
  const double v = uniform(rng, 0.5, 2.0);
  const double c = std::exp(uniform(rng, std::log(0.25), std::log(4.0)));
  const double r = uniform(rng, 0.2, 3.0);
  const double a = uniform(rng, a_lo, a_hi);
  return {v, c * v * v, r * v * std::cos(a), r * v * std::sin(a)};
}

}  // namespace

CheckResult check_moving_away(std::size_t n, std::uint64_t seed) {
  constexpr double dt = 1e-3;
  constexpr double tol = 1e-9;
  Tally tally("moving_away_barrier", seed, tol);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 3, i);
    RSCase cs = sample_rs(rng, -0.5 * kPi, 0.5 * kPi);
    if (i == 0) cs.R = 0.0;
    const double vb0 = cs.v * cs.v / (cs.R * cs.R + cs.S * cs.S);
    double margin = kInf;
    integrate_rs(cs.R, cs.S, cs.v, cs.k, dt, 10.0, [&](double, double R, double S) {
      const double vb = cs.v * cs.v / (R * R + S * S);
      margin = std::min({margin, R / (cs.v * cs.v), (1.0 + tol) - vb / vb0});
      return true;
    });
    tally.add(margin);
  }
  return tally.finish();
}

CheckResult check_following_field(std::size_t n, std::uint64_t seed) {
  constexpr double dt = 1e-3;
  constexpr double rel = 1e-2;
  Tally tally("following_field_barrier", seed, rel);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 4, i);
    const RSCase cs = sample_rs(rng, kPi, 2.0 * kPi);
    const double s0 = cs.S;
    const double bound = std::abs(s0) / cs.v;
    double margin = kInf;
    integrate_rs(cs.R, cs.S, cs.v, cs.k, dt, 10.0, [&](double, double R, double S) {
      const double dist = std::sqrt(R * R + S * S) / cs.v;
      margin = std::min({margin, (S * S) / (s0 * s0) - (1.0 - 1e-12), dist / bound - (1.0 - rel)});
      return true;
    });
    tally.add(margin);
  }
  return tally.finish();
}

CheckResult check_critical_quadrant(std::size_t n, std::uint64_t seed) {
  constexpr double dt = 1e-3;
  constexpr double rel = 1e-2;
  Tally tally("critical_off_ray", seed, rel);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 5, i);
    const RSCase cs = sample_rs(rng, 0.5 * kPi, kPi);
    const double c = cs.k / (cs.v * cs.v);
    const double eps0 = cs.S + c * cs.R;
    if (eps0 == 0.0) {
      tally.add(0.0, true);
      continue;
    }
    const ExitTimeBound tb = exit_time_bound(cs.R, cs.S, c, cs.k);
    const double bound = std::abs(eps0) / (std::max(c, 1.0) * cs.v);
    double margin = kInf;
    double exit = -1.0;
    integrate_rs(cs.R, cs.S, cs.v, cs.k, dt, tb.tau_max + 1.0, [&](double t, double R, double S) {
      if (!(R < 0.0 && S > 0.0)) {
        exit = t;
        return false;
      }
      const double eps = S + c * R;
      const double dist = std::sqrt(R * R + S * S) / cs.v;
      margin = std::min({margin, std::abs(eps) / std::abs(eps0) - (1.0 - 1e-12), dist / bound - (1.0 - rel)});
      return true;
    });
    const double exit_margin = exit < 0.0 ? -1.0 : (tb.tau_max + 10.0 * dt - exit) / tb.tau_max;
    tally.add(std::min(margin, exit_margin));
  }
  return tally.finish();
}

CheckResult check_quadrant_guarantees(std::size_t n, std::uint64_t seed) {
  const CheckResult parts[] = {check_moving_away(n, seed), check_following_field(n, seed),
                               check_critical_quadrant(n, seed)};
  return combine("quadrant_guarantees", parts, seed);
}

CheckResult check_epsilon_dynamics(std::size_t n, std::uint64_t seed) {
  constexpr double h = 1e-5;
  constexpr double tol = 1e-6;
  Tally tally("epsilon_dynamics", seed, tol);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 6, i);
    const RSCase cs = sample_rs(rng, 0.5 * kPi, kPi);
    const PlanarIC ic = ic_from_polar(std::hypot(cs.R, cs.S) / cs.v, cs.v, std::atan2(cs.S, cs.R));
    const AuxState a0 = aux_state(ic.x, ic.v, {0.0, 0.0, 1.0}, cs.k);
    const double def_err = std::abs(a0.eps - (a0.S + a0.c * a0.R));
    const Vec3 acc = cf_point_accel(ic.x, ic.v, cs.k, 1.0);
    auto eps_at = [&](double s) { return aux_state(ic.x + s * ic.v, ic.v + s * acc, {0.0, 0.0, 1.0}, cs.k).eps; };
    const double fd = richardson(eps_at, a0.eps, h);
    const double rate = epsilon_rate(a0.R, a0.S, a0.c, cs.k);
    const double err = std::abs(fd - rate) / (1.0 + std::abs(rate));
    tally.add(std::min(tol - err, 1e-12 - def_err));
  }
  return tally.finish();
}

CheckResult check_collision_ray(std::size_t n, std::uint64_t seed) {
  // R-S Euler at dt = 1e-3 keeps the ray invariant; Cartesian confirmation at
  // dt = 1e-4 for headings whose distance bound is resolvable (>= 0.05 m).
  constexpr double rs_dt = 1e-3;
  constexpr double cart_dt = 1e-4;
  constexpr double rel = 1e-2;
  const double k = 1.0;
  const double v = 1.0;
  const double radius = 1.0;
  Tally tally("collision_ray_iff", seed, rel);
  const std::size_t n_coarse = std::max<std::size_t>(n, 8);
  const double c = k / (v * v);
  const double ray_heading = kPi - std::atan(c);  // eps(0) = 0 on the unit circle
  const HeadingSweep coarse = sweep_headings_rs(n_coarse, radius, v, k, rs_dt, 20.0);
  const HeadingSweep fine = sweep_headings_rs(2 * n_coarse, radius, v, k, rs_dt, 20.0);

  auto near_ray = [&](const HeadingSweep& sw, std::size_t idx) {
    const double cell = 2.0 * kPi / static_cast<double>(sw.n_headings);
    const double th = cell * static_cast<double>(idx);
    return std::abs(th - ray_heading) <= cell * (1.0 + 1e-9);
  };
  for (const HeadingSweep* sw : {&coarse, &fine}) {
    tally.add(sw->collided.empty() ? -1.0 : 0.0);
    for (auto idx : sw->collided) tally.add(near_ray(*sw, idx) ? 0.0 : -1.0);
  }
  if (coarse.collision_measure_deg > 0.0) {
    const double ratio = fine.collision_measure_deg / coarse.collision_measure_deg;
    tally.add(0.5 * (1.0 + 1e-9) - ratio);
    tally.note << "measure " << coarse.collision_measure_deg << " deg -> " << fine.collision_measure_deg << " deg; ";
  }

  std::size_t cart_cases = 0;
  for (std::size_t i = 0; i < n_coarse; ++i) {
    if (std::find(coarse.collided.begin(), coarse.collided.end(), i) != coarse.collided.end()) continue;
    const double th = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n_coarse);
    const Vec3 x0{radius, 0.0, 0.0};
    const Vec3 v0{v * std::cos(th), v * std::sin(th), 0.0};
    const AuxState a = aux_state(x0, v0, {0.0, 0.0, 1.0}, k);
    if (!(a.R < 0.0 && a.S > 0.0)) continue;
    const double bound = std::abs(a.eps) / (std::max(a.c, 1.0) * v);
    double rs_min = kInf;
    integrate_rs(a.R, a.S, v, k, rs_dt, 20.0, [&](double, double R, double S) {
      if (!(R < 0.0 && S > 0.0)) return false;
      rs_min = std::min(rs_min, std::sqrt(R * R + S * S) / v);
      return true;
    });
    tally.add(rs_min / bound - (1.0 - rel));
    if (bound >= 0.05) {
      PointRunOptions po;
      po.k_cf = k;
      po.dt = cart_dt;
      po.horizon = exit_time_bound(a.R, a.S, a.c, k).tau_max + 1.0;
      po.stop_on_quadrant_exit = true;
      const PointRunStats st = run_point(x0, v0, po);
      tally.add(st.collided ? -1.0 : st.min_distance_critical / bound - (1.0 - rel));
      ++cart_cases;
    }
  }
  tally.note << cart_cases << " Cartesian confirmations";
  return tally.finish();
}

CheckResult check_ray_collision_time(std::size_t, std::uint64_t seed) {
  constexpr double rel = 2e-2;
  Tally tally("ray_collision_time", seed, rel);
  for (double c : {0.5, 1.0, 2.0}) {
    const double v = 1.0;
    const double k = c * v * v;
    const double th = kPi - std::atan(c);
    const double s0 = std::sin(th);
    const double predicted = collision_time_on_ray(s0, c, k);
    // Integrate to 90% of the predicted time, then extrapolate |x|, which is
    // affine in t on the ray, to zero from the last quarter of the trace.
    OracleOptions oo;
    oo.n_out = 200;
    const OracleTrace tr = oracle_integrate(point_cf_rhs(k, 1.0), {1.0, 0.0, v * std::cos(th), v * std::sin(th)},
                                            0.9 * predicted, oo);
    if (!tr.converged) {
      tally.add(0.0, true);
      tally.note << "c=" << c << " oracle not converged; ";
      continue;
    }
    const std::size_t first = tr.t.size() * 3 / 4;
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double m = static_cast<double>(tr.t.size() - first);
    for (std::size_t i = first; i < tr.t.size(); ++i) {
      const double y = std::hypot(tr.y[i][0], tr.y[i][1]);
      st += tr.t[i];
      sy += y;
      stt += tr.t[i] * tr.t[i];
      sty += tr.t[i] * y;
    }
    const double slope = (m * sty - st * sy) / (m * stt - st * st);
    const double icpt = (sy - slope * st) / m;
    const double measured = slope < 0.0 ? -icpt / slope : kInf;
    tally.add(rel - std::abs(measured - predicted) / predicted);
    tally.note << "c=" << c << " t=" << measured << " vs " << predicted << "; ";
  }
  return tally.finish();
}

CheckResult check_kcf_adaptation(std::size_t n, std::uint64_t seed) {
  constexpr double tol = 1e-12;
  constexpr double eps_min = 1e-2;
  Tally tally("kcf_adaptation", seed, tol);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 7, i);
    const double v = uniform(rng, 0.5, 2.0);
    const double c = uniform(rng, 0.25, 4.0);
    const double k = c * v * v;
    const double R = -uniform(rng, 0.05, 3.0);
    const double eps = uniform(rng, -eps_min, eps_min);
    const double S = eps - c * R;
    const Vec3 x{R / v, -S / v, 0.0};
    const Vec3 xd{v, 0.0, 0.0};
    const AuxState a = aux_state(x, xd, {0.0, 0.0, 1.0}, k);
    const KcfAdaptation ad = adapt_kcf(a, k, eps_min, 0.0, 1.0);
    if (!ad.fired) {
      tally.add(std::abs(a.eps) >= eps_min ? 0.0 : -1.0);
      continue;
    }
    const AuxState b = aux_state(x, xd, {0.0, 0.0, 1.0}, ad.k_cf);
    const double target = (a.eps < 0.0 ? -1.0 : 1.0) * eps_min;
    tally.add(tol - std::abs(b.eps - target));
  }

  // Closed-loop: starts inside d_min close to the ray; after the first
  // adaptation |eps| must stay >= eps_min (to Euler accuracy) in the quadrant.
  constexpr double dt = 1e-4;
  const double rel = 10.0 * dt;
  const std::size_t n_sim = std::max<std::size_t>(n / 1000, 4);
  for (std::size_t i = 0; i < n_sim; ++i) {
    auto rng = case_rng(seed, 8, i);
    Scenario sc;
    sc.params.k_cf = 1.0;
    sc.params.d_min = 0.1;
    sc.params.d_max = 1.0;
    sc.params.eps_min = eps_min;
    sc.dt = dt;
    sc.horizon = 1.0;
    sc.obstacles.emplace_back(0, std::vector<Vec3>{{0.0, 0.0, 0.0}}, Vec3{0.0, 0.0, 1.0});
    const double r = uniform(rng, 0.05, 0.09);
    const double v = 1.0;
    const double th = kPi - std::atan(sc.params.k_cf / (v * v)) + uniform(rng, -1e-3, 1e-3);
    sc.start.position = {r, 0.0, 0.0};
    sc.start.velocity = {v * std::cos(th), v * std::sin(th), 0.0};
    sc.goal = {-10.0, 0.0, 0.0};
    SimOptions opt;
    opt.mode = Mode::CfOnly;
    opt.record_samples = false;
    bool activated = false;
    double worst = kInf;
    opt.on_sample = [&](const Sample& s) {
      activated = activated || s.kcf_adapted;
      if (!activated || !s.has_aux || !(s.aux.R < 0.0 && s.aux.S > 0.0)) return;
      if (s.nearest_distance > sc.params.d_max) return;
      worst = std::min(worst, std::abs(s.aux.eps) / eps_min - (1.0 - rel));
    };
    const Trajectory tr = simulate(sc, opt);
    if (!activated || tr.terminated_by == Termination::Collision) {
      tally.add(-1.0);
    } else {
      tally.add(worst);
    }
  }
  return tally.finish();
}

CheckResult check_disturbed_rates(std::size_t n, std::uint64_t seed) {
  constexpr double h = 1e-5;
  constexpr double tol = 1e-6;
  Tally tally("disturbed_rates", seed, tol);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 9, i);
    const RSCase cs = sample_rs(rng, 0.0, 2.0 * kPi);
    const PlanarIC ic = ic_from_polar(std::hypot(cs.R, cs.S) / cs.v, cs.v, std::atan2(cs.S, cs.R));
    const double za = uniform(rng, 0.0, 2.0 * kPi);
    const Vec3 z = uniform(rng, 0.0, 2.0) * Vec3{std::cos(za), std::sin(za), 0.0};
    const Vec3 b{0.0, 0.0, 1.0};
    const Vec3 f_cf = cf_point_accel(ic.x, ic.v, cs.k, 1.0);
    const Vec3 acc = f_cf + z;
    const AuxState a0 = aux_state(ic.x, ic.v, b, cs.k);
    auto aux_at = [&](double s) { return aux_state(ic.x + s * ic.v, ic.v + s * acc, b, cs.k); };
    const RSRates rates = rs_derivatives(a0.R, a0.S, cs.v, cs.k, RSDisturbance{ic.x, z, b});
    auto rel_err = [](double fd, double exact) { return std::abs(fd - exact) / (1.0 + std::abs(exact)); };
    const double e_r = rel_err(richardson([&](double s) { return aux_at(s).R; }, a0.R, h), rates.r_dot);
    const double e_s = rel_err(richardson([&](double s) { return aux_at(s).S; }, a0.S, h), rates.s_dot);
    const double e_v = rel_err(richardson([&](double s) { return (ic.v + s * acc).squared_norm(); },
                                          ic.v.squared_norm(), h),
                               speed_sq_rate(ic.v, z));
    const double e_c = rel_err(richardson([&](double s) { return aux_at(s).c; }, a0.c, h), c_rate(a0.c, ic.v, z));
    tally.add(tol - std::max({e_r, e_s, e_v, e_c}));
  }
  return tally.finish();
}

namespace {

struct DisturbedCase {
  Vec3 x0;
  Vec3 v0;
  AuxState aux;
  double z_max;
};

BudgetInputs budget_inputs(const DisturbedSetup& ds, const AuxState& a, double x0, ICClass cls, double x_max) {
  BudgetInputs in;
  in.cls = cls;
  in.x0_norm = x0;
  in.v_min = ds.v_min;
  in.v_max = ds.v_max;
  in.c_min = ds.c_min();
  in.c_max = ds.c_max();
  in.k_cf = ds.k;
  in.S0 = a.S;
  in.R0 = a.R;
  in.eps0 = a.eps;
  in.x_max = x_max;
  return in;
}

bool speed_in_band(const PointRunStats& st, const DisturbedSetup& ds) {
  return st.min_speed >= ds.v_min && st.max_speed <= ds.v_max;
}

}  // namespace

CheckResult check_disturbed_moving_away(std::size_t n, std::uint64_t seed) {
  constexpr double dt = 1e-4;
  constexpr double tol = 1e-9;
  const DisturbedSetup ds;
  Tally tally("disturbed_moving_away", seed, tol);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 10, i);
    const double r = uniform(rng, 0.3, 1.5);
    const PlanarIC ic = ic_from_polar(r, ds.v0, uniform(rng, -0.5 * kPi, 0.5 * kPi));
    const AuxState a = aux_state(ic.x, ic.v, {0.0, 0.0, 1.0}, ds.k);
    const double x_max = 2.0 * r;
    PointRunOptions po;
    po.k_cf = ds.k;
    po.dt = dt;
    po.horizon = 10.0;
    po.x_max = x_max;
    po.z_max = 0.99 * disturbance_budget(budget_inputs(ds, a, r, ICClass::MovingAway, x_max));
    po.z_hold = 0.01;
    po.seed = mix(seed + i);
    const PointRunStats st = run_point(ic.x, ic.v, po);
    if (!speed_in_band(st, ds)) {
      tally.add(0.0, true);
      continue;
    }
    const double vb_margin = (1.0 + tol) - st.max_v_b_ratio;
    const double r_margin = st.min_R / (r * ds.v0) + tol;
    tally.add(st.collided ? -1.0 : std::min(vb_margin, r_margin));
  }
  return tally.finish();
}

CheckResult check_disturbed_following_field(std::size_t n, std::uint64_t seed) {
  constexpr double dt = 1e-4;
  constexpr double rel = 1e-2;
  const DisturbedSetup ds;
  Tally tally("disturbed_following_field", seed, rel);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 11, i);
    const double r = uniform(rng, 0.3, 1.5);
    const PlanarIC ic = ic_from_polar(r, ds.v0, uniform(rng, 1.02 * kPi, 1.48 * kPi));
    const AuxState a = aux_state(ic.x, ic.v, {0.0, 0.0, 1.0}, ds.k);
    DisturbedExitInputs ei;
    ei.cls = ICClass::FollowingField;
    ei.x0_norm = r;
    ei.R0 = a.R;
    ei.S0 = a.S;
    ei.eps0 = a.eps;
    ei.v_min = ds.v_min;
    ei.c_min = ds.c_min();
    ei.c_max = ds.c_max();
    ei.k_cf = ds.k;
    const double tau = exit_time_bound_disturbed(ei).tau_max;
    PointRunOptions po;
    po.k_cf = ds.k;
    po.dt = dt;
    po.horizon = tau + 1.0;
    po.stop_on_quadrant_exit = true;
    po.z_max = 0.99 * disturbance_budget(budget_inputs(ds, a, r, ICClass::FollowingField, r));
    po.z_hold = 0.01;
    po.seed = mix(seed + i);
    const PointRunStats st = run_point(ic.x, ic.v, po);
    if (!speed_in_band(st, ds)) {
      tally.add(0.0, true);
      continue;
    }
    const double vb_bound = 4.0 * ds.v_max * ds.v_max / (a.S * a.S);
    const double vb_margin = (1.0 + rel) - st.max_v_b / vb_bound;
    const double exit_margin = st.exit_time < 0.0 ? -1.0 : (tau + 10.0 * dt - st.exit_time) / tau;
    tally.add(st.collided ? -1.0 : std::min(vb_margin, exit_margin));
  }
  return tally.finish();
}

CheckResult check_disturbed_critical(std::size_t n, std::uint64_t seed) {
  constexpr double dt = 1e-4;
  constexpr double rel = 1e-2;
  const DisturbedSetup ds;
  Tally tally("disturbed_critical", seed, rel);
  std::size_t drawn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 12, i);
    const double r = uniform(rng, 0.3, 1.5);
    PlanarIC ic;
    AuxState a;
    // ICs within 5% (relative to |x||v|) of the ray are redrawn: their
    // distance bounds fall below the Euler position resolution.
    do {
      ic = ic_from_polar(r, ds.v0, uniform(rng, 0.5 * kPi, kPi));
      a = aux_state(ic.x, ic.v, {0.0, 0.0, 1.0}, ds.k);
      ++drawn;
    } while (std::abs(a.eps) < 0.05 * r * ds.v0);
    DisturbedExitInputs ei;
    ei.cls = ICClass::CriticalOffRay;
    ei.x0_norm = r;
    ei.R0 = a.R;
    ei.S0 = a.S;
    ei.eps0 = a.eps;
    ei.v_min = ds.v_min;
    ei.c_min = ds.c_min();
    ei.c_max = ds.c_max();
    ei.k_cf = ds.k;
    const double tau = exit_time_bound_disturbed(ei).tau_max;
    PointRunOptions po;
    po.k_cf = ds.k;
    po.dt = dt;
    po.horizon = tau + 1.0;
    po.stop_on_quadrant_exit = true;
    po.z_max = 0.99 * disturbance_budget(budget_inputs(ds, a, r, ICClass::CriticalOffRay, r));
    po.z_hold = 0.01;
    po.seed = mix(seed + i);
    const PointRunStats st = run_point(ic.x, ic.v, po);
    if (!speed_in_band(st, ds)) {
      tally.add(0.0, true);
      continue;
    }
    const double e0 = std::abs(a.eps);
    const double d_bound = e0 / (2.0 * ds.v_max * std::max(ds.c_max(), 1.0));
    const double eps_margin = st.min_abs_eps_critical / (0.5 * e0) - 1.0;
    const double d_margin = st.min_distance_critical / d_bound - (1.0 - rel);
    const double exit_margin = st.exit_time < 0.0 ? -1.0 : (tau + 10.0 * dt - st.exit_time) / tau;
    tally.add(st.collided ? -1.0 : std::min({eps_margin, d_margin, exit_margin}));
  }
  tally.note << drawn - n << " near-ray draws redrawn";
  return tally.finish();
}

CheckResult check_disturbed(std::size_t n, std::uint64_t seed) {
  const CheckResult parts[] = {check_disturbed_moving_away(n, seed), check_disturbed_following_field(n, seed),
                               check_disturbed_critical(n, seed), check_disturbed_rates(n, seed)};
  return combine("disturbed", parts, seed);
}

// ---------------------------------------------------------------------------

double huber_potential(const Vec3& x, const Vec3& goal, const PlannerParams& p) {
  const double e = distance(x, goal);
  const double knee = p.k_v * p.v_max / p.k_p;
  if (e < knee) return 0.5 * p.k_p * e * e;
  return p.k_v * p.v_max * e - p.k_v * p.k_v * p.v_max * p.v_max / (2.0 * p.k_p);
}

double lyapunov_value(const Vec3& x, const Vec3& v, const Vec3& goal, const PlannerParams& p) {
  return 0.5 * v.squared_norm() + huber_potential(x, goal, p);
}

namespace {

// Open polyline wall sampled with a fixed spacing.
void add_wall(std::vector<Vec3>& pts, const Vec3& a, const Vec3& b, double spacing) {
  const double len = distance(a, b);
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / spacing)));
  for (std::size_t i = 0; i <= m; ++i) pts.push_back(a + (static_cast<double>(i) / static_cast<double>(m)) * (b - a));
}

Obstacle polyline_obstacle(int id, std::initializer_list<Vec3> corners, double spacing, const Vec3& b) {
  std::vector<Vec3> pts;
  const std::vector<Vec3> cs(corners);
  for (std::size_t i = 1; i < cs.size(); ++i) add_wall(pts, cs[i - 1], cs[i], spacing);
  return Obstacle(id, std::move(pts), b);
}

}  // namespace

PlannerParams cluttered_params() {
  PlannerParams p;
  p.k_cf = 0.4;
  p.k_p = 1.0;
  p.k_v = 2.0;
  p.v_max = 1.0;
  p.v_min = 0.1;
  p.d_max = 0.7;
  p.d_min = 0.1;
  p.xi = 0.2;
  return p;
}

std::vector<Scenario> scenario_battery(std::uint64_t seed) {
  std::vector<Scenario> out;
  std::mt19937_64 rng(mix(seed));
  const PlannerParams p = cluttered_params();
  const Vec3 up{0.0, 0.0, 1.0};

  Scenario free;
  free.params = p;
  free.start.position = {0.0, 0.0, 0.0};
  free.start.velocity = {0.0, 0.8, 0.0};
  free.goal = {4.0, 1.0, 0.0};
  free.horizon = 30.0;
  out.push_back(free);

  Scenario single = free;
  single.obstacles.push_back(random_cloud(rng, 0, {2.0, 0.5, 0.0}, 60, 0.3, up));
  out.push_back(single);

  Scenario multi = free;
  multi.goal = {12.0, 0.0, 0.0};
  multi.start.velocity = {0.7, 0.0, 0.0};
  multi.horizon = 60.0;
  constexpr double spacing = 0.03;
  multi.obstacles.push_back(
      polyline_obstacle(0, {{2.5, -0.9, 0.0}, {3.0, -0.2, 0.0}, {3.0, 0.3, 0.0}, {2.6, 0.9, 0.0}}, spacing, up));
  multi.obstacles.push_back(polyline_obstacle(1, {{6.0, -0.2, 0.0}, {5.5, 0.5, 0.0}, {6.1, 1.3, 0.0}}, spacing, up));
  multi.obstacles.push_back(
      polyline_obstacle(2, {{9.5, -1.1, 0.0}, {9.0, -0.4, 0.0}, {9.2, 0.2, 0.0}, {9.8, 0.5, 0.0}}, spacing, up));
  out.push_back(multi);
  return out;
}

Scenario u_trap_scenario() {
  Scenario sc;
  sc.params = cluttered_params();
  sc.start.position = {0.0, 0.0, 0.0};
  sc.start.velocity = {0.7, 0.0, 0.0};
  sc.goal = {7.0, 0.0, 0.0};
  sc.horizon = 60.0;
  sc.obstacles.push_back(polyline_obstacle(
      0, {{2.0, 1.0, 0.0}, {3.0, 1.0, 0.0}, {3.0, -1.0, 0.0}, {2.0, -1.0, 0.0}}, 0.03, {0.0, 0.0, 1.0}));
  return sc;
}

ApfParams u_trap_apf_params() { return ApfParams{0.05, 1.0}; }

CheckResult check_velocity_bounds(std::size_t n, std::uint64_t seed) {
  Tally tally("speed_bounds", seed, 0.0);
  const std::vector<Scenario> base = scenario_battery(seed);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 13, i);
    Scenario sc = base[i % base.size()];
    const double a = uniform(rng, 0.0, 2.0 * kPi);
    const double s = uniform(rng, sc.params.v_min * (1.0 + 1e-6), sc.params.v_max);
    sc.start.velocity = {s * std::cos(a), s * std::sin(a), 0.0};
    sc.start.position += Vec3{uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), 0.0};
    SimOptions opt;
    opt.mode = Mode::Full;
    const Trajectory tr = simulate(sc, opt);
    double fmax = 0.0;
    for (const auto& smp : tr.samples) fmax = std::max(fmax, smp.force.f_total.norm());
    const double tol = 10.0 * sc.dt * fmax;
    double margin = kInf;
    for (const auto& smp : tr.samples) {
      if (distance(smp.position, sc.goal) <= sc.params.xi) continue;
      const double v = smp.velocity.norm();
      margin = std::min({margin, sc.params.v_max + tol - v, v - (sc.params.v_min - tol)});
    }
    tally.r.tolerance = std::max(tally.r.tolerance, tol);
    tally.add(tr.terminated_by == Termination::Collision ? -1.0 : margin);
  }
  return tally.finish();
}

CheckResult check_goal_convergence(std::size_t n, std::uint64_t seed) {
  Tally tally("goal_convergence", seed, 0.0);
  const std::vector<Scenario> base = scenario_battery(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const Scenario& sc = base[i % base.size()];
    SimOptions opt;
    opt.mode = Mode::Full;
    opt.stop.goal_tolerance = 0.05;
    const Trajectory tr = simulate(sc, opt);
    double margin = tr.terminated_by == Termination::GoalReached ? kInf : -1.0;
    const auto& s = tr.samples;
    for (std::size_t j = 0; j + 1 < s.size(); ++j) {
      if (s[j].force.k_vlc != 1) continue;
      const double v0 = lyapunov_value(s[j].position, s[j].velocity, sc.goal, sc.params);
      const double v1 = lyapunov_value(s[j + 1].position, s[j + 1].velocity, sc.goal, sc.params);
      const double allow = 0.5 * sc.dt * sc.dt * (s[j].force.f_total.squared_norm() + sc.params.k_p * s[j].velocity.squared_norm()) +
                           1e-12 * (1.0 + std::abs(v0));
      margin = std::min(margin, allow - (v1 - v0));
    }
    tally.add(margin);
  }
  return tally.finish();
}

CheckResult check_rs_ratio_bound(std::size_t n, std::uint64_t seed) {
  Tally tally("rs_ratio_bound", seed, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 14, i);
    const double c_min = std::exp(uniform(rng, std::log(0.05), std::log(5.0)));
    const double c = c_min * uniform(rng, 1.0, 3.0);
    const double R = -uniform(rng, 0.01, 5.0);
    const double S = -c * R + uniform(rng, 1e-9, 10.0);
    const double ratio = R * S / (R * R + S * S);
    const double margin = ratio - rs_ratio_lower_bound(c_min);
    tally.add(margin > 0.0 ? margin : -1.0);
  }
  return tally.finish();
}

CheckResult check_small_s_barrier(std::size_t n, std::uint64_t seed) {
  constexpr double dt = 1e-4;
  const DisturbedSetup ds;
  Tally tally("small_s_barrier", seed, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = case_rng(seed, 15, i);
    const double r = uniform(rng, 0.3, 1.5);
    const double c_tilde = uniform(rng, 0.2, 3.0);
    // |S| >= c~ |R| with R < 0, S < 0: angle below -atan(c~) measured from -x
    const double a_min = std::atan(c_tilde);
    const double beta = uniform(rng, a_min, 0.5 * kPi * 0.98);
    const PlanarIC ic = ic_from_polar(r, ds.v0, kPi + beta);
    const AuxState a = aux_state(ic.x, ic.v, {0.0, 0.0, 1.0}, ds.k);
    DisturbedExitInputs ei;
    ei.cls = ICClass::FollowingField;
    ei.x0_norm = r;
    ei.R0 = a.R;
    ei.S0 = a.S;
    ei.v_min = ds.v_min;
    ei.k_cf = ds.k;
    PointRunOptions po;
    po.k_cf = ds.k;
    po.dt = dt;
    po.horizon = exit_time_bound_disturbed(ei).tau_max + 1.0;
    po.stop_on_quadrant_exit = true;
    po.z_max = 0.99 * disturbance_budget(budget_inputs(ds, a, r, ICClass::FollowingField, r));
    po.z_hold = 0.01;
    po.seed = mix(seed + i);
    const PointRunStats st = run_point(ic.x, ic.v, po);
    if (!speed_in_band(st, ds)) {
      tally.add(0.0, true);
      continue;
    }
    const double bound = uniform_barrier_bound(a.v_b, ds.v_min, ds.v_max, c_tilde);
    tally.add(st.collided ? -1.0 : 1.0 - st.max_v_b / bound);
  }
  return tally.finish();
}

// ---------------------------------------------------------------------------

namespace {

CheckResult run_velocity_invariance(std::size_t n, std::uint64_t seed) { return check_velocity_invariance(n, seed); }

constexpr ClaimRunner kRunners[] = {
    {"velocity_invariance", &run_velocity_invariance, 100},
    {"rs_identity", &check_rs_identity, 20},
    {"moving_away", &check_moving_away, 500},
    {"following_field", &check_following_field, 500},
    {"critical_quadrant", &check_critical_quadrant, 500},
    {"epsilon_dynamics", &check_epsilon_dynamics, 1000},
    {"collision_ray", &check_collision_ray, 3600},
    {"ray_collision_time", &check_ray_collision_time, 3},
    {"kcf_adaptation", &check_kcf_adaptation, 10000},
    {"disturbed_rates", &check_disturbed_rates, 1000},
    {"disturbed_moving_away", &check_disturbed_moving_away, 500},
    {"disturbed_following_field", &check_disturbed_following_field, 500},
    {"disturbed_critical", &check_disturbed_critical, 500},
    {"velocity_bounds", &check_velocity_bounds, 12},
    {"goal_convergence", &check_goal_convergence, 3},
    {"rs_ratio_bound", &check_rs_ratio_bound, 100000},
    {"small_s_barrier", &check_small_s_barrier, 200},
};

constexpr Claim kClaims[] = {
    {"speed_invariance", "velocity_invariance", "CF force alone keeps |x_dot| constant"},
    {"rs_identity", "rs_identity", "R^2 + S^2 = |x|^2 |x_dot|^2 in the plane"},
    {"moving_away_barrier", "moving_away", "R(0) >= 0 keeps R >= 0 and V_B non-increasing"},
    {"following_field_barrier", "following_field", "S(0) < 0 keeps S^2 >= S(0)^2 and V_B <= |x_dot|^2/S(0)^2"},
    {"critical_off_ray", "critical_quadrant", "off-ray critical ICs: |eps| non-decreasing, exit before tau_max, distance bound"},
    {"collision_ray_iff", "collision_ray", "collision iff R<0, S>0, eps=0"},
    {"ray_collision_time", "ray_collision_time", "time to origin on the ray is S(0)(1+c^2)/k_cf"},
    {"epsilon_definition", "epsilon_dynamics", "eps = S + cR"},
    {"epsilon_rate", "epsilon_dynamics", "d eps/dt = k_cf S eps/(R^2+S^2)"},
    {"kcf_adaptation", "kcf_adaptation", "adapted k_cf moves eps to eps_min sgn(eps) and keeps it there"},
    {"disturbed_force", "disturbed_rates", "disturbance enters additively"},
    {"disturbed_r_rate", "disturbed_rates", "R rate gains x.z"},
    {"disturbed_s_rate", "disturbed_rates", "S rate gains (x cross z).b"},
    {"speed_rate", "disturbed_rates", "d|x_dot|^2/dt = 2 x_dot.z"},
    {"c_rate", "disturbed_rates", "dc/dt = -2c x_dot.z/|x_dot|^2"},
    {"disturbed_moving_away", "disturbed_moving_away", "budget v_min^2/x_max keeps R >= 0 and V_B non-increasing"},
    {"disturbed_following_field", "disturbed_following_field", "S(0) < 0 with budget: R reaches 0, V_B <= 4 v_max^2/S(0)^2"},
    {"disturbed_critical", "disturbed_critical", "critical with budget: |eps| >= |eps(0)|/2, distance bound, no collision"},
    {"speed_upper_bound", "velocity_bounds", "|x_dot| <= v_max under CF + VLC"},
    {"speed_lower_bound", "velocity_bounds", "|x_dot| >= v_min outside the goal ball"},
    {"goal_convergence", "goal_convergence", "goal reached, Lyapunov value non-increasing while the gate is on"},
    {"rs_ratio_bound", "rs_ratio_bound", "RS/(R^2+S^2) lower bound for S + cR > 0"},
    {"small_s_barrier", "small_s_barrier", "|S(0)| >= c~|R(0)|: V_B <= V_B(0) 8 v_max^2/(v_min^2 max(1,c~^2))"},
};

}  // namespace

std::span<const ClaimRunner> claim_runners() { return kRunners; }
std::span<const Claim> claims_manifest() { return kClaims; }

const ClaimRunner* find_runner(std::string_view name) {
  for (const auto& r : kRunners) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::vector<CheckResult> run_verification(std::string_view filter, std::optional<std::size_t> n, std::uint64_t seed) {
  std::vector<std::string_view> wanted;
  const bool all = filter.empty() || filter == "all";
  while (!all && !filter.empty()) {
    const auto pos = filter.find(',');
    wanted.push_back(filter.substr(0, pos));
    filter = pos == std::string_view::npos ? std::string_view{} : filter.substr(pos + 1);
  }
  std::vector<std::string_view> runners;
  for (const auto& c : kClaims) {
    const bool match = all || std::find(wanted.begin(), wanted.end(), c.id) != wanted.end() ||
                       std::find(wanted.begin(), wanted.end(), c.runner) != wanted.end();
    if (match && std::find(runners.begin(), runners.end(), c.runner) == runners.end()) runners.push_back(c.runner);
  }
  for (auto w : wanted) {
    const bool known = find_runner(w) != nullptr ||
                       std::any_of(std::begin(kClaims), std::end(kClaims), [&](const Claim& c) { return c.id == w; });
    if (!known) throw std::invalid_argument("unknown claim: " + std::string(w));
  }
  std::vector<CheckResult> out;
  for (auto name : runners) {
    const ClaimRunner* r = find_runner(name);
    out.push_back(r->run(n.value_or(r->default_n), seed));
  }
  return out;
}

}  // namespace cfp
