#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfp/simulator.hpp"

namespace cfp {

enum class CheckStatus { Pass, Fail, Inconclusive };

std::string_view to_string(CheckStatus s);

// Outcome of one numerical experiment. Margins are signed: positive means the
// claim held with room to spare, in the units of the checked quantity.
struct CheckResult {
  std::string claim;
  std::size_t n_cases = 0;
  std::size_t n_pass = 0;
  std::size_t n_inconclusive = 0;
  double worst_margin = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  CheckStatus status = CheckStatus::Inconclusive;
  std::string detail;

  bool passed() const { return status == CheckStatus::Pass; }
};

// ---------------------------------------------------------------------------
// Reference integrator

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct OracleOptions {
  std::size_t n_out = 100;   // output intervals on [0, t_end]
  std::size_t substeps0 = 1; // initial RK4 substeps per output interval
  double tol = 1e-8;         // sup-norm difference between successive traces
  int max_halvings = 14;
};

struct OracleTrace {
  std::vector<double> t;
  std::vector<std::vector<double>> y;  // y[i] is the state at t[i]
  bool converged = false;
  double last_difference = 0.0;
  int halvings = 0;
};

// Classic RK4 repeated with halved steps until two successive traces differ by
// less than `tol` at every output time. Non-finite states or exhausting the
// halving budget leave `converged` false.
OracleTrace oracle_integrate(const OdeRhs& rhs, std::vector<double> y0, double t_end, const OracleOptions& opt = {});

// Right-hand side of the planar single-point CF dynamics with the obstacle at
// the origin; state layout (x, y, vx, vy), field direction +z or -z.
OdeRhs point_cf_rhs(double k_cf, double b_z);

// ---------------------------------------------------------------------------
// Cartesian single-point experiments (obstacle at the origin, planar)

struct PointRunOptions {
  double k_cf = 1.0;
  double b_z = 1.0;
  double dt = 1e-4;
  double horizon = 10.0;
  double z_max = 0.0;        // disturbance magnitude
  double z_hold = 0.1;       // [s] each random direction is held this long
  std::uint64_t seed = 0;
  bool stop_on_quadrant_exit = false;  // leave once R >= 0 (critical/following cases)
  double x_max = 0.0;        // > 0: stop once |x| exceeds it
  double collision_radius = 1e-6;
};

struct PointRunStats {
  bool collided = false;
  double min_distance = 0.0;          // over the whole run
  double min_distance_critical = 0.0; // while R < 0 and S > 0
  double min_abs_eps_critical = 0.0;  // while R < 0 and S > 0
  double exit_time = -1.0;            // first time the start quadrant is left; -1 if never
  double min_R = 0.0;
  double max_v_b = 0.0;
  double max_v_b_ratio = 0.0;         // max V_B(t)/V_B(0)
  double min_speed = 0.0;
  double max_speed = 0.0;
  double min_S_sq_ratio = 0.0;        // min S(t)^2/S(0)^2
  double end_time = 0.0;
};

PointRunStats run_point(const Vec3& x0, const Vec3& v0, const PointRunOptions& opt);

// Heading-sweep IC used by the ray experiments: x0 = (r,0,0), v0 = v(cos th, sin th, 0).
struct HeadingSweep {
  std::size_t n_headings = 0;
  std::vector<std::size_t> collided;  // indices of colliding headings
  double collision_measure_deg = 0.0;
};

HeadingSweep sweep_headings_rs(std::size_t n, double radius, double speed, double k_cf, double dt, double horizon);

// ---------------------------------------------------------------------------
// Claim runners

CheckResult check_velocity_invariance(std::size_t n, std::uint64_t seed, double dt = 1e-3, double duration = 5.0);
CheckResult check_rs_identity(std::size_t n, std::uint64_t seed);
CheckResult check_moving_away(std::size_t n, std::uint64_t seed);
CheckResult check_following_field(std::size_t n, std::uint64_t seed);
CheckResult check_critical_quadrant(std::size_t n, std::uint64_t seed);
CheckResult check_quadrant_guarantees(std::size_t n, std::uint64_t seed);
CheckResult check_epsilon_dynamics(std::size_t n, std::uint64_t seed);
CheckResult check_collision_ray(std::size_t n, std::uint64_t seed);
CheckResult check_ray_collision_time(std::size_t n, std::uint64_t seed);
CheckResult check_kcf_adaptation(std::size_t n, std::uint64_t seed);
CheckResult check_disturbed_rates(std::size_t n, std::uint64_t seed);
CheckResult check_disturbed_moving_away(std::size_t n, std::uint64_t seed);
CheckResult check_disturbed_following_field(std::size_t n, std::uint64_t seed);
CheckResult check_disturbed_critical(std::size_t n, std::uint64_t seed);
CheckResult check_disturbed(std::size_t n, std::uint64_t seed);
CheckResult check_velocity_bounds(std::size_t n, std::uint64_t seed);
CheckResult check_goal_convergence(std::size_t n, std::uint64_t seed);
CheckResult check_rs_ratio_bound(std::size_t n, std::uint64_t seed);
CheckResult check_small_s_barrier(std::size_t n, std::uint64_t seed);

// Battery of planar scenarios shared by the envelope and convergence checks:
// obstacle-free, single cloud, and several nonconvex clouds.
std::vector<Scenario> scenario_battery(std::uint64_t seed);
PlannerParams cluttered_params();

// Symmetric U-shaped wall opening towards the start, goal behind it.
Scenario u_trap_scenario();
ApfParams u_trap_apf_params();

// Lyapunov candidate: half squared speed plus a Huber potential around the goal.
double huber_potential(const Vec3& x, const Vec3& goal, const PlannerParams& p);
double lyapunov_value(const Vec3& x, const Vec3& v, const Vec3& goal, const PlannerParams& p);

// ---------------------------------------------------------------------------
// Manifest

struct ClaimRunner {
  std::string_view name;
  CheckResult (*run)(std::size_t n, std::uint64_t seed);
  std::size_t default_n;
};

struct Claim {
  std::string_view id;
  std::string_view runner;  // name of the ClaimRunner that certifies it
  std::string_view summary;
};

std::span<const ClaimRunner> claim_runners();
std::span<const Claim> claims_manifest();
const ClaimRunner* find_runner(std::string_view name);

// Runs every runner referenced by a claim whose id or runner name matches one
// of the comma-separated filter entries ("all" or empty: everything).
// `n` overrides each runner's default case count.
std::vector<CheckResult> run_verification(std::string_view filter, std::optional<std::size_t> n, std::uint64_t seed);

}  // namespace cfp
