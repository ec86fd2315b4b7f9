#pragma once

#include <optional>
#include <string_view>

#include "cfp/vec3.hpp"

namespace cfp {

// Snapshot of the auxiliary R-S system with respect to one obstacle point
// (x is the robot-minus-point distance vector).
struct AuxState {
  double R = 0.0;      // x . x_dot [m^2/s]
  double S = 0.0;      // (x cross x_dot) . b [m^2/s]
  double c = 0.0;      // k_cf / |x_dot|^2
  double eps = 0.0;    // S + c R, signed S-distance to the collision ray
  double v_b = 0.0;    // barrier 1/|x|^2 [1/m^2]
  double v_norm = 0.0; // |x_dot| [m/s]

  double rs_norm_sq() const { return R * R + S * S; }
};

// Throws CollisionError when |x| < 1e-12. A zero velocity yields NaN for c
// and eps (the auxiliary system is undefined there).
AuxState aux_state(const Vec3& x, const Vec3& x_dot, const Vec3& b, double k_cf);

enum class ICClass {
  MovingAway,      // R >= 0
  FollowingField,  // R < 0, S <= 0
  CriticalOffRay,  // R < 0, S > 0, eps != 0
  CollisionRay,    // R < 0, S > 0, eps == 0 (within ray_tol)
};

std::string_view to_string(ICClass c);

// 1e-9 * sqrt(R^2 + S^2).
double default_ray_tol(const AuxState& aux);

ICClass classify(const AuxState& aux, double ray_tol);
inline ICClass classify(const AuxState& aux) { return classify(aux, default_ray_tol(aux)); }

struct RSRates {
  double r_dot = 0.0;
  double s_dot = 0.0;
};

// Extra planar force acting on top of the CF force of the reference point.
struct RSDisturbance {
  Vec3 x;  // distance vector robot - point
  Vec3 z;  // disturbance force
  Vec3 b;
};

// R_dot = k RS/(R^2+S^2) + v^2 [+ x.z],  S_dot = -k R^2/(R^2+S^2) [+ (x cross z).b].
// Throws CollisionError at R = S = 0.
RSRates rs_derivatives(double R, double S, double v_norm, double k_cf,
                       const std::optional<RSDisturbance>& disturbance = std::nullopt);

// eps_dot = k S eps/(R^2+S^2) for the undisturbed system; the collision ray
// eps = 0 is invariant and repelling for S > 0.
double epsilon_rate(double R, double S, double c, double k_cf);

// Disturbed kinematics: d/dt |x_dot|^2 = 2 x_dot.z and c_dot = -2c (x_dot.z)/|x_dot|^2.
double speed_sq_rate(const Vec3& x_dot, const Vec3& z);
double c_rate(double c, const Vec3& x_dot, const Vec3& z);

// d/dt V_B = -2 R v^4 / (R^2+S^2)^2.
double barrier_rate(double R, double S, double v_norm);

// Time to reach the origin when starting exactly on the collision ray:
// S0 (1 + c^2) / k_cf. Throws std::domain_error for S0 <= 0.
double collision_time_on_ray(double S0, double c, double k_cf);

struct KcfAdaptation {
  double k_cf = 0.0;
  bool fired = false;
};

// Rescales k_cf near the collision ray: inside d_min, in the critical
// quadrant and with |eps| < eps_min, returns
//   k - sgn(eps) (eps_min - |eps|) |x_dot|^2 / |R|
// which places eps at exactly eps_min sgn(eps). sgn(0) is taken as +1. A
// negative result is allowed and acts like a flipped b.
KcfAdaptation adapt_kcf(const AuxState& aux, double k_cf, double eps_min, double distance, double d_min);

struct DistanceBoundInputs {
  AuxState aux0;
  bool disturbed = false;
  double v_max = 0.0;
  double c_max = 0.0;
};

// Guaranteed lower bound on |x(t)| while the initial quadrant persists.
// Critical quadrant: |eps0|/(c v) for eps0 < 0, |eps0|/v for eps0 > 0,
// |eps0|/(2 v_max max(c_max,1)) when disturbed; 0 on the collision ray.
// MovingAway gives |x0|; FollowingField |S0|/v (|S0|/(2 v_max) disturbed).
double min_distance_bound(const DistanceBoundInputs& in);

// Lower bound on RS/(R^2+S^2) over R<0, S>0, c >= c_min, S + cR > 0.
double rs_ratio_lower_bound(double c_min);

struct BudgetInputs {
  ICClass cls = ICClass::MovingAway;
  double x0_norm = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
  double c_min = 0.0;
  double c_max = 0.0;
  double k_cf = 0.0;
  double S0 = 0.0;
  double R0 = 0.0;
  double eps0 = 0.0;
  double x_max = 0.0;
};

// Largest disturbance magnitude under which the per-quadrant guarantees hold.
// Zero on the collision ray or when the parameters admit no positive budget.
double disturbance_budget(const BudgetInputs& in);

// V_B(0) * 8 v_max^2 / (v_min^2 max(1, c_tilde^2)), valid for |S0| >= c_tilde |R0|.
double uniform_barrier_bound(double v_b0, double v_min, double v_max, double c_tilde);

// Upper bounds on the time spent in the initial quadrant, as used by the
// verification runners. `tau_max` is +inf when no bound applies.
struct ExitTimeBound {
  double tau_max = 0.0;
  std::string_view source;
};

ExitTimeBound exit_time_bound(double R0, double S0, double c, double k_cf);

struct DisturbedExitInputs {
  ICClass cls = ICClass::MovingAway;
  double R0 = 0.0;
  double S0 = 0.0;
  double eps0 = 0.0;
  double x0_norm = 0.0;
  double v_min = 0.0;
  double c_min = 0.0;
  double c_max = 0.0;
  double k_cf = 0.0;
};

ExitTimeBound exit_time_bound_disturbed(const DisturbedExitInputs& in);

}  // namespace cfp
