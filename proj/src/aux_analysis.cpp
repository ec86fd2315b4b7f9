#include "cfp/aux_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cfp/errors.hpp"
#include "cfp/forces.hpp"

namespace cfp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

AuxState aux_state(const Vec3& x, const Vec3& x_dot, const Vec3& b, double k_cf) {
  const double xn = x.norm();
  if (xn < kAtPointTolerance) throw CollisionError("aux_state: robot at obstacle point");
  AuxState a;
  a.R = dot(x, x_dot);
  a.S = dot(cross(x, x_dot), b);
  a.v_norm = x_dot.norm();
  a.v_b = 1.0 / (xn * xn);
  if (a.v_norm > 0.0) {
    a.c = k_cf / (a.v_norm * a.v_norm);
    a.eps = a.S + a.c * a.R;
  } else {
    a.c = kNaN;
    a.eps = kNaN;
  }
  return a;
}

std::string_view to_string(ICClass c) {
  switch (c) {
    case ICClass::MovingAway: return "MovingAway";
    case ICClass::FollowingField: return "FollowingField";
    case ICClass::CriticalOffRay: return "CriticalOffRay";
    case ICClass::CollisionRay: return "CollisionRay";
  }
  return "?";
}

double default_ray_tol(const AuxState& aux) { return 1e-9 * std::sqrt(aux.rs_norm_sq()); }

ICClass classify(const AuxState& aux, double ray_tol) {
  if (aux.R >= 0.0) return ICClass::MovingAway;
  if (aux.S <= 0.0) return ICClass::FollowingField;
  return std::abs(aux.eps) <= ray_tol ? ICClass::CollisionRay : ICClass::CriticalOffRay;
}

RSRates rs_derivatives(double R, double S, double v_norm, double k_cf,
                       const std::optional<RSDisturbance>& disturbance) {
  const double n2 = R * R + S * S;
  if (n2 == 0.0) throw CollisionError("rs_derivatives: R = S = 0");
  RSRates r{k_cf * R * S / n2 + v_norm * v_norm, -k_cf * R * R / n2};
  if (disturbance) {
    r.r_dot += dot(disturbance->x, disturbance->z);
    r.s_dot += dot(cross(disturbance->x, disturbance->z), disturbance->b);
  }
  return r;
}

double epsilon_rate(double R, double S, double c, double k_cf) {
  const double n2 = R * R + S * S;
  if (n2 == 0.0) throw CollisionError("epsilon_rate: R = S = 0");
  return k_cf * S * (S + c * R) / n2;
}

double speed_sq_rate(const Vec3& x_dot, const Vec3& z) { return 2.0 * dot(x_dot, z); }

double c_rate(double c, const Vec3& x_dot, const Vec3& z) { return -2.0 * c * dot(x_dot, z) / x_dot.squared_norm(); }

double barrier_rate(double R, double S, double v_norm) {
  const double n2 = R * R + S * S;
  const double v2 = v_norm * v_norm;
  return -2.0 * R * v2 * v2 / (n2 * n2);
}

double collision_time_on_ray(double S0, double c, double k_cf) {
  if (!(S0 > 0.0)) throw std::domain_error("collision_time_on_ray: S0 must be positive");
  return S0 * (1.0 + c * c) / k_cf;
}

KcfAdaptation adapt_kcf(const AuxState& aux, double k_cf, double eps_min, double distance, double d_min) {
  const bool active = aux.R < 0.0 && aux.S > 0.0 && distance <= d_min;
  if (!active || std::abs(aux.eps) >= eps_min) return {k_cf, false};
  const double sgn = aux.eps < 0.0 ? -1.0 : 1.0;
  const double k_new = k_cf - sgn * (eps_min - std::abs(aux.eps)) * aux.v_norm * aux.v_norm / std::abs(aux.R);
  return {k_new, true};
}

double min_distance_bound(const DistanceBoundInputs& in) {
  const AuxState& a = in.aux0;
  const ICClass cls = classify(a);
  switch (cls) {
    case ICClass::CollisionRay:
      return 0.0;
    case ICClass::MovingAway:
      return 1.0 / std::sqrt(a.v_b);
    case ICClass::FollowingField:
      return in.disturbed ? std::abs(a.S) / (2.0 * in.v_max) : std::abs(a.S) / a.v_norm;
    case ICClass::CriticalOffRay:
      if (in.disturbed) return std::abs(a.eps) / (2.0 * in.v_max * std::max(in.c_max, 1.0));
      return a.eps < 0.0 ? std::abs(a.eps) / (a.c * a.v_norm) : std::abs(a.eps) / a.v_norm;
  }
  return 0.0;
}

double rs_ratio_lower_bound(double c_min) {
  if (!(c_min > 0.0)) throw std::domain_error("rs_ratio_lower_bound: c_min must be positive");
  return c_min >= 1.0 ? -c_min / (c_min * c_min + 1.0) : -0.5;
}

double disturbance_budget(const BudgetInputs& in) {
  const double k = in.k_cf;
  const double x0 = in.x0_norm;
  double z = 0.0;
  switch (in.cls) {
    case ICClass::CollisionRay:
      return 0.0;
    case ICClass::MovingAway:
      z = in.v_min * in.v_min / in.x_max;
      break;
    case ICClass::FollowingField: {
      const double vmin2 = in.v_min * in.v_min;
      z = std::min({k * vmin2 / (x0 * in.v_max * in.v_max), vmin2 / (2.0 * x0),
                    -in.v_min * in.S0 / (4.0 * x0 * x0)});
      break;
    }
    case ICClass::CriticalOffRay: {
      const double cmax = in.c_max;
      const double cmin = in.c_min;
      const double e = std::abs(in.eps0);
      if (in.eps0 < 0.0) {
        z = std::min(k / (2.0 * x0 * (1.0 + cmax * cmax)),
                     k * e / (4.0 * x0 * x0 * in.v_max * (1.0 + 3.0 * cmax) * (1.0 + cmax * cmax)));
      } else if (cmin >= 1.0) {
        const double g = cmin * cmin - cmin * cmax + 1.0;
        z = std::min(k * g / (2.0 * x0 * cmax * (cmin * cmin + 1.0)),
                     k * e * g / (4.0 * x0 * x0 * in.v_max * cmax * (1.0 + cmin * cmin) * (1.0 + 3.0 * cmax)));
      } else {
        z = std::min(k * (2.0 - cmax) / (4.0 * x0 * cmax),
                     k * e * (2.0 - cmax) / (8.0 * x0 * x0 * in.v_max * cmax * (1.0 + 3.0 * cmax)));
      }
      break;
    }
  }
  return std::isfinite(z) ? std::max(z, 0.0) : 0.0;
}

double uniform_barrier_bound(double v_b0, double v_min, double v_max, double c_tilde) {
  return v_b0 * 8.0 * v_max * v_max / (v_min * v_min * std::max(1.0, c_tilde * c_tilde));
}

ExitTimeBound exit_time_bound(double R0, double S0, double c, double k_cf) {
  if (!(R0 < 0.0 && S0 > 0.0)) return {kInf, "none"};
  const double eps0 = S0 + c * R0;
  if (eps0 <= 0.0) return {S0 * (1.0 + c * c) / k_cf, "tmax_below"};
  if (c >= 1.0) return {-R0 * (c + c * c * c) / k_cf, "tmax_above_1"};
  return {-2.0 * R0 / k_cf, "tmax_above_2"};
}

ExitTimeBound exit_time_bound_disturbed(const DisturbedExitInputs& in) {
  switch (in.cls) {
    case ICClass::FollowingField: {
      // tau_1,max + tau_2,max; the |x0|/v_min terms cancel.
      const double tau1 = -2.0 * in.x0_norm / in.v_min - 2.0 * in.R0 / (in.v_min * in.v_min);
      const double tau2 = 2.0 * in.x0_norm / in.v_min;
      return {tau1 + tau2, "tau1max_plus_tau2max"};
    }
    case ICClass::CriticalOffRay: {
      const double cmax = in.c_max;
      const double cmin = in.c_min;
      if (in.eps0 < 0.0) return {2.0 * in.S0 * (1.0 + cmax * cmax) / in.k_cf, "tmax_below_disturbed"};
      if (cmin >= 1.0) {
        const double g = cmin * cmin - cmin * cmax + 1.0;
        return {-2.0 * in.R0 * cmax * (cmin * cmin + 1.0) / (in.k_cf * g), "tmax_above_disturbed2"};
      }
      return {-4.0 * in.R0 * cmax / (in.k_cf * (2.0 - cmax)), "tmax_above_disturbed3"};
    }
    default:
      return {kInf, "none"};
  }
}

}  // namespace cfp
