#pragma once

#include <optional>
#include <utility>

#include "delaysafe/plant.hpp"

namespace delaysafe {

/// Continuous four-quadrant arctangent: the branch of atan2(y, x) nearest
/// `prev`, so |result - prev| <= pi. Caller handles (0, 0).
double atan2c(double y, double x, double prev);

/// Representative of `angle` modulo 2 pi closest to `reference`.
double nearest_branch(double angle, double reference);

struct ReferenceState {
  double xr = 0.0;
  double yr = 0.0;
  double dxr = 0.0;
  double dyr = 0.0;
  double ddxr = 0.0;
  double ddyr = 0.0;
  double theta_r = 0.0;  // unwrapped
  double vr = 0.0;
  double omega_r = 0.0;
};

/// x_r = R sin(w t), y_r = -R cos(w t).
/// theta_r is the atan2c continuation from `theta_prev`.
ReferenceState reference_circle(double t, double radius, double omega,
                                double theta_prev = 0.0);

/// x_r = ax sin(2 w t), y_r = -ay cos(w t).
ReferenceState reference_figure8(double t, double ax, double ay, double omega,
                                 double theta_prev = 0.0);

/// Throws ConfigError for circle parameters outside R > 0, w != 0.
void validate_circle(double radius, double omega);

/// Throws ConfigError unless ax, ay > 0, w != 0 and the path speed stays
/// positive over a period.
void validate_figure8(double ax, double ay, double omega);

/// Below this norm of the convergence field theta_a is held.
inline constexpr double kFieldEpsilon = 1e-9;

struct VfoOutput {
  double v_a = 0.0;
  double theta_a = 0.0;
  double dtheta_a = 0.0;
  double hx = 0.0;
  double hy = 0.0;
  bool singular = false;  // |h| < kFieldEpsilon, theta_a held
};

/// Vector-field-orientation law: h = k e + dr, v_a = h . q(theta),
/// theta_a = atan2c(h).
///
/// dtheta_a differentiates h along the robot motion. The robot speed in that
/// derivative is `v_robot` when given (measured speed), else the freshly
/// computed v_a. The two agree when the servo loop has no delay.
VfoOutput vfo_step(const Pose& pose, const ReferenceState& ref, double k,
                   double theta_a_prev,
                   std::optional<double> v_robot = std::nullopt);

/// PI controller with explicit-Euler integral state.
struct PiController {
  double kp = 0.0;
  double ki = 0.0;
  double integ = 0.0;

  /// integ += e dt (skipped when `freeze`), returns kp e + ki integ.
  double step(double e, double dt, bool freeze = false) {
    if (!freeze) integ += e * dt;
    return kp * e + ki * integ;
  }

  void reset() { integ = 0.0; }
};

struct ScaledCommands {
  double v_right = 0.0;
  double v_left = 0.0;
  double mu = 0.0;
};

/// mu = max(|uR|, |uL|)/u_max from the previous servo outputs; when mu > 1
/// both adjusted wheel velocities are divided by mu.
ScaledCommands scale_commands(double v_right_a, double v_left_a,
                              double u_right_prev, double u_left_prev,
                              double u_max);

}  // namespace delaysafe
