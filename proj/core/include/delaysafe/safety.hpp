#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "delaysafe/plant.hpp"

namespace delaysafe {

enum class ObstacleKind { kCircular, kSuperellipse };

/// One additive barrier term.
///
///  circular:      exp(-((x-xo)^2 + (y-yo)^2) / sigma)
///  superellipse:  exp(-((x-xo)/sigma_x)^{2n} - ((y-yo)/sigma_y)^{2n})
struct ObstacleSpec {
  ObstacleKind kind = ObstacleKind::kCircular;
  double x = 0.0;
  double y = 0.0;
  double sigma = 1.0;    // m^2, circular only
  double sigma_x = 1.0;  // m, superellipse only
  double sigma_y = 1.0;
  int n = 2;

  static ObstacleSpec circular(double x, double y, double sigma) {
    return {ObstacleKind::kCircular, x, y, sigma, 1.0, 1.0, 1};
  }
  static ObstacleSpec superellipse(double x, double y, double sigma_x,
                                   double sigma_y, int n) {
    return {ObstacleKind::kSuperellipse, x, y, 1.0, sigma_x, sigma_y, n};
  }

  void validate() const;
  friend bool operator==(const ObstacleSpec&, const ObstacleSpec&) = default;
};

/// B(x, y) = -b0 + sum of obstacle terms. Negative on safe states.
struct BarrierField {
  double b0 = 0.6;
  double alpha = 1.0;
  std::vector<ObstacleSpec> obstacles;

  void validate() const;
  friend bool operator==(const BarrierField&, const BarrierField&) = default;
};

double barrier_eval(const BarrierField& field, double x, double y);
Eigen::Vector2d barrier_gradient(const BarrierField& field, double x, double y);
Eigen::Matrix2d barrier_hessian(const BarrierField& field, double x, double y);

/// Gradient norm floor below which the filter is inactive.
inline constexpr double kGradientEpsilon = 1e-12;

/// c = -alpha B / (v |g|); +inf when |g| < kGradientEpsilon.
/// Throws SimulationError for v <= 0.
double compute_c(const BarrierField& field, double x, double y, double v);

/// Half-width of the unsafe heading interval.
struct DeltaResult {
  std::optional<double> delta;  // empty: no restriction (c >= 1)
  bool violation = false;       // c < 0, robot inside the avoidance region
};

DeltaResult compute_delta(double c);

/// Beta rate  v phi / |g|^2, phi = g1 (H21 cos + H22 sin) - g2 (H11 cos + H12 sin).
double beta_rate(const BarrierField& field, double x, double y, double v,
                 double theta);

/// One RK4 step of beta jointly with the unicycle kinematics (twist held).
/// Empty when the gradient degenerates at any stage.
std::optional<double> integrate_beta(const BarrierField& field, double beta,
                                     const Pose& pose, const BodyTwist& twist,
                                     double dt);

struct UnsafeInterval {
  double beta = 0.0;
  double delta = 0.0;

  double low() const { return beta - delta; }
  double high() const { return beta + delta; }

  /// Membership after reducing `theta` to the branch nearest beta.
  bool contains(double theta) const;
};

UnsafeInterval unsafe_interval(double beta, double delta);

enum class TurnDirection { kLeft, kRight };

/// How beta is seeded on activation.
enum class BetaReset {
  kGradient,  // branch of atan2(g2, g1) nearest the heading
  kHeading,   // the heading itself
};

/// First-order high-pass  z = s/(T s + 1) theta, bilinear discretization.
class HighPassDerivative {
 public:
  HighPassDerivative() = default;
  HighPassDerivative(double time_constant, double dt);

  double step(double input);
  double output() const { return y_; }

 private:
  double gain_ = 0.0;  // 2/dt / (a + 1)
  double pole_ = 0.0;  // (a - 1)/(a + 1)
  double prev_input_ = 0.0;
  double y_ = 0.0;
  bool primed_ = false;
};

struct SafeCommand {
  double theta_s = 0.0;
  double z = 0.0;
  double v_s = 0.0;
  bool overridden = false;
};

/// Stateless part of the override: replaces (theta_a, dtheta_a, v_a) when
/// theta_a falls in the interval. `theta_prev` selects the 2 pi branch of the
/// replacement; `z_filtered` is the filtered derivative used while overriding.
SafeCommand apply_override(double theta_a, double dtheta_a, double v_a,
                           double v_r,
                           const std::optional<UnsafeInterval>& interval,
                           TurnDirection turn, double theta_prev,
                           double z_filtered);

struct SafetyConfig {
  BarrierField field;
  TurnDirection turn = TurnDirection::kLeft;
  double hpf_time_constant = 0.05;
  double c_off = 1.05;  // deactivation threshold
  BetaReset beta_reset = BetaReset::kGradient;

  void validate() const;
  friend bool operator==(const SafetyConfig&, const SafetyConfig&) = default;
};

/// Per-sample diagnostics of the safety filter.
struct SafetyStatus {
  double b = 0.0;
  double c = std::numeric_limits<double>::infinity();
  double delta = 0.0;
  double beta = 0.0;
  bool active = false;
  bool violation = false;
  bool degenerate_gradient = false;
  SafeCommand command;
};

/// Stateful heading filter: activation with hysteresis, beta tracking,
/// override and derivative filter.
class SafetyFilter {
 public:
  SafetyFilter() = default;
  SafetyFilter(const SafetyConfig& cfg, double dt);

  /// Evaluates the filter at the current sample from the measured pose and
  /// twist. twist.v <= 0 leaves the filter inactive.
  SafetyStatus update(const Pose& pose, const BodyTwist& twist, double theta_a,
                      double dtheta_a, double v_a, double v_r);

  /// Propagates beta across the sample just taken by the robot.
  void advance(const Pose& pose, const BodyTwist& twist);

  bool active() const { return active_; }
  double beta() const { return beta_; }

 private:
  SafetyConfig cfg_;
  HighPassDerivative hpf_;
  double dt_ = 0.0;
  bool active_ = false;
  bool degenerate_ = false;
  double beta_ = 0.0;
  std::optional<double> last_theta_s_;
};

}  // namespace delaysafe
