#include "delaysafe/plant.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "delaysafe/errors.hpp"

namespace delaysafe {

void SecondOrderDelayPlant::validate() const {
  for (double v : {num1, num0, den1, den0, tau}) {
    if (!std::isfinite(v)) throw ConfigError("plant: non-finite coefficient");
  }
  if (den1 <= 0.0 || den0 <= 0.0) {
    throw ConfigError("plant: denominator must satisfy den1 > 0 and den0 > 0");
  }
  if (tau < 0.0) throw ConfigError("plant: tau must be non-negative");
}

std::array<std::complex<double>, 2> SecondOrderDelayPlant::poles() const {
  const std::complex<double> disc =
      std::sqrt(std::complex<double>(den1 * den1 - 4.0 * den0, 0.0));
  return {(-den1 - disc) / 2.0, (-den1 + disc) / 2.0};
}

double SecondOrderDelayPlant::zero() const {
  if (num1 == 0.0) throw ConfigError("plant: no finite zero when num1 == 0");
  return -num0 / num1;
}

std::size_t delay_steps(double tau, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (tau < 0.0) throw ConfigError("delay must be non-negative");
  const double ratio = tau / dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) >= 1e-9) {
    throw ConfigError("delay " + std::to_string(tau) +
                      " s is not an integer multiple of dt " +
                      std::to_string(dt) + " s");
  }
  return static_cast<std::size_t>(steps);
}

double DiscretePlant::dc_gain() const {
  const Eigen::Matrix2d m = Eigen::Matrix2d::Identity() - ad;
  return c * m.inverse() * bd;
}

DiscretePlant discretize_plant(const SecondOrderDelayPlant& plant, double dt) {
  plant.validate();
  DiscretePlant out;
  out.delay = delay_steps(plant.tau, dt);
  out.dt = dt;

  // Controllable canonical form.
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -plant.den0, -plant.den1;
  const Eigen::Vector2d b(0.0, 1.0);
  out.c << plant.num0, plant.num1;

  // exp([A B; 0 0] dt) = [Ad Bd; 0 1]
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m.topLeftCorner<2, 2>() = a;
  m.topRightCorner<2, 1>() = b;
  const Eigen::Matrix3d phi = (m * dt).exp();
  out.ad = phi.topLeftCorner<2, 2>();
  out.bd = phi.topRightCorner<2, 1>();
  return out;
}

double WheelState::step(double u) {
  const double delayed = line_.push(u);
  x_ = plant_.ad * x_ + plant_.bd * delayed;
  return output();
}

BodyTwist wheels_to_body(double v_right, double v_left, double d) {
  if (!(d > 0.0)) throw ConfigError("wheel separation must be positive");
  return {(v_right + v_left) / 2.0, (v_right - v_left) / d};
}

std::pair<double, double> body_to_wheels(double v, double omega, double d) {
  if (!(d > 0.0)) throw ConfigError("wheel separation must be positive");
  const double half = 0.5 * d * omega;
  return {v + half, v - half};
}

Pose step_pose(const Pose& pose, const BodyTwist& twist, double dt) {
  // Position derivatives only depend on theta, which is linear in time.
  const auto rate = [&](double theta) {
    return Eigen::Vector2d(twist.v * std::cos(theta), twist.v * std::sin(theta));
  };
  const double h = dt;
  const Eigen::Vector2d k1 = rate(pose.theta);
  const Eigen::Vector2d k2 = rate(pose.theta + 0.5 * h * twist.omega);
  const Eigen::Vector2d k4 = rate(pose.theta + h * twist.omega);
  const Eigen::Vector2d dp = h / 6.0 * (k1 + 4.0 * k2 + k4);
  return {pose.x + dp.x(), pose.y + dp.y(), pose.theta + h * twist.omega};
}

}  // namespace delaysafe
