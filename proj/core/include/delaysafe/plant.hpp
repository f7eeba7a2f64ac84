#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace delaysafe {

/// Wheel servo plant  (num1 s + num0) / (s^2 + den1 s + den0) * exp(-tau s).
///
/// Input is the motor voltage, output the wheel linear velocity in m/s.
struct SecondOrderDelayPlant {
  double num1 = 0.0;
  double num0 = 0.0;
  double den1 = 1.0;
  double den0 = 1.0;
  double tau = 0.0;  // input delay, seconds

  /// Throws ConfigError unless the denominator is stable and tau >= 0.
  void validate() const;

  double dc_gain() const { return num0 / den0; }

  /// Roots of s^2 + den1 s + den0.
  std::array<std::complex<double>, 2> poles() const;

  /// Root of num1 s + num0. Requires num1 != 0.
  double zero() const;

  friend bool operator==(const SecondOrderDelayPlant&,
                         const SecondOrderDelayPlant&) = default;
};

/// Identified QBot wheel model: (5.94 s + 1.45)/(s^2 + 7.40 s + 1.42) e^{-0.5 s}.
inline constexpr SecondOrderDelayPlant kIdentifiedWheel{5.94, 1.45, 7.40, 1.42,
                                                        0.50};

/// Number of samples in tau. Throws ConfigError when tau is not an integer
/// multiple of dt (relative residual >= 1e-9) or dt <= 0.
std::size_t delay_steps(double tau, double dt);

/// Exact zero-order-hold discretization of the controllable canonical
/// realization, plus the integer input delay.
///
///   x[n+1] = ad x[n] + bd u[n - delay]
///   y[n]   = c x[n]
struct DiscretePlant {
  Eigen::Matrix2d ad = Eigen::Matrix2d::Identity();
  Eigen::Vector2d bd = Eigen::Vector2d::Zero();
  Eigen::RowVector2d c = Eigen::RowVector2d::Zero();
  std::size_t delay = 0;
  double dt = 0.0;

  double dc_gain() const;

  /// Same dynamics with the input delay removed.
  DiscretePlant undelayed() const {
    DiscretePlant p = *this;
    p.delay = 0;
    return p;
  }
};

DiscretePlant discretize_plant(const SecondOrderDelayPlant& plant, double dt);

/// Fixed-length FIFO of past inputs. push() returns the sample that entered
/// `length` pushes ago (zero until the line has filled). A zero-length line
/// returns its argument.
class DelayLine {
 public:
  explicit DelayLine(std::size_t length = 0) : buffer_(length, 0.0) {}

  double push(double value) {
    if (buffer_.empty()) return value;
    const double out = buffer_[head_];
    buffer_[head_] = value;
    head_ = (head_ + 1) % buffer_.size();
    return out;
  }

  std::size_t length() const { return buffer_.size(); }

 private:
  std::vector<double> buffer_;
  std::size_t head_ = 0;
};

/// One delayed wheel servo: LTI state plus its input delay line.
class WheelState {
 public:
  WheelState() = default;
  explicit WheelState(const DiscretePlant& plant)
      : plant_(plant), line_(plant.delay) {}

  /// Pushes u, advances one sample with the input from `delay` samples ago,
  /// and returns the output at the end of the sample.
  double step(double u);

  /// Output at the current sample.
  double output() const { return plant_.c * x_; }

  std::size_t delay() const { return line_.length(); }

 private:
  DiscretePlant plant_;
  DelayLine line_;
  Eigen::Vector2d x_ = Eigen::Vector2d::Zero();
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // unwrapped

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct BodyTwist {
  double v = 0.0;
  double omega = 0.0;
};

/// v = (vR + vL)/2, omega = (vR - vL)/d. Throws ConfigError for d <= 0.
BodyTwist wheels_to_body(double v_right, double v_left, double d);

/// Inverse of wheels_to_body: returns {vR, vL}.
std::pair<double, double> body_to_wheels(double v, double omega, double d);

/// One RK4 step of the unicycle kinematics with the twist held over dt.
Pose step_pose(const Pose& pose, const BodyTwist& twist, double dt);

}  // namespace delaysafe
