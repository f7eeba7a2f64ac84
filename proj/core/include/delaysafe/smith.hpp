#pragma once

#include "delaysafe/plant.hpp"
#include "delaysafe/tracking.hpp"

namespace delaysafe {

/// Servo-layer correction Z(s) = G^(s) - G^(s) e^{-tau^ s} for one wheel.
///
/// Holds an undelayed and a delayed copy of the nominal model, both driven by
/// the wheel voltage. The correction at sample n uses inputs up to n - 1.
class ServoSmithPredictor {
 public:
  ServoSmithPredictor() = default;
  explicit ServoSmithPredictor(const DiscretePlant& nominal)
      : undelayed_(nominal.undelayed()), delayed_(nominal) {}

  /// Advances both nominal copies with `u` and returns the new correction.
  double advance(double u) {
    correction_ = undelayed_.step(u) - delayed_.step(u);
    return correction_;
  }

  double correction() const { return correction_; }

  /// Undelayed nominal output v^(t).
  double predicted() const { return undelayed_.output(); }

 private:
  WheelState undelayed_;
  WheelState delayed_;
  double correction_ = 0.0;
};

struct ServoLoopConfig {
  PiController pi;
  double u_max = 1.0;
  bool predictor_enabled = true;
};

/// Wheel velocity loop  u = sat(C(s)(v_cmd - (v_meas + Z u))).
class ServoLoop {
 public:
  ServoLoop() = default;
  ServoLoop(const ServoLoopConfig& cfg, const DiscretePlant& nominal);

  /// One control sample. `freeze_integrator` implements anti-windup while the
  /// command scaling is engaged.
  double step(double v_cmd, double v_meas, bool freeze_integrator = false);

  /// PI output before the voltage clamp, from the last sample.
  double raw_output() const { return raw_; }
  /// Clamped voltage applied to the wheel on the last sample.
  double output() const { return u_; }
  double correction() const { return predictor_.correction(); }

 private:
  ServoLoopConfig cfg_;
  ServoSmithPredictor predictor_;
  double dt_ = 0.0;
  double raw_ = 0.0;
  double u_ = 0.0;
};

/// Delay-free nominal servo closed loop C G^/(1 + C G^), realized structurally
/// (PI in feedback around the undelayed nominal plant).
class NominalServoClosedLoop {
 public:
  NominalServoClosedLoop() = default;
  NominalServoClosedLoop(const PiController& pi, const DiscretePlant& nominal)
      : pi_(pi), plant_(nominal.undelayed()), dt_(nominal.dt) {
    pi_.reset();
  }

  double output() const { return plant_.output(); }

  /// Applies reference `r` for one sample; returns the output at the end.
  double step(double r) {
    const double u = pi_.step(r - plant_.output(), dt_);
    return plant_.step(u);
  }

 private:
  PiController pi_;
  WheelState plant_;
  double dt_ = 0.0;
};

/// Angle-layer correction Z_theta(s) = G^_theta(s)(1 - e^{-tau^ s}) with
/// G^_theta = G^_{v,cl}/s, driven by the adjusted angular velocity.
class AngleSmithPredictor {
 public:
  AngleSmithPredictor() = default;
  AngleSmithPredictor(const PiController& servo_pi, const DiscretePlant& nominal);

  /// Advances both copies with omega_a; returns the new correction.
  double advance(double omega_a);

  double correction() const { return theta_undelayed_ - theta_delayed_; }

 private:
  NominalServoClosedLoop undelayed_;
  NominalServoClosedLoop delayed_;
  DelayLine line_;
  double theta_undelayed_ = 0.0;
  double theta_delayed_ = 0.0;
  double dt_ = 0.0;
};

struct AngleLoopConfig {
  PiController pi;
  bool predictor_enabled = true;
};

/// Heading loop  omega_a = C_theta(theta_cmd - (theta + Z_theta omega_a)) + dtheta_cmd.
class AngleLoop {
 public:
  AngleLoop() = default;
  AngleLoop(const AngleLoopConfig& cfg, const PiController& servo_pi,
            const DiscretePlant& nominal);

  double step(double theta_cmd, double dtheta_cmd, double theta_meas,
              bool freeze_integrator = false);

  double correction() const { return predictor_.correction(); }

 private:
  AngleLoopConfig cfg_;
  AngleSmithPredictor predictor_;
  double dt_ = 0.0;
};

}  // namespace delaysafe
