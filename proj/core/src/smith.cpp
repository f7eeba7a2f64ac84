#include "delaysafe/smith.hpp"

#include <algorithm>

#include "delaysafe/errors.hpp"

namespace delaysafe {

ServoLoop::ServoLoop(const ServoLoopConfig& cfg, const DiscretePlant& nominal)
    : cfg_(cfg), predictor_(nominal), dt_(nominal.dt) {
  if (!(cfg.u_max > 0.0)) throw ConfigError("u_max must be positive");
  cfg_.pi.reset();
}

double ServoLoop::step(double v_cmd, double v_meas, bool freeze_integrator) {
  const double fed_back =
      cfg_.predictor_enabled ? v_meas + predictor_.correction() : v_meas;
  raw_ = cfg_.pi.step(v_cmd - fed_back, dt_, freeze_integrator);
  u_ = std::clamp(raw_, -cfg_.u_max, cfg_.u_max);
  if (cfg_.predictor_enabled) predictor_.advance(u_);
  return u_;
}

AngleSmithPredictor::AngleSmithPredictor(const PiController& servo_pi,
                                         const DiscretePlant& nominal)
    : undelayed_(servo_pi, nominal),
      delayed_(servo_pi, nominal),
      line_(nominal.delay),
      dt_(nominal.dt) {}

double AngleSmithPredictor::advance(double omega_a) {
  // Integrate the rate at the start of the sample, then advance the loops.
  theta_undelayed_ += undelayed_.output() * dt_;
  theta_delayed_ += delayed_.output() * dt_;
  undelayed_.step(omega_a);
  delayed_.step(line_.push(omega_a));
  return correction();
}

AngleLoop::AngleLoop(const AngleLoopConfig& cfg, const PiController& servo_pi,
                     const DiscretePlant& nominal)
    : cfg_(cfg), predictor_(servo_pi, nominal), dt_(nominal.dt) {
  cfg_.pi.reset();
}

double AngleLoop::step(double theta_cmd, double dtheta_cmd, double theta_meas,
                       bool freeze_integrator) {
  const double fed_back = cfg_.predictor_enabled
                              ? theta_meas + predictor_.correction()
                              : theta_meas;
  const double omega_a =
      cfg_.pi.step(theta_cmd - fed_back, dt_, freeze_integrator) + dtheta_cmd;
  if (cfg_.predictor_enabled) predictor_.advance(omega_a);
  return omega_a;
}

}  // namespace delaysafe
