#include "delaysafe/safety.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "delaysafe/errors.hpp"
#include "delaysafe/tracking.hpp"

namespace delaysafe {

void ObstacleSpec::validate() const {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw ConfigError("obstacle: non-finite center");
  }
  if (kind == ObstacleKind::kCircular) {
    if (!(sigma > 0.0)) throw ConfigError("obstacle: sigma must be positive");
  } else {
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) {
      throw ConfigError("obstacle: sigma_x and sigma_y must be positive");
    }
    if (n < 1) throw ConfigError("obstacle: exponent n must be >= 1");
  }
}

void BarrierField::validate() const {
  if (!(b0 > 0.0)) throw ConfigError("barrier: b0 must be positive");
  if (!(alpha > 0.0)) throw ConfigError("barrier: alpha must be positive");
  for (const auto& o : obstacles) o.validate();
}

namespace {

/// Value, gradient and Hessian of a single obstacle term.
struct TermDerivatives {
  double f = 0.0;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
};

TermDerivatives circular_term(const ObstacleSpec& o, double x, double y) {
  const double dx = x - o.x;
  const double dy = y - o.y;
  TermDerivatives t;
  t.f = std::exp(-(dx * dx + dy * dy) / o.sigma);
  const double s = o.sigma;
  t.g << -2.0 * dx / s * t.f, -2.0 * dy / s * t.f;
  const double hxy = 4.0 * dx * dy / (s * s) * t.f;
  t.h << (-2.0 / s + 4.0 * dx * dx / (s * s)) * t.f, hxy, hxy,
      (-2.0 / s + 4.0 * dy * dy / (s * s)) * t.f;
  return t;
}

TermDerivatives superellipse_term(const ObstacleSpec& o, double x, double y) {
  const int m = 2 * o.n;
  const double u = (x - o.x) / o.sigma_x;
  const double w = (y - o.y) / o.sigma_y;
  const double p = std::pow(u, m);
  const double q = std::pow(w, m);
  const double px = m * std::pow(u, m - 1) / o.sigma_x;
  const double qy = m * std::pow(w, m - 1) / o.sigma_y;
  const double pxx = m * (m - 1) * std::pow(u, m - 2) / (o.sigma_x * o.sigma_x);
  const double qyy = m * (m - 1) * std::pow(w, m - 2) / (o.sigma_y * o.sigma_y);
  TermDerivatives t;
  t.f = std::exp(-p - q);
  t.g << -px * t.f, -qy * t.f;
  const double hxy = px * qy * t.f;
  t.h << (px * px - pxx) * t.f, hxy, hxy, (qy * qy - qyy) * t.f;
  return t;
}

TermDerivatives term(const ObstacleSpec& o, double x, double y) {
  return o.kind == ObstacleKind::kCircular ? circular_term(o, x, y)
                                           : superellipse_term(o, x, y);
}

}  // namespace

double barrier_eval(const BarrierField& field, double x, double y) {
  double b = -field.b0;
  for (const auto& o : field.obstacles) b += term(o, x, y).f;
  return b;
}

Eigen::Vector2d barrier_gradient(const BarrierField& field, double x, double y) {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const auto& o : field.obstacles) g += term(o, x, y).g;
  return g;
}

Eigen::Matrix2d barrier_hessian(const BarrierField& field, double x, double y) {
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (const auto& o : field.obstacles) h += term(o, x, y).h;
  return h;
}

double compute_c(const BarrierField& field, double x, double y, double v) {
  if (!(v > 0.0)) {
    throw SimulationError("compute_c requires forward motion (v > 0)");
  }
  const double gnorm = barrier_gradient(field, x, y).norm();
  if (gnorm < kGradientEpsilon) return std::numeric_limits<double>::infinity();
  return -field.alpha * barrier_eval(field, x, y) / (v * gnorm);
}

DeltaResult compute_delta(double c) {
  DeltaResult out;
  if (c >= 1.0) return out;
  out.violation = c < 0.0;
  out.delta = std::acos(std::clamp(c, 0.0, 1.0));
  return out;
}

double beta_rate(const BarrierField& field, double x, double y, double v,
                 double theta) {
  const Eigen::Vector2d g = barrier_gradient(field, x, y);
  const Eigen::Matrix2d h = barrier_hessian(field, x, y);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double phi = g(0) * (h(1, 0) * c + h(1, 1) * s) -
                     g(1) * (h(0, 0) * c + h(0, 1) * s);
  return v * phi / g.squaredNorm();
}

std::optional<double> integrate_beta(const BarrierField& field, double beta,
                                     const Pose& pose, const BodyTwist& twist,
                                     double dt) {
  struct State {
    double x, y, theta, beta;
  };
  bool degenerate = false;
  const auto deriv = [&](const State& s) {
    if (barrier_gradient(field, s.x, s.y).norm() <= kGradientEpsilon) {
      degenerate = true;
      return State{0, 0, 0, 0};
    }
    return State{twist.v * std::cos(s.theta), twist.v * std::sin(s.theta),
                 twist.omega, beta_rate(field, s.x, s.y, twist.v, s.theta)};
  };
  const auto add = [](const State& a, const State& k, double h) {
    return State{a.x + h * k.x, a.y + h * k.y, a.theta + h * k.theta,
                 a.beta + h * k.beta};
  };

  const State s0{pose.x, pose.y, pose.theta, beta};
  const State k1 = deriv(s0);
  const State k2 = deriv(add(s0, k1, 0.5 * dt));
  const State k3 = deriv(add(s0, k2, 0.5 * dt));
  const State k4 = deriv(add(s0, k3, dt));
  if (degenerate) return std::nullopt;
  return beta + dt / 6.0 * (k1.beta + 2.0 * k2.beta + 2.0 * k3.beta + k4.beta);
}

bool UnsafeInterval::contains(double theta) const {
  const double local = nearest_branch(theta, beta);
  return local >= low() && local <= high();
}

UnsafeInterval unsafe_interval(double beta, double delta) {
  return {beta, delta};
}

HighPassDerivative::HighPassDerivative(double time_constant, double dt) {
  if (!(time_constant > 0.0)) {
    throw ConfigError("high-pass time constant must be positive");
  }
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const double a = 2.0 * time_constant / dt;
  gain_ = (2.0 / dt) / (a + 1.0);
  pole_ = (a - 1.0) / (a + 1.0);
}

double HighPassDerivative::step(double input) {
  if (!primed_) {
    prev_input_ = input;
    primed_ = true;
  }
  y_ = pole_ * y_ + gain_ * (input - prev_input_);
  prev_input_ = input;
  return y_;
}

SafeCommand apply_override(double theta_a, double dtheta_a, double v_a,
                           double v_r,
                           const std::optional<UnsafeInterval>& interval,
                           TurnDirection turn, double theta_prev,
                           double z_filtered) {
  if (!interval || !interval->contains(theta_a)) {
    return {theta_a, dtheta_a, v_a, false};
  }
  const double edge =
      turn == TurnDirection::kLeft ? interval->high() : interval->low();
  return {nearest_branch(edge, theta_prev), z_filtered, v_r, true};
}

void SafetyConfig::validate() const {
  field.validate();
  if (!(hpf_time_constant > 0.0)) {
    throw ConfigError("safety: high-pass time constant must be positive");
  }
  if (!(c_off >= 1.0)) throw ConfigError("safety: c_off must be >= 1");
}

SafetyFilter::SafetyFilter(const SafetyConfig& cfg, double dt)
    : cfg_(cfg), hpf_(cfg.hpf_time_constant, dt), dt_(dt) {
  cfg_.validate();
}

SafetyStatus SafetyFilter::update(const Pose& pose, const BodyTwist& twist,
                                  double theta_a, double dtheta_a, double v_a,
                                  double v_r) {
  const double v = twist.v;
  SafetyStatus st;
  st.b = barrier_eval(cfg_.field, pose.x, pose.y);
  st.c = v > 0.0 ? compute_c(cfg_.field, pose.x, pose.y, v)
                 : std::numeric_limits<double>::infinity();

  if (!active_ && st.c < 1.0) {
    active_ = true;
    const Eigen::Vector2d g = barrier_gradient(cfg_.field, pose.x, pose.y);
    beta_ = cfg_.beta_reset == BetaReset::kHeading
                ? pose.theta
                : atan2c(g(1), g(0), pose.theta);
  } else if (active_ && st.c >= cfg_.c_off) {
    active_ = false;
  }

  std::optional<UnsafeInterval> interval;
  if (active_) {
    const DeltaResult d = compute_delta(st.c);
    st.delta = d.delta.value_or(0.0);
    st.violation = d.violation;
    interval = unsafe_interval(beta_, st.delta);
  }
  st.active = active_;
  st.beta = beta_;
  st.degenerate_gradient = degenerate_;
  degenerate_ = false;

  // The derivative filter runs on the emitted angle every sample so it is
  // settled when an override engages.
  const double theta_prev = last_theta_s_.value_or(theta_a);
  SafeCommand cmd = apply_override(theta_a, dtheta_a, v_a, v_r, interval,
                                   cfg_.turn, theta_prev, 0.0);
  const double z = hpf_.step(cmd.theta_s);
  if (cmd.overridden) cmd.z = z;
  last_theta_s_ = cmd.theta_s;
  st.command = cmd;
  return st;
}

void SafetyFilter::advance(const Pose& pose, const BodyTwist& twist) {
  if (!active_) return;
  if (auto next = integrate_beta(cfg_.field, beta_, pose, twist, dt_)) {
    beta_ = *next;
  } else {
    degenerate_ = true;
  }
}

}  // namespace delaysafe
