#include "delaysafe/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "delaysafe/errors.hpp"

namespace delaysafe {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double nearest_branch(double angle, double reference) {
  return angle + kTwoPi * std::round((reference - angle) / kTwoPi);
}

double atan2c(double y, double x, double prev) {
  return nearest_branch(std::atan2(y, x), prev);
}

void validate_circle(double radius, double omega) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ConfigError("circle: radius must be positive");
  }
  if (omega == 0.0 || !std::isfinite(omega)) {
    throw ConfigError("circle: omega must be non-zero");
  }
}

void validate_figure8(double ax, double ay, double omega) {
  if (!(ax > 0.0) || !(ay > 0.0) || !std::isfinite(ax) || !std::isfinite(ay)) {
    throw ConfigError("figure8: amplitudes must be positive");
  }
  if (omega == 0.0 || !std::isfinite(omega)) {
    throw ConfigError("figure8: omega must be non-zero");
  }
  const double period = kTwoPi / std::abs(omega);
  constexpr int kSamples = 20000;
  for (int i = 0; i < kSamples; ++i) {
    const auto ref = reference_figure8(period * i / kSamples, ax, ay, omega);
    if (!(ref.vr > 1e-9)) {
      throw ConfigError("figure8: reference speed vanishes (forward motion required)");
    }
  }
}

namespace {

ReferenceState finish_reference(ReferenceState r, double theta_prev) {
  r.vr = std::hypot(r.dxr, r.dyr);
  r.theta_r = atan2c(r.dyr, r.dxr, theta_prev);
  r.omega_r = (r.dxr * r.ddyr - r.dyr * r.ddxr) / (r.vr * r.vr);
  return r;
}

}  // namespace

ReferenceState reference_circle(double t, double radius, double omega,
                                double theta_prev) {
  const double s = std::sin(omega * t);
  const double c = std::cos(omega * t);
  ReferenceState r;
  r.xr = radius * s;
  r.yr = -radius * c;
  r.dxr = radius * omega * c;
  r.dyr = radius * omega * s;
  r.ddxr = -radius * omega * omega * s;
  r.ddyr = radius * omega * omega * c;
  r = finish_reference(r, theta_prev);
  // Exact closed forms; the generic expressions above only differ by rounding.
  r.vr = radius * std::abs(omega);
  r.omega_r = omega;
  return r;
}

ReferenceState reference_figure8(double t, double ax, double ay, double omega,
                                 double theta_prev) {
  const double w2 = 2.0 * omega;
  ReferenceState r;
  r.xr = ax * std::sin(w2 * t);
  r.yr = -ay * std::cos(omega * t);
  r.dxr = ax * w2 * std::cos(w2 * t);
  r.dyr = ay * omega * std::sin(omega * t);
  r.ddxr = -ax * w2 * w2 * std::sin(w2 * t);
  r.ddyr = ay * omega * omega * std::cos(omega * t);
  return finish_reference(r, theta_prev);
}

VfoOutput vfo_step(const Pose& pose, const ReferenceState& ref, double k,
                   double theta_a_prev, std::optional<double> v_robot) {
  const double ex = ref.xr - pose.x;
  const double ey = ref.yr - pose.y;
  const double cth = std::cos(pose.theta);
  const double sth = std::sin(pose.theta);

  VfoOutput out;
  out.hx = k * ex + ref.dxr;
  out.hy = k * ey + ref.dyr;
  out.v_a = out.hx * cth + out.hy * sth;

  const double norm2 = out.hx * out.hx + out.hy * out.hy;
  if (std::sqrt(norm2) < kFieldEpsilon) {
    out.theta_a = theta_a_prev;
    out.dtheta_a = 0.0;
    out.singular = true;
    return out;
  }
  out.theta_a = atan2c(out.hy, out.hx, theta_a_prev);

  const double v = v_robot.value_or(out.v_a);
  const double dhx = k * (ref.dxr - v * cth) + ref.ddxr;
  const double dhy = k * (ref.dyr - v * sth) + ref.ddyr;
  out.dtheta_a = (dhy * out.hx - out.hy * dhx) / norm2;
  return out;
}

ScaledCommands scale_commands(double v_right_a, double v_left_a,
                              double u_right_prev, double u_left_prev,
                              double u_max) {
  if (!(u_max > 0.0)) throw ConfigError("u_max must be positive");
  ScaledCommands out{v_right_a, v_left_a, 0.0};
  out.mu = std::max(std::abs(u_right_prev), std::abs(u_left_prev)) / u_max;
  if (out.mu > 1.0) {
    out.v_right /= out.mu;
    out.v_left /= out.mu;
  }
  return out;
}

}  // namespace delaysafe
