#pragma once

// Reference computations for the tests. Kept free of library internals where
// practical so that they can catch errors in the code under test.

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "delaysafe/plant.hpp"
#include "delaysafe/safety.hpp"
#include "delaysafe/scenario.hpp"
#include "delaysafe/tracking.hpp"

namespace oracle {

inline std::string scenario_path(const std::string& name) {
  return std::string(DELAYSAFE_SCENARIO_DIR) + "/" + name + ".json";
}

/// Continuous plant (no delay) driven by a piecewise-constant input, RK4 at
/// `fine_dt`. Returns the output at every multiple of `sample_dt`, starting at
/// t = 0, for `samples` samples.
inline std::vector<double> fine_step_response(
    const delaysafe::SecondOrderDelayPlant& p,
    const std::function<double(double)>& input, double sample_dt,
    std::size_t samples, double fine_dt) {
  const auto rhs = [&](double x1, double x2, double u, double& d1, double& d2) {
    d1 = x2;
    d2 = -p.den0 * x1 - p.den1 * x2 + u;
  };
  const auto per_sample =
      static_cast<std::size_t>(std::llround(sample_dt / fine_dt));
  std::vector<double> out;
  out.reserve(samples);
  double x1 = 0.0;
  double x2 = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    out.push_back(p.num0 * x1 + p.num1 * x2);
    const double u = input(static_cast<double>(n) * sample_dt);
    for (std::size_t k = 0; k < per_sample; ++k) {
      double a1, a2, b1, b2, c1, c2, e1, e2;
      rhs(x1, x2, u, a1, a2);
      rhs(x1 + 0.5 * fine_dt * a1, x2 + 0.5 * fine_dt * a2, u, b1, b2);
      rhs(x1 + 0.5 * fine_dt * b1, x2 + 0.5 * fine_dt * b2, u, c1, c2);
      rhs(x1 + fine_dt * c1, x2 + fine_dt * c2, u, e1, e2);
      x1 += fine_dt / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + e1);
      x2 += fine_dt / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + e2);
    }
  }
  return out;
}

/// Delay-free PI loop around the discretized plant, written out by hand:
///   u[n] = kp e[n] + ki sum_{j<=n} e[j] dt,  e[n] = r[n] - y[n].
/// Returns y[0..N-1].
inline std::vector<double> delay_free_loop(const delaysafe::DiscretePlant& plant,
                                           double kp, double ki,
                                           const std::vector<double>& r) {
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  double integ = 0.0;
  std::vector<double> y;
  y.reserve(r.size());
  for (double rn : r) {
    const double yn = plant.c * x;
    y.push_back(yn);
    const double e = rn - yn;
    integ += e * plant.dt;
    x = plant.ad * x + plant.bd * (kp * e + ki * integ);
  }
  return y;
}

/// The five canonical servo test inputs over `samples` samples of `dt`.
struct NamedSignal {
  std::string name;
  std::vector<double> values;
};

inline std::vector<NamedSignal> canonical_inputs(std::size_t samples, double dt) {
  std::vector<NamedSignal> out(5);
  out[0].name = "step";
  out[1].name = "ramp";
  out[2].name = "sine_slow";
  out[3].name = "sine_fast";
  out[4].name = "filtered_noise";
  std::mt19937_64 rng(20240531);
  std::normal_distribution<double> noise(0.0, 0.3);
  double filtered = 0.0;
  const double a = std::exp(-dt / 0.2);
  for (std::size_t n = 0; n < samples; ++n) {
    const double t = static_cast<double>(n) * dt;
    out[0].values.push_back(0.3);
    out[1].values.push_back(0.05 * t);
    out[2].values.push_back(0.2 * std::sin(2.0 * std::numbers::pi * 0.1 * t));
    out[3].values.push_back(0.1 * std::sin(2.0 * std::numbers::pi * 1.3 * t));
    filtered = a * filtered + (1.0 - a) * noise(rng);
    out[4].values.push_back(filtered);
  }
  return out;
}

/// Central differences of a scalar field.
inline Eigen::Vector2d fd_gradient(const std::function<double(double, double)>& f,
                                   double x, double y, double h = 1e-6) {
  return {(f(x + h, y) - f(x - h, y)) / (2.0 * h),
          (f(x, y + h) - f(x, y - h)) / (2.0 * h)};
}

inline Eigen::Matrix2d fd_hessian(
    const std::function<Eigen::Vector2d(double, double)>& grad, double x,
    double y, double h = 1e-5) {
  Eigen::Matrix2d hm;
  hm.col(0) = (grad(x + h, y) - grad(x - h, y)) / (2.0 * h);
  hm.col(1) = (grad(x, y + h) - grad(x, y - h)) / (2.0 * h);
  return hm;
}

/// Unwraps a sequence of raw angles by continuity.
inline double unwrap_near(double raw, double prev) {
  const double two_pi = 2.0 * std::numbers::pi;
  return raw + two_pi * std::round((prev - raw) / two_pi);
}

/// Sampled exponential barrier condition  (B[n+1] - B[n])/dt <= -alpha B[n] + slack,
/// checked only on samples whose heading lies outside the logged unsafe
/// interval by at least `margin`. Returns the number of failing samples and
/// the worst excess.
struct CertificateCheck {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
};

inline CertificateCheck certificate_check(const delaysafe::SimTrace& trace,
                                          double alpha, double slack = 1e-3,
                                          double margin = 0.05) {
  CertificateCheck out;
  const auto& s = trace.samples;
  for (std::size_t n = 0; n + 1 < s.size(); ++n) {
    if (s[n].active) {
      const double local = delaysafe::nearest_branch(s[n].pose.theta, s[n].beta);
      const bool outside = local < s[n].beta - s[n].delta - margin ||
                           local > s[n].beta + s[n].delta + margin;
      if (!outside) continue;
    }
    ++out.checked;
    const double rate = (s[n + 1].b - s[n].b) / trace.dt;
    const double excess = rate - (-alpha * s[n].b + slack);
    out.worst_excess = std::max(out.worst_excess, excess);
    if (excess > 0.0) ++out.failures;
  }
  return out;
}

}  // namespace oracle
