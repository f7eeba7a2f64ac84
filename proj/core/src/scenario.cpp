#include "delaysafe/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "delaysafe/errors.hpp"

namespace delaysafe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw ConfigError(std::string(what) + " must be finite");
}

}  // namespace

void TrajectorySpec::validate() const {
  if (kind == TrajectoryKind::kCircle) {
    validate_circle(radius, omega);
  } else {
    validate_figure8(ax, ay, omega);
  }
}

ReferenceState TrajectorySpec::at(double t, double theta_prev) const {
  return kind == TrajectoryKind::kCircle
             ? reference_circle(t, radius, omega, theta_prev)
             : reference_figure8(t, ax, ay, omega, theta_prev);
}

void ScenarioConfig::validate() const {
  plant.validate();
  nominal.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt_s must be positive");
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw ConfigError("duration_s must be non-negative");
  }
  if (!(wheel_separation > 0.0)) throw ConfigError("wheel_separation_m must be positive");
  if (!(u_max > 0.0)) throw ConfigError("u_max_v must be positive");
  if (!(vfo_gain > 0.0)) throw ConfigError("vfo_gain_per_s must be positive");
  for (double g : {servo_kp, servo_ki, angle_kp, angle_ki}) {
    require_finite(g, "controller gains");
  }
  require_finite(initial_pose.x, "initial_pose.x_m");
  require_finite(initial_pose.y, "initial_pose.y_m");
  require_finite(initial_pose.theta, "initial_pose.theta");
  delay_steps(plant.tau, dt);
  delay_steps(nominal.tau, dt);
  trajectory.validate();
  if (safety_enabled) safety.validate();
  const double steps = duration / dt;
  if (std::abs(steps - std::round(steps)) > 1e-6) {
    throw ConfigError("duration_s must be an integer multiple of dt_s");
  }
}

std::size_t ScenarioConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

namespace {

/// Nearest-point search on the figure-8, with its coarse grid precomputed.
class Figure8Distance {
 public:
  static constexpr int kGrid = 2000;

  Figure8Distance(double ax, double ay) : ax_(ax), ay_(ay) {
    grid_.reserve(kGrid);
    for (int i = 0; i < kGrid; ++i) grid_.push_back(point(kTwoPi * i / kGrid));
  }

  double operator()(double x, double y) const {
    std::vector<double> d2(kGrid);
    for (int i = 0; i < kGrid; ++i) {
      d2[i] = sq(grid_[i].first - x) + sq(grid_[i].second - y);
    }
    double best = *std::min_element(d2.begin(), d2.end());
    // Refine around every discrete local minimum.
    const double step = kTwoPi / kGrid;
    for (int i = 0; i < kGrid; ++i) {
      const double prev = d2[(i + kGrid - 1) % kGrid];
      const double next = d2[(i + 1) % kGrid];
      if (d2[i] <= prev && d2[i] <= next) {
        best = std::min(best, refine(x, y, step * i - step, step * i + step));
      }
    }
    return std::sqrt(best);
  }

 private:
  static double sq(double v) { return v * v; }

  std::pair<double, double> point(double phase) const {
    return {ax_ * std::sin(2.0 * phase), -ay_ * std::cos(phase)};
  }

  double dist2(double x, double y, double phase) const {
    const auto [px, py] = point(phase);
    return sq(px - x) + sq(py - y);
  }

  // Golden-section search on [lo, hi].
  double refine(double x, double y, double lo, double hi) const {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = dist2(x, y, c);
    double fd = dist2(x, y, d);
    while (b - a > 1e-10) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = dist2(x, y, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = dist2(x, y, d);
      }
    }
    return std::min(fc, fd);
  }

  double ax_;
  double ay_;
  std::vector<std::pair<double, double>> grid_;
};

class ContourMeter {
 public:
  explicit ContourMeter(const TrajectorySpec& traj) : traj_(traj) {
    if (traj.kind == TrajectoryKind::kFigure8) figure8_.emplace(traj.ax, traj.ay);
  }

  double operator()(const Pose& pose) const {
    if (figure8_) return (*figure8_)(pose.x, pose.y);
    return std::abs(std::hypot(pose.x, pose.y) - traj_.radius);
  }

 private:
  TrajectorySpec traj_;
  std::optional<Figure8Distance> figure8_;
};

void check_sample(const TraceSample& s, std::size_t step) {
  const std::pair<const char*, double> signals[] = {
      {"x", s.pose.x},          {"y", s.pose.y},         {"theta", s.pose.theta},
      {"v", s.twist.v},         {"omega", s.twist.omega}, {"u_right", s.u_right},
      {"u_left", s.u_left},     {"v_a", s.v_a},          {"theta_a", s.theta_a},
      {"dtheta_a", s.dtheta_a}, {"theta_s", s.theta_s},  {"z", s.z},
      {"v_s", s.v_s},           {"omega_a", s.omega_a},  {"B", s.b},
      {"beta", s.beta},         {"delta", s.delta}};
  for (const auto& [name, value] : signals) {
    if (!std::isfinite(value)) {
      throw SimulationError("non-finite signal '" + std::string(name) +
                            "' at step " + std::to_string(step));
    }
  }
}

}  // namespace

double contour_error(const Pose& pose, const TrajectorySpec& traj) {
  return ContourMeter(traj)(pose);
}

SimTrace run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();

  SimTrace trace;
  trace.dt = cfg.dt;
  if (cfg.duration == 0.0) return trace;

  const double dt = cfg.dt;
  const double d = cfg.wheel_separation;
  const DiscretePlant true_plant = discretize_plant(cfg.plant, dt);
  const DiscretePlant nominal = discretize_plant(cfg.nominal, dt);

  const PiController servo_pi{cfg.servo_kp, cfg.servo_ki};
  const ServoLoopConfig servo_cfg{servo_pi, cfg.u_max, cfg.servo_predictor};
  const AngleLoopConfig angle_cfg{PiController{cfg.angle_kp, cfg.angle_ki},
                                  cfg.angle_predictor};

  WheelState right(true_plant);
  WheelState left(true_plant);
  ServoLoop servo_right(servo_cfg, nominal);
  ServoLoop servo_left(servo_cfg, nominal);
  AngleLoop angle_loop(angle_cfg, servo_pi, nominal);
  std::optional<SafetyFilter> safety;
  if (cfg.safety_enabled) safety.emplace(cfg.safety, dt);

  const ContourMeter contour(cfg.trajectory);
  const BarrierField& field = cfg.safety.field;

  Pose pose = cfg.initial_pose;
  double v_right = 0.0;
  double v_left = 0.0;
  double theta_a_prev = pose.theta;
  double theta_r_prev = cfg.trajectory.at(0.0).theta_r;

  const std::size_t steps = cfg.step_count();
  trace.samples.reserve(steps + 1);

  for (std::size_t n = 0; n <= steps; ++n) {
    TraceSample s;
    s.t = static_cast<double>(n) * dt;

    // sense
    const BodyTwist twist = wheels_to_body(v_right, v_left, d);
    s.pose = pose;
    s.twist = twist;
    s.v_right = v_right;
    s.v_left = v_left;

    // reference and tracking law
    s.ref = cfg.trajectory.at(s.t, theta_r_prev);
    theta_r_prev = s.ref.theta_r;
    const VfoOutput vfo =
        vfo_step(pose, s.ref, cfg.vfo_gain, theta_a_prev,
                 cfg.heading_rate_measured ? std::optional<double>(twist.v)
                                           : std::nullopt);
    theta_a_prev = vfo.theta_a;
    s.v_a = vfo.v_a;
    s.theta_a = vfo.theta_a;
    s.dtheta_a = vfo.dtheta_a;

    // safety override
    SafeCommand cmd{vfo.theta_a, vfo.dtheta_a, vfo.v_a, false};
    s.b = field.obstacles.empty() ? -field.b0 : barrier_eval(field, pose.x, pose.y);
    s.c = std::numeric_limits<double>::infinity();
    if (safety) {
      const SafetyStatus st =
          safety->update(pose, twist, vfo.theta_a, vfo.dtheta_a, vfo.v_a, s.ref.vr);
      cmd = st.command;
      s.c = st.c;
      s.delta = st.delta;
      s.beta = st.beta;
      s.active = st.active;
    }
    s.theta_s = cmd.theta_s;
    s.z = cmd.z;
    s.v_s = cmd.v_s;
    s.overridden = cmd.overridden;

    // angle loop, mixing, scaling
    const ScaledCommands probe = scale_commands(0.0, 0.0, servo_right.raw_output(),
                                                servo_left.raw_output(), cfg.u_max);
    const bool scaling = probe.mu > 1.0;
    s.omega_a = angle_loop.step(cmd.theta_s, cmd.z, pose.theta,
                                cfg.angle_freeze_on_scaling && scaling);
    const auto [v_right_a, v_left_a] = body_to_wheels(cmd.v_s, s.omega_a, d);
    const ScaledCommands scaled =
        scale_commands(v_right_a, v_left_a, servo_right.raw_output(),
                       servo_left.raw_output(), cfg.u_max);
    s.mu = scaled.mu;

    // servo loops
    s.u_right = servo_right.step(scaled.v_right, v_right, scaling);
    s.u_left = servo_left.step(scaled.v_left, v_left, scaling);

    s.contour = contour(pose);
    check_sample(s, n);
    trace.samples.push_back(s);
    if (n == steps) break;

    // actuate and integrate
    v_right = right.step(s.u_right);
    v_left = left.step(s.u_left);
    if (safety) safety->advance(pose, twist);
    pose = step_pose(pose, twist, dt);
  }
  return trace;
}

std::vector<std::pair<std::size_t, std::size_t>> override_intervals(
    const SimTrace& trace) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto& s = trace.samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s[i].overridden) continue;
    if (i > 0 && s[i - 1].overridden) {
      out.back().second = i;
    } else {
      out.emplace_back(i, i);
    }
  }
  return out;
}

Metrics compute_metrics(const SimTrace& trace, const ScenarioConfig& cfg) {
  (void)cfg;
  if (trace.empty()) throw SimulationError("metrics need a non-empty trace");
  const auto& s = trace.samples;

  Metrics m;
  m.samples = s.size();
  m.b_max = s.front().b;
  for (const auto& x : s) {
    m.b_max = std::max(m.b_max, x.b);
    if (x.b >= 0.0) ++m.violations;
  }
  m.override_intervals = override_intervals(trace).size();

  // Settled from the sample after the last excursion above the threshold.
  std::size_t first_settled = 0;
  for (std::size_t i = s.size(); i-- > 0;) {
    if (s[i].contour >= kSettlingThreshold) {
      first_settled = i + 1;
      break;
    }
  }
  if (first_settled >= s.size()) return m;

  m.settling_time = s[first_settled].t;
  double sum = 0.0;
  double sum2 = 0.0;
  double angle2 = 0.0;
  const std::size_t count = s.size() - first_settled;
  for (std::size_t i = first_settled; i < s.size(); ++i) {
    sum += s[i].contour;
    sum2 += s[i].contour * s[i].contour;
    const double e = s[i].theta_s - s[i].pose.theta;
    angle2 += e * e;
  }
  m.contour_mean = sum / count;
  m.contour_rms = std::sqrt(sum2 / count);
  m.angle_rms = std::sqrt(angle2 / count);
  return m;
}

std::string format_metrics(const Metrics& m) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string("none");
  };
  std::string out;
  out += "settling_time_s=" + opt(m.settling_time) + "\n";
  out += "contour_rms_m=" + opt(m.contour_rms) + "\n";
  out += "contour_mean_m=" + opt(m.contour_mean) + "\n";
  out += "angle_rms_rad=" + opt(m.angle_rms) + "\n";
  out += "angle_rms_deg=" +
         opt(m.angle_rms ? std::optional<double>(*m.angle_rms * 180.0 / std::numbers::pi)
                         : std::nullopt) +
         "\n";
  out += "b_max=" + format_number(m.b_max) + "\n";
  out += "violations=" + std::to_string(m.violations) + "\n";
  out += "override_intervals=" + std::to_string(m.override_intervals) + "\n";
  out += "samples=" + std::to_string(m.samples) + "\n";
  return out;
}

}  // namespace delaysafe
