#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "delaysafe/plant.hpp"
#include "delaysafe/safety.hpp"
#include "delaysafe/smith.hpp"
#include "delaysafe/tracking.hpp"

namespace delaysafe {

inline constexpr int kSchemaVersion = 1;

enum class TrajectoryKind { kCircle, kFigure8 };

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kCircle;
  double radius = 1.0;  // circle
  double ax = 0.5;      // figure-8
  double ay = 1.5;
  double omega = 0.0;  // rad/s

  void validate() const;
  ReferenceState at(double t, double theta_prev = 0.0) const;

  friend bool operator==(const TrajectorySpec&, const TrajectorySpec&) = default;
};

struct ScenarioConfig {
  std::string name;
  SecondOrderDelayPlant plant = kIdentifiedWheel;
  SecondOrderDelayPlant nominal = kIdentifiedWheel;
  double servo_kp = 2.0;
  double servo_ki = 1.0;
  double angle_kp = 0.6;
  double angle_ki = 0.1;
  bool angle_freeze_on_scaling = false;
  double vfo_gain = 1.0;
  /// Use the measured speed (not v_a) when differentiating theta_a.
  bool heading_rate_measured = true;
  double wheel_separation = 0.235;
  double u_max = 1.0;
  double dt = 0.001;
  double duration = 30.0;
  Pose initial_pose;
  TrajectorySpec trajectory;
  bool servo_predictor = true;
  bool angle_predictor = true;
  bool safety_enabled = false;
  SafetyConfig safety;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;

  std::size_t step_count() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses the JSON scenario format. Unknown keys are errors.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ScenarioConfig& cfg);

/// One logged sample; all signals refer to the same instant t.
struct TraceSample {
  double t = 0.0;
  Pose pose;
  BodyTwist twist;
  double v_right = 0.0;
  double v_left = 0.0;
  double u_right = 0.0;
  double u_left = 0.0;
  double v_a = 0.0;
  double theta_a = 0.0;
  double dtheta_a = 0.0;
  double theta_s = 0.0;
  double z = 0.0;
  double v_s = 0.0;
  double omega_a = 0.0;
  double mu = 0.0;
  double b = 0.0;
  double c = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  bool active = false;
  bool overridden = false;
  ReferenceState ref;
  double contour = 0.0;
};

struct SimTrace {
  double dt = 0.0;
  std::vector<TraceSample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
};

/// Closed-form distance to a circle, numerical minimization for figure-8.
double contour_error(const Pose& pose, const TrajectorySpec& traj);

/// Runs the closed loop. Deterministic for a given config.
/// Throws ConfigError before stepping, SimulationError on non-finite signals.
SimTrace run_scenario(const ScenarioConfig& cfg);

inline constexpr double kSettlingThreshold = 0.05;  // m

struct Metrics {
  std::optional<double> settling_time;  // empty: never settled
  std::optional<double> contour_rms;
  std::optional<double> contour_mean;
  std::optional<double> angle_rms;  // commanded heading minus heading, rad
  double b_max = 0.0;
  std::size_t violations = 0;
  std::size_t override_intervals = 0;
  std::size_t samples = 0;
};

/// Throws SimulationError for an empty trace.
Metrics compute_metrics(const SimTrace& trace, const ScenarioConfig& cfg);

/// Maximal runs of consecutive overridden samples, as [first, last] indices.
std::vector<std::pair<std::size_t, std::size_t>> override_intervals(
    const SimTrace& trace);

/// Prints metrics as key=value lines.
std::string format_metrics(const Metrics& m);

/// Shortest decimal text that parses back to the same double ("inf", "-inf"
/// and "nan" for non-finite values).
std::string format_number(double value);

/// Column names of the CSV export, units included.
const std::vector<std::string>& csv_columns();
std::string trace_to_csv(const SimTrace& trace);
/// Throws std::runtime_error naming the path on I/O failure.
void export_csv(const SimTrace& trace, const std::filesystem::path& path);

}  // namespace delaysafe
