// JSON scenario files. Keys carry their units; unknown keys are rejected.

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "delaysafe/errors.hpp"
#include "delaysafe/scenario.hpp"

namespace delaysafe {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const json& member(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) {
    throw ConfigError(where + ": missing key '" + key + "'");
  }
  return j.at(key);
}

double get_number(const json& j, const std::string& where, const char* key) {
  const json& v = member(j, where, key);
  if (!v.is_number()) {
    throw ConfigError(where + "." + key + ": expected a number");
  }
  return v.get<double>();
}

double number_or(const json& j, const std::string& where, const char* key,
                 double fallback) {
  return j.contains(key) ? get_number(j, where, key) : fallback;
}

bool bool_or(const json& j, const std::string& where, const char* key,
             bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) {
    throw ConfigError(where + "." + key + ": expected true or false");
  }
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const std::string& where,
                       const char* key) {
  const json& v = member(j, where, key);
  if (!v.is_string()) {
    throw ConfigError(where + "." + key + ": expected a string");
  }
  return v.get<std::string>();
}

/// Exactly one of two alternative keys; the second is converted by `convert`.
template <typename Convert>
double one_of(const json& j, const std::string& where, const char* primary,
              const char* alternative, Convert convert) {
  const bool has_primary = j.contains(primary);
  const bool has_alt = j.contains(alternative);
  if (has_primary == has_alt) {
    throw ConfigError(where + ": give exactly one of '" + primary + "' or '" +
                      alternative + "'");
  }
  return has_primary ? get_number(j, where, primary)
                     : convert(get_number(j, where, alternative));
}

SecondOrderDelayPlant parse_plant(const json& j, const std::string& where) {
  check_keys(j, where, {"num1", "num0", "den1", "den0", "tau_s"});
  return {get_number(j, where, "num1"), get_number(j, where, "num0"),
          get_number(j, where, "den1"), get_number(j, where, "den0"),
          get_number(j, where, "tau_s")};
}

json plant_json(const SecondOrderDelayPlant& p) {
  return {{"num1", p.num1},
          {"num0", p.num0},
          {"den1", p.den1},
          {"den0", p.den0},
          {"tau_s", p.tau}};
}

TrajectorySpec parse_trajectory(const json& j) {
  const std::string where = "trajectory";
  require_object(j, where);
  const std::string type = get_string(j, where, "type");
  const auto period_to_omega = [](double period) {
    if (!(period > 0.0)) throw ConfigError("trajectory.period_s must be positive");
    return kTwoPi / period;
  };
  TrajectorySpec t;
  if (type == "circle") {
    check_keys(j, where, {"type", "radius_m", "omega_rad_s", "period_s"});
    t.kind = TrajectoryKind::kCircle;
    t.radius = get_number(j, where, "radius_m");
  } else if (type == "figure8") {
    check_keys(j, where, {"type", "ax_m", "ay_m", "omega_rad_s", "period_s"});
    t.kind = TrajectoryKind::kFigure8;
    t.ax = get_number(j, where, "ax_m");
    t.ay = get_number(j, where, "ay_m");
  } else {
    throw ConfigError("trajectory.type: expected 'circle' or 'figure8', got '" +
                      type + "'");
  }
  t.omega = one_of(j, where, "omega_rad_s", "period_s", period_to_omega);
  return t;
}

json trajectory_json(const TrajectorySpec& t) {
  if (t.kind == TrajectoryKind::kCircle) {
    return {{"type", "circle"}, {"radius_m", t.radius}, {"omega_rad_s", t.omega}};
  }
  return {{"type", "figure8"},
          {"ax_m", t.ax},
          {"ay_m", t.ay},
          {"omega_rad_s", t.omega}};
}

ObstacleSpec parse_obstacle(const json& j, const std::string& where) {
  require_object(j, where);
  const std::string kind = get_string(j, where, "kind");
  if (kind == "circular") {
    check_keys(j, where, {"kind", "x_m", "y_m", "sigma_m2"});
    return ObstacleSpec::circular(get_number(j, where, "x_m"),
                                  get_number(j, where, "y_m"),
                                  get_number(j, where, "sigma_m2"));
  }
  if (kind == "superellipse") {
    check_keys(j, where, {"kind", "x_m", "y_m", "sigma_x_m", "sigma_y_m", "n"});
    const json& n = member(j, where, "n");
    if (!n.is_number_integer()) throw ConfigError(where + ".n: expected an integer");
    return ObstacleSpec::superellipse(
        get_number(j, where, "x_m"), get_number(j, where, "y_m"),
        get_number(j, where, "sigma_x_m"), get_number(j, where, "sigma_y_m"),
        n.get<int>());
  }
  throw ConfigError(where + ".kind: expected 'circular' or 'superellipse'");
}

json obstacle_json(const ObstacleSpec& o) {
  if (o.kind == ObstacleKind::kCircular) {
    return {{"kind", "circular"}, {"x_m", o.x}, {"y_m", o.y}, {"sigma_m2", o.sigma}};
  }
  return {{"kind", "superellipse"}, {"x_m", o.x},         {"y_m", o.y},
          {"sigma_x_m", o.sigma_x}, {"sigma_y_m", o.sigma_y}, {"n", o.n}};
}

void parse_safety(const json& j, ScenarioConfig& cfg) {
  const std::string where = "safety";
  check_keys(j, where,
             {"enabled", "b0", "alpha_per_s", "turn", "hpf_time_constant_s",
              "c_off", "beta_reset", "obstacles"});
  SafetyConfig& s = cfg.safety;
  cfg.safety_enabled = bool_or(j, where, "enabled", true);
  s.field.b0 = get_number(j, where, "b0");
  s.field.alpha = get_number(j, where, "alpha_per_s");
  s.hpf_time_constant = number_or(j, where, "hpf_time_constant_s", 0.05);
  s.c_off = number_or(j, where, "c_off", 1.05);

  const std::string turn = j.contains("turn") ? get_string(j, where, "turn") : "left";
  if (turn == "left") {
    s.turn = TurnDirection::kLeft;
  } else if (turn == "right") {
    s.turn = TurnDirection::kRight;
  } else {
    throw ConfigError("safety.turn: expected 'left' or 'right'");
  }

  const std::string reset =
      j.contains("beta_reset") ? get_string(j, where, "beta_reset") : "gradient";
  if (reset == "gradient") {
    s.beta_reset = BetaReset::kGradient;
  } else if (reset == "heading") {
    s.beta_reset = BetaReset::kHeading;
  } else {
    throw ConfigError("safety.beta_reset: expected 'gradient' or 'heading'");
  }

  const json& obstacles = member(j, where, "obstacles");
  if (!obstacles.is_array()) throw ConfigError("safety.obstacles: expected an array");
  s.field.obstacles.clear();
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    s.field.obstacles.push_back(
        parse_obstacle(obstacles[i], "safety.obstacles[" + std::to_string(i) + "]"));
  }
}

json safety_json(const ScenarioConfig& cfg) {
  const SafetyConfig& s = cfg.safety;
  json obstacles = json::array();
  for (const auto& o : s.field.obstacles) obstacles.push_back(obstacle_json(o));
  return {{"enabled", cfg.safety_enabled},
          {"b0", s.field.b0},
          {"alpha_per_s", s.field.alpha},
          {"turn", s.turn == TurnDirection::kLeft ? "left" : "right"},
          {"hpf_time_constant_s", s.hpf_time_constant},
          {"c_off", s.c_off},
          {"beta_reset", s.beta_reset == BetaReset::kGradient ? "gradient" : "heading"},
          {"obstacles", obstacles}};
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  const std::string where = "config";
  check_keys(root, where,
             {"schema_version", "name", "dt_s", "duration_s", "plant", "nominal",
              "servo_pi", "angle_pi", "vfo_gain_per_s", "heading_rate_speed", "wheel_separation_m",
              "u_max_v", "initial_pose", "trajectory", "predictor", "safety"});

  const json& version = member(root, where, "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    throw ConfigError("config.schema_version: expected " +
                      std::to_string(kSchemaVersion));
  }

  ScenarioConfig cfg;
  cfg.name = root.contains("name") ? get_string(root, where, "name") : "";
  cfg.dt = get_number(root, where, "dt_s");
  cfg.duration = get_number(root, where, "duration_s");
  cfg.plant = parse_plant(member(root, where, "plant"), "plant");
  cfg.nominal = root.contains("nominal") ? parse_plant(root.at("nominal"), "nominal")
                                         : cfg.plant;

  const json& servo = member(root, where, "servo_pi");
  check_keys(servo, "servo_pi", {"kp", "ki"});
  cfg.servo_kp = get_number(servo, "servo_pi", "kp");
  cfg.servo_ki = get_number(servo, "servo_pi", "ki");

  const json& angle = member(root, where, "angle_pi");
  check_keys(angle, "angle_pi", {"kp", "ki", "freeze_on_scaling"});
  cfg.angle_kp = get_number(angle, "angle_pi", "kp");
  cfg.angle_ki = get_number(angle, "angle_pi", "ki");
  cfg.angle_freeze_on_scaling = bool_or(angle, "angle_pi", "freeze_on_scaling", false);

  cfg.vfo_gain = get_number(root, where, "vfo_gain_per_s");
  const std::string rate_speed = root.contains("heading_rate_speed")
                                     ? get_string(root, where, "heading_rate_speed")
                                     : "measured";
  if (rate_speed == "measured") {
    cfg.heading_rate_measured = true;
  } else if (rate_speed == "adjusted") {
    cfg.heading_rate_measured = false;
  } else {
    throw ConfigError("config.heading_rate_speed: expected 'measured' or 'adjusted'");
  }
  cfg.wheel_separation = get_number(root, where, "wheel_separation_m");
  cfg.u_max = get_number(root, where, "u_max_v");

  const json& pose = member(root, where, "initial_pose");
  check_keys(pose, "initial_pose", {"x_m", "y_m", "theta_rad", "theta_deg"});
  cfg.initial_pose.x = get_number(pose, "initial_pose", "x_m");
  cfg.initial_pose.y = get_number(pose, "initial_pose", "y_m");
  cfg.initial_pose.theta = one_of(pose, "initial_pose", "theta_rad", "theta_deg",
                                  [](double deg) { return deg * std::numbers::pi / 180.0; });

  cfg.trajectory = parse_trajectory(member(root, where, "trajectory"));

  if (root.contains("predictor")) {
    const json& p = root.at("predictor");
    check_keys(p, "predictor", {"servo", "angle"});
    cfg.servo_predictor = bool_or(p, "predictor", "servo", true);
    cfg.angle_predictor = bool_or(p, "predictor", "angle", true);
  }

  if (root.contains("safety")) {
    parse_safety(root.at("safety"), cfg);
  } else {
    cfg.safety_enabled = false;
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const ScenarioConfig& cfg) {
  json root = {
      {"schema_version", kSchemaVersion},
      {"name", cfg.name},
      {"dt_s", cfg.dt},
      {"duration_s", cfg.duration},
      {"plant", plant_json(cfg.plant)},
      {"nominal", plant_json(cfg.nominal)},
      {"servo_pi", {{"kp", cfg.servo_kp}, {"ki", cfg.servo_ki}}},
      {"angle_pi",
       {{"kp", cfg.angle_kp},
        {"ki", cfg.angle_ki},
        {"freeze_on_scaling", cfg.angle_freeze_on_scaling}}},
      {"vfo_gain_per_s", cfg.vfo_gain},
      {"heading_rate_speed", cfg.heading_rate_measured ? "measured" : "adjusted"},
      {"wheel_separation_m", cfg.wheel_separation},
      {"u_max_v", cfg.u_max},
      {"initial_pose",
       {{"x_m", cfg.initial_pose.x},
        {"y_m", cfg.initial_pose.y},
        {"theta_rad", cfg.initial_pose.theta}}},
      {"trajectory", trajectory_json(cfg.trajectory)},
      {"predictor", {{"servo", cfg.servo_predictor}, {"angle", cfg.angle_predictor}}},
      {"safety", safety_json(cfg)},
  };
  return root.dump(2) + "\n";
}

}  // namespace delaysafe
