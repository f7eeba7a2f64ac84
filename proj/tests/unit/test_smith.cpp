#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "delaysafe/errors.hpp"
#include "delaysafe/scenario.hpp"
#include "delaysafe/smith.hpp"
#include "oracles.hpp"

using namespace delaysafe;

namespace {

constexpr double kDt = 0.001;
constexpr std::size_t kDelay = 500;
constexpr double kHalfTrack = 0.235 / 2.0;

DiscretePlant identified() { return discretize_plant(kIdentifiedWheel, kDt); }

// Delay-free angle loop written out by hand: PI on the heading error, the
// structural servo closed loop and a rectangle-rule integrator.
std::vector<double> delay_free_angle_loop(const DiscretePlant& p, double kp_s,
                                          double ki_s, double kp_a, double ki_a,
                                          const std::vector<double>& cmd) {
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  double servo_integ = 0.0;
  double angle_integ = 0.0;
  double theta = 0.0;
  std::vector<double> out;
  for (double c : cmd) {
    out.push_back(theta);
    const double e = c - theta;
    angle_integ += e * p.dt;
    const double omega_a = kp_a * e + ki_a * angle_integ;
    const double y = p.c * x;
    theta += y * p.dt;
    const double es = omega_a - y;
    servo_integ += es * p.dt;
    x = p.ad * x + p.bd * (kp_s * es + ki_s * servo_integ);
  }
  return out;
}

TEST(ServoPredictor, ZeroInputZeroCorrection) {
  ServoSmithPredictor sp(identified());
  for (int n = 0; n < 2000; ++n) ASSERT_EQ(sp.advance(0.0), 0.0);
}

TEST(ServoPredictor, CorrectionVanishesForHeldInput) {
  ServoSmithPredictor sp(identified());
  // Ten settling times of the slow pole at -0.2 rad/s.
  for (int n = 0; n < 200000; ++n) sp.advance(0.8);
  EXPECT_LT(std::abs(sp.correction()), 1e-8);
}

TEST(ServoPredictor, StepCorrectionIsStepResponseBeforeDelay) {
  SecondOrderDelayPlant p = kIdentifiedWheel;
  p.tau = 0.0;
  const auto ref =
      oracle::fine_step_response(p, [](double) { return 1.0; }, kDt, 3001, 1e-6);
  ServoSmithPredictor sp(identified());
  for (std::size_t n = 1; n <= 3000; ++n) {
    const double z = sp.advance(1.0);  // correction at sample n
    if (n <= kDelay) {
      ASSERT_NEAR(z, ref[n], 1e-4) << n;
    } else {
      ASSERT_NEAR(z, ref[n] - ref[n - kDelay], 1e-4) << n;
    }
  }
  EXPECT_LT(sp.correction(), ref[kDelay]);
}

TEST(ServoLoop, ZeroCommandZeroVoltage) {
  ServoLoop loop({PiController{2.0, 1.0}, 1.0, true}, identified());
  WheelState wheel(identified());
  double v = 0.0;
  for (int n = 0; n < 3000; ++n) {
    ASSERT_EQ(loop.step(0.0, v), 0.0);
    v = wheel.step(loop.output());
  }
}

TEST(ServoLoop, RejectsNonPositiveLimit) {
  EXPECT_THROW(ServoLoop({PiController{2.0, 1.0}, 0.0, true}, identified()),
               ConfigError);
}

TEST(ServoLoop, PerfectModelCancelsDelay) {
  const DiscretePlant plant = identified();
  const std::size_t samples = 20000;
  for (const auto& sig : oracle::canonical_inputs(samples, kDt)) {
    ServoLoop loop({PiController{2.0, 1.0}, 1e9, true}, plant);
    WheelState wheel(plant);
    const auto free = oracle::delay_free_loop(plant, 2.0, 1.0, sig.values);
    double v = 0.0;
    double worst = 0.0;
    for (std::size_t n = 0; n < samples; ++n) {
      const double expected = n >= kDelay ? free[n - kDelay] : 0.0;
      worst = std::max(worst, std::abs(v - expected));
      loop.step(sig.values[n], v);
      v = wheel.step(loop.output());
    }
    EXPECT_LT(worst, 1e-6) << sig.name;
  }
}

TEST(ServoLoop, AggressiveGainsWithoutPredictorDoNotSettle) {
  const DiscretePlant plant = identified();
  ServoLoop loop({PiController{2.0, 1.0}, 1e9, false}, plant);
  WheelState wheel(plant);
  double v = 0.0;
  double late_swing = 0.0;
  for (int n = 0; n < 40000; ++n) {
    if (n >= 30000) late_swing = std::max(late_swing, std::abs(v - 0.3));
    loop.step(0.3, v);
    v = wheel.step(loop.output());
  }
  EXPECT_GT(late_swing, 0.03);
}

TEST(ServoLoop, ReducedGainsWithoutPredictorSettle) {
  const DiscretePlant plant = identified();
  ServoLoop loop({PiController{0.5, 0.1}, 1e9, false}, plant);
  WheelState wheel(plant);
  double v = 0.0;
  for (int n = 0; n < 80000; ++n) {
    loop.step(0.3, v);
    v = wheel.step(loop.output());
  }
  EXPECT_NEAR(v, 0.3, 1e-3);
}

TEST(ServoLoop, ClampBoundsVoltage) {
  const DiscretePlant plant = identified();
  ServoLoop loop({PiController{2.0, 1.0}, 0.4, true}, plant);
  WheelState wheel(plant);
  double v = 0.0;
  for (int n = 0; n < 5000; ++n) {
    const double u = loop.step(5.0, v);
    ASSERT_LE(std::abs(u), 0.4);
    v = wheel.step(u);
  }
  EXPECT_GT(loop.raw_output(), 0.4);
}

TEST(AngleLoop, ZeroErrorPassesFeedforward) {
  AngleLoop with({PiController{0.6, 0.1}, true}, PiController{2.0, 1.0},
                 identified());
  EXPECT_EQ(with.step(0.7, 0.25, 0.7), 0.25);
  AngleLoop without({PiController{0.6, 0.1}, false}, PiController{2.0, 1.0},
                    identified());
  for (int n = 0; n < 100; ++n) ASSERT_EQ(without.step(0.7, 0.25, 0.7), 0.25);
}

// Full two-wheel path: angle loop, mixing, both servo loops, both delayed
// plants and the heading integrator.
struct TwoWheelRig {
  explicit TwoWheelRig(const DiscretePlant& p, bool predictors = true)
      : angle({PiController{0.6, 0.1}, predictors}, PiController{2.0, 1.0}, p),
        right({PiController{2.0, 1.0}, 1e9, predictors}, p),
        left({PiController{2.0, 1.0}, 1e9, predictors}, p),
        wr(p),
        wl(p) {}

  /// Returns omega at the start of the sample, then advances.
  double step_rates(double v_cmd, double omega_a) {
    const double omega = (vr - vl) / (2.0 * kHalfTrack);
    const double ur = right.step(v_cmd + kHalfTrack * omega_a, vr);
    const double ul = left.step(v_cmd - kHalfTrack * omega_a, vl);
    vr = wr.step(ur);
    vl = wl.step(ul);
    return omega;
  }

  AngleLoop angle;
  ServoLoop right;
  ServoLoop left;
  WheelState wr;
  WheelState wl;
  double vr = 0.0;
  double vl = 0.0;
  double theta = 0.0;
};

TEST(AngleLoop, PerfectModelCancelsDelayOnStep) {
  const DiscretePlant plant = identified();
  const std::size_t samples = 30000;
  const std::vector<double> cmd(samples, 0.5);
  const auto free = delay_free_angle_loop(plant, 2.0, 1.0, 0.6, 0.1, cmd);
  TwoWheelRig rig(plant);
  double worst = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const double expected = n >= kDelay ? free[n - kDelay] : 0.0;
    worst = std::max(worst, std::abs(rig.theta - expected));
    const double omega_a = rig.angle.step(cmd[n], 0.0, rig.theta);
    rig.theta += rig.step_rates(0.0, omega_a) * kDt;
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(AngleLoop, IntegralActionReducesRampError) {
  const DiscretePlant plant = identified();
  const auto late_error = [&](double ki) {
    AngleLoop loop({PiController{0.6, ki}, true}, PiController{2.0, 1.0}, plant);
    TwoWheelRig rig(plant);
    double err = 0.0;
    for (int n = 0; n < 120000; ++n) {
      const double cmd = 0.2 * n * kDt;
      if (n >= 100000) err = std::max(err, std::abs(cmd - rig.theta));
      rig.theta += rig.step_rates(0.0, loop.step(cmd, 0.0, rig.theta)) * kDt;
    }
    return err;
  };
  const double with_integral = late_error(0.1);
  const double without = late_error(0.0);
  EXPECT_LT(with_integral, without);
}

TEST(AngleLoop, LayerConsistency) {
  const DiscretePlant plant = identified();
  std::mt19937 rng(99);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t samples = 15000;
  std::vector<double> omega_a(samples);
  double f = 0.0;
  for (double& w : omega_a) {
    f = 0.995 * f + 0.005 * noise(rng);
    w = 4.0 * f;
  }
  // Nominal closed loop applied to omega_a directly.
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  double integ = 0.0;
  std::vector<double> direct;
  for (double w : omega_a) {
    const double y = plant.c * x;
    direct.push_back(y);
    const double e = w - y;
    integ += e * kDt;
    x = plant.ad * x + plant.bd * (2.0 * e + integ);
  }
  TwoWheelRig rig(plant);
  double worst = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const double omega = rig.step_rates(0.3, omega_a[n]);
    const double expected = n >= kDelay ? direct[n - kDelay] : 0.0;
    worst = std::max(worst, std::abs(omega - expected));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Robustness, TenPercentModelMismatchStillTracks) {
  for (double scale : {0.9, 1.1}) {
    ScenarioConfig cfg = load_config(oracle::scenario_path("circle_sp"));
    cfg.nominal.num1 *= scale;
    cfg.nominal.num0 *= scale;
    cfg.nominal.den1 *= scale;
    cfg.nominal.den0 *= scale;
    const Metrics m = compute_metrics(run_scenario(cfg), cfg);
    ASSERT_TRUE(m.settling_time.has_value()) << scale;
    EXPECT_LT(*m.contour_rms, 0.05) << scale;
  }
}

}  // namespace
