#include "goose/metrics.hpp"
#include "goose/plant.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace goose;

namespace {

PlantParams quiet(double payload = 0.4) {
  PlantParams p;
  p.payload = payload;
  p.velocity_noise = 0.0;
  p.position_noise = 0.0;
  return p;
}

MotionProfile hold_profile(std::size_t n, double position, double velocity) {
  MotionProfile prof;
  prof.position.resize(n);
  prof.velocity.assign(n, velocity);
  prof.acceleration.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prof.position[i] = position + velocity * static_cast<double>(i) / prof.fs;
  }
  prof.settle_index = 0;
  return prof;
}

}  // namespace

TEST_CASE("trajectory limits and endpoints") {
  for (const double step : {1e-4, 1e-3, 0.01, 0.1, 0.5}) {
    const MotionProfile prof = generate_trajectory(step);
    const double dt = 1.0 / prof.fs;
    CHECK(prof.position.front() == 0.0);
    CHECK(prof.position.back() == doctest::Approx(step).epsilon(1e-12));
    double vmax = 0.0;
    double amax = 0.0;
    double integral = 0.0;
    for (std::size_t i = 0; i < prof.velocity.size(); ++i) {
      vmax = std::max(vmax, std::abs(prof.velocity[i]));
      amax = std::max(amax, std::abs(prof.acceleration[i]));
      if (i > 0) {
        integral += 0.5 * (prof.velocity[i] + prof.velocity[i - 1]) * dt;
        const double jerk = (prof.acceleration[i] - prof.acceleration[i - 1]) / dt;
        CHECK(std::abs(jerk) <= 200.0 * (1.0 + 1e-9));
        CHECK(std::abs(prof.velocity[i] - prof.velocity[i - 1]) <= 20.0 * dt * (1.0 + 1e-9));
      }
    }
    CHECK(vmax <= 0.9 * (1.0 + 1e-12));
    CHECK(amax <= 20.0 * (1.0 + 1e-12));
    CHECK(integral == doctest::Approx(step).epsilon(1e-6));
    CHECK(prof.position[prof.settle_index] == doctest::Approx(step).epsilon(1e-12));
    CHECK(prof.settle_index * dt >= prof.duration - 1e-12);
    if (step == 0.5) {
      CHECK(vmax == doctest::Approx(0.9).epsilon(1e-9));
    } else if (step == 1e-4) {
      CHECK(vmax < 0.9);
    }
  }
  CHECK_THROWS_AS(generate_trajectory(0.0), ContractViolation);
}

TEST_CASE("feedforward inversion is exact up to the sample hold") {
  PlantParams p = quiet(0.0);
  p.base_mass = p.nominal_mass;
  p.damping = 0.0;
  p.friction = 0.0;
  p.mode_coupling = 0.0;
  p.current_lag = 1e-8;
  auto worst = [&p](double fs, double aff) {
    const MotionProfile prof = generate_trajectory(0.01, MotionLimits{}, fs);
    const MotionRun run = simulate_closed_loop(ControllerGains{0, 0, 0, aff, 1.0}, prof, p, 1);
    CHECK_FALSE(run.unstable);
    double w = 0.0;
    for (double e : run.p_e) {
      w = std::max(w, std::abs(e));
    }
    return w;
  };
  const double e1 = worst(20000.0, 1.0);
  const double e2 = worst(40000.0, 1.0);
  // Force is held over each sample while the reference acceleration ramps:
  // first-order error in the sample time, far below a 1% gain mismatch.
  CHECK(e1 < 1e-3 * 0.01);
  CHECK(e2 / e1 == doctest::Approx(0.5).epsilon(0.02));
  CHECK(worst(20000.0, 0.99) > 10.0 * e1);
}

TEST_CASE("zero gains leave the plant at rest") {
  const MotionProfile prof = generate_trajectory(1e-4);
  const MotionRun run = simulate_closed_loop(ControllerGains{0, 0, 0, 0, 1.0}, prof, quiet(), 1);
  for (std::size_t i = 0; i < run.p_e.size(); ++i) {
    CHECK(run.p_e[i] == prof.position[i]);
  }
}

TEST_CASE("safe-seed gains on the default plant (pinned run)") {
  const MotionProfile prof = generate_trajectory(0.01);
  const MotionRun run =
      simulate_closed_loop(ControllerGains{200, 600, 1000, 0, 1.0}, prof, PlantParams{}, 42);
  CHECK_FALSE(run.unstable);
  CHECK(run.settle_index == 2340);
  CHECK(run.end_index == 7340);
  const MetricConfig m;
  CHECK(cost(run, m) == doctest::Approx(3.0638900818066306).epsilon(1e-9));
  CHECK(constraint(run, m) == doctest::Approx(0.12754535542353168).epsilon(1e-9));
  CHECK(constraint(run, m) < 1.0);

  const MotionRun again =
      simulate_closed_loop(ControllerGains{200, 600, 1000, 0, 1.0}, prof, PlantParams{}, 42);
  CHECK(again.p_e == run.p_e);
  CHECK(again.v_e == run.v_e);

  std::ostringstream os;
  run.write_csv(os);
  CHECK(os.str().rfind("t,p_ref,p,p_e,v_e\n", 0) == 0);
}

TEST_CASE("small initial error decays") {
  const MotionRun run = simulate_closed_loop(ControllerGains{200, 600, 1000, 0, 1.0},
                                             hold_profile(6000, 1e-5, 0.0), quiet(), 1);
  CHECK_FALSE(run.unstable);
  // Friction leaves a small stick-slip residual.
  for (std::size_t i = run.p_e.size() - 1000; i < run.p_e.size(); ++i) {
    CHECK(std::abs(run.p_e[i]) < 1e-2 * 1e-5);
  }
}

TEST_CASE("payload effect") {
  const TaskLayout layout;
  PlantParams p = apply_task(PlantParams{}, (Vector(2) << 1.0, 0.4).finished(), layout);
  CHECK(p.mass() == doctest::Approx(1.4));
  CHECK(stepsize_from_task((Vector(2) << 1.0, 0.4).finished(), layout) == doctest::Approx(0.01));
  TaskLayout with_drift;
  with_drift.drift = 2;
  p = apply_task(PlantParams{}, (Vector(3) << 1.0, 0.4, 250.0).finished(), with_drift);
  CHECK(p.drift == doctest::Approx(250e-6));
  CHECK_THROWS_AS(apply_task(PlantParams{}, (Vector(2) << 1.0, -0.4).finished(), layout),
                  ContractViolation);

  // Heavier carriage under identical gains: larger tracking error during the move.
  const MotionProfile prof = generate_trajectory(0.01);
  const ControllerGains g{200, 600, 1000, 0, 1.0};
  const auto peak = [&](double payload) {
    const MotionRun r = simulate_closed_loop(g, prof, quiet(payload), 1);
    double m = 0.0;
    for (std::size_t i = 0; i < r.settle_index; ++i) {
      m = std::max(m, std::abs(r.p_e[i]));
    }
    return m;
  };
  CHECK(peak(2.0) > peak(0.4));

  // Velocity-loop rise time to 90% of a velocity step grows with payload.
  // Friction is off: a pure P loop cannot overcome it to within 10%.
  std::size_t prev = 0;
  for (const double payload : {0.4, 1.2, 2.0}) {
    PlantParams smooth = quiet(payload);
    smooth.friction = 0.0;
    const MotionRun r = simulate_closed_loop(ControllerGains{0, 600, 0, 0, 1.0},
                                             hold_profile(2000, 0.0, 1e-3), smooth, 1);
    std::size_t rise = r.v_e.size();
    for (std::size_t i = 0; i < r.v_e.size(); ++i) {
      if (r.v_e[i] <= 1e-4) {
        rise = i;
        break;
      }
    }
    CHECK(rise < r.v_e.size());
    CHECK(rise >= prev);
    prev = rise;
  }
}

TEST_CASE("unstable gains are flagged and truncated") {
  const MotionProfile prof = generate_trajectory(0.01);
  const MotionRun run =
      simulate_closed_loop(ControllerGains{5000, 20000, 0, 0, 1.0}, prof, quiet(), 1);
  CHECK(run.unstable);
  CHECK(run.end_index + 1 == run.p_e.size());
  const RunMetrics m = evaluate_run(run, MetricConfig{}, 5.0, 10.0);
  CHECK(m.unstable);
  CHECK(m.cost >= 5.0);
  CHECK(m.constraint >= 10.0);
}

TEST_CASE("plant validation") {
  PlantParams p;
  p.base_mass = -2.0;
  CHECK_THROWS_AS(p.validate(20000.0), ContractViolation);
  p = PlantParams{};
  p.mode_frequency = 20000.0;
  CHECK_THROWS_AS(p.validate(20000.0), ContractViolation);
  p = PlantParams{};
  p.friction = -1.0;
  CHECK_THROWS_AS(p.validate(20000.0), ContractViolation);
}
