#pragma once

#include "goose/types.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace goose {

struct MotionLimits {
  double v_max = 0.9;
  double a_max = 20.0;
  double j_max = 200.0;
};

struct MotionProfile {
  double stepsize = 0.0;
  double fs = 20000.0;
  MotionLimits limits;
  /// Duration of the move; the reference is constant from here on.
  double duration = 0.0;
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> acceleration;
  /// First sample at or after the end of the move.
  std::size_t settle_index = 0;
};

/// Time-optimal rest-to-rest jerk-limited profile, sampled at fs and padded
/// with `hold` seconds of constant reference after the move.
MotionProfile generate_trajectory(double stepsize, const MotionLimits& limits = {},
                                  double fs = 20000.0, double hold = 0.25);

struct ControllerGains {
  double kp = 0.0;
  double vkp = 0.0;
  double vki = 0.0;
  double aff = 0.0;
  double vff = 1.0;

  static ControllerGains from_opt(const VectorRef& x_opt, double vff = 1.0);
  Vector to_opt() const;
};

struct PlantParams {
  double base_mass = 1.0;
  double payload = 0.4;
  /// Mass the force command is scaled with; Aff = mass / nominal_mass is ideal.
  double nominal_mass = 2.2;
  double damping = 4.0;
  /// Resonance frequency without payload; payload lowers it.
  double mode_frequency = 330.0;
  double mode_payload_factor = 0.25;
  double mode_damping = 0.03;
  /// Mode deflection seen by the encoder per unit modal coordinate. Negative
  /// means the mode moves against the rigid body at the sensor.
  double mode_coupling = -0.12;
  double current_lag = 2e-4;
  double velocity_noise = 5e-6;
  double position_noise = 1e-9;
  /// Coulomb friction (N), smoothed as tanh(v / friction_velocity).
  double friction = 1.0;
  double friction_velocity = 1e-3;
  /// Measured-position ramp rate (m/s) added on top of the true position.
  double drift = 0.0;
  /// Integral gain multiplier so that Vki lives on the same scale as Vkp.
  double integral_scale = 100.0;
  /// Clamp on the velocity-loop integral contribution (m/s^2).
  double integral_limit = 200.0;
  double force_limit = 400.0;
  /// |p_e| beyond this flags the run as unstable and ends it.
  double guard = 1e-3;

  double mass() const noexcept { return base_mass + payload; }
  double resonance_hz() const noexcept;
  void validate(double fs) const;
};

struct MotionRun {
  std::vector<double> time;
  std::vector<double> p_ref;
  std::vector<double> p;
  std::vector<double> p_e;
  std::vector<double> v_e;
  std::size_t settle_index = 0;
  std::size_t end_index = 0;
  bool unstable = false;
  ControllerGains gains;

  /// Columnar dump: t,p_ref,p,p_e,v_e
  void write_csv(std::ostream& os) const;
};

MotionRun simulate_closed_loop(const ControllerGains& gains, const MotionProfile& profile,
                               const PlantParams& plant, std::uint64_t rng_seed);

struct MotionCycle {
  MotionRun forward;
  MotionRun back;
};

/// Forward move followed by the mirrored move back to the start.
MotionCycle simulate_cycle(const ControllerGains& gains, const MotionProfile& profile,
                           const PlantParams& plant, std::uint64_t rng_seed);

/// Task routing: payload (kg) and drift rate are taken from named task slots.
/// Negative indices mean the task does not carry that quantity.
struct TaskLayout {
  int log_step = 0;
  int payload = 1;
  int drift = -1;
  /// Drift task values are in um/s.
  double drift_scale = 1e-6;
};

PlantParams apply_task(PlantParams plant, const VectorRef& task, const TaskLayout& layout);
double stepsize_from_task(const VectorRef& task, const TaskLayout& layout);

}  // namespace goose
