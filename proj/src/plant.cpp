#include "goose/plant.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace goose {

namespace {

struct Segment {
  double duration;
  double jerk;
};

// Phase durations of the symmetric 7-segment profile.
std::array<Segment, 7> plan_segments(double d, const MotionLimits& lim) {
  const double v = lim.v_max;
  const double a = lim.a_max;
  const double j = lim.j_max;
  double tj = 0.0;
  double ta = 0.0;
  double tv = 0.0;
  if (v * j >= a * a) {
    tj = a / j;
    ta = v / a - tj;
  } else {
    tj = std::sqrt(v / j);
  }
  const double t1 = 2.0 * tj + ta;
  if (d >= v * t1) {
    tv = (d - v * t1) / v;
  } else {
    // Peak velocity not reached; first try with the acceleration limit hit.
    const double vp = 0.5 * a * (-a / j + std::sqrt(a * a / (j * j) + 4.0 * d / a));
    if (vp >= a * a / j) {
      tj = a / j;
      ta = vp / a - tj;
    } else {
      tj = std::cbrt(d / (2.0 * j));
      ta = 0.0;
    }
    tv = 0.0;
  }
  return {Segment{tj, j}, Segment{ta, 0.0}, Segment{tj, -j}, Segment{tv, 0.0},
          Segment{tj, -j}, Segment{ta, 0.0}, Segment{tj, j}};
}

}  // namespace

MotionProfile generate_trajectory(double stepsize, const MotionLimits& limits, double fs,
                                  double hold) {
  if (!(stepsize > 0.0) || !std::isfinite(stepsize)) {
    throw ContractViolation("generate_trajectory: stepsize must be positive");
  }
  if (!(limits.v_max > 0.0 && limits.a_max > 0.0 && limits.j_max > 0.0) || !(fs > 0.0) ||
      hold < 0.0) {
    throw ContractViolation("generate_trajectory: limits, fs and hold must be positive");
  }
  const auto segments = plan_segments(stepsize, limits);

  // Boundary states of each segment.
  std::array<double, 8> t0{};
  std::array<double, 8> p0{};
  std::array<double, 8> v0{};
  std::array<double, 8> a0{};
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const double h = segments[s].duration;
    const double jk = segments[s].jerk;
    t0[s + 1] = t0[s] + h;
    p0[s + 1] = p0[s] + v0[s] * h + a0[s] * h * h / 2.0 + jk * h * h * h / 6.0;
    v0[s + 1] = v0[s] + a0[s] * h + jk * h * h / 2.0;
    a0[s + 1] = a0[s] + jk * h;
  }

  MotionProfile out;
  out.stepsize = stepsize;
  out.fs = fs;
  out.limits = limits;
  out.duration = t0[7];
  out.settle_index = static_cast<std::size_t>(std::ceil(out.duration * fs - 1e-9));
  const std::size_t n = out.settle_index + static_cast<std::size_t>(std::llround(hold * fs)) + 1;
  out.position.resize(n);
  out.velocity.resize(n);
  out.acceleration.resize(n);

  std::size_t s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    if (t >= out.duration) {
      out.position[i] = stepsize;
      out.velocity[i] = 0.0;
      out.acceleration[i] = 0.0;
      continue;
    }
    while (s + 1 < segments.size() && t >= t0[s + 1]) {
      ++s;
    }
    const double h = t - t0[s];
    const double jk = segments[s].jerk;
    out.position[i] = p0[s] + v0[s] * h + a0[s] * h * h / 2.0 + jk * h * h * h / 6.0;
    out.velocity[i] = v0[s] + a0[s] * h + jk * h * h / 2.0;
    out.acceleration[i] = a0[s] + jk * h;
  }
  return out;
}

ControllerGains ControllerGains::from_opt(const VectorRef& x_opt, double vff) {
  if (x_opt.size() != 4) {
    throw ContractViolation("controller gains need [Kp, Vkp, Vki, Aff]");
  }
  return ControllerGains{x_opt[0], x_opt[1], x_opt[2], x_opt[3], vff};
}

Vector ControllerGains::to_opt() const {
  Vector x(4);
  x << kp, vkp, vki, aff;
  return x;
}

double PlantParams::resonance_hz() const noexcept {
  return mode_frequency / std::sqrt(1.0 + mode_payload_factor * payload / base_mass);
}

void PlantParams::validate(double fs) const {
  if (!(mass() > 0.0) || !(nominal_mass > 0.0)) {
    throw ContractViolation("plant: masses must be positive");
  }
  const double f = resonance_hz();
  if (!(f > 0.0 && f < fs / 2.0)) {
    throw ContractViolation("plant: resonance must lie in (0, fs/2)");
  }
  if (!(current_lag > 0.0) || damping < 0.0 || mode_damping < 0.0 || velocity_noise < 0.0 ||
      position_noise < 0.0 || friction < 0.0 || !(friction_velocity > 0.0) || !(guard > 0.0)) {
    throw ContractViolation("plant: invalid parameter");
  }
}

void MotionRun::write_csv(std::ostream& os) const {
  os << "t,p_ref,p,p_e,v_e\n";
  os.precision(12);
  for (std::size_t i = 0; i < time.size(); ++i) {
    os << time[i] << ',' << p_ref[i] << ',' << p[i] << ',' << p_e[i] << ',' << v_e[i] << '\n';
  }
}

namespace {

// States: rigid position, rigid velocity, modal coordinate, modal velocity, force.
using State = Eigen::Matrix<double, 5, 1>;

struct Discrete {
  Eigen::Matrix<double, 5, 5> a;
  State b;
  // External force acting directly on the carriage.
  State b_ext;
};

Discrete discretize(const PlantParams& plant, double dt) {
  const double m = plant.mass();
  const double w = 2.0 * std::numbers::pi * plant.resonance_hz();
  Eigen::Matrix<double, 7, 7> m6 = Eigen::Matrix<double, 7, 7>::Zero();
  m6(0, 1) = 1.0;
  m6(1, 1) = -plant.damping / m;
  m6(1, 4) = 1.0 / m;
  m6(2, 3) = 1.0;
  m6(3, 2) = -w * w;
  m6(3, 3) = -2.0 * plant.mode_damping * w;
  m6(3, 4) = 1.0 / m;
  m6(4, 4) = -1.0 / plant.current_lag;
  m6(4, 5) = 1.0 / plant.current_lag;
  m6(1, 6) = 1.0 / m;
  m6(3, 6) = 1.0 / m;
  const Eigen::Matrix<double, 7, 7> e = (m6 * dt).exp();
  return Discrete{e.topLeftCorner<5, 5>(), e.block<5, 1>(0, 5), e.block<5, 1>(0, 6)};
}

MotionRun simulate(const ControllerGains& g, const std::vector<double>& p_ref,
                   const std::vector<double>& v_ref, const std::vector<double>& a_ref,
                   std::size_t settle_index, double fs, const PlantParams& plant,
                   double start_position, std::uint64_t rng_seed) {
  plant.validate(fs);
  if (!(std::isfinite(g.kp) && std::isfinite(g.vkp) && std::isfinite(g.vki) &&
        std::isfinite(g.aff) && std::isfinite(g.vff))) {
    throw ContractViolation("simulate: gains must be finite");
  }
  const double dt = 1.0 / fs;
  const Discrete sys = discretize(plant, dt);
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t n = p_ref.size();
  MotionRun run;
  run.gains = g;
  run.settle_index = settle_index;
  run.end_index = n - 1;
  run.time.reserve(n);
  run.p_ref.reserve(n);
  run.p.reserve(n);
  run.p_e.reserve(n);
  run.v_e.reserve(n);

  State x = State::Zero();
  x[0] = start_position;
  const double ki = g.vki * plant.integral_scale;
  double integral = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double p_true = x[0] + plant.mode_coupling * x[2];
    const double p_meas = p_true + plant.drift * t + plant.position_noise * normal(rng);
    const double v_meas = x[1] + plant.mode_coupling * x[3] + plant.velocity_noise * normal(rng);
    const double pe = p_ref[i] - p_meas;
    const double ve = v_ref[i] - v_meas;

    run.time.push_back(t);
    run.p_ref.push_back(p_ref[i]);
    run.p.push_back(p_true);
    run.p_e.push_back(pe);
    run.v_e.push_back(ve);
    if (!std::isfinite(pe) || std::abs(pe) > plant.guard) {
      run.unstable = true;
      run.end_index = i;
      break;
    }

    const double v_cmd = g.kp * pe + g.vff * v_ref[i];
    const double v_err = v_cmd - v_meas;
    if (ki != 0.0) {
      integral += v_err * dt;
      const double cap = plant.integral_limit / std::abs(ki);
      integral = std::clamp(integral, -cap, cap);
    }
    const double a_cmd = g.vkp * v_err + ki * integral;
    const double force = std::clamp(plant.nominal_mass * (a_cmd + g.aff * a_ref[i]),
                                    -plant.force_limit, plant.force_limit);
    const double friction = -plant.friction * std::tanh(x[1] / plant.friction_velocity);
    x = sys.a * x + sys.b * force + sys.b_ext * friction;
  }
  return run;
}

}  // namespace

MotionRun simulate_closed_loop(const ControllerGains& gains, const MotionProfile& profile,
                               const PlantParams& plant, std::uint64_t rng_seed) {
  return simulate(gains, profile.position, profile.velocity, profile.acceleration,
                  profile.settle_index, profile.fs, plant, 0.0, rng_seed);
}

MotionCycle simulate_cycle(const ControllerGains& gains, const MotionProfile& profile,
                           const PlantParams& plant, std::uint64_t rng_seed) {
  MotionCycle out;
  out.forward = simulate_closed_loop(gains, profile, plant, rng_seed);
  std::vector<double> p(profile.position.size());
  std::vector<double> v(profile.velocity.size());
  std::vector<double> a(profile.acceleration.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = profile.stepsize - profile.position[i];
    v[i] = -profile.velocity[i];
    a[i] = -profile.acceleration[i];
  }
  out.back = simulate(gains, p, v, a, profile.settle_index, profile.fs, plant, profile.stepsize,
                      rng_seed ^ 0x9e3779b97f4a7c15ULL);
  return out;
}

PlantParams apply_task(PlantParams plant, const VectorRef& task, const TaskLayout& layout) {
  auto slot = [&task](int index) {
    if (index >= task.size()) {
      throw ContractViolation("apply_task: task layout index out of range");
    }
    return task[index];
  };
  if (layout.payload >= 0) {
    plant.payload = slot(layout.payload);
    if (plant.payload < 0.0) {
      throw ContractViolation("apply_task: payload must be non-negative");
    }
  }
  if (layout.drift >= 0) {
    plant.drift = slot(layout.drift) * layout.drift_scale;
  }
  return plant;
}

double stepsize_from_task(const VectorRef& task, const TaskLayout& layout) {
  if (layout.log_step < 0 || layout.log_step >= task.size()) {
    throw ContractViolation("stepsize_from_task: task has no stepsize slot");
  }
  return std::pow(10.0, task[layout.log_step]) * 1e-3;
}

}  // namespace goose
