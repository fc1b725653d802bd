#pragma once

#include "goose/types.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace goose {

struct PsoConfig {
  std::size_t n_particles = 50;
  /// Per-dimension initial speed v_0; particles start with velocity v_0 .* u,
  /// u uniform on the unit sphere.
  Vector initial_speed;
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  std::size_t max_iterations = 100;
  Vector lower;
  Vector upper;

  /// v_0,d = fraction * l_d from the cost-GP x_opt lengthscales.
  static PsoConfig from_lengthscales(Vector lower, Vector upper, const VectorRef& opt_lengthscales,
                                     double fraction = 0.5);

  void validate() const;
};

struct Particle {
  Vector position;
  Vector velocity;
  Vector best_position;
  double best_value = 0.0;
  bool has_best = false;
};

struct Swarm {
  std::vector<Particle> particles;
  Vector global_best;
  double global_best_value = 0.0;
  bool has_global_best = false;
};

using Rng = std::mt19937_64;

/// Positions are drawn from `init_points` without replacement while possible
/// (a seeded permutation), then cycled. Velocities are not evaluated here.
Swarm init_swarm(std::span<const Vector> init_points, const PsoConfig& config, Rng& rng);
Swarm init_swarm(std::span<const Vector> init_points, const PsoConfig& config,
                 std::uint64_t rng_seed);

struct PsoResult {
  Vector best;
  double value = 0.0;
  bool feasible = false;
  /// Global-best value after initialization and after every iteration.
  std::vector<double> best_trace;
  std::size_t evaluations = 0;
};

using Acquisition = std::function<double(const Vector&)>;
using Feasibility = std::function<bool(const Vector&)>;

/// Feasibility-first particle swarm: personal and global bests only move to
/// feasible positions. When nothing feasible is ever visited the best init
/// point (by acquisition) is returned. Deterministic for a given seed.
PsoResult pso_optimize(const Acquisition& acq, const Feasibility& feasible,
                       std::span<const Vector> init_points, const PsoConfig& config,
                       std::uint64_t rng_seed);

}  // namespace goose
