#include "goose/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace goose {

PsoConfig PsoConfig::from_lengthscales(Vector lower, Vector upper,
                                       const VectorRef& opt_lengthscales, double fraction) {
  PsoConfig config;
  config.lower = std::move(lower);
  config.upper = std::move(upper);
  config.initial_speed = fraction * opt_lengthscales;
  return config;
}

void PsoConfig::validate() const {
  if (n_particles < 1) {
    throw ContractViolation("pso: n_particles must be at least 1");
  }
  if (lower.size() == 0 || lower.size() != upper.size() || initial_speed.size() != lower.size()) {
    throw ContractViolation("pso: bounds and initial speed must share one non-zero dimension");
  }
  if ((upper.array() <= lower.array()).any()) {
    throw ContractViolation("pso: bounds must be non-degenerate");
  }
  if (inertia < 0.0 || cognitive < 0.0 || social < 0.0 || (initial_speed.array() < 0.0).any()) {
    throw ContractViolation("pso: coefficients and speeds must be non-negative");
  }
}

namespace {

Vector random_direction(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(dim);
  double norm = 0.0;
  while (norm < 1e-12) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      u[d] = normal(rng);
    }
    norm = u.norm();
  }
  return u / norm;
}

}  // namespace

Swarm init_swarm(std::span<const Vector> init_points, const PsoConfig& config, Rng& rng) {
  if (init_points.empty()) {
    throw ContractViolation("pso: init_points must not be empty");
  }
  config.validate();
  const Eigen::Index dim = config.lower.size();

  std::vector<std::size_t> order(init_points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  Swarm swarm;
  swarm.particles.resize(config.n_particles);
  for (std::size_t i = 0; i < config.n_particles; ++i) {
    const Vector& source = init_points[order[i % order.size()]];
    if (source.size() != dim) {
      throw ContractViolation("pso: init point dimension does not match bounds");
    }
    Particle& p = swarm.particles[i];
    p.position = source.cwiseMax(config.lower).cwiseMin(config.upper);
    p.velocity = random_direction(dim, rng).cwiseProduct(config.initial_speed);
    p.best_position = p.position;
  }
  return swarm;
}

Swarm init_swarm(std::span<const Vector> init_points, const PsoConfig& config,
                 std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return init_swarm(init_points, config, rng);
}

PsoResult pso_optimize(const Acquisition& acq, const Feasibility& feasible,
                       std::span<const Vector> init_points, const PsoConfig& config,
                       std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  Swarm swarm = init_swarm(init_points, config, rng);
  PsoResult result;
  constexpr double kNone = std::numeric_limits<double>::infinity();

  auto consider = [&](Particle& p) {
    ++result.evaluations;
    if (!feasible(p.position)) {
      return;
    }
    const double value = acq(p.position);
    if (!p.has_best || value < p.best_value) {
      p.has_best = true;
      p.best_value = value;
      p.best_position = p.position;
    }
    if (!swarm.has_global_best || value < swarm.global_best_value) {
      swarm.has_global_best = true;
      swarm.global_best_value = value;
      swarm.global_best = p.position;
    }
  };

  for (auto& p : swarm.particles) {
    consider(p);
  }
  result.best_trace.push_back(swarm.has_global_best ? swarm.global_best_value : kNone);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index dim = config.lower.size();
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    for (auto& p : swarm.particles) {
      const Vector& social_target = swarm.has_global_best ? swarm.global_best : p.best_position;
      for (Eigen::Index d = 0; d < dim; ++d) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        p.velocity[d] = config.inertia * p.velocity[d] +
                        config.cognitive * r1 * (p.best_position[d] - p.position[d]) +
                        config.social * r2 * (social_target[d] - p.position[d]);
        p.position[d] += p.velocity[d];
        if (p.position[d] < config.lower[d]) {
          p.position[d] = config.lower[d];
          p.velocity[d] = 0.0;
        } else if (p.position[d] > config.upper[d]) {
          p.position[d] = config.upper[d];
          p.velocity[d] = 0.0;
        }
      }
      consider(p);
    }
    result.best_trace.push_back(swarm.has_global_best ? swarm.global_best_value : kNone);
  }

  if (swarm.has_global_best) {
    result.best = swarm.global_best;
    result.value = swarm.global_best_value;
    result.feasible = true;
  } else {
    // Nothing feasible was visited: best init point by acquisition.
    double best_value = std::numeric_limits<double>::infinity();
    for (const auto& point : init_points) {
      const Vector clipped = point.cwiseMax(config.lower).cwiseMin(config.upper);
      const double value = acq(clipped);
      ++result.evaluations;
      if (result.best.size() == 0 || value < best_value) {
        result.best = clipped;
        best_value = value;
      }
    }
    result.value = best_value;
    result.feasible = false;
  }
  return result;
}

}  // namespace goose
