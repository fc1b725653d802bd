#pragma once

#include "goose/types.hpp"

#include <cstdint>

namespace goose {

/// Approximate sample from a zero-mean SE Gaussian process via random
/// Fourier features, shifted and scaled: mean + stddev * g(x).
class RffFunction {
 public:
  RffFunction(Vector lengthscales, double mean, double stddev, std::size_t features,
              std::uint64_t seed);
  double operator()(const VectorRef& x) const;
  Eigen::Index dim() const noexcept { return omega_.cols(); }

 private:
  Matrix omega_;  // features x dim, already divided by the lengthscales
  Vector phase_;
  double mean_;
  double amplitude_;
};

struct SyntheticSpec {
  Vector lengthscales = Vector::Constant(2, 0.4);
  double f_mean = 1.8;
  double f_std = 0.36;
  double q_std = 1.0;
  /// True constraint mean sits this far below the limit.
  double q_offset = 1.0;
  double c = 1.0;
  std::size_t features = 1000;
  /// Resolution of the coarse grid the seed is picked from.
  std::size_t seed_grid = 20;
  /// Draws are rejected unless the constrained optimum has q <= c - margin
  /// and is connected to the seed through cells with the same margin.
  /// Zero accepts every draw.
  double strict_margin = 0.36;
  /// Resolution of the grid used for the strict-feasibility check.
  std::size_t check_grid = 100;
  std::size_t max_draws = 100;
};

/// Problem on the unit box with seed = argmin q over a coarse grid.
struct SyntheticProblem {
  RffFunction f;
  RffFunction q;
  double c;
  Vector seed;
  Vector lower;
  Vector upper;
  /// Draws rejected before this one was accepted.
  std::size_t rejected = 0;
};

/// Dense-grid check that the constrained optimum is strictly feasible and
/// reachable from the seed.
bool strictly_feasible(const SyntheticProblem& p, double margin, std::size_t grid);

SyntheticProblem make_synthetic(std::uint64_t seed, const SyntheticSpec& spec = {});

}  // namespace goose
