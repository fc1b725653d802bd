#pragma once

#include "goose/gp.hpp"
#include "goose/metrics.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace goose {

using Grid = std::vector<std::vector<double>>;

/// All permutations of per-dimension grids, first dimension varying slowest.
std::vector<Vector> grid_permutations(const Grid& grids);

struct GridRecord {
  Vector x_opt;
  Vector task;
  double cost = 0.0;
  double constraint = 0.0;
  bool failed = false;  // unstable or simulation error
};

struct GainGrid {
  Grid gain_grid;
  Grid task_grid;
  std::vector<GridRecord> records;
};

using GridEvaluator = std::function<RunMetrics(const Vector& x_opt, const Vector& task)>;

/// Evaluates every (gain, task) permutation once. Evaluator exceptions are
/// stored as failed records.
GainGrid record_grid(const Grid& gain_grid, const Grid& task_grid, const GridEvaluator& evaluate);

struct TaskOptimum {
  Vector task;
  Vector x_opt;
  double cost = 0.0;
  double constraint = 0.0;
  bool feasible = false;
};

struct OptimumTable {
  Grid task_grid;
  /// One entry per task permutation, in grid_permutations order.
  std::vector<TaskOptimum> entries;

  const TaskOptimum& at(const std::vector<std::size_t>& index) const;
};

/// Feasible minimum-cost candidate per recorded task; ties go to the
/// lexicographically smallest gain vector.
OptimumTable select_per_task_optima(const GainGrid& grid, const ConstraintLimit& c);

/// Multilinear interpolation of the per-task optimal gains; linear
/// extrapolation from the two outermost grid points beyond the hull; result
/// clipped to [lower, upper]. Infeasible tasks contribute the seed.
Vector lpv_interpolate(const OptimumTable& table, const VectorRef& task, const VectorRef& seed,
                       const VectorRef& lower, const VectorRef& upper);

void write_grid_csv(const GainGrid& grid, std::ostream& os);

}  // namespace goose
