#pragma once

#include "goose/baselines.hpp"
#include "goose/goose.hpp"

#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <optional>

namespace goose {

struct Measurement {
  double y_f = 0.0;
  double y_q = 0.0;
  bool unstable = false;
};

/// The machine: runs iteration k with gains x_opt on task and returns the
/// measured cost and constraint.
using Machine = std::function<Measurement(std::size_t k, const Vector& x_opt, const Vector& task)>;

class TaskPredictor {
 public:
  virtual ~TaskPredictor() = default;
  /// Task expected at `iteration`, knowing that `current` is applied at
  /// iteration `now`.
  virtual Vector predict(std::size_t iteration, std::size_t now, const Vector& current) const = 0;
};

/// Knows the true schedule.
class SchedulePredictor : public TaskPredictor {
 public:
  explicit SchedulePredictor(std::vector<Vector> schedule) : schedule_(std::move(schedule)) {}
  Vector predict(std::size_t iteration, std::size_t now, const Vector& current) const override;

 private:
  std::vector<Vector> schedule_;
};

/// Assumes the current task persists.
class ConstantHoldPredictor : public TaskPredictor {
 public:
  Vector predict(std::size_t iteration, std::size_t now, const Vector& current) const override;
};

enum class Scheme { Serial, Para, Lookup };
enum class ClockMode { Virtual, Wall };

const char* to_string(Scheme s);

struct ParallelConfig {
  Scheme scheme = Scheme::Serial;
  std::size_t workers = 4;
  std::size_t horizon = 4;
  /// Neighborhood multiplier k and spacing delta_tau for LookupGoOSE.
  double neighborhood_k = 1.0;
  Vector delta_tau;
  Grid task_grid;
  /// Machine movement per iteration in seconds.
  double cycle_time = 2.4;
  /// Virtual seconds per unit of optimizer work.
  double seconds_per_unit = 1e-6;
  ClockMode clock = ClockMode::Virtual;
  /// Wall mode: measured seconds are multiplied by this.
  double wall_time_scale = 1.0;
  std::uint64_t base_seed = 0;
  /// Stop as soon as the first active phase terminates.
  bool stop_at_passive = false;
  /// Record the pessimistic optimum for the applied task after every report.
  /// Runs outside the timed path and never feeds back into decisions.
  bool track_optimum = false;

  void validate(std::size_t task_dim) const;
};

struct StepRecord {
  std::size_t iteration = 0;
  double time = 0.0;
  Vector task;
  Vector x_opt;
  double y_f = 0.0;
  double y_q = 0.0;
  double limit = 0.0;
  Phase phase = Phase::Active;
  bool violation = false;
  bool unstable = false;
  /// Applied gains came from the safe seed because nothing better existed.
  bool seed_fallback = false;
  bool accepted = false;
  bool added_to_gp = false;
  bool mispredicted = false;
  /// Optimizer time attributed to this iteration (movement excluded).
  double compute_time = 0.0;
  std::uint64_t work_units = 0;
  std::size_t gp_size = 0;
  std::size_t points_added = 0;
  std::size_t ignored_total = 0;
  /// Cost posterior at the applied gains after the update.
  double predicted_mean = 0.0;
  double predicted_lcb = 0.0;
  double predicted_ucb = 0.0;
  /// Pessimistic optimum for the task after the update (NaN if not tracked).
  double optimum_mean = std::numeric_limits<double>::quiet_NaN();
  double optimum_lcb = std::numeric_limits<double>::quiet_NaN();
  double optimum_ucb = std::numeric_limits<double>::quiet_NaN();
};

struct ParallelResult {
  std::vector<StepRecord> steps;
  std::size_t ignored = 0;
  std::size_t points_added = 0;
  std::size_t jobs_run = 0;
  std::size_t mispredictions = 0;
  std::size_t seed_fallbacks = 0;
  /// Time at which the first active phase terminated, if it did.
  std::optional<double> termination_time;
  /// Time at which LookupGoOSE finished its first full-grid refresh.
  std::optional<double> initial_refresh_done;
};

/// Cell of the LookupGoOSE table.
struct GridCell {
  Vector task;
  Vector x_opt;
  double value = 0.0;  // predicted acquisition value; NaN for the seed
  std::uint64_t stamp = 0;
  bool from_seed = true;
};

class OptimaGrid {
 public:
  OptimaGrid(const Grid& task_grid, const Vector& seed);

  std::size_t size() const noexcept { return cells_.size(); }
  const GridCell& cell(std::size_t i) const { return cells_.at(i); }
  /// Nearest cell (Euclidean in task coordinates); ties go to the smallest
  /// index, which is lexicographic in the grid coordinates.
  std::size_t nearest(const VectorRef& task) const;
  const Vector& query(const VectorRef& task) const { return cells_[nearest(task)].x_opt; }
  /// Cells with |tau_c - task|_d < k * delta_d in every dimension.
  std::vector<std::size_t> neighborhood(const VectorRef& task, double k,
                                        const VectorRef& delta) const;
  /// Keeps the newer of the stored and offered results.
  void store(std::size_t i, const Vector& x_opt, double value, std::uint64_t stamp);

 private:
  std::vector<GridCell> cells_;
};

/// Serial modified GoOSE loop: observe, propose, run, report.
ParallelResult run_serial(GooseOptimizer& opt, const std::vector<Vector>& schedule,
                          const Machine& machine, const ParallelConfig& config);

/// Discrete-event simulation of ParaGoOSE or LookupGoOSE against the machine
/// cycle. Worker jobs run on real threads against immutable snapshots; their
/// durations come from the optimizer work counter (virtual clock) or from
/// measured wall time.
ParallelResult run_parallel(GooseOptimizer& opt, const std::vector<Vector>& schedule,
                            const Machine& machine, const ParallelConfig& config,
                            const TaskPredictor& predictor);

}  // namespace goose
