#pragma once

#include "goose/gp.hpp"
#include "goose/pso.hpp"
#include "goose/safeset.hpp"

#include <cstdint>
#include <optional>

namespace goose {

enum class Variant { Modified, Baseline };

inline const char* to_string(Variant v) {
  return v == Variant::Modified ? "modified" : "baseline";
}

struct GooseConfig {
  Vector opt_lower;
  Vector opt_upper;
  ConstraintLimit c;
  double xi = 0.0;
  /// Sliding-window cap on GP observations; 0 disables eviction.
  std::size_t data_limit = 0;
  /// New GP points per active phase before switching to passive.
  std::size_t termination_count = 30;
  /// Per-dimension task change that counts as a new task. Empty means half of
  /// the cost-GP task lengthscales.
  Vector task_change_threshold;
  Variant variant = Variant::Modified;
  /// Expander width threshold; <= 0 means 6 * sigma_n^q.
  double epsilon = 0.0;
  DistanceMetric metric = DistanceMetric::LengthscaleWeighted;

  std::size_t n_particles = 50;
  std::size_t pso_iterations = 100;
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  double initial_speed_fraction = 0.5;

  /// Start even when the prior-tuning check fails.
  bool override_validation = false;
  /// Tasks at which task-dependent priors or limits are checked. Defaults to
  /// the tasks of a tabulated constraint limit.
  std::vector<Vector> validation_tasks;
};

struct Proposal {
  Vector x_opt;
  double acquisition = 0.0;
  /// Posterior of the cost at x_opt (mean, lcb, ucb) for reporting.
  double cost_mean = 0.0;
  double cost_lcb = 0.0;
  double cost_ucb = 0.0;
  double constraint_ucb = 0.0;
  bool used_seed = false;       // safe set fell back to the seed
  bool is_seed_point = false;   // the returned x_opt is a seed point
  bool pso_feasible = false;
  Phase phase = Phase::Active;
  std::size_t safe_set_size = 0;
  std::uint64_t work_units = 0;
};

struct ReportOutcome {
  bool added_to_gp = false;
  bool evicted = false;
  bool violation = false;
  bool phase_changed = false;
};

/// PSO seed for one decision; depends only on the base seed and the
/// iteration so that precomputed and serial decisions coincide.
std::uint64_t iteration_seed(std::uint64_t base, std::uint64_t iteration) noexcept;

/// Modified GoOSE state machine (plus the baseline-expander variant). Copies
/// are independent snapshots; proposal methods are const and thread-safe.
class GooseOptimizer {
 public:
  GooseOptimizer(GooseConfig config, GpModel gp_f, GpModel gp_q, SafeSeed seed);

  /// Initial data x_0: enters history and both GPs without counting towards
  /// termination.
  void add_initial_sample(const VectorRef& x_opt, const VectorRef& task, double y_f, double y_q);

  /// Registers the task of the next iteration; in the passive phase a change
  /// beyond the threshold restarts the active phase. Returns true on restart.
  bool observe_task(const VectorRef& task);

  Proposal active_step(const VectorRef& task, std::uint64_t rng_seed) const;
  Proposal baseline_active_step(const VectorRef& task, std::uint64_t rng_seed) const;
  Proposal passive_step(const VectorRef& task, std::uint64_t rng_seed) const;
  /// argmin ucb^f over the pessimistic safe set; same machinery as passive.
  Proposal final_optimum(const VectorRef& task, std::uint64_t rng_seed) const;
  /// Dispatches on phase and variant.
  Proposal propose(const VectorRef& task, std::uint64_t rng_seed) const;

  /// Active phase: appends to history, evicts oldest-first at the data limit,
  /// updates both GPs and the termination counter. Passive phase: history
  /// only, plus the restart check. Non-finite measurements are rejected.
  ReportOutcome report_measurement(const VectorRef& x_opt, const VectorRef& task, double y_f,
                                   double y_q);

  Phase phase() const noexcept { return phase_; }
  const GpModel& gp_f() const noexcept { return gp_f_; }
  const GpModel& gp_q() const noexcept { return gp_q_; }
  const EvaluationHistory& history() const noexcept { return history_; }
  const SafeSeed& seed() const noexcept { return seed_; }
  const GooseConfig& config() const noexcept { return config_; }
  const HyperparameterReport& validation() const noexcept { return validation_; }
  std::size_t termination_counter() const noexcept { return termination_counter_; }
  std::size_t restarts() const noexcept { return restarts_; }
  std::size_t opt_dim() const noexcept { return static_cast<std::size_t>(config_.opt_lower.size()); }
  std::size_t task_dim() const noexcept;
  double epsilon() const noexcept;
  double limit(const VectorRef& task) const { return config_.c.at(task); }
  /// Bumped on every state mutation (data, history or phase).
  std::uint64_t version() const noexcept { return version_; }

 private:
  enum class Acq { Lcb, Ucb };
  Proposal search(const VectorRef& task, std::uint64_t rng_seed, Acq acq, bool optimistic,
                  Phase phase) const;
  void append_history(const VectorRef& x_opt, const VectorRef& task, double y_f, double y_q);
  void enter(Phase phase);

  GooseConfig config_;
  GpModel gp_f_;
  GpModel gp_q_;
  SafeSeed seed_;
  EvaluationHistory history_;
  HyperparameterReport validation_;
  PsoConfig pso_;
  Phase phase_ = Phase::Active;
  std::size_t termination_counter_ = 0;
  std::size_t restarts_ = 0;
  std::size_t next_iteration_ = 0;
  std::optional<Vector> last_task_;
  std::uint64_t version_ = 0;
};

}  // namespace goose
