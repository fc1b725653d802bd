#pragma once

#include "goose/types.hpp"

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace goose {

/// Squared-exponential (ARD) kernel: one lengthscale per input dimension and
/// a single prior standard deviation sigma_v.
struct KernelSpec {
  Vector lengthscales;
  double prior_std = 1.0;

  KernelSpec() = default;
  KernelSpec(Vector lengthscales, double prior_std);

  Eigen::Index dim() const noexcept { return lengthscales.size(); }
  double variance() const noexcept { return prior_std * prior_std; }
};

double kernel_eval(const KernelSpec& spec, const VectorRef& x, const VectorRef& x2);

/// Controller parameters x_opt and task parameters x_tau. The GP sees their
/// concatenation.
struct InputPoint {
  Vector opt;
  Vector task;

  Vector joined() const { return concat(opt, task); }
};

/// Product kernel k_tau(x_tau, x_tau') * k(x_opt, x_opt').
double multi_task_kernel_eval(const KernelSpec& spec_opt, const KernelSpec& spec_tau,
                              const InputPoint& x, const InputPoint& x2);

/// The product of two SE kernels is one SE kernel over the concatenated input
/// with block lengthscales and sigma_v = sigma_opt * sigma_tau.
KernelSpec joint_kernel(const KernelSpec& spec_opt, const KernelSpec& spec_tau);

/// Constraint limit c, either a constant or a table of per-task values
/// (nearest entry wins, ties to the earlier entry).
class ConstraintLimit {
 public:
  ConstraintLimit(double value = 0.0) : constant_(value) {}  // NOLINT(google-explicit-constructor)
  ConstraintLimit(std::vector<Vector> tasks, std::vector<double> values);

  double at(const VectorRef& task) const;
  bool is_constant() const noexcept { return tasks_.empty(); }
  double constant() const noexcept { return constant_; }
  const std::vector<Vector>& tasks() const noexcept { return tasks_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  double constant_ = 0.0;
  std::vector<Vector> tasks_;
  std::vector<double> values_;
};

/// Prior mean mu_0. Either constant, or a function of the task block only
/// (e.g. mu_0^q = c(x_tau)); in both cases its gradient along x_opt is zero.
class PriorMean {
 public:
  PriorMean(double value = 0.0) : constant_(value) {}  // NOLINT(google-explicit-constructor)

  static PriorMean task_dependent(ConstraintLimit table, Eigen::Index task_offset);

  double operator()(const VectorRef& x) const;
  bool is_constant() const noexcept { return !table_; }
  double constant() const noexcept { return constant_; }

 private:
  double constant_ = 0.0;
  std::shared_ptr<const ConstraintLimit> table_;
  Eigen::Index task_offset_ = 0;
};

/// Exact GP regression with a windowed, insertion-ordered data set and a cached
/// Cholesky factor of (K + sigma_n^2 I). Value type: a copy is a consistent
/// snapshot that may be queried from several threads.
class GpModel {
 public:
  struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
    double stddev() const;
  };

  GpModel(KernelSpec kernel, double noise_std, PriorMean prior_mean, double beta = 3.0);

  Prediction posterior(const VectorRef& x) const;
  double lcb(const VectorRef& x) const;
  double ucb(const VectorRef& x) const;
  /// Both bounds from a single posterior evaluation.
  std::pair<double, double> bounds(const VectorRef& x) const;

  /// Gradient of the posterior mean over every input dimension.
  Vector posterior_mean_gradient(const VectorRef& x) const;

  /// Appends (x, y) and extends the factor by one row. Rejects non-finite y.
  void add_observation(const VectorRef& x, double y);
  /// Drops the first-inserted observation and refactorizes. No-op when empty.
  void remove_oldest();

  std::size_t size() const noexcept { return targets_.size(); }
  bool empty() const noexcept { return targets_.empty(); }
  const std::vector<Vector>& inputs() const noexcept { return inputs_; }
  const std::vector<double>& targets() const noexcept { return targets_; }

  const KernelSpec& kernel() const noexcept { return kernel_; }
  double noise_std() const noexcept { return noise_std_; }
  double beta() const noexcept { return beta_; }
  void set_beta(double beta);
  const PriorMean& prior_mean() const noexcept { return prior_mean_; }
  /// Diagonal jitter currently in use (0 unless the ladder had to escalate).
  double jitter() const noexcept { return jitter_; }

 private:
  Vector kernel_column(const VectorRef& x) const;
  void refactorize();
  void update_weights();

  KernelSpec kernel_;
  double noise_std_;
  PriorMean prior_mean_;
  double beta_;
  std::vector<Vector> inputs_;
  std::vector<double> targets_;
  Matrix chol_;    // lower factor of K + (sigma_n^2 + jitter) I
  Vector weights_; // (K + sigma_n^2 I)^{-1} (y - mu_0(X))
  double jitter_ = 0.0;
};

/// Outcome of the prior-tuning check that makes the modified algorithm both
/// safe and expansive before any data is seen.
struct HyperparameterReport {
  bool safety_ok = false;     // mu_0^q + beta^q sigma_v^q > c
  bool expansion_ok = false;  // mu_0^f - beta^f sigma_v^f <= xi
  double constraint_prior_ucb = 0.0;
  double constraint_limit = 0.0;
  double cost_prior_lcb = 0.0;
  double cost_lower_bound = 0.0;

  bool ok() const noexcept { return safety_ok && expansion_ok; }
};

/// Checks both conditions. For task-dependent priors or limits the check runs
/// at every probe task and reports the worst case.
HyperparameterReport validate_hyperparameters(const GpModel& model_f, const GpModel& model_q,
                                              const ConstraintLimit& c, double xi,
                                              std::span<const Vector> probe_inputs = {});

}  // namespace goose
