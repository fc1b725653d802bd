#pragma once

#include "goose/gp.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace goose {

/// Controller parameters known to satisfy the constraint for every task.
class SafeSeed {
 public:
  explicit SafeSeed(std::vector<Vector> points);

  const std::vector<Vector>& points() const noexcept { return points_; }
  /// Throws ContractViolation if a seed point leaves the box.
  void check_bounds(const VectorRef& lower, const VectorRef& upper) const;

 private:
  std::vector<Vector> points_;
};

struct EvaluationRecord {
  Vector x_opt;
  Vector task;
  double y_f = 0.0;
  double y_q = 0.0;
  std::size_t iteration = 0;
  Phase phase = Phase::Active;
};

/// Append-only log of evaluated inputs; iteration indices strictly increase.
class EvaluationHistory {
 public:
  void append(EvaluationRecord record);

  const std::vector<EvaluationRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

 private:
  std::vector<EvaluationRecord> records_;
};

/// ucb^q(x) <= c.
bool pessimistic_member(const GpModel& gp_q, const VectorRef& x, double c);

struct SafeSetResult {
  std::vector<InputPoint> points;
  bool used_seed = false;
};

/// Every historical x_opt re-paired with the current task and kept when it is
/// pessimistically safe there. Falls back to the seed when nothing survives.
SafeSetResult safe_set_from_history(const EvaluationHistory& history, const GpModel& gp_q,
                                    const VectorRef& task, double c, const SafeSeed& seed);

/// Safe points whose confidence width ucb - lcb exceeds epsilon.
std::vector<InputPoint> expander_set(const GpModel& gp_q, std::span<const InputPoint> safe_points,
                                     double epsilon);

enum class DistanceMetric {
  Euclidean,            // plain distance on x_opt, raw gradient
  LengthscaleWeighted,  // distance and gradient in lengthscale-normalized x_opt
};

/// Distance between the x_opt blocks under `metric`, using the q-kernel's
/// x_opt lengthscales for the weighted variant.
double opt_distance(const GpModel& gp_q, const InputPoint& a, const InputPoint& b,
                    DistanceMetric metric);

/// Infinity norm of the posterior-mean gradient restricted to x_opt, expressed
/// in the same coordinates as `opt_distance`.
double opt_gradient_norm(const GpModel& gp_q, const InputPoint& x, DistanceMetric metric);

/// Noisy expansion operator: 1 iff
///   lcb^q(x_bar) + ||grad mu^q(x_bar)||_inf * d(x_bar, x) + epsilon <= c.
int expansion_operator(const GpModel& gp_q, const InputPoint& x_bar, const InputPoint& x,
                       double epsilon, double c, DistanceMetric metric);

/// Linear scan over expanders for one with expansion_operator == 1.
bool optimistic_member(const GpModel& gp_q, std::span<const InputPoint> expanders,
                       const InputPoint& x, double epsilon, double c, DistanceMetric metric);

/// Optimistic safe set with per-expander quantities cached; membership then
/// only costs one distance per expander.
class OptimisticSet {
 public:
  OptimisticSet(const GpModel& gp_q, std::vector<InputPoint> expanders, double epsilon, double c,
                DistanceMetric metric);

  bool contains(const InputPoint& x) const;
  std::size_t size() const noexcept { return expanders_.size(); }

 private:
  struct Entry {
    double slack;  // c - epsilon - lcb(x_bar)
    double gradient_norm;
  };
  Vector scale_;  // per-dimension distance scale (1 or 1/l_d)
  std::vector<InputPoint> expanders_;
  std::vector<Entry> entries_;
};

}  // namespace goose
