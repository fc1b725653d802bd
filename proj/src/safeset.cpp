#include "goose/safeset.hpp"

#include "goose/work.hpp"

#include <cmath>

namespace goose {

SafeSeed::SafeSeed(std::vector<Vector> points) : points_(std::move(points)) {
  if (points_.empty()) {
    throw ContractViolation("safe seed must contain at least one point");
  }
  for (const auto& p : points_) {
    if (p.size() != points_.front().size() || !p.allFinite()) {
      throw ContractViolation("safe seed points must be finite and share one dimension");
    }
  }
}

void SafeSeed::check_bounds(const VectorRef& lower, const VectorRef& upper) const {
  for (const auto& p : points_) {
    if (p.size() != lower.size() || (p.array() < lower.array()).any() ||
        (p.array() > upper.array()).any()) {
      throw ContractViolation("safe seed point lies outside the parameter box");
    }
  }
}

void EvaluationHistory::append(EvaluationRecord record) {
  if (!records_.empty() && record.iteration <= records_.back().iteration) {
    throw ContractViolation("evaluation history indices must strictly increase");
  }
  records_.push_back(std::move(record));
}

bool pessimistic_member(const GpModel& gp_q, const VectorRef& x, double c) {
  return gp_q.ucb(x) <= c;
}

SafeSetResult safe_set_from_history(const EvaluationHistory& history, const GpModel& gp_q,
                                    const VectorRef& task, double c, const SafeSeed& seed) {
  SafeSetResult result;
  for (const auto& record : history.records()) {
    InputPoint candidate{record.x_opt, task};
    if (pessimistic_member(gp_q, candidate.joined(), c)) {
      result.points.push_back(std::move(candidate));
    }
  }
  if (result.points.empty()) {
    result.used_seed = true;
    for (const auto& p : seed.points()) {
      result.points.push_back(InputPoint{p, task});
    }
  }
  return result;
}

std::vector<InputPoint> expander_set(const GpModel& gp_q, std::span<const InputPoint> safe_points,
                                     double epsilon) {
  std::vector<InputPoint> out;
  for (const auto& p : safe_points) {
    const auto [lo, hi] = gp_q.bounds(p.joined());
    if (std::abs(hi - lo) > epsilon) {
      out.push_back(p);
    }
  }
  return out;
}

namespace {

Vector distance_scale(const GpModel& gp_q, Eigen::Index opt_dim, DistanceMetric metric) {
  if (metric == DistanceMetric::Euclidean) {
    return Vector::Ones(opt_dim);
  }
  return gp_q.kernel().lengthscales.head(opt_dim).array().inverse();
}

}  // namespace

double opt_distance(const GpModel& gp_q, const InputPoint& a, const InputPoint& b,
                    DistanceMetric metric) {
  const Vector scale = distance_scale(gp_q, a.opt.size(), metric);
  return ((a.opt - b.opt).array() * scale.array()).matrix().norm();
}

double opt_gradient_norm(const GpModel& gp_q, const InputPoint& x, DistanceMetric metric) {
  const Vector grad = gp_q.posterior_mean_gradient(x.joined());
  const Vector scale = distance_scale(gp_q, x.opt.size(), metric);
  // d/d(x_d * s_d) = (1 / s_d) d/dx_d
  return (grad.head(x.opt.size()).array() / scale.array()).abs().maxCoeff();
}

int expansion_operator(const GpModel& gp_q, const InputPoint& x_bar, const InputPoint& x,
                       double epsilon, double c, DistanceMetric metric) {
  const double lcb = gp_q.lcb(x_bar.joined());
  const double reach = opt_gradient_norm(gp_q, x_bar, metric) * opt_distance(gp_q, x_bar, x, metric);
  return lcb + reach + epsilon <= c ? 1 : 0;
}

bool optimistic_member(const GpModel& gp_q, std::span<const InputPoint> expanders,
                       const InputPoint& x, double epsilon, double c, DistanceMetric metric) {
  for (const auto& x_bar : expanders) {
    if (expansion_operator(gp_q, x_bar, x, epsilon, c, metric) == 1) {
      return true;
    }
  }
  return false;
}

OptimisticSet::OptimisticSet(const GpModel& gp_q, std::vector<InputPoint> expanders,
                             double epsilon, double c, DistanceMetric metric)
    : expanders_(std::move(expanders)) {
  if (!expanders_.empty()) {
    scale_ = distance_scale(gp_q, expanders_.front().opt.size(), metric);
  }
  entries_.reserve(expanders_.size());
  for (const auto& x_bar : expanders_) {
    entries_.push_back(Entry{c - epsilon - gp_q.lcb(x_bar.joined()),
                             opt_gradient_norm(gp_q, x_bar, metric)});
  }
}

bool OptimisticSet::contains(const InputPoint& x) const {
  work::charge(expanders_.size() * static_cast<std::size_t>(x.opt.size() + 1));
  for (std::size_t i = 0; i < expanders_.size(); ++i) {
    const double d = ((expanders_[i].opt - x.opt).array() * scale_.array()).matrix().norm();
    if (entries_[i].gradient_norm * d <= entries_[i].slack) {
      return true;
    }
  }
  return false;
}

}  // namespace goose
