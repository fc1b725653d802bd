#include "goose/gp.hpp"

#include "goose/work.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace goose {

namespace {

constexpr std::array<double, 6> kJitterLadder = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

double scaled_sq_distance(const Vector& lengthscales, const VectorRef& x, const VectorRef& x2) {
  double r = 0.0;
  for (Eigen::Index d = 0; d < lengthscales.size(); ++d) {
    const double diff = (x[d] - x2[d]) / lengthscales[d];
    r += diff * diff;
  }
  return r;
}

}  // namespace

KernelSpec::KernelSpec(Vector lengthscales_in, double prior_std_in)
    : lengthscales(std::move(lengthscales_in)), prior_std(prior_std_in) {
  if (lengthscales.size() == 0) {
    throw ContractViolation("kernel needs at least one lengthscale");
  }
  for (Eigen::Index d = 0; d < lengthscales.size(); ++d) {
    if (!(lengthscales[d] > 0.0) || !std::isfinite(lengthscales[d])) {
      throw ContractViolation("lengthscales must be strictly positive and finite");
    }
  }
  if (!(prior_std > 0.0) || !std::isfinite(prior_std)) {
    throw ContractViolation("prior_std must be strictly positive and finite");
  }
}

double kernel_eval(const KernelSpec& spec, const VectorRef& x, const VectorRef& x2) {
  if (x.size() != spec.dim() || x2.size() != spec.dim()) {
    throw ContractViolation("kernel_eval: input dimension does not match lengthscale count");
  }
  return spec.variance() * std::exp(-0.5 * scaled_sq_distance(spec.lengthscales, x, x2));
}

double multi_task_kernel_eval(const KernelSpec& spec_opt, const KernelSpec& spec_tau,
                              const InputPoint& x, const InputPoint& x2) {
  return kernel_eval(spec_tau, x.task, x2.task) * kernel_eval(spec_opt, x.opt, x2.opt);
}

KernelSpec joint_kernel(const KernelSpec& spec_opt, const KernelSpec& spec_tau) {
  return KernelSpec(concat(spec_opt.lengthscales, spec_tau.lengthscales),
                    spec_opt.prior_std * spec_tau.prior_std);
}

ConstraintLimit::ConstraintLimit(std::vector<Vector> tasks, std::vector<double> values)
    : tasks_(std::move(tasks)), values_(std::move(values)) {
  if (tasks_.empty() || tasks_.size() != values_.size()) {
    throw ContractViolation("constraint table needs matching, non-empty task and value lists");
  }
  for (const auto& t : tasks_) {
    if (t.size() != tasks_.front().size()) {
      throw ContractViolation("constraint table tasks must share one dimension");
    }
  }
  constant_ = values_.front();
}

double ConstraintLimit::at(const VectorRef& task) const {
  if (tasks_.empty()) {
    return constant_;
  }
  if (task.size() != tasks_.front().size()) {
    throw ContractViolation("constraint table queried with wrong task dimension");
  }
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    const double dist = (tasks_[i] - task).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return values_[best];
}

PriorMean PriorMean::task_dependent(ConstraintLimit table, Eigen::Index task_offset) {
  PriorMean mean(table.constant());
  mean.table_ = std::make_shared<const ConstraintLimit>(std::move(table));
  mean.task_offset_ = task_offset;
  return mean;
}

double PriorMean::operator()(const VectorRef& x) const {
  if (!table_) {
    return constant_;
  }
  return table_->at(x.tail(x.size() - task_offset_));
}

double GpModel::Prediction::stddev() const { return std::sqrt(std::max(variance, 0.0)); }

GpModel::GpModel(KernelSpec kernel, double noise_std, PriorMean prior_mean, double beta)
    : kernel_(std::move(kernel)),
      noise_std_(noise_std),
      prior_mean_(std::move(prior_mean)),
      beta_(beta) {
  if (!(noise_std_ > 0.0) || !std::isfinite(noise_std_)) {
    throw ContractViolation("noise_std must be strictly positive and finite");
  }
  set_beta(beta);
}

void GpModel::set_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ContractViolation("beta must be non-negative and finite");
  }
  beta_ = beta;
}

Vector GpModel::kernel_column(const VectorRef& x) const {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Vector k(n);
  const double var = kernel_.variance();
  for (Eigen::Index i = 0; i < n; ++i) {
    k[i] = var * std::exp(-0.5 * scaled_sq_distance(kernel_.lengthscales, x, inputs_[i]));
  }
  work::charge(static_cast<std::uint64_t>(n * (kernel_.dim() + 1)));
  return k;
}

GpModel::Prediction GpModel::posterior(const VectorRef& x) const {
  if (x.size() != kernel_.dim()) {
    throw ContractViolation("posterior: input dimension does not match kernel");
  }
  const double prior = prior_mean_(x);
  if (inputs_.empty()) {
    return {prior, kernel_.variance()};
  }
  const Vector k = kernel_column(x);
  const Vector v = chol_.triangularView<Eigen::Lower>().solve(k);
  const auto n = static_cast<std::uint64_t>(k.size());
  work::charge(n * (n + 1) / 2 + n);
  const double variance = std::max(kernel_.variance() - v.squaredNorm(), 0.0);
  return {prior + k.dot(weights_), variance};
}

double GpModel::lcb(const VectorRef& x) const {
  const auto p = posterior(x);
  return p.mean - beta_ * p.stddev();
}

double GpModel::ucb(const VectorRef& x) const {
  const auto p = posterior(x);
  return p.mean + beta_ * p.stddev();
}

std::pair<double, double> GpModel::bounds(const VectorRef& x) const {
  const auto p = posterior(x);
  const double width = beta_ * p.stddev();
  return {p.mean - width, p.mean + width};
}

Vector GpModel::posterior_mean_gradient(const VectorRef& x) const {
  if (x.size() != kernel_.dim()) {
    throw ContractViolation("posterior_mean_gradient: input dimension does not match kernel");
  }
  Vector grad = Vector::Zero(x.size());
  if (inputs_.empty()) {
    return grad;
  }
  const Vector k = kernel_column(x);
  const Vector inv_sq = kernel_.lengthscales.array().square().inverse();
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    grad.array() += weights_[idx] * k[idx] * (inputs_[i] - x).array() * inv_sq.array();
  }
  return grad;
}

void GpModel::add_observation(const VectorRef& x, double y) {
  if (!std::isfinite(y)) {
    throw ContractViolation("add_observation: observation must be finite");
  }
  if (x.size() != kernel_.dim() || !x.allFinite()) {
    throw ContractViolation("add_observation: input must be finite and match the kernel dimension");
  }
  const Vector k = kernel_column(x);
  inputs_.emplace_back(x);
  targets_.push_back(y);

  const Eigen::Index n = k.size();
  if (n == 0) {
    refactorize();
    return;
  }
  const Vector l = chol_.triangularView<Eigen::Lower>().solve(k);
  const double diag = kernel_.variance() + noise_std_ * noise_std_ + jitter_;
  const double d2 = diag - l.squaredNorm();
  work::charge(static_cast<std::uint64_t>(n * n));
  if (!(d2 > std::numeric_limits<double>::epsilon() * diag)) {
    refactorize();
    return;
  }
  chol_.conservativeResize(n + 1, n + 1);
  chol_.col(n).head(n).setZero();
  chol_.row(n).head(n) = l.transpose();
  chol_(n, n) = std::sqrt(d2);
  update_weights();
}

void GpModel::remove_oldest() {
  if (inputs_.empty()) {
    return;
  }
  inputs_.erase(inputs_.begin());
  targets_.erase(targets_.begin());
  refactorize();
}

void GpModel::refactorize() {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  if (n == 0) {
    chol_.resize(0, 0);
    weights_.resize(0);
    jitter_ = 0.0;
    return;
  }
  Matrix gram(n, n);
  const double var = kernel_.variance();
  for (Eigen::Index j = 0; j < n; ++j) {
    gram(j, j) = var;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double kij =
          var * std::exp(-0.5 * scaled_sq_distance(kernel_.lengthscales, inputs_[i], inputs_[j]));
      gram(i, j) = kij;
      gram(j, i) = kij;
    }
  }
  work::charge(static_cast<std::uint64_t>(n * n * (kernel_.dim() + 1) / 2 + n * n * n / 3));
  const double noise_var = noise_std_ * noise_std_;
  for (const double jitter : kJitterLadder) {
    Matrix shifted = gram;
    shifted.diagonal().array() += noise_var + jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      jitter_ = jitter;
      update_weights();
      return;
    }
  }
  throw FactorizationError("kernel matrix is not positive definite after jitter escalation to 1e-6");
}

void GpModel::update_weights() {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Vector residual(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    residual[i] = targets_[static_cast<std::size_t>(i)] - prior_mean_(inputs_[static_cast<std::size_t>(i)]);
  }
  weights_ = chol_.triangularView<Eigen::Lower>().solve(residual);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(weights_);
  work::charge(static_cast<std::uint64_t>(n * n));
}

HyperparameterReport validate_hyperparameters(const GpModel& model_f, const GpModel& model_q,
                                              const ConstraintLimit& c, double xi,
                                              std::span<const Vector> probe_inputs) {
  HyperparameterReport report;
  const double q_width = model_q.beta() * model_q.kernel().prior_std;
  const double f_width = model_f.beta() * model_f.kernel().prior_std;
  report.cost_lower_bound = xi;

  const bool constant = model_q.prior_mean().is_constant() && model_f.prior_mean().is_constant() &&
                        c.is_constant();
  if (constant || probe_inputs.empty()) {
    if (!constant) {
      throw ContractViolation("validate_hyperparameters: task-dependent priors need probe inputs");
    }
    report.constraint_prior_ucb = model_q.prior_mean().constant() + q_width;
    report.constraint_limit = c.constant();
    report.cost_prior_lcb = model_f.prior_mean().constant() - f_width;
    report.safety_ok = report.constraint_prior_ucb > report.constraint_limit;
    report.expansion_ok = report.cost_prior_lcb <= xi;
    return report;
  }

  report.safety_ok = true;
  report.expansion_ok = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_lcb = -std::numeric_limits<double>::infinity();
  for (const auto& x : probe_inputs) {
    const double ucb = model_q.prior_mean()(x) + q_width;
    const double limit =
        c.is_constant() ? c.constant() : c.at(x.tail(c.tasks().front().size()));
    if (ucb - limit < worst_margin) {
      worst_margin = ucb - limit;
      report.constraint_prior_ucb = ucb;
      report.constraint_limit = limit;
    }
    const double lcb = model_f.prior_mean()(x) - f_width;
    worst_lcb = std::max(worst_lcb, lcb);
    report.safety_ok = report.safety_ok && ucb > limit;
    report.expansion_ok = report.expansion_ok && lcb <= xi;
  }
  report.cost_prior_lcb = worst_lcb;
  return report;
}

}  // namespace goose
