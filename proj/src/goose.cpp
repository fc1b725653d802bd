#include "goose/goose.hpp"

#include "goose/work.hpp"

#include <cmath>

namespace goose {

std::uint64_t iteration_seed(std::uint64_t base, std::uint64_t iteration) noexcept {
  // splitmix64 finalizer over the pair
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (iteration + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GooseOptimizer::GooseOptimizer(GooseConfig config, GpModel gp_f, GpModel gp_q, SafeSeed seed)
    : config_(std::move(config)),
      gp_f_(std::move(gp_f)),
      gp_q_(std::move(gp_q)),
      seed_(std::move(seed)) {
  const auto d_opt = config_.opt_lower.size();
  if (d_opt == 0 || config_.opt_upper.size() != d_opt) {
    throw ConfigError("goose.bounds", "lower and upper bounds must share one non-zero dimension");
  }
  if ((config_.opt_upper.array() <= config_.opt_lower.array()).any()) {
    throw ConfigError("goose.bounds", "bounds must be non-degenerate");
  }
  if (gp_f_.kernel().dim() != gp_q_.kernel().dim() || gp_f_.kernel().dim() < d_opt) {
    throw ConfigError("gp", "cost and constraint kernels must cover x_opt plus the same task block");
  }
  if (static_cast<Eigen::Index>(seed_.points().front().size()) != d_opt) {
    throw ConfigError("safe_seed", "seed dimension does not match x_opt");
  }
  seed_.check_bounds(config_.opt_lower, config_.opt_upper);

  const auto d_task = gp_f_.kernel().dim() - d_opt;
  if (config_.task_change_threshold.size() == 0) {
    config_.task_change_threshold = 0.5 * gp_f_.kernel().lengthscales.tail(d_task);
  } else if (config_.task_change_threshold.size() != d_task) {
    throw ConfigError("goose.task_change_threshold", "one threshold per task dimension required");
  }
  if (config_.n_particles < 1) {
    throw ConfigError("pso.n_particles", "must be at least 1");
  }

  std::vector<Vector> probes;
  auto tasks = config_.validation_tasks;
  if (tasks.empty() && !config_.c.is_constant()) {
    tasks = config_.c.tasks();
  }
  for (const auto& t : tasks) {
    probes.push_back(concat(seed_.points().front(), t));
  }
  const bool constant = gp_f_.prior_mean().is_constant() && gp_q_.prior_mean().is_constant() &&
                        config_.c.is_constant();
  if (!constant && probes.empty()) {
    throw ConfigError("goose.validation_tasks",
                      "task-dependent priors need validation tasks for the prior check");
  }
  validation_ = validate_hyperparameters(gp_f_, gp_q_, config_.c, config_.xi, probes);
  if (!validation_.ok() && !config_.override_validation) {
    std::string why;
    if (!validation_.safety_ok) {
      why += "constraint prior ucb " + std::to_string(validation_.constraint_prior_ucb) +
             " does not exceed c = " + std::to_string(validation_.constraint_limit) + ". ";
    }
    if (!validation_.expansion_ok) {
      why += "cost prior lcb " + std::to_string(validation_.cost_prior_lcb) +
             " exceeds the cost lower bound xi = " + std::to_string(validation_.cost_lower_bound) +
             ".";
    }
    throw ConfigError("gp", "prior tuning check failed: " + why);
  }

  pso_ = PsoConfig::from_lengthscales(config_.opt_lower, config_.opt_upper,
                                      gp_f_.kernel().lengthscales.head(d_opt),
                                      config_.initial_speed_fraction);
  pso_.n_particles = config_.n_particles;
  pso_.max_iterations = config_.pso_iterations;
  pso_.inertia = config_.inertia;
  pso_.cognitive = config_.cognitive;
  pso_.social = config_.social;
  pso_.validate();
}

std::size_t GooseOptimizer::task_dim() const noexcept {
  return static_cast<std::size_t>(gp_f_.kernel().dim()) - opt_dim();
}

double GooseOptimizer::epsilon() const noexcept {
  return config_.epsilon > 0.0 ? config_.epsilon : 6.0 * gp_q_.noise_std();
}

void GooseOptimizer::append_history(const VectorRef& x_opt, const VectorRef& task, double y_f,
                                    double y_q) {
  history_.append(EvaluationRecord{x_opt, task, y_f, y_q, next_iteration_++, phase_});
}

void GooseOptimizer::enter(Phase phase) {
  if (phase != phase_) {
    phase_ = phase;
    ++version_;
  }
  termination_counter_ = 0;
}

void GooseOptimizer::add_initial_sample(const VectorRef& x_opt, const VectorRef& task, double y_f,
                                        double y_q) {
  if (!std::isfinite(y_f) || !std::isfinite(y_q)) {
    throw ContractViolation("initial sample measurements must be finite");
  }
  if (static_cast<std::size_t>(x_opt.size()) != opt_dim() ||
      static_cast<std::size_t>(task.size()) != task_dim()) {
    throw ContractViolation("initial sample has the wrong dimension");
  }
  const Vector x = concat(x_opt, task);
  if (config_.data_limit > 0 && gp_f_.size() >= config_.data_limit) {
    gp_f_.remove_oldest();
    gp_q_.remove_oldest();
  }
  gp_f_.add_observation(x, y_f);
  gp_q_.add_observation(x, y_q);
  append_history(x_opt, task, y_f, y_q);
  ++version_;
}

bool GooseOptimizer::observe_task(const VectorRef& task) {
  if (static_cast<std::size_t>(task.size()) != task_dim()) {
    throw ContractViolation("observe_task: wrong task dimension");
  }
  bool changed = false;
  if (last_task_) {
    changed = ((task - *last_task_).array().abs() > config_.task_change_threshold.array()).any();
  }
  last_task_ = task;
  if (!changed) {
    return false;
  }
  ++restarts_;
  enter(Phase::Active);
  return true;
}

Proposal GooseOptimizer::search(const VectorRef& task, std::uint64_t rng_seed, Acq acq,
                                bool optimistic, Phase phase) const {
  if (static_cast<std::size_t>(task.size()) != task_dim()) {
    throw ContractViolation("proposal requested with wrong task dimension");
  }
  work::Meter meter;
  const double c = limit(task);
  const Vector task_v = task;
  const SafeSetResult safe = safe_set_from_history(history_, gp_q_, task_v, c, seed_);

  std::vector<Vector> init;
  init.reserve(safe.points.size());
  for (const auto& p : safe.points) {
    init.push_back(p.opt);
  }

  auto joined = [&task_v](const Vector& x_opt) { return concat(x_opt, task_v); };
  std::optional<OptimisticSet> optimistic_set;
  if (optimistic) {
    optimistic_set.emplace(gp_q_, expander_set(gp_q_, safe.points, epsilon()), epsilon(), c,
                           config_.metric);
  }
  const Feasibility feasible = [&](const Vector& x_opt) {
    if (gp_q_.ucb(joined(x_opt)) <= c) {
      return true;
    }
    return optimistic_set && optimistic_set->contains(InputPoint{x_opt, task_v});
  };
  const Acquisition acquisition = [&](const Vector& x_opt) {
    const auto [lo, hi] = gp_f_.bounds(joined(x_opt));
    return acq == Acq::Lcb ? lo : hi;
  };

  const PsoResult result = pso_optimize(acquisition, feasible, init, pso_, rng_seed);

  Proposal out;
  out.x_opt = result.best;
  out.acquisition = result.value;
  out.pso_feasible = result.feasible;
  out.used_seed = safe.used_seed;
  out.phase = phase;
  out.safe_set_size = safe.points.size();
  const Vector x = joined(out.x_opt);
  const auto post = gp_f_.posterior(x);
  out.cost_mean = post.mean;
  out.cost_lcb = post.mean - gp_f_.beta() * post.stddev();
  out.cost_ucb = post.mean + gp_f_.beta() * post.stddev();
  out.constraint_ucb = gp_q_.ucb(x);
  for (const auto& s : seed_.points()) {
    if (s == out.x_opt) {
      out.is_seed_point = true;
    }
  }
  out.work_units = meter.units();
  return out;
}

Proposal GooseOptimizer::active_step(const VectorRef& task, std::uint64_t rng_seed) const {
  return search(task, rng_seed, Acq::Lcb, false, Phase::Active);
}

Proposal GooseOptimizer::baseline_active_step(const VectorRef& task, std::uint64_t rng_seed) const {
  return search(task, rng_seed, Acq::Lcb, true, Phase::Active);
}

Proposal GooseOptimizer::passive_step(const VectorRef& task, std::uint64_t rng_seed) const {
  return search(task, rng_seed, Acq::Ucb, false, Phase::Passive);
}

Proposal GooseOptimizer::final_optimum(const VectorRef& task, std::uint64_t rng_seed) const {
  return search(task, rng_seed, Acq::Ucb, false, Phase::Passive);
}

Proposal GooseOptimizer::propose(const VectorRef& task, std::uint64_t rng_seed) const {
  if (phase_ == Phase::Passive) {
    return passive_step(task, rng_seed);
  }
  return config_.variant == Variant::Baseline ? baseline_active_step(task, rng_seed)
                                              : active_step(task, rng_seed);
}

ReportOutcome GooseOptimizer::report_measurement(const VectorRef& x_opt, const VectorRef& task,
                                                 double y_f, double y_q) {
  if (!std::isfinite(y_f) || !std::isfinite(y_q)) {
    throw ContractViolation("report_measurement: measurements must be finite");
  }
  if (static_cast<std::size_t>(x_opt.size()) != opt_dim() ||
      static_cast<std::size_t>(task.size()) != task_dim()) {
    throw ContractViolation("report_measurement: wrong input dimension");
  }
  ReportOutcome outcome;
  outcome.violation = y_q > limit(task);
  const Phase before = phase_;
  append_history(x_opt, task, y_f, y_q);
  ++version_;

  if (phase_ == Phase::Active) {
    const Vector x = concat(x_opt, task);
    if (config_.data_limit > 0 && gp_f_.size() >= config_.data_limit) {
      gp_f_.remove_oldest();
      gp_q_.remove_oldest();
      outcome.evicted = true;
    }
    gp_f_.add_observation(x, y_f);
    gp_q_.add_observation(x, y_q);
    outcome.added_to_gp = true;
    ++termination_counter_;
    if (outcome.violation) {
      ++restarts_;
      enter(Phase::Active);
    } else if (termination_counter_ >= config_.termination_count) {
      enter(Phase::Passive);
    }
  } else if (outcome.violation) {
    ++restarts_;
    enter(Phase::Active);
  }
  outcome.phase_changed = phase_ != before;
  return outcome;
}

}  // namespace goose
