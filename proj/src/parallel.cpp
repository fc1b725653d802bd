#include "goose/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <map>

namespace goose {

Vector SchedulePredictor::predict(std::size_t iteration, std::size_t, const Vector& current) const {
  if (schedule_.empty()) {
    return current;
  }
  return schedule_[std::min(iteration, schedule_.size() - 1)];
}

Vector ConstantHoldPredictor::predict(std::size_t, std::size_t, const Vector& current) const {
  return current;
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Serial:
      return "serial";
    case Scheme::Para:
      return "para";
    case Scheme::Lookup:
      return "lookup";
  }
  return "serial";
}

void ParallelConfig::validate(std::size_t task_dim) const {
  if (workers < 1) {
    throw ConfigError("parallel.workers", "must be at least 1");
  }
  if (scheme == Scheme::Para && horizon < 1) {
    throw ConfigError("parallel.horizon", "must be at least 1");
  }
  if (!(cycle_time > 0.0) || seconds_per_unit < 0.0 || !(wall_time_scale >= 0.0)) {
    throw ConfigError("parallel.cycle_time", "cycle time must be positive, time scales >= 0");
  }
  if (scheme == Scheme::Lookup) {
    if (task_grid.size() != task_dim) {
      throw ConfigError("parallel.task_grid", "one grid per task dimension required");
    }
    if (static_cast<std::size_t>(delta_tau.size()) != task_dim) {
      throw ConfigError("parallel.delta_tau", "one spacing per task dimension required");
    }
    if (neighborhood_k < 0.0) {
      throw ConfigError("parallel.k", "must be non-negative");
    }
  }
}

OptimaGrid::OptimaGrid(const Grid& task_grid, const Vector& seed) {
  for (auto& t : grid_permutations(task_grid)) {
    cells_.push_back(GridCell{std::move(t), seed, std::numeric_limits<double>::quiet_NaN(), 0, true});
  }
  if (cells_.empty()) {
    throw ContractViolation("optima grid needs at least one cell");
  }
}

std::size_t OptimaGrid::nearest(const VectorRef& task) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const double d = (cells_[i].task - task).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<std::size_t> OptimaGrid::neighborhood(const VectorRef& task, double k,
                                                  const VectorRef& delta) const {
  // A hair of tolerance so that exact grid spacings stay outside the open box.
  constexpr double kTol = 1e-9;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const auto diff = (cells_[i].task - task).array().abs();
    if ((diff < k * delta.array() - kTol).all()) {
      out.push_back(i);
    }
  }
  return out;
}

void OptimaGrid::store(std::size_t i, const Vector& x_opt, double value, std::uint64_t stamp) {
  GridCell& c = cells_.at(i);
  if (!c.from_seed && stamp < c.stamp) {
    return;
  }
  c.x_opt = x_opt;
  c.value = value;
  c.stamp = stamp;
  c.from_seed = false;
}

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

StepRecord make_record(std::size_t k, double t, const Vector& task, const Vector& x,
                       const Measurement& m, const GooseOptimizer& opt) {
  StepRecord r;
  r.iteration = k;
  r.time = t;
  r.task = task;
  r.x_opt = x;
  r.y_f = m.y_f;
  r.y_q = m.y_q;
  r.unstable = m.unstable;
  r.limit = opt.limit(task);
  r.violation = m.y_q > r.limit;
  return r;
}

constexpr std::uint64_t kOptimumSalt = 0x0b7e151628aed2a6ULL;

void fill_posterior(StepRecord& r, const GooseOptimizer& opt, const ParallelConfig& config) {
  if (config.track_optimum) {
    const Proposal best =
        opt.final_optimum(r.task, iteration_seed(config.base_seed ^ kOptimumSalt, r.iteration));
    r.optimum_mean = best.cost_mean;
    r.optimum_lcb = best.cost_lcb;
    r.optimum_ucb = best.cost_ucb;
  }
  const auto post = opt.gp_f().posterior(concat(r.x_opt, r.task));
  const double w = opt.gp_f().beta() * post.stddev();
  r.predicted_mean = post.mean;
  r.predicted_lcb = post.mean - w;
  r.predicted_ucb = post.mean + w;
  r.gp_size = opt.gp_f().size();
}

}  // namespace

ParallelResult run_serial(GooseOptimizer& opt, const std::vector<Vector>& schedule,
                          const Machine& machine, const ParallelConfig& config) {
  config.validate(opt.task_dim());
  ParallelResult out;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const Vector& task = schedule[k];
    opt.observe_task(task);
    const auto wall_start = std::chrono::steady_clock::now();
    const Proposal p = opt.propose(task, iteration_seed(config.base_seed, k));
    const double wall = elapsed_seconds(wall_start);
    const Measurement m = machine(k, p.x_opt, task);
    StepRecord r = make_record(k, static_cast<double>(k) * config.cycle_time, task, p.x_opt, m, opt);
    r.phase = opt.phase();
    r.seed_fallback = p.used_seed && p.is_seed_point;
    r.work_units = p.work_units;
    r.compute_time = config.clock == ClockMode::Virtual
                         ? static_cast<double>(p.work_units) * config.seconds_per_unit
                         : wall * config.wall_time_scale;
    const ReportOutcome o = opt.report_measurement(p.x_opt, task, m.y_f, m.y_q);
    r.accepted = true;
    r.added_to_gp = o.added_to_gp;
    out.points_added += o.added_to_gp ? 1 : 0;
    out.seed_fallbacks += r.seed_fallback ? 1 : 0;
    r.points_added = out.points_added;
    fill_posterior(r, opt, config);
    out.steps.push_back(std::move(r));
    if (o.phase_changed && opt.phase() == Phase::Passive && !out.termination_time) {
      out.termination_time = static_cast<double>(k + 1) * config.cycle_time;
      if (config.stop_at_passive) {
        break;
      }
    }
  }
  return out;
}

namespace {

struct Job {
  std::size_t id = 0;
  std::size_t target = 0;  // iteration (para) or cell (lookup)
  Vector task;
  std::shared_ptr<const GooseOptimizer> snapshot;
  std::uint64_t version = 0;
  std::uint64_t seed = 0;
};

struct Done {
  Job job;
  Proposal proposal;
  double finish = 0.0;
};

class WorkerPool {
 public:
  WorkerPool(const ParallelConfig& config, bool lookup) : config_(config), lookup_(lookup),
        running_(config.workers) {}

  void enqueue(Job job) {
    job.id = next_id_++;
    queue_.push_back(std::move(job));
  }
  void clear_queue() { queue_.clear(); }

  bool idle() const {
    return queue_.empty() &&
           std::none_of(running_.begin(), running_.end(), [](const auto& r) { return r.has_value(); });
  }

  /// Runs the event loop up to time t; completed jobs are handed to `deliver`.
  template <typename Deliver>
  void advance(double t, Deliver&& deliver) {
    dispatch();
    while (true) {
      std::size_t next = running_.size();
      for (std::size_t w = 0; w < running_.size(); ++w) {
        if (!running_[w] || running_[w]->finish > t) {
          continue;
        }
        if (next == running_.size() || running_[w]->finish < running_[next]->finish ||
            (running_[w]->finish == running_[next]->finish &&
             running_[w]->job.id < running_[next]->job.id)) {
          next = w;
        }
      }
      if (next == running_.size()) {
        break;
      }
      Done done = std::move(*running_[next]);
      running_[next].reset();
      now_ = done.finish;
      ++jobs_run_;
      deliver(done);
      dispatch();
    }
    now_ = std::max(now_, t);
  }

  void set_now(double t) { now_ = std::max(now_, t); }
  std::size_t jobs_run() const noexcept { return jobs_run_; }

 private:
  // Starts queued jobs on free workers at now_; jobs started together are
  // computed concurrently.
  void dispatch() {
    std::vector<std::pair<std::size_t, Job>> starting;
    for (std::size_t w = 0; w < running_.size() && !queue_.empty(); ++w) {
      if (!running_[w]) {
        starting.emplace_back(w, std::move(queue_.front()));
        queue_.pop_front();
        running_[w].emplace();  // reserve the worker
      }
    }
    if (starting.empty()) {
      return;
    }
    const bool lookup = lookup_;
    std::vector<std::future<std::pair<Proposal, double>>> futures;
    futures.reserve(starting.size());
    for (auto& [w, job] : starting) {
      futures.push_back(std::async(std::launch::async, [&job, lookup]() {
        const auto t0 = std::chrono::steady_clock::now();
        Proposal p;
        if (lookup) {
          p = job.snapshot->propose(job.task, job.seed);
        } else {
          GooseOptimizer copy = *job.snapshot;
          copy.observe_task(job.task);
          p = copy.propose(job.task, job.seed);
        }
        return std::make_pair(std::move(p), elapsed_seconds(t0));
      }));
    }
    for (std::size_t i = 0; i < starting.size(); ++i) {
      auto [p, wall] = futures[i].get();
      const double duration = config_.clock == ClockMode::Virtual
                                  ? static_cast<double>(p.work_units) * config_.seconds_per_unit
                                  : wall * config_.wall_time_scale;
      auto& [w, job] = starting[i];
      running_[w] = Done{std::move(job), std::move(p), now_ + duration};
    }
  }

  const ParallelConfig& config_;
  bool lookup_;
  std::deque<Job> queue_;
  std::vector<std::optional<Done>> running_;
  double now_ = 0.0;
  std::size_t next_id_ = 0;
  std::size_t jobs_run_ = 0;
};

struct ParaResult {
  Proposal proposal;
  Vector task;
  std::uint64_t version = 0;
  double finish = 0.0;
};

}  // namespace

ParallelResult run_parallel(GooseOptimizer& opt, const std::vector<Vector>& schedule,
                            const Machine& machine, const ParallelConfig& config,
                            const TaskPredictor& predictor) {
  if (config.scheme == Scheme::Serial) {
    return run_serial(opt, schedule, machine, config);
  }
  config.validate(opt.task_dim());
  const bool lookup = config.scheme == Scheme::Lookup;
  const Vector& seed = opt.seed().points().front();
  ParallelResult out;
  if (schedule.empty()) {
    return out;
  }

  WorkerPool pool(config, lookup);
  std::map<std::size_t, ParaResult> para_results;
  std::map<std::size_t, std::uint64_t> para_enqueued;  // iteration -> version
  std::optional<OptimaGrid> grid;
  if (lookup) {
    grid.emplace(config.task_grid, seed);
  }

  auto snapshot = [&opt]() { return std::make_shared<const GooseOptimizer>(opt); };

  auto deliver = [&](const Done& d) {
    if (lookup) {
      grid->store(d.job.target, d.proposal.x_opt, d.proposal.acquisition, d.job.version);
      return;
    }
    auto it = para_results.find(d.job.target);
    if (it == para_results.end() || d.job.version >= it->second.version) {
      para_results[d.job.target] = ParaResult{d.proposal, d.job.task, d.job.version, d.finish};
    }
  };

  auto refresh_cells = [&](const std::vector<std::size_t>& cells) {
    const auto snap = snapshot();
    for (std::size_t c : cells) {
      Job j;
      j.target = c;
      j.task = grid->cell(c).task;
      j.snapshot = snap;
      j.version = opt.version();
      j.seed = iteration_seed(config.base_seed ^ 0x5bd1e995ULL, (opt.version() << 20) + c);
      pool.enqueue(std::move(j));
    }
  };
  auto full_refresh = [&]() {
    pool.clear_queue();
    std::vector<std::size_t> all(grid->size());
    for (std::size_t i = 0; i < all.size(); ++i) {
      all[i] = i;
    }
    refresh_cells(all);
  };
  // Enqueue horizon iterations lacking a job on the current snapshot.
  auto para_refill = [&](std::size_t first, std::size_t now, const Vector& current) {
    std::shared_ptr<const GooseOptimizer> snap;
    for (std::size_t j = first; j < first + config.horizon && j < schedule.size(); ++j) {
      auto it = para_enqueued.find(j);
      if (it != para_enqueued.end() && it->second == opt.version()) {
        continue;
      }
      if (!snap) {
        snap = snapshot();
      }
      Job job;
      job.target = j;
      job.task = predictor.predict(j, now, current);
      job.snapshot = snap;
      job.version = opt.version();
      job.seed = iteration_seed(config.base_seed, j);
      para_enqueued[j] = opt.version();
      pool.enqueue(std::move(job));
    }
  };

  if (lookup) {
    full_refresh();
  } else {
    para_refill(0, 0, schedule.front());
  }

  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const double t_k = static_cast<double>(k) * config.cycle_time;
    pool.advance(t_k, deliver);
    if (lookup && !out.initial_refresh_done && pool.idle()) {
      out.initial_refresh_done = t_k;
    }
    const Vector& task = schedule[k];
    const Phase before_observe = opt.phase();
    opt.observe_task(task);
    if (lookup && opt.phase() != before_observe) {
      full_refresh();
      pool.advance(t_k, deliver);
    }

    Vector x = seed;
    bool fallback = true;
    bool mispredicted = false;
    std::uint64_t work = 0;
    if (lookup) {
      const GridCell& cell = grid->cell(grid->nearest(task));
      x = cell.x_opt;
      fallback = cell.from_seed;
    } else if (auto it = para_results.find(k); it != para_results.end()) {
      x = it->second.proposal.x_opt;
      fallback = it->second.proposal.used_seed && it->second.proposal.is_seed_point;
      mispredicted = it->second.task != task;
      work = it->second.proposal.work_units;
    }
    out.mispredictions += mispredicted ? 1 : 0;
    out.seed_fallbacks += fallback ? 1 : 0;

    const Measurement m = machine(k, x, task);
    const double t_m = t_k + config.cycle_time;
    pool.advance(t_m, deliver);
    if (lookup && !out.initial_refresh_done && pool.idle()) {
      out.initial_refresh_done = t_m;
    }

    StepRecord r = make_record(k, t_k, task, x, m, opt);
    r.phase = opt.phase();
    r.seed_fallback = fallback;
    r.mispredicted = mispredicted;
    r.work_units = work;
    r.compute_time = static_cast<double>(work) * config.seconds_per_unit;

    const Phase before = opt.phase();
    if (before == Phase::Passive || pool.idle()) {
      const ReportOutcome o = opt.report_measurement(x, task, m.y_f, m.y_q);
      r.accepted = true;
      r.added_to_gp = o.added_to_gp;
      out.points_added += o.added_to_gp ? 1 : 0;
      if (lookup) {
        if (o.phase_changed) {
          full_refresh();
        } else if (o.added_to_gp) {
          refresh_cells(grid->neighborhood(task, config.neighborhood_k, config.delta_tau));
        }
      }
      if (o.phase_changed && opt.phase() == Phase::Passive && !out.termination_time) {
        out.termination_time = t_m;
      }
    } else {
      ++out.ignored;
    }
    if (!lookup && pool.idle() && k + 1 < schedule.size()) {
      para_refill(k + 1, k, task);
    }
    pool.advance(t_m, deliver);

    r.points_added = out.points_added;
    r.ignored_total = out.ignored;
    fill_posterior(r, opt, config);
    out.steps.push_back(std::move(r));
    if (out.termination_time && config.stop_at_passive) {
      break;
    }
  }
  out.jobs_run = pool.jobs_run();
  return out;
}

}  // namespace goose
