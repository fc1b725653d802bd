#include "goose/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace goose {

namespace {

constexpr std::uint64_t kInitialStream = 1'000'000;
constexpr std::uint64_t kGridStream = 2'000'000;
constexpr std::uint64_t kFinalStream = 3'000'000;
constexpr std::uint64_t kStepSalt = 0x243f6a8885a308d3ULL;
constexpr std::uint64_t kPsoSalt = 0x13198a2e03707344ULL;

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void check_positive(const Vector& v, const std::string& path) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw ConfigError(index_path(path, static_cast<std::size_t>(i)), "must be positive");
    }
  }
}

void check_gp(const GpSettings& g, const std::string& path, Eigen::Index dim) {
  if (g.lengthscales.size() != dim) {
    throw ConfigError(path + ".lengthscales",
                      "expected " + std::to_string(dim) + " entries (x_opt plus stepsize and payload)");
  }
  check_positive(g.lengthscales, path + ".lengthscales");
  if (!(g.sigma_n > 0.0)) {
    throw ConfigError(path + ".sigma_n", "must be positive");
  }
  if (!(g.sigma_v > 0.0)) {
    throw ConfigError(path + ".sigma_v", "must be positive");
  }
  if (!(g.beta > 0.0)) {
    throw ConfigError(path + ".beta", "must be positive");
  }
}

StepRecord plain_record(std::size_t k, double t, const Vector& task, const Vector& x,
                        const Measurement& m, double c) {
  StepRecord r;
  r.iteration = k;
  r.time = t;
  r.task = task;
  r.x_opt = x;
  r.y_f = m.y_f;
  r.y_q = m.y_q;
  r.unstable = m.unstable;
  r.limit = c;
  r.violation = m.y_q > c;
  r.phase = Phase::Passive;
  r.accepted = true;
  return r;
}

Vector plant_task(const Vector& task) { return task.head(2); }

[[noreturn]] void rethrow_under(const std::string& prefix, const ConfigError& e) {
  std::string msg = e.what();
  if (!e.path().empty() && msg.size() > e.path().size() + 2) {
    msg = msg.substr(e.path().size() + 2);
  }
  throw ConfigError(prefix + "." + e.path(), msg);
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::Goose:
      return "goose";
    case Method::Lpv:
      return "lpv";
    case Method::Static:
      return "static";
  }
  return "goose";
}

void ExperimentConfig::validate() const {
  if (scenario.empty()) {
    throw ConfigError("scenario", "must be set");
  }
  if (iterations == 0) {
    throw ConfigError("iterations", "must be at least 1");
  }
  if (lower.size() != 4 || upper.size() != 4) {
    throw ConfigError("bounds", "lower and upper need [Kp, Vkp, Vki, Aff]");
  }
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (!(upper[i] > lower[i])) {
      throw ConfigError(index_path("bounds.upper", static_cast<std::size_t>(i)),
                        "must exceed the lower bound");
    }
  }
  check_gp(gp_f, "gp.f", 6);
  check_gp(gp_q, "gp.q", 6);
  if (!(drift_lengthscale > 0.0)) {
    throw ConfigError("gp.drift_lengthscale", "must be positive");
  }
  if (safe_seed.empty()) {
    throw ConfigError("safe_seed", "at least one seed point required");
  }
  for (std::size_t i = 0; i < safe_seed.size(); ++i) {
    const auto& s = safe_seed[i];
    if (s.size() != 4) {
      throw ConfigError(index_path("safe_seed", i), "needs [Kp, Vkp, Vki, Aff]");
    }
    if ((s.array() < lower.array()).any() || (s.array() > upper.array()).any()) {
      throw ConfigError(index_path("safe_seed", i), "outside the gain bounds");
    }
  }
  for (std::size_t i = 0; i < initial_samples.size(); ++i) {
    if (initial_samples[i].size() != 6) {
      throw ConfigError(index_path("initial_samples", i),
                        "needs [Kp, Vkp, Vki, Aff, log10 stepsize, payload]");
    }
  }
  if (task_change_threshold.size() != 0) {
    if (task_change_threshold.size() != 2) {
      throw ConfigError("goose.task_change_threshold", "needs [stepsize, payload]");
    }
    check_positive(task_change_threshold, "goose.task_change_threshold");
  }
  if (termination_count < 1) {
    throw ConfigError("goose.termination_count", "must be at least 1");
  }
  if (n_particles < 1 || pso_iterations < 1) {
    throw ConfigError("pso", "particles and iterations must be at least 1");
  }
  if (schedule.payloads.empty()) {
    throw ConfigError("schedule.payloads", "at least one payload required");
  }
  for (std::size_t i = 0; i < schedule.payloads.size(); ++i) {
    if (schedule.payloads[i] < 0.0) {
      throw ConfigError(index_path("schedule.payloads", i), "must be non-negative");
    }
  }
  if (schedule.stepsize == StepMode::List && schedule.log_steps.empty()) {
    throw ConfigError("schedule.log_steps", "list mode needs at least one stepsize");
  }
  if (schedule.stepsize == StepMode::Random && !(schedule.log_step_max >= schedule.log_step_min)) {
    throw ConfigError("schedule.log_step_max", "must not be below log_step_min");
  }
  try {
    plant.validate(metrics.fs);
  } catch (const ContractViolation& e) {
    throw ConfigError("plant", e.what());
  }
  try {
    metrics.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError("metrics", e.what());
  }
  if (arms.empty()) {
    throw ConfigError("arms", "at least one arm required");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const auto& arm = arms[i];
    const std::string path = index_path("arms", i);
    if (arm.name.empty() || !names.insert(arm.name).second) {
      throw ConfigError(path + ".name", "arm names must be non-empty and unique");
    }
    if (arm.name.find_first_of("/\\. ") != std::string::npos) {
      throw ConfigError(path + ".name", "use letters, digits, '-' or '_' only");
    }
    if (arm.method == Method::Lpv) {
      if (lpv.gain_grid.size() != 4 || lpv.task_grid.size() != 2) {
        throw ConfigError("lpv", "gain_grid needs 4 axes and task_grid 2 axes");
      }
    }
    if (arm.method != Method::Goose) {
      continue;
    }
    if (arm.scheme == Scheme::Lookup && arm.drift_in_task) {
      throw ConfigError(path + ".scheme", "lookup tables cover [stepsize, payload] tasks only");
    }
    try {
      ParallelConfig pc = parallel;
      pc.scheme = arm.scheme;
      pc.validate(arm.drift_in_task ? 3 : 2);
    } catch (const ConfigError& e) {
      rethrow_under(path, e);
    }
    try {
      std::vector<Vector> tasks;
      for (double p : schedule.payloads) {
        Vector t(arm.drift_in_task ? 3 : 2);
        t[0] = schedule.log_step;
        t[1] = p;
        if (arm.drift_in_task) {
          t[2] = schedule.drift_start;
        }
        tasks.push_back(t);
      }
      GooseConfig gc;
      gc.opt_lower = lower;
      gc.opt_upper = upper;
      gc.c = c;
      gc.xi = xi;
      gc.validation_tasks = tasks;
      gc.override_validation = override_validation;
      Vector ls_f = gp_f.lengthscales;
      Vector ls_q = gp_q.lengthscales;
      if (arm.drift_in_task) {
        ls_f.conservativeResize(7);
        ls_q.conservativeResize(7);
        ls_f[6] = drift_lengthscale;
        ls_q[6] = drift_lengthscale;
      }
      GpModel gf(KernelSpec(ls_f, gp_f.sigma_v), gp_f.sigma_n, gp_f.mu_0_is_limit ? c : gp_f.mu_0,
                 gp_f.beta);
      GpModel gq(KernelSpec(ls_q, gp_q.sigma_v), gp_q.sigma_n, gp_q.mu_0_is_limit ? c : gp_q.mu_0,
                 gp_q.beta);
      GooseOptimizer probe(gc, gf, gq, SafeSeed(safe_seed));
    } catch (const ConfigError& e) {
      rethrow_under(path, e);
    }
  }
}

ExperimentConfig ExperimentConfig::desk_scale() const {
  ExperimentConfig out = *this;
  if (desk_iterations) {
    out.iterations = *desk_iterations;
  }
  out.desk_iterations.reset();
  return out;
}

double drift_at(const ScheduleSpec& s, std::size_t k, std::size_t iterations) {
  if (iterations <= 1) {
    return s.drift_start;
  }
  const double frac = static_cast<double>(std::min(k, iterations - 1)) /
                      static_cast<double>(iterations - 1);
  return s.drift_start + (s.drift_end - s.drift_start) * frac;
}

std::vector<Vector> make_schedule(const ExperimentConfig& cfg, const ArmSpec& arm) {
  const auto& s = cfg.schedule;
  std::mt19937_64 rng(iteration_seed(cfg.seed, kStepSalt));
  std::uniform_real_distribution<double> uniform(s.log_step_min, s.log_step_max);
  std::vector<Vector> out;
  out.reserve(cfg.iterations);
  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    Vector t(arm.drift_in_task ? 3 : 2);
    switch (s.stepsize) {
      case StepMode::Constant:
        t[0] = s.log_step;
        break;
      case StepMode::Random:
        t[0] = uniform(rng);
        break;
      case StepMode::List:
        t[0] = s.log_steps[k % s.log_steps.size()];
        break;
    }
    const std::size_t slot = s.payload_period == 0 ? 0 : (k / s.payload_period) % s.payloads.size();
    t[1] = s.payloads[slot];
    if (arm.drift_in_task) {
      t[2] = drift_at(s, k, cfg.iterations);
    }
    out.push_back(std::move(t));
  }
  return out;
}

PlantMachine::PlantMachine(const ExperimentConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {}

Measurement PlantMachine::measure(std::size_t k, const Vector& x_opt, const Vector& task) const {
  return measure_with(k, x_opt, task, drift_at(cfg_.schedule, k, cfg_.iterations));
}

Measurement PlantMachine::measure_with(std::uint64_t stream, const Vector& x_opt,
                                       const Vector& task, double drift_um_s) const {
  TaskLayout layout;
  PlantParams plant = apply_task(cfg_.plant, task, layout);
  plant.drift = drift_um_s * layout.drift_scale;
  const MotionProfile profile =
      generate_trajectory(stepsize_from_task(task, layout), cfg_.limits, cfg_.metrics.fs, cfg_.hold);
  const MotionRun run = simulate_closed_loop(ControllerGains::from_opt(x_opt), profile, plant,
                                             iteration_seed(seed_, stream));
  const RunMetrics m = evaluate_run(run, cfg_.metrics, cfg_.unstable_cost, cfg_.unstable_constraint);
  return Measurement{m.cost, m.constraint, m.unstable};
}

GooseOptimizer make_optimizer(const ExperimentConfig& cfg, const ArmSpec& arm,
                              const PlantMachine& machine) {
  const bool drift = arm.drift_in_task;
  Vector ls_f = cfg.gp_f.lengthscales;
  Vector ls_q = cfg.gp_q.lengthscales;
  if (drift) {
    ls_f.conservativeResize(7);
    ls_q.conservativeResize(7);
    ls_f[6] = cfg.drift_lengthscale;
    ls_q[6] = cfg.drift_lengthscale;
  }
  GpModel gf(KernelSpec(ls_f, cfg.gp_f.sigma_v), cfg.gp_f.sigma_n,
             cfg.gp_f.mu_0_is_limit ? cfg.c : cfg.gp_f.mu_0, cfg.gp_f.beta);
  GpModel gq(KernelSpec(ls_q, cfg.gp_q.sigma_v), cfg.gp_q.sigma_n,
             cfg.gp_q.mu_0_is_limit ? cfg.c : cfg.gp_q.mu_0, cfg.gp_q.beta);

  GooseConfig gc;
  gc.opt_lower = cfg.lower;
  gc.opt_upper = cfg.upper;
  gc.c = cfg.c;
  gc.xi = cfg.xi;
  gc.data_limit = arm.data_limit;
  gc.termination_count = cfg.termination_count;
  gc.variant = arm.variant;
  gc.epsilon = cfg.epsilon;
  gc.n_particles = cfg.n_particles;
  gc.pso_iterations = cfg.pso_iterations;
  gc.inertia = cfg.inertia;
  gc.cognitive = cfg.cognitive;
  gc.social = cfg.social;
  gc.initial_speed_fraction = cfg.initial_speed_fraction;
  gc.override_validation = cfg.override_validation;
  if (cfg.task_change_threshold.size() == 2) {
    gc.task_change_threshold = cfg.task_change_threshold;
    if (drift) {
      gc.task_change_threshold.conservativeResize(3);
      gc.task_change_threshold[2] =
          cfg.drift_change_threshold > 0.0 ? cfg.drift_change_threshold : 0.5 * cfg.drift_lengthscale;
    }
  }

  GooseOptimizer opt(gc, gf, gq, SafeSeed(cfg.safe_seed));
  const double drift0 = drift_at(cfg.schedule, 0, cfg.iterations);
  for (std::size_t i = 0; i < cfg.initial_samples.size(); ++i) {
    const Vector& row = cfg.initial_samples[i];
    const Vector x = row.head(4);
    const Vector t2 = row.tail(2);
    const Measurement m = machine.measure_with(kInitialStream + i, x, t2, drift0);
    Vector task = t2;
    if (drift) {
      task.conservativeResize(3);
      task[2] = drift0;
    }
    opt.add_initial_sample(x, task, m.y_f, m.y_q);
  }
  return opt;
}

const ArmResult& RunArtifact::arm(const std::string& name) const {
  for (const auto& a : arms) {
    if (a.spec.name == name) {
      return a;
    }
  }
  throw ContractViolation("artifact has no arm named '" + name + "'");
}

RunArtifact run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const PlantMachine machine(cfg, cfg.seed);
  RunArtifact out;
  out.scenario = cfg.scenario;
  out.seed = cfg.seed;
  out.iterations = cfg.iterations;

  const Machine fn = [&machine](std::size_t k, const Vector& x, const Vector& task) {
    return machine.measure(k, x, task);
  };
  const Vector& seed0 = cfg.safe_seed.front();

  for (const auto& arm : cfg.arms) {
    ArmResult ar;
    ar.spec = arm;
    const std::vector<Vector> schedule = make_schedule(cfg, arm);

    if (arm.method == Method::Goose) {
      GooseOptimizer opt = make_optimizer(cfg, arm, machine);
      ParallelConfig pc = cfg.parallel;
      pc.scheme = arm.scheme;
      pc.base_seed = iteration_seed(cfg.seed, kPsoSalt);
      const SchedulePredictor exact(schedule);
      const ConstantHoldPredictor hold;
      const TaskPredictor& predictor =
          arm.predictor == PredictorKind::Schedule ? static_cast<const TaskPredictor&>(exact) : hold;
      ar.run = run_parallel(opt, schedule, fn, pc, predictor);

      // Final optimum at the last scheduled task of every payload.
      std::vector<Vector> finals;
      for (auto it = schedule.rbegin(); it != schedule.rend(); ++it) {
        const bool seen = std::any_of(finals.begin(), finals.end(),
                                      [&](const Vector& f) { return f[1] == (*it)[1]; });
        if (!seen) {
          finals.push_back(*it);
        }
      }
      std::sort(finals.begin(), finals.end(),
                [](const Vector& a, const Vector& b) { return a[1] < b[1]; });
      for (std::size_t i = 0; i < finals.size(); ++i) {
        const Proposal p = opt.final_optimum(finals[i], iteration_seed(pc.base_seed, kFinalStream + i));
        const Measurement m = machine.measure_with(kFinalStream + i, p.x_opt, plant_task(finals[i]),
                                                   drift_at(cfg.schedule, cfg.iterations - 1,
                                                            cfg.iterations));
        StepRecord r = plain_record(cfg.iterations + i, 0.0, finals[i], p.x_opt, m, cfg.c);
        r.seed_fallback = p.used_seed && p.is_seed_point;
        r.predicted_mean = p.cost_mean;
        r.predicted_lcb = p.cost_lcb;
        r.predicted_ucb = p.cost_ucb;
        r.gp_size = opt.gp_f().size();
        ar.final_optima.push_back(std::move(r));
      }
    } else {
      std::optional<OptimumTable> table;
      if (arm.method == Method::Lpv) {
        std::uint64_t counter = 0;
        const GridEvaluator eval = [&](const Vector& x, const Vector& task) {
          const Measurement m = machine.measure_with(kGridStream + counter++, x, task,
                                                     cfg.schedule.drift_start);
          return RunMetrics{m.y_f, m.y_q, m.unstable};
        };
        ar.grid = record_grid(cfg.lpv.gain_grid, cfg.lpv.task_grid, eval);
        table = select_per_task_optima(*ar.grid, cfg.c);
      }
      for (std::size_t k = 0; k < schedule.size(); ++k) {
        const Vector& task = schedule[k];
        Vector x = seed0;
        bool fallback = true;
        if (table) {
          x = lpv_interpolate(*table, plant_task(task), seed0, cfg.lower, cfg.upper);
          fallback = x == seed0;
        }
        const Measurement m = fn(k, x, task);
        StepRecord r =
            plain_record(k, static_cast<double>(k) * cfg.parallel.cycle_time, task, x, m, cfg.c);
        r.seed_fallback = fallback;
        ar.run.seed_fallbacks += fallback ? 1 : 0;
        ar.run.steps.push_back(std::move(r));
      }
    }
    ar.violations = static_cast<std::size_t>(
        std::count_if(ar.run.steps.begin(), ar.run.steps.end(),
                      [](const StepRecord& r) { return r.violation; }));
    out.arms.push_back(std::move(ar));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kStepHeader =
    "iteration,time,log_step,payload,drift,kp,vkp,vki,aff,y_f,y_q,limit,phase,violation,unstable,"
    "seed_fallback,accepted,added_to_gp,mispredicted,compute_time,work_units,gp_size,points_added,"
    "ignored_total,predicted_mean,predicted_lcb,predicted_ucb,optimum_mean,optimum_lcb,optimum_ucb";

// NaN marks an untracked value and is written as an empty cell.
std::string fmt_or_empty(double v) { return std::isnan(v) ? std::string() : fmt(v); }

double parse_or_nan(const std::string& cell) {
  return cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell);
}

void write_steps(const std::vector<StepRecord>& steps, const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) {
    throw std::runtime_error("cannot write " + file.string());
  }
  os << kStepHeader << '\n';
  for (const auto& r : steps) {
    const double drift = r.task.size() > 2 ? r.task[2] : std::nan("");
    os << r.iteration << ',' << fmt(r.time) << ',' << fmt(r.task[0]) << ',' << fmt(r.task[1]) << ','
       << (std::isnan(drift) ? std::string() : fmt(drift));
    for (Eigen::Index i = 0; i < r.x_opt.size(); ++i) {
      os << ',' << fmt(r.x_opt[i]);
    }
    os << ',' << fmt(r.y_f) << ',' << fmt(r.y_q) << ',' << fmt(r.limit) << ',' << to_string(r.phase)
       << ',' << r.violation << ',' << r.unstable << ',' << r.seed_fallback << ',' << r.accepted << ','
       << r.added_to_gp << ',' << r.mispredicted << ',' << fmt(r.compute_time) << ',' << r.work_units
       << ',' << r.gp_size << ',' << r.points_added << ',' << r.ignored_total << ','
       << fmt(r.predicted_mean) << ',' << fmt(r.predicted_lcb) << ',' << fmt(r.predicted_ucb) << ','
       << fmt_or_empty(r.optimum_mean) << ',' << fmt_or_empty(r.optimum_lcb) << ','
       << fmt_or_empty(r.optimum_ucb) << '\n';
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

std::vector<StepRecord> read_steps(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) {
    throw std::runtime_error("missing artifact file " + file.string());
  }
  std::string line;
  std::getline(is, line);
  if (line != kStepHeader) {
    throw std::runtime_error("unexpected header in " + file.string());
  }
  std::vector<StepRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    const auto f = split(line);
    if (f.size() != 30) {
      throw std::runtime_error("malformed row in " + file.string());
    }
    StepRecord r;
    r.iteration = std::stoull(f[0]);
    r.time = std::stod(f[1]);
    r.task = Vector(f[4].empty() ? 2 : 3);
    r.task[0] = std::stod(f[2]);
    r.task[1] = std::stod(f[3]);
    if (!f[4].empty()) {
      r.task[2] = std::stod(f[4]);
    }
    r.x_opt = Vector(4);
    for (int i = 0; i < 4; ++i) {
      r.x_opt[i] = std::stod(f[5 + i]);
    }
    r.y_f = std::stod(f[9]);
    r.y_q = std::stod(f[10]);
    r.limit = std::stod(f[11]);
    r.phase = f[12] == "passive" ? Phase::Passive : Phase::Active;
    r.violation = f[13] == "1";
    r.unstable = f[14] == "1";
    r.seed_fallback = f[15] == "1";
    r.accepted = f[16] == "1";
    r.added_to_gp = f[17] == "1";
    r.mispredicted = f[18] == "1";
    r.compute_time = std::stod(f[19]);
    r.work_units = std::stoull(f[20]);
    r.gp_size = std::stoull(f[21]);
    r.points_added = std::stoull(f[22]);
    r.ignored_total = std::stoull(f[23]);
    r.predicted_mean = std::stod(f[24]);
    r.predicted_lcb = std::stod(f[25]);
    r.predicted_ucb = std::stod(f[26]);
    r.optimum_mean = parse_or_nan(f[27]);
    r.optimum_lcb = parse_or_nan(f[28]);
    r.optimum_ucb = parse_or_nan(f[29]);
    out.push_back(std::move(r));
  }
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

Scheme scheme_from(const std::string& s) {
  if (s == "para") {
    return Scheme::Para;
  }
  if (s == "lookup") {
    return Scheme::Lookup;
  }
  return Scheme::Serial;
}

Method method_from(const std::string& s) {
  if (s == "lpv") {
    return Method::Lpv;
  }
  if (s == "static") {
    return Method::Static;
  }
  return Method::Goose;
}

}  // namespace

void save_artifact(const RunArtifact& artifact, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json summary;
  summary["scenario"] = artifact.scenario;
  summary["seed"] = artifact.seed;
  summary["iterations"] = artifact.iterations;
  json arms = json::array();
  for (const auto& a : artifact.arms) {
    json j;
    j["name"] = a.spec.name;
    j["method"] = to_string(a.spec.method);
    j["variant"] = to_string(a.spec.variant);
    j["scheme"] = to_string(a.spec.scheme);
    j["data_limit"] = a.spec.data_limit;
    j["drift_in_task"] = a.spec.drift_in_task;
    j["records"] = a.run.steps.size();
    j["violations"] = a.violations;
    j["seed_fallbacks"] = a.run.seed_fallbacks;
    j["ignored"] = a.run.ignored;
    j["points_added"] = a.run.points_added;
    j["jobs_run"] = a.run.jobs_run;
    j["mispredictions"] = a.run.mispredictions;
    j["termination_time"] = optional_number(a.run.termination_time);
    j["initial_refresh_done"] = optional_number(a.run.initial_refresh_done);
    arms.push_back(j);
    write_steps(a.run.steps, dir / (a.spec.name + ".steps.csv"));
    if (!a.final_optima.empty()) {
      write_steps(a.final_optima, dir / (a.spec.name + ".optima.csv"));
    }
    if (a.grid) {
      std::ofstream os(dir / (a.spec.name + ".grid.csv"));
      write_grid_csv(*a.grid, os);
    }
  }
  summary["arms"] = arms;
  std::ofstream os(dir / "summary.json");
  if (!os) {
    throw std::runtime_error("cannot write " + (dir / "summary.json").string());
  }
  os << summary.dump(2) << '\n';
}

RunArtifact load_artifact(const std::filesystem::path& dir) {
  std::ifstream is(dir / "summary.json");
  if (!is) {
    throw std::runtime_error("no artifact at " + dir.string() + " (summary.json missing)");
  }
  json summary;
  try {
    is >> summary;
  } catch (const json::exception& e) {
    throw std::runtime_error("summary.json: " + std::string(e.what()));
  }
  RunArtifact out;
  out.scenario = summary.at("scenario").get<std::string>();
  out.seed = summary.at("seed").get<std::uint64_t>();
  out.iterations = summary.at("iterations").get<std::size_t>();
  for (const auto& j : summary.at("arms")) {
    ArmResult a;
    a.spec.name = j.at("name").get<std::string>();
    a.spec.method = method_from(j.at("method").get<std::string>());
    a.spec.variant = j.at("variant").get<std::string>() == "baseline" ? Variant::Baseline
                                                                       : Variant::Modified;
    a.spec.scheme = scheme_from(j.at("scheme").get<std::string>());
    a.spec.data_limit = j.at("data_limit").get<std::size_t>();
    a.spec.drift_in_task = j.at("drift_in_task").get<bool>();
    a.violations = j.at("violations").get<std::size_t>();
    a.run.seed_fallbacks = j.at("seed_fallbacks").get<std::size_t>();
    a.run.ignored = j.at("ignored").get<std::size_t>();
    a.run.points_added = j.at("points_added").get<std::size_t>();
    a.run.jobs_run = j.at("jobs_run").get<std::size_t>();
    a.run.mispredictions = j.at("mispredictions").get<std::size_t>();
    if (!j.at("termination_time").is_null()) {
      a.run.termination_time = j.at("termination_time").get<double>();
    }
    if (!j.at("initial_refresh_done").is_null()) {
      a.run.initial_refresh_done = j.at("initial_refresh_done").get<double>();
    }
    a.run.steps = read_steps(dir / (a.spec.name + ".steps.csv"));
    if (std::filesystem::exists(dir / (a.spec.name + ".optima.csv"))) {
      a.final_optima = read_steps(dir / (a.spec.name + ".optima.csv"));
    }
    out.arms.push_back(std::move(a));
  }
  return out;
}

}  // namespace goose
